//! Reproducible experiment runs: truth tables, GHZ tomography and the Mermin test.
//!
//! Every run reads an [`ExperimentConfig`], writes its files into `config.out`, and
//! returns the paths it wrote. Invariant violations surface as errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{build_fredkin, circuit_operator, Bench};
use crate::error::{Error, Result};
use crate::ghz::{mermin_value, prepare_ghz_label, GhzLabel, MerminValue, MERMIN_TERMS};
use crate::hilbert::{operator_to_json, DensityMatrix};
use crate::measurement::{
    apply_noise, conversion_rate_estimate, logical_labels, pooled_conversion_rate, superposition_table, truth_table,
    Axes, Evaluation, NoiseModel, ProbabilityTable, DEFAULT_SHOTS,
};
use crate::output::{format_sig, write_csv, write_json};
use crate::sampling::{Estimate, Execution};
use crate::tomography::{
    exact_frequencies, fidelity, generate_dataset, mle_from_frequencies, mle_reconstruct, resampled_statistics,
    MleOptions, MleReport, TomographyDataset,
};

pub const SEED_ENV: &str = "HFSIM_SEED";
pub const REFERENCE_BENCH: &str = "reference";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to a bench JSON file, or `"reference"` for the built-in Fredkin bench.
    pub bench: String,
    pub noise_sigma: f64,
    pub noise_p: f64,
    /// Shots per truth-table row or per tomography setting.
    pub shots: u64,
    pub seed: u64,
    pub out: PathBuf,
    /// Exact probabilities instead of sampled counts.
    pub analytic: bool,
    /// Poisson resamples behind every reported uncertainty.
    pub resamples: usize,
    /// GHZ label for tomography and Mermin runs.
    pub label: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            bench: REFERENCE_BENCH.to_string(),
            noise_sigma: 0.0,
            noise_p: 0.0,
            shots: DEFAULT_SHOTS,
            seed: 0,
            out: PathBuf::from("out"),
            analytic: false,
            resamples: 50,
            label: "GHZ1".to_string(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
    }

    /// Replaces the seed with the value of `HFSIM_SEED`, if given.
    pub fn apply_seed_env(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            arm_dephasing_sigma: self.noise_sigma,
            depolarizing_p: self.noise_p,
            rng_seed: self.seed,
        }
    }

    pub fn load_bench(&self) -> Result<Bench> {
        if self.bench == REFERENCE_BENCH {
            Ok(build_fredkin())
        } else {
            Bench::load(&self.bench)
        }
    }

    pub fn ghz_label(&self) -> Result<GhzLabel> {
        self.label.parse()
    }

    fn evaluation(&self) -> Evaluation {
        if self.analytic {
            Evaluation::Analytic
        } else {
            Evaluation::Sampled { shots: self.shots }
        }
    }

    fn mode(&self) -> &'static str {
        if self.analytic {
            "analytic"
        } else {
            "sampled"
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise().validate()?;
        if !self.analytic {
            if self.shots == 0 {
                return Err(Error::InvalidParameter("shots must be positive".into()));
            }
            if self.resamples < 2 {
                return Err(Error::InvalidParameter("resamples must be at least 2".into()));
            }
        }
        Ok(())
    }

    fn prepare_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)?;
        Ok(())
    }
}

/// The bench must act unitarily on the computational subspace.
fn checked_bench(config: &ExperimentConfig) -> Result<Bench> {
    let bench = config.load_bench()?;
    let restriction = circuit_operator(&bench)?.logical()?;
    if restriction.max_leakage() > 1e-9 {
        return Err(Error::Leakage {
            weight: restriction.max_leakage(),
        });
    }
    if !restriction.operator.is_unitary(1e-9) {
        return Err(Error::InvalidState(
            "bench is not unitary on the computational subspace".into(),
        ));
    }
    Ok(bench)
}

#[derive(Serialize)]
struct NoiseRecord {
    sigma: f64,
    p: f64,
}

#[derive(Serialize)]
struct ConversionRecord {
    mode: &'static str,
    #[serde(rename = "P")]
    p: f64,
    uncertainty: f64,
    #[serde(rename = "pooled_P")]
    pooled_p: f64,
    shots: Option<u64>,
    resamples: Option<usize>,
    seed: u64,
    noise: NoiseRecord,
}

fn row_normalized(table: ProbabilityTable) -> ProbabilityTable {
    let values = table
        .values
        .iter()
        .map(|row| {
            let sum: f64 = row.iter().sum();
            row.iter().map(|v| if sum > 0.0 { v / sum } else { 0.0 }).collect()
        })
        .collect();
    ProbabilityTable { values, ..table }
}

/// Writes the full table, the control-`|0>` and control-`|1>` blocks (renormalized per
/// row), the control-superposition table and the conversion rate.
pub fn run_truth_table(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let bench = checked_bench(config)?;
    let noise = config.noise();
    let exec = Execution::default();
    let table = truth_table(&bench, &noise, config.evaluation(), exec)?;
    let superposition = superposition_table(&bench, &noise, config.evaluation(), exec)?;

    let (estimate, pooled) = match &table.counts {
        None => {
            let p = table.conversion_rate()?;
            (Estimate::exact(p), p)
        }
        Some(counts) => (
            conversion_rate_estimate(counts, &table.expected, config.resamples, config.seed, exec)?,
            pooled_conversion_rate(counts, &table.expected)?,
        ),
    };
    let record = ConversionRecord {
        mode: config.mode(),
        p: estimate.mean,
        uncertainty: estimate.std,
        pooled_p: pooled,
        shots: (!config.analytic).then_some(config.shots),
        resamples: (!config.analytic).then_some(config.resamples),
        seed: config.seed,
        noise: NoiseRecord {
            sigma: config.noise_sigma,
            p: config.noise_p,
        },
    };

    config.prepare_out()?;
    let mut written = Vec::new();
    let mut emit_csv = |name: &str, t: &ProbabilityTable| -> Result<()> {
        let path = config.out.join(name);
        write_csv(&path, t, "input")?;
        written.push(path);
        Ok(())
    };
    emit_csv("truth_table.csv", &table.probabilities)?;
    emit_csv("truth_table_control0.csv", &row_normalized(table.control_block(0)))?;
    emit_csv("truth_table_control1.csv", &row_normalized(table.control_block(1)))?;
    emit_csv("truth_table_superposition.csv", &superposition)?;
    let path = config.out.join("conversion_rate.json");
    write_json(&path, &record)?;
    written.push(path);
    Ok(written)
}

/// Density matrix that leaves the bench for the configured label and noise.
pub fn source_state(config: &ExperimentConfig) -> Result<DensityMatrix> {
    let bench = checked_bench(config)?;
    let label = config.ghz_label()?;
    apply_noise(&prepare_ghz_label(&bench, label)?, &config.noise())
}

fn check_monotone(report: &MleReport) -> Result<()> {
    for w in report.log_likelihood.windows(2) {
        if w[1] < w[0] - 1e-12 * w[0].abs().max(1.0) {
            return Err(Error::InvalidState(format!(
                "log-likelihood decreased from {} to {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Hitting the iteration cap is not fatal: the last iterate is kept and the diagnostic
/// goes into the output record. A likelihood decrease is.
fn reconstruct(report: MleReport) -> Result<DensityMatrix> {
    check_monotone(&report)?;
    Ok(report.rho)
}

#[derive(Serialize)]
struct MatrixRecord {
    basis: Vec<String>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct FidelityRecord {
    label: String,
    mode: &'static str,
    fidelity: f64,
    std: f64,
    shots: Option<u64>,
    resamples: Option<usize>,
    seed: u64,
    mle_iterations: usize,
    mle_converged: bool,
    mle_last_step: f64,
    noise: NoiseRecord,
}

#[derive(Serialize)]
struct ProbabilityRecord {
    mode: &'static str,
    /// Outcome probabilities per setting, outcomes in `|000>..|111>` order.
    probabilities: std::collections::BTreeMap<String, [f64; 8]>,
}

/// Tomography of the bench's GHZ output: dataset, reconstructed matrix, fidelity.
pub fn run_ghz_tomography(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let label = config.ghz_label()?;
    let target = label.density_matrix();
    let rho_true = source_state(config)?;
    let exec = Execution::default();

    let (dataset_json, report, estimate) = if config.analytic {
        let freqs = exact_frequencies(&rho_true);
        let probabilities = Axes::all()
            .into_iter()
            .zip(&freqs)
            .map(|(a, f)| (a.to_string(), f.map(|v| v * freqs.len() as f64)))
            .collect();
        let report = mle_from_frequencies(&freqs, MleOptions::default())?;
        let f = fidelity(&report.rho, &target)?;
        let json = serde_json::to_string_pretty(&ProbabilityRecord {
            mode: "analytic",
            probabilities,
        })?;
        (json, report, Estimate::exact(f))
    } else {
        let data = generate_dataset(&rho_true, config.shots, config.seed, exec)?;
        let report = mle_reconstruct(&data)?;
        let f = fidelity(&report.rho, &target)?;
        let samples = resampled_statistics(
            &data,
            |d: &TomographyDataset| fidelity(&reconstruct(mle_reconstruct(d)?)?, &target),
            config.resamples,
            config.seed,
            exec,
        )?;
        let spread = Estimate::from_samples(&samples)?;
        (
            data.to_json()?,
            report,
            Estimate {
                mean: f,
                std: spread.std,
            },
        )
    };
    let (iterations, converged, last_step) = (report.iterations, report.converged, report.last_step);
    let rho = reconstruct(report)?;
    let (re, im) = rho.real_imag();

    config.prepare_out()?;
    let mut written = Vec::new();
    let path = config.out.join("dataset.json");
    std::fs::write(&path, dataset_json + "\n")?;
    written.push(path);
    for (name, values) in [("rho_real.json", re), ("rho_imag.json", im)] {
        let path = config.out.join(name);
        write_json(
            &path,
            &MatrixRecord {
                basis: logical_labels(),
                values,
            },
        )?;
        written.push(path);
    }
    let path = config.out.join("fidelity.json");
    write_json(
        &path,
        &FidelityRecord {
            label: label.to_string(),
            mode: config.mode(),
            fidelity: estimate.mean,
            std: estimate.std,
            shots: (!config.analytic).then_some(config.shots),
            resamples: (!config.analytic).then_some(config.resamples),
            seed: config.seed,
            mle_iterations: iterations,
            mle_converged: converged,
            mle_last_step: last_step,
            noise: NoiseRecord {
                sigma: config.noise_sigma,
                p: config.noise_p,
            },
        },
    )?;
    written.push(path);
    Ok(written)
}

/// Mermin correlations with one standard deviation each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MerminEstimate {
    pub value: MerminValue,
    pub terms_std: [f64; 4],
    pub s_m_std: f64,
}

/// Exact correlations in analytic mode, otherwise from the reconstructed state with
/// spreads over Poisson resamples of the tomography counts.
pub fn mermin_estimate(config: &ExperimentConfig) -> Result<MerminEstimate> {
    config.validate()?;
    let rho_true = source_state(config)?;
    if config.analytic {
        return Ok(MerminEstimate {
            value: mermin_value(&rho_true),
            terms_std: [0.0; 4],
            s_m_std: 0.0,
        });
    }
    let exec = Execution::default();
    let data = generate_dataset(&rho_true, config.shots, config.seed, exec)?;
    let value = mermin_value(&reconstruct(mle_reconstruct(&data)?)?);
    let samples = resampled_statistics(
        &data,
        |d: &TomographyDataset| Ok(mermin_value(&reconstruct(mle_reconstruct(d)?)?)),
        config.resamples,
        config.seed,
        exec,
    )?;
    let spread = |f: &dyn Fn(&MerminValue) -> f64| -> Result<f64> {
        Ok(Estimate::from_samples(&samples.iter().map(f).collect::<Vec<_>>())?.std)
    };
    let mut terms_std = [0.0; 4];
    for (k, s) in terms_std.iter_mut().enumerate() {
        *s = spread(&|m| m.terms[k])?;
    }
    Ok(MerminEstimate {
        value,
        terms_std,
        s_m_std: spread(&|m| m.s_m)?,
    })
}

pub fn mermin_csv(estimate: &MerminEstimate) -> String {
    let mut out = String::from("statistic");
    for t in MERMIN_TERMS {
        out.push(',');
        out.push_str(t);
    }
    out.push_str(",S_M\n");
    let rows = [
        ("value", estimate.value.terms, estimate.value.s_m),
        ("std", estimate.terms_std, estimate.s_m_std),
    ];
    for (name, terms, s) in rows {
        out.push_str(name);
        for v in terms.iter().chain(std::iter::once(&s)) {
            out.push(',');
            out.push_str(&format_sig(*v));
        }
        out.push('\n');
    }
    out
}

pub fn run_mermin(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let estimate = mermin_estimate(config)?;
    config.prepare_out()?;
    let path = config.out.join("mermin.csv");
    std::fs::write(&path, mermin_csv(&estimate))?;
    Ok(vec![path])
}

/// Writes the configured bench and its composed operator.
pub fn run_export(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let bench = config.load_bench()?;
    let composed = circuit_operator(&bench)?;
    config.prepare_out()?;
    let bench_path = config.out.join("bench.json");
    bench.save(&bench_path)?;
    let op_path = config.out.join("operator.json");
    std::fs::write(&op_path, operator_to_json(&composed.operator)? + "\n")?;
    Ok(vec![bench_path, op_path])
}
