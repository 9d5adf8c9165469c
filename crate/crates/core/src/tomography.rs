//! Maximum-likelihood state tomography over the 27 Pauli product settings.
//!
//! The reconstruction is the R rho R fixed-point iteration
//!
//! ```text
//! R(rho) = sum_j (f_j / p_j) Pi_j,     rho <- R rho R / tr(R rho R)
//! ```
//!
//! over all 216 projectors, with `f_j` the pooled empirical frequency and
//! `p_j = tr(Pi_j rho)` floored at `1e-12`. A plain step that would lower the
//! log-likelihood is replaced by a diluted step `(I + eps R) rho (I + eps R)`, halving
//! `eps` until the likelihood does not drop.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, EIGEN_FLOOR};
use crate::measurement::{outcome_probabilities, setting_projectors, Axes, CountsTable};
use crate::sampling::{multinomial, poisson_resample, stream_rng, Estimate, Execution, Purpose};

pub const SETTINGS: usize = 27;
pub const PROJECTORS: usize = 216;

/// Counts for every Pauli setting, rows in `Axes::all()` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TomographyDataset {
    counts: CountsTable,
}

impl TomographyDataset {
    pub fn from_counts(counts: CountsTable) -> Result<Self> {
        let expected: Vec<String> = Axes::all().iter().map(|a| a.to_string()).collect();
        if counts.row_labels != expected {
            return Err(Error::InvalidParameter(
                "tomography rows must be the 27 settings XXX..ZZZ in order".into(),
            ));
        }
        if counts.outcome_labels.len() != 8 {
            return Err(Error::DimensionMismatch {
                expected: 8,
                found: counts.outcome_labels.len(),
            });
        }
        Ok(TomographyDataset { counts })
    }

    pub fn from_map(map: &BTreeMap<String, [u64; 8]>) -> Result<Self> {
        let mut rows = Vec::with_capacity(SETTINGS);
        for axes in Axes::all() {
            let key = axes.to_string();
            let row = map
                .get(&key)
                .ok_or_else(|| Error::InvalidParameter(format!("dataset is missing setting {key}")))?;
            rows.push(row.to_vec());
        }
        if map.len() != SETTINGS {
            return Err(Error::InvalidParameter(format!(
                "dataset has {} settings, expected {SETTINGS}",
                map.len()
            )));
        }
        Self::from_counts(CountsTable::new(
            Axes::all().iter().map(|a| a.to_string()).collect(),
            outcome_labels(),
            rows,
        )?)
    }

    pub fn to_map(&self) -> BTreeMap<String, [u64; 8]> {
        self.counts
            .row_labels
            .iter()
            .zip(&self.counts.rows)
            .map(|(k, r)| (k.clone(), std::array::from_fn(|i| r[i])))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_map())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let map: BTreeMap<String, [u64; 8]> = serde_json::from_str(json)?;
        Self::from_map(&map)
    }

    pub fn counts(&self) -> &CountsTable {
        &self.counts
    }

    pub fn projector_count(&self) -> usize {
        self.counts.rows.len() * self.counts.outcome_labels.len()
    }

    /// Pooled frequencies `N_j / sum N`, per setting.
    pub fn frequencies(&self) -> Result<Vec<[f64; 8]>> {
        for (r, label) in self.counts.row_labels.iter().enumerate() {
            if self.counts.row_total(r) == 0 {
                return Err(Error::InvalidParameter(format!("setting {label} has no counts")));
            }
        }
        let total = self.counts.total() as f64;
        Ok(self
            .counts
            .rows
            .iter()
            .map(|r| std::array::from_fn(|k| r[k] as f64 / total))
            .collect())
    }

    /// Every count replaced by a Poisson draw with that mean.
    pub fn poisson_resample(&self, seed: u64, index: u64) -> Self {
        let mut rng = stream_rng(seed, Purpose::TomographyResample, index);
        let rows = self
            .counts
            .rows
            .iter()
            .map(|r| r.iter().map(|&n| poisson_resample(n, &mut rng)).collect())
            .collect();
        TomographyDataset {
            counts: CountsTable {
                rows,
                ..self.counts.clone()
            },
        }
    }
}

fn outcome_labels() -> Vec<String> {
    (0..8).map(|k| format!("{k:03b}")).collect()
}

/// Multinomial counts for each setting; setting `i` draws from its own stream.
pub fn generate_dataset(rho: &DensityMatrix, shots: u64, seed: u64, exec: Execution) -> Result<TomographyDataset> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let settings = Axes::all();
    let rows = exec.try_map(settings.len(), |i| {
        let probs = outcome_probabilities(rho, &setting_projectors(settings[i]));
        let mut rng = stream_rng(seed, Purpose::TomographySetting, i as u64);
        multinomial(&probs, shots, &mut rng)
    })?;
    TomographyDataset::from_counts(CountsTable::new(
        settings.iter().map(|a| a.to_string()).collect(),
        outcome_labels(),
        rows,
    )?)
}

/// Born-rule probabilities for every setting, normalized like [`TomographyDataset::frequencies`].
pub fn exact_frequencies(rho: &DensityMatrix) -> Vec<[f64; 8]> {
    Axes::all()
        .into_iter()
        .map(|axes| outcome_probabilities(rho, &setting_projectors(axes)).map(|p| p / SETTINGS as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the trace distance between successive iterates falls below this.
    pub tolerance: f64,
    pub probability_floor: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iterations: 10_000,
            tolerance: 1e-10,
            probability_floor: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleReport {
    pub rho: DensityMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Trace distance of the final step.
    pub last_step: f64,
    /// `sum_j f_j ln p_j` before the first step and after every accepted step.
    pub log_likelihood: Vec<f64>,
    /// Steps that needed the diluted update.
    pub diluted_steps: usize,
}

impl MleReport {
    /// `NonConvergence` unless the stopping rule was met.
    pub fn into_result(self) -> Result<DensityMatrix> {
        if self.converged {
            Ok(self.rho)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                last_step: self.last_step,
            })
        }
    }
}

type Matrix8 = SMatrix<Complex64, 8, 8>;
type Vector8 = SVector<Complex64, 8>;

struct Observation {
    vector: Vector8,
    projector: Matrix8,
    weight: f64,
}

fn observations(frequencies: &[[f64; 8]]) -> Result<Vec<Observation>> {
    if frequencies.len() != SETTINGS {
        return Err(Error::DimensionMismatch {
            expected: SETTINGS,
            found: frequencies.len(),
        });
    }
    let total: f64 = frequencies.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyTable);
    }
    let mut out = Vec::with_capacity(PROJECTORS);
    for (axes, row) in Axes::all().into_iter().zip(frequencies) {
        let setting = setting_projectors(axes);
        for (k, &f) in row.iter().enumerate() {
            if f < 0.0 {
                return Err(Error::InvalidParameter("negative frequency".into()));
            }
            let vector = Vector8::from_column_slice(&setting.vectors()[k].0);
            out.push(Observation {
                projector: vector * vector.adjoint(),
                vector,
                weight: f / total,
            });
        }
    }
    Ok(out)
}

fn probabilities(rho: &Matrix8, obs: &[Observation], floor: f64) -> Vec<f64> {
    obs.iter()
        .map(|o| o.vector.dotc(&(rho * o.vector)).re.max(floor))
        .collect()
}

fn log_likelihood(obs: &[Observation], probs: &[f64]) -> f64 {
    obs.iter()
        .zip(probs)
        .filter(|(o, _)| o.weight > 0.0)
        .map(|(o, p)| o.weight * p.ln())
        .sum()
}

fn r_operator(obs: &[Observation], probs: &[f64]) -> Matrix8 {
    let mut r = Matrix8::zeros();
    for (o, p) in obs.iter().zip(probs) {
        if o.weight > 0.0 {
            r += o.projector * Complex64::new(o.weight / p, 0.0);
        }
    }
    r
}

fn sandwich(left: &Matrix8, rho: &Matrix8) -> Matrix8 {
    let m = left * rho * left.adjoint();
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = m.trace();
    m / tr
}

fn step_distance(a: &Matrix8, b: &Matrix8) -> f64 {
    let d = a - b;
    let d = (d + d.adjoint()) * Complex64::new(0.5, 0.0);
    0.5 * SymmetricEigen::new(d).eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
}

pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let d = a - b;
    let d = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
    0.5 * SymmetricEigen::new(d).eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
}

/// Runs the iteration on per-setting frequencies (27 rows of 8).
///
/// Hitting the iteration cap is reported through `converged`, with the last iterate kept.
pub fn mle_from_frequencies(frequencies: &[[f64; 8]], options: MleOptions) -> Result<MleReport> {
    let obs = observations(frequencies)?;
    let floor = options.probability_floor;
    let identity = Matrix8::identity();
    let mut rho = Matrix8::identity() / Complex64::new(8.0, 0.0);
    let mut probs = probabilities(&rho, &obs, floor);
    let mut ll = log_likelihood(&obs, &probs);
    let mut history = vec![ll];
    let mut diluted_steps = 0;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        let r = r_operator(&obs, &probs);
        let mut next = sandwich(&r, &rho);
        let mut next_probs = probabilities(&next, &obs, floor);
        let mut next_ll = log_likelihood(&obs, &next_probs);
        if next_ll < ll {
            diluted_steps += 1;
            let mut eps = 1.0;
            loop {
                let step = identity + r * Complex64::new(eps, 0.0);
                next = sandwich(&step, &rho);
                next_probs = probabilities(&next, &obs, floor);
                next_ll = log_likelihood(&obs, &next_probs);
                if next_ll >= ll || eps < 1e-12 {
                    break;
                }
                eps *= 0.5;
            }
            if next_ll < ll {
                // No ascent direction left at working precision.
                last_step = 0.0;
                converged = true;
                break;
            }
        }
        last_step = step_distance(&next, &rho);
        rho = next;
        probs = next_probs;
        ll = next_ll;
        history.push(ll);
        if last_step < options.tolerance {
            converged = true;
            break;
        }
    }

    Ok(MleReport {
        rho: DensityMatrix::new(DMatrix::from_iterator(8, 8, rho.iter().copied()))?,
        iterations,
        converged,
        last_step,
        log_likelihood: history,
        diluted_steps,
    })
}

/// Maximum-likelihood density matrix for a dataset.
pub fn mle_reconstruct(data: &TomographyDataset) -> Result<MleReport> {
    mle_from_frequencies(&data.frequencies()?, MleOptions::default())
}

fn prepared(rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
    let eig = SymmetricEigen::new(rho.hermitian_part());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < EIGEN_FLOOR {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    let clipped = eig.eigenvalues.map(|e| e.max(0.0));
    let tr: f64 = clipped.iter().sum();
    if !(tr > 0.0) {
        return Err(Error::InvalidState("zero trace".into()));
    }
    Ok(psd_function(&eig.eigenvectors, &clipped, |e| e / tr))
}

fn psd_function(vectors: &DMatrix<Complex64>, values: &DVector<f64>, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
    let diag = DMatrix::from_diagonal(&values.map(|e| Complex64::new(f(e), 0.0)));
    vectors * diag * vectors.adjoint()
}

/// Uhlmann fidelity `(tr sqrt(sqrt(a) b sqrt(a)))^2`.
///
/// Eigenvalues down to `-1e-9` are clipped to zero and the trace renormalized; anything
/// more negative is `InvalidState`.
pub fn fidelity(rho_o: &DensityMatrix, rho_e: &DensityMatrix) -> Result<f64> {
    let a = prepared(rho_o)?;
    let b = prepared(rho_e)?;
    let eig_a = SymmetricEigen::new(a);
    let sqrt_a = psd_function(&eig_a.eigenvectors, &eig_a.eigenvalues, |e| e.max(0.0).sqrt());
    let inner = &sqrt_a * b * &sqrt_a;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let root_trace: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|e| e.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Mean and standard deviation of `statistic` over Poisson resamples of every count.
pub fn monte_carlo_errors<F>(
    data: &TomographyDataset,
    statistic: F,
    n_resamples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Estimate>
where
    F: Fn(&TomographyDataset) -> Result<f64> + Sync + Send,
{
    Estimate::from_samples(&resampled_statistics(data, statistic, n_resamples, seed, exec)?)
}

/// `statistic` evaluated on each Poisson resample, in resample order.
pub fn resampled_statistics<T, F>(
    data: &TomographyDataset,
    statistic: F,
    n_resamples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&TomographyDataset) -> Result<T> + Sync + Send,
{
    if n_resamples < 2 {
        return Err(Error::InvalidParameter("n_resamples must be at least 2".into()));
    }
    exec.try_map(n_resamples, |i| statistic(&data.poisson_resample(seed, i as u64)))
}

/// Fidelity of the reconstruction with `target`, as a resampling statistic.
pub fn fidelity_statistic(target: DensityMatrix) -> impl Fn(&TomographyDataset) -> Result<f64> + Sync + Send {
    move |data| fidelity(&mle_reconstruct(data)?.rho, &target)
}
