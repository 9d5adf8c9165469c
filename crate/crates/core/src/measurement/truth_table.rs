use num_complex::Complex64;
use serde::Serialize;

use super::noise::{apply_noise, NoiseModel};
use super::settings::{outcome_probabilities, setting_projectors, Axes};
use crate::circuit::{circuit_operator, Bench};
use crate::error::{Error, Result};
use crate::hilbert::{ideal_fredkin, HybridState, LogicalAmplitudes, LogicalLabel};
use crate::sampling::{multinomial, poisson_resample, stream_rng, Estimate, Execution, Purpose};

/// Default shots per input or setting.
pub const DEFAULT_SHOTS: u64 = 10_000;

/// Integer event counts, one row per input (or setting), one column per outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountsTable {
    pub row_labels: Vec<String>,
    pub outcome_labels: Vec<String>,
    pub rows: Vec<Vec<u64>>,
}

impl CountsTable {
    pub fn new(row_labels: Vec<String>, outcome_labels: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.len() != row_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: row_labels.len(),
                found: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != outcome_labels.len()) {
            return Err(Error::DimensionMismatch {
                expected: outcome_labels.len(),
                found: bad.len(),
            });
        }
        Ok(CountsTable {
            row_labels,
            outcome_labels,
            rows,
        })
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.rows[row].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().flatten().sum()
    }

    pub fn row_frequencies(&self, row: usize) -> Vec<f64> {
        let total = self.row_total(row) as f64;
        self.rows[row].iter().map(|&n| n as f64 / total).collect()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        CountsTable {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|n| n * factor).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// Row-normalized frequencies as a probability table.
    pub fn frequencies(&self) -> ProbabilityTable {
        ProbabilityTable {
            row_labels: self.row_labels.clone(),
            col_labels: self.outcome_labels.clone(),
            values: (0..self.rows.len()).map(|r| self.row_frequencies(r)).collect(),
        }
    }
}

/// Labeled matrix of probabilities (rows: inputs, columns: outcomes).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// Exact Born-rule probabilities.
    Analytic,
    /// Multinomial counts with this many shots per row.
    Sampled { shots: u64 },
}

/// Gate truth table over the eight computational inputs.
#[derive(Clone, Debug)]
pub struct TruthTable {
    pub probabilities: ProbabilityTable,
    pub counts: Option<CountsTable>,
    /// Outcome the ideal Fredkin gate produces for each input.
    pub expected: [usize; 8],
}

pub fn logical_labels() -> Vec<String> {
    LogicalLabel::all().map(|l| l.to_string()).collect()
}

fn target_labels() -> Vec<String> {
    (0..4).map(|t| format!("|{}{}>", t >> 1, t & 1)).collect()
}

/// Outcome index of the ideal Fredkin gate for each computational input.
pub fn fredkin_outcomes() -> [usize; 8] {
    let u = ideal_fredkin();
    std::array::from_fn(|c| {
        (0..8)
            .max_by(|&a, &b| u.matrix()[(a, c)].norm().total_cmp(&u.matrix()[(b, c)].norm()))
            .expect("eight rows")
    })
}

/// Bench outputs for each computational input, in label order.
pub fn gate_outputs(bench: &Bench) -> Result<Vec<HybridState>> {
    let composed = circuit_operator(bench)?;
    let ws = bench.workspace()?;
    LogicalLabel::all()
        .map(|label| composed.operator.apply(&HybridState::encode_logical(ws, label)))
        .collect()
}

fn measure_row(
    state: &HybridState,
    noise: &NoiseModel,
    evaluation: Evaluation,
    purpose: Purpose,
    row: usize,
) -> Result<(Vec<f64>, Option<Vec<u64>>)> {
    let rho = apply_noise(state, noise)?;
    let probs = outcome_probabilities(&rho, &setting_projectors(Axes::ZZZ));
    check_normalized(&probs)?;
    match evaluation {
        Evaluation::Analytic => Ok((probs.to_vec(), None)),
        Evaluation::Sampled { shots } => {
            if shots == 0 {
                return Err(Error::InvalidParameter("shots must be at least 1".into()));
            }
            let mut rng = stream_rng(noise.rng_seed, purpose, row as u64);
            let counts = multinomial(&probs, shots, &mut rng)?;
            let freqs = counts.iter().map(|&n| n as f64 / shots as f64).collect();
            Ok((freqs, Some(counts)))
        }
    }
}

fn check_normalized(probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("outcome probabilities sum to {sum}")));
    }
    Ok(())
}

/// Measures each computational input after the bench in the `ZZZ` basis.
pub fn truth_table(bench: &Bench, noise: &NoiseModel, evaluation: Evaluation, exec: Execution) -> Result<TruthTable> {
    noise.validate()?;
    let outputs = gate_outputs(bench)?;
    let rows = exec.try_map(8, |k| {
        measure_row(&outputs[k], noise, evaluation, Purpose::TruthTableRow, k)
    })?;
    let labels = logical_labels();
    let counts = match evaluation {
        Evaluation::Analytic => None,
        Evaluation::Sampled { .. } => Some(CountsTable::new(
            labels.clone(),
            labels.clone(),
            rows.iter().map(|(_, c)| c.clone().expect("sampled row")).collect(),
        )?),
    };
    Ok(TruthTable {
        probabilities: ProbabilityTable {
            row_labels: labels.clone(),
            col_labels: labels,
            values: rows.into_iter().map(|(p, _)| p).collect(),
        },
        counts,
        expected: fredkin_outcomes(),
    })
}

impl TruthTable {
    /// Target-to-target block for inputs and outcomes with the given control value.
    pub fn control_block(&self, control: u8) -> ProbabilityTable {
        let base = if control == 0 { 0 } else { 4 };
        ProbabilityTable {
            row_labels: self.probabilities.row_labels[base..base + 4].to_vec(),
            col_labels: self.probabilities.col_labels[base..base + 4].to_vec(),
            values: (0..4)
                .map(|r| self.probabilities.values[base + r][base..base + 4].to_vec())
                .collect(),
        }
    }

    /// Mean probability of the ideal outcome over inputs.
    pub fn conversion_rate(&self) -> Result<f64> {
        conversion_rate_from_probabilities(&self.probabilities, &self.expected)
    }
}

/// Control in `(|0> + |1>)/sqrt 2`, targets in each computational state; the table lists
/// the target outcome distribution with the control ignored.
pub fn superposition_table(
    bench: &Bench,
    noise: &NoiseModel,
    evaluation: Evaluation,
    exec: Execution,
) -> Result<ProbabilityTable> {
    noise.validate()?;
    let composed = circuit_operator(bench)?;
    let ws = bench.workspace()?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rows = exec.try_map(4, |t| {
        let mut amps = [Complex64::new(0.0, 0.0); 8];
        amps[t] = h;
        amps[4 + t] = h;
        let input = HybridState::embed_logical(ws, &LogicalAmplitudes(amps));
        let output = composed.operator.apply(&input)?;
        let (full, _) = measure_row(&output, noise, evaluation, Purpose::SuperpositionRow, t)?;
        Ok((0..4).map(|o| full[o] + full[4 + o]).collect::<Vec<f64>>())
    })?;
    Ok(ProbabilityTable {
        row_labels: target_labels()
            .iter()
            .map(|t| format!("|+{}>", &t[1..t.len() - 1]))
            .collect(),
        col_labels: target_labels(),
        values: rows,
    })
}

fn check_correct(rows: usize, correct: &[usize], cols: usize) -> Result<()> {
    if rows == 0 {
        return Err(Error::EmptyTable);
    }
    if correct.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: correct.len(),
        });
    }
    if correct.iter().any(|&c| c >= cols) {
        return Err(Error::InvalidParameter("correct outcome index out of range".into()));
    }
    Ok(())
}

/// Mean over rows of the row-normalized count on the correct outcome.
pub fn conversion_rate(table: &CountsTable, correct: &[usize]) -> Result<f64> {
    check_correct(table.rows.len(), correct, table.outcome_labels.len())?;
    if table.total() == 0 {
        return Err(Error::EmptyTable);
    }
    let mut acc = 0.0;
    for (r, &c) in correct.iter().enumerate() {
        let total = table.row_total(r);
        if total == 0 {
            return Err(Error::InvalidParameter(format!(
                "row {} has no counts",
                table.row_labels[r]
            )));
        }
        acc += table.rows[r][c] as f64 / total as f64;
    }
    Ok(acc / correct.len() as f64)
}

/// Correct-outcome counts over all counts in the table.
pub fn pooled_conversion_rate(table: &CountsTable, correct: &[usize]) -> Result<f64> {
    check_correct(table.rows.len(), correct, table.outcome_labels.len())?;
    let total = table.total();
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let hits: u64 = correct.iter().enumerate().map(|(r, &c)| table.rows[r][c]).sum();
    Ok(hits as f64 / total as f64)
}

pub fn conversion_rate_from_probabilities(table: &ProbabilityTable, correct: &[usize]) -> Result<f64> {
    check_correct(table.values.len(), correct, table.col_labels.len())?;
    Ok(correct
        .iter()
        .enumerate()
        .map(|(r, &c)| table.values[r][c])
        .sum::<f64>()
        / correct.len() as f64)
}

/// Conversion rate with a Monte-Carlo error bar from Poisson-resampled counts.
pub fn conversion_rate_estimate(
    table: &CountsTable,
    correct: &[usize],
    n_resamples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Estimate> {
    let value = conversion_rate(table, correct)?;
    if n_resamples < 2 {
        return Err(Error::InvalidParameter("n_resamples must be at least 2".into()));
    }
    let samples = exec.try_map(n_resamples, |i| {
        let mut rng = stream_rng(seed, Purpose::ConversionResample, i as u64);
        let rows = table
            .rows
            .iter()
            .map(|r| r.iter().map(|&n| poisson_resample(n, &mut rng)).collect())
            .collect();
        let resampled = CountsTable { rows, ..table.clone() };
        conversion_rate(&resampled, correct)
    })?;
    let spread = Estimate::from_samples(&samples)?;
    Ok(Estimate {
        mean: value,
        std: spread.std,
    })
}
