//! Projective Pauli measurements, shot-noise sampling, truth tables and the bench noise model.

mod noise;
mod settings;
mod truth_table;

pub use noise::{apply_noise, NoiseModel};
pub use settings::{outcome_probabilities, setting_projectors, Axes, MeasurementSetting, PauliAxis};
pub use truth_table::{
    conversion_rate, conversion_rate_estimate, conversion_rate_from_probabilities, fredkin_outcomes, gate_outputs,
    logical_labels, pooled_conversion_rate, superposition_table, truth_table, CountsTable, Evaluation,
    ProbabilityTable, TruthTable, DEFAULT_SHOTS,
};

use crate::error::Result;
use crate::sampling::{multinomial, stream_rng, Purpose};

/// One seeded multinomial row of `shots` draws over the eight outcomes.
pub fn sample_counts(probs: &[f64; 8], shots: u64, seed: u64) -> Result<[u64; 8]> {
    if shots == 0 {
        return Err(crate::Error::InvalidParameter("shots must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, Purpose::TruthTableRow, 0);
    let counts = multinomial(probs, shots, &mut rng)?;
    Ok(std::array::from_fn(|k| counts[k]))
}
