use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HybridState};

/// Bench imperfections applied to the gate output.
///
/// * `arm_dephasing_sigma`: standard deviation (radians) of a random phase between the
///   two PBS arms, drawn per photon. Averaged analytically, it scales coherences between
///   the control-`|0>` and control-`|1>` blocks by `exp(-sigma^2 / 2)`.
/// * `depolarizing_p`: weight of the maximally mixed admixture.
/// * `rng_seed`: master seed for all sampling driven by this model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub arm_dephasing_sigma: f64,
    pub depolarizing_p: f64,
    pub rng_seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::noiseless(0)
    }
}

impl NoiseModel {
    pub fn noiseless(rng_seed: u64) -> Self {
        NoiseModel {
            arm_dephasing_sigma: 0.0,
            depolarizing_p: 0.0,
            rng_seed,
        }
    }

    pub fn depolarizing(p: f64, rng_seed: u64) -> Self {
        NoiseModel {
            depolarizing_p: p,
            ..Self::noiseless(rng_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.depolarizing_p) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing probability {} outside [0, 1]",
                self.depolarizing_p
            )));
        }
        if !(self.arm_dephasing_sigma >= 0.0) || !self.arm_dephasing_sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "arm dephasing sigma {} must be finite and non-negative",
                self.arm_dephasing_sigma
            )));
        }
        Ok(())
    }

    /// `E[exp(i delta)]` for `delta ~ N(0, sigma^2)`.
    pub fn arm_coherence(&self) -> f64 {
        (-0.5 * self.arm_dephasing_sigma * self.arm_dephasing_sigma).exp()
    }
}

/// Density matrix of a gate output after arm dephasing and depolarization.
pub fn apply_noise(state: &HybridState, noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let pure = DensityMatrix::from_pure(&state.decode_logical()?)?;
    let coherence = Complex64::new(noise.arm_coherence(), 0.0);
    let mut m = pure.into_matrix();
    // Control bit is the top bit of the logical index; H (control 1) is the upper arm.
    for r in 0..8 {
        for c in 0..8 {
            if (r >> 2) != (c >> 2) {
                m[(r, c)] *= coherence;
            }
        }
    }
    DensityMatrix::new_unchecked(m)?.depolarize(noise.depolarizing_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{LogicalAmplitudes, LogicalLabel, Workspace};
    use crate::measurement::{outcome_probabilities, setting_projectors, Axes};
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn plus_state() -> HybridState {
        let mut a = [Complex64::new(0.0, 0.0); 8];
        a[1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        a[6] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        HybridState::embed_logical(Workspace::default(), &LogicalAmplitudes(a))
    }

    #[test]
    fn noiseless_is_pure() {
        let s = plus_state();
        let rho = apply_noise(&s, &NoiseModel::noiseless(0)).unwrap();
        let expected = DensityMatrix::from_pure(&s.decode_logical().unwrap()).unwrap();
        assert_eq!(rho, expected);
    }

    #[test]
    fn full_depolarization_is_maximally_mixed() {
        for label in LogicalLabel::all() {
            let s = HybridState::encode_logical(Workspace::default(), label);
            let rho = apply_noise(&s, &NoiseModel::depolarizing(1.0, 0)).unwrap();
            assert!((rho.matrix() - DensityMatrix::maximally_mixed().matrix())
                .iter()
                .all(|v| v.norm() < 1e-15));
        }
    }

    #[test]
    fn depolarized_diagonal_probability() {
        let s = HybridState::encode_logical(Workspace::default(), "101".parse().unwrap());
        let rho = apply_noise(&s, &NoiseModel::depolarizing(0.05, 0)).unwrap();
        let p = outcome_probabilities(&rho, &setting_projectors(Axes::ZZZ));
        assert!((p[5] - 0.95625).abs() < 1e-12);
        assert!((p[0] - 0.00625).abs() < 1e-12);
    }

    #[test]
    fn dephasing_matches_phase_average() {
        // Average exp(i delta) over Gaussian draws, then compare the coherence.
        let sigma = 0.4;
        let noise = NoiseModel {
            arm_dephasing_sigma: sigma,
            depolarizing_p: 0.0,
            rng_seed: 0,
        };
        let rho = apply_noise(&plus_state(), &noise).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, sigma).unwrap();
        let n = 200_000;
        let mean: Complex64 = (0..n)
            .map(|_| Complex64::from_polar(1.0, normal.sample(&mut rng)))
            .sum::<Complex64>()
            / n as f64;
        assert!((rho.matrix()[(1, 6)].re - 0.5 * mean.re).abs() < 3e-3);
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        rho.validate().unwrap();
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = plus_state();
        assert!(apply_noise(&s, &NoiseModel::depolarizing(-0.1, 0)).is_err());
        let bad = NoiseModel {
            arm_dephasing_sigma: -1.0,
            ..NoiseModel::default()
        };
        assert!(apply_noise(&s, &bad).is_err());
    }
}
