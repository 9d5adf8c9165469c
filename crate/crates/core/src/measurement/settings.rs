use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, DensityMatrix, LogicalAmplitudes, ModeOperator, Workspace};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            PauliAxis::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliAxis::Y => [[ZERO, -I], [I, ZERO]],
            PauliAxis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// Eigenvector for outcome bit `0` (eigenvalue +1) or `1` (eigenvalue -1).
    pub fn eigenvector(self, outcome: u8) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        match self {
            PauliAxis::X => [Complex64::new(h, 0.0), Complex64::new(sign * h, 0.0)],
            PauliAxis::Y => [Complex64::new(h, 0.0), Complex64::new(0.0, sign * h)],
            PauliAxis::Z => {
                if outcome == 0 {
                    [ONE, ZERO]
                } else {
                    [ZERO, ONE]
                }
            }
        }
    }

    pub fn letter(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// Pauli axes for (control, target 2, target 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Axes(pub [PauliAxis; 3]);

impl Axes {
    pub const ZZZ: Axes = Axes([PauliAxis::Z; 3]);

    /// The 27 settings `XXX, XXY, ..., ZZZ`.
    pub fn all() -> Vec<Axes> {
        let mut out = Vec::with_capacity(27);
        for a in PauliAxis::ALL {
            for b in PauliAxis::ALL {
                for c in PauliAxis::ALL {
                    out.push(Axes([a, b, c]));
                }
            }
        }
        out
    }

    /// `sigma_a (x) sigma_b (x) sigma_c` on the logical space.
    pub fn observable(&self) -> DMatrix<Complex64> {
        let [a, b, c] = self.0.map(|p| p.matrix());
        DMatrix::from_fn(8, 8, |r, col| {
            a[r >> 2][col >> 2] * b[(r >> 1) & 1][(col >> 1) & 1] * c[r & 1][col & 1]
        })
    }
}

impl fmt::Display for Axes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for Axes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes: Vec<PauliAxis> = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(PauliAxis::X),
                'Y' => Ok(PauliAxis::Y),
                'Z' => Ok(PauliAxis::Z),
                _ => Err(Error::InvalidParameter(format!("bad Pauli setting {s:?}"))),
            })
            .collect::<Result<_>>()?;
        match axes.as_slice() {
            &[a, b, c] => Ok(Axes([a, b, c])),
            _ => Err(Error::InvalidParameter(format!("setting {s:?} must name three axes"))),
        }
    }
}

/// A product-basis measurement: eight rank-one projectors `|v_k><v_k|`.
///
/// Outcome `k` has bits `(b_c, b_2, b_3)` with `k = 4 b_c + 2 b_2 + b_3`; bit 0 is the +1
/// eigenvalue of that qubit's axis.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetting {
    axes: Axes,
    vectors: [LogicalAmplitudes; 8],
}

impl MeasurementSetting {
    pub fn axes(&self) -> Axes {
        self.axes
    }

    pub fn vectors(&self) -> &[LogicalAmplitudes; 8] {
        &self.vectors
    }

    pub fn projector(&self, outcome: usize) -> DMatrix<Complex64> {
        let v = self.vectors[outcome].to_vector();
        &v * v.adjoint()
    }

    /// Projector lifted onto the hybrid workspace; target eigenstates become OAM
    /// superpositions through the logical coding.
    pub fn workspace_projector(&self, outcome: usize, workspace: Workspace) -> Result<ModeOperator> {
        ModeOperator::new(Basis::Logical, self.projector(outcome))?.embed_logical(workspace)
    }

    /// `(-1)^(b_c + b_2 + b_3)`: eigenvalue of the three-qubit Pauli product for outcome `k`.
    pub fn parity(outcome: usize) -> f64 {
        if outcome.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

pub fn setting_projectors(axes: Axes) -> MeasurementSetting {
    let vectors = std::array::from_fn(|k| {
        let [a, b, c] = [
            axes.0[0].eigenvector(((k >> 2) & 1) as u8),
            axes.0[1].eigenvector(((k >> 1) & 1) as u8),
            axes.0[2].eigenvector((k & 1) as u8),
        ];
        LogicalAmplitudes(std::array::from_fn(|i| a[i >> 2] * b[(i >> 1) & 1] * c[i & 1]))
    });
    MeasurementSetting { axes, vectors }
}

/// Born-rule probabilities `p_k = tr(Pi_k rho)`, clipped to `[0, 1]`.
pub fn outcome_probabilities(rho: &DensityMatrix, setting: &MeasurementSetting) -> [f64; 8] {
    std::array::from_fn(|k| {
        let v = setting.vectors[k].to_vector();
        let p = (v.adjoint() * rho.matrix() * &v)[(0, 0)].re;
        p.clamp(0.0, 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::LogicalLabel;

    fn is_identity(m: &DMatrix<Complex64>, tol: f64) -> bool {
        (m - DMatrix::<Complex64>::identity(8, 8))
            .iter()
            .all(|v| v.norm() <= tol)
    }

    #[test]
    fn twenty_seven_settings() {
        let all = Axes::all();
        assert_eq!(all.len(), 27);
        assert_eq!(all[0].to_string(), "XXX");
        assert_eq!(all[1].to_string(), "XXY");
        assert_eq!(all[26].to_string(), "ZZZ");
        assert_eq!("xyz".parse::<Axes>().unwrap().to_string(), "XYZ");
        assert!("XY".parse::<Axes>().is_err());
        assert!("XYW".parse::<Axes>().is_err());
    }

    #[test]
    fn every_setting_is_complete_and_orthonormal() {
        for axes in Axes::all() {
            let s = setting_projectors(axes);
            let sum = (0..8).fold(DMatrix::zeros(8, 8), |acc, k| acc + s.projector(k));
            assert!(is_identity(&sum, 1e-10), "{axes}");
            for i in 0..8 {
                for j in 0..8 {
                    let ip = s.vectors[i].to_vector().dotc(&s.vectors[j].to_vector());
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - Complex64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zzz_is_computational() {
        let s = setting_projectors(Axes::ZZZ);
        for k in 0..8 {
            assert_eq!(s.vectors[k], LogicalAmplitudes::basis(LogicalLabel::from_index(k)));
        }
    }

    #[test]
    fn xxx_projectors_are_plus_minus_triples() {
        let s = setting_projectors("XXX".parse().unwrap());
        let h3 = 8f64.sqrt().recip();
        for k in 0..8 {
            for (i, amp) in s.vectors[k].0.iter().enumerate() {
                let sign = if (i & k).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                assert!((amp - Complex64::new(sign * h3, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn observable_matches_projector_parities() {
        for axes in Axes::all() {
            let s = setting_projectors(axes);
            let spectral = (0..8).fold(DMatrix::zeros(8, 8), |acc, k| {
                acc + s.projector(k) * Complex64::new(MeasurementSetting::parity(k), 0.0)
            });
            assert!(
                (spectral - axes.observable()).iter().all(|v| v.norm() < 1e-12),
                "{axes}"
            );
        }
    }

    #[test]
    fn workspace_projector_acts_on_oam_superpositions() {
        let ws = Workspace::default();
        let s = setting_projectors("ZXZ".parse().unwrap());
        let p = s.workspace_projector(0, ws).unwrap();
        // Outcome 000: control V, target2 in (|0>+|1>)/sqrt2, target3 |0>: OAM modes -1 and 0.
        let idx = ws.logical_indices();
        let m = p.matrix();
        assert!((m[(idx[0], idx[0])].re - 0.5).abs() < 1e-12);
        assert!((m[(idx[2], idx[0])].re - 0.5).abs() < 1e-12);
        assert!((m * m - m).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn maximally_mixed_gives_uniform() {
        let rho = DensityMatrix::maximally_mixed();
        for axes in Axes::all() {
            let p = outcome_probabilities(&rho, &setting_projectors(axes));
            assert!(p.iter().all(|x| (x - 0.125).abs() < 1e-12));
        }
    }
}
