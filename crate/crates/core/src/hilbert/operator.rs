use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::{BasisMode, LogicalLabel, Workspace};
use super::state::{HybridState, LogicalAmplitudes, POPULATED_EPS};
use crate::error::{Error, Result};

/// Space an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// The full hybrid workspace.
    Workspace(Workspace),
    /// The eight computational labels, indexed by [`LogicalLabel::index`].
    Logical,
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Workspace(ws) => ws.dim(),
            Basis::Logical => 8,
        }
    }
}

/// Linear map on a mode space.
///
/// `domain` lists the basis columns on which the operator is defined. Elements such as a
/// spiral phase plate shift modes out of a truncated workspace; those columns are left out
/// of the domain (and zero in `matrix`), so the operator is an isometry on its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator {
    basis: Basis,
    matrix: DMatrix<Complex64>,
    domain: Vec<usize>,
}

/// Result of comparing two operators modulo a global phase.
#[derive(Clone, Copy, Debug)]
pub struct PhaseComparison {
    /// `|tr(A^dagger B)| / d`
    pub overlap: f64,
    /// Unit phase `e^{i phi}` with `B ~ e^{i phi} A`.
    pub phase: Complex64,
    /// `max |B_ij - e^{i phi} A_ij|`
    pub max_deviation: f64,
}

impl PhaseComparison {
    pub fn is_equivalent(&self, tol: f64) -> bool {
        (self.overlap - 1.0).abs() <= tol && self.max_deviation <= tol
    }
}

/// Logical block of a workspace operator.
#[derive(Clone, Debug)]
pub struct LogicalRestriction {
    pub operator: ModeOperator,
    /// Output weight outside the logical modes, per logical input.
    pub leakage: [f64; 8],
}

impl LogicalRestriction {
    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

impl ModeOperator {
    pub fn new(basis: Basis, matrix: DMatrix<Complex64>) -> Result<Self> {
        let domain = (0..basis.dim()).collect();
        Self::with_domain(basis, matrix, domain)
    }

    pub fn with_domain(basis: Basis, matrix: DMatrix<Complex64>, mut domain: Vec<usize>) -> Result<Self> {
        let dim = basis.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if matrix.nrows() != dim {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        domain.sort_unstable();
        domain.dedup();
        if domain.last().is_some_and(|&d| d >= dim) {
            return Err(Error::InvalidParameter("domain index out of range".into()));
        }
        Ok(ModeOperator { basis, matrix, domain })
    }

    pub fn identity(basis: Basis) -> Self {
        let dim = basis.dim();
        ModeOperator {
            basis,
            matrix: DMatrix::identity(dim, dim),
            domain: (0..dim).collect(),
        }
    }

    /// Workspace operator sending each basis mode to at most one mode with a phase.
    ///
    /// Modes mapped to `None`, or outside the workspace, are excluded from the domain.
    pub fn from_mode_map<F>(workspace: Workspace, map: F) -> Self
    where
        F: Fn(BasisMode) -> Option<(BasisMode, Complex64)>,
    {
        let dim = workspace.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut domain = Vec::with_capacity(dim);
        for (col, mode) in workspace.modes().enumerate() {
            if let Some((target, factor)) = map(mode) {
                if let Ok(row) = workspace.index(target) {
                    matrix[(row, col)] = factor;
                    domain.push(col);
                }
            }
        }
        ModeOperator {
            basis: Basis::Workspace(workspace),
            matrix,
            domain,
        }
    }

    /// Workspace operator acting as `polarization_block` on (H, V) for every OAM mode.
    pub fn polarization(workspace: Workspace, jones: [[Complex64; 2]; 2]) -> Self {
        let dim = workspace.dim();
        let per = workspace.modes_per_polarization();
        let mut matrix = DMatrix::zeros(dim, dim);
        for slot in 0..per {
            for (r, row) in jones.iter().enumerate() {
                for (c, value) in row.iter().enumerate() {
                    matrix[(r * per + slot, c * per + slot)] = *value;
                }
            }
        }
        ModeOperator {
            basis: Basis::Workspace(workspace),
            matrix,
            domain: (0..dim).collect(),
        }
    }

    /// Lifts a logical operator into the workspace; zero outside the logical modes.
    pub fn embed_logical(&self, workspace: Workspace) -> Result<Self> {
        if self.basis != Basis::Logical {
            return Err(Error::InvalidParameter(
                "embed_logical expects a logical operator".into(),
            ));
        }
        let idx = workspace.logical_indices();
        let dim = workspace.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        for r in 0..8 {
            for c in 0..8 {
                matrix[(idx[r], idx[c])] = self.matrix[(r, c)];
            }
        }
        let domain = self.domain.iter().map(|&d| idx[d]).collect();
        Self::with_domain(Basis::Workspace(workspace), matrix, domain)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn has_full_domain(&self) -> bool {
        self.domain.len() == self.dim()
    }

    /// `U^dagger U = I` on the domain columns; with a full domain also `U U^dagger = I`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let cols = self.matrix.select_columns(self.domain.iter());
        let gram = cols.adjoint() * &cols;
        if !is_identity(&gram, tol) {
            return false;
        }
        !self.has_full_domain() || is_identity(&(&self.matrix * self.matrix.adjoint()), tol)
    }

    pub fn adjoint(&self) -> Self {
        // The adjoint is defined on the image of the domain.
        let image: Vec<usize> = (0..self.dim())
            .filter(|&r| self.domain.iter().any(|&c| self.matrix[(r, c)].norm() > POPULATED_EPS))
            .collect();
        ModeOperator {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
            domain: if self.has_full_domain() {
                self.domain.clone()
            } else {
                image
            },
        }
    }

    /// Operator for "apply `self`, then `next`".
    pub fn then(&self, next: &ModeOperator) -> Result<Self> {
        if self.basis != next.basis {
            return Err(Error::InvalidParameter("composing operators on different bases".into()));
        }
        let mut in_next = vec![false; self.dim()];
        for &d in &next.domain {
            in_next[d] = true;
        }
        let domain = self
            .domain
            .iter()
            .copied()
            .filter(|&c| (0..self.dim()).all(|r| in_next[r] || self.matrix[(r, c)].norm() <= POPULATED_EPS))
            .collect::<Vec<_>>();
        let mut matrix = &next.matrix * &self.matrix;
        zero_outside(&mut matrix, &domain);
        Ok(ModeOperator {
            basis: self.basis,
            matrix,
            domain,
        })
    }

    fn check_support(&self, amplitudes: &DVector<Complex64>) -> Result<()> {
        let mut in_domain = vec![false; self.dim()];
        for &d in &self.domain {
            in_domain[d] = true;
        }
        match amplitudes
            .iter()
            .enumerate()
            .find(|(i, a)| !in_domain[*i] && a.norm() > POPULATED_EPS)
        {
            Some((i, _)) => Err(Error::InvalidState(format!(
                "populated basis index {i} lies outside the operator domain"
            ))),
            None => Ok(()),
        }
    }

    pub fn apply(&self, state: &HybridState) -> Result<HybridState> {
        match self.basis {
            Basis::Workspace(ws) if ws == state.workspace() => {}
            _ => {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: state.workspace().dim(),
                })
            }
        }
        self.check_support(state.amplitudes())?;
        HybridState::from_amplitudes(state.workspace(), &self.matrix * state.amplitudes())
    }

    pub fn apply_logical(&self, state: &LogicalAmplitudes) -> Result<LogicalAmplitudes> {
        if self.basis != Basis::Logical {
            return Err(Error::InvalidParameter(
                "apply_logical expects a logical operator".into(),
            ));
        }
        let v = state.to_vector();
        self.check_support(&v)?;
        LogicalAmplitudes::from_vector(&(&self.matrix * v))
    }

    /// Logical block of a workspace operator, with per-input leakage out of the logical modes.
    pub fn restrict_to_logical(&self) -> Result<LogicalRestriction> {
        let ws = match self.basis {
            Basis::Workspace(ws) => ws,
            Basis::Logical => {
                return Ok(LogicalRestriction {
                    operator: self.clone(),
                    leakage: [0.0; 8],
                })
            }
        };
        let idx = ws.logical_indices();
        if let Some(missing) = idx.iter().position(|i| self.domain.binary_search(i).is_err()) {
            return Err(Error::Composition(format!(
                "logical input {} is outside the operator domain",
                LogicalLabel::from_index(missing)
            )));
        }
        let mut block = DMatrix::zeros(8, 8);
        let mut leakage = [0.0; 8];
        for c in 0..8 {
            let col = self.matrix.column(idx[c]);
            let kept: f64 = (0..8)
                .map(|r| {
                    block[(r, c)] = col[idx[r]];
                    col[idx[r]].norm_sqr()
                })
                .sum();
            leakage[c] = (col.norm_squared() - kept).max(0.0);
        }
        Ok(LogicalRestriction {
            operator: ModeOperator::new(Basis::Logical, block)?,
            leakage,
        })
    }

    /// Compares `other` against `self` modulo one global phase.
    pub fn compare_up_to_phase(&self, other: &ModeOperator) -> Result<PhaseComparison> {
        if self.basis != other.basis {
            return Err(Error::InvalidParameter("comparing operators on different bases".into()));
        }
        let tr = self.matrix.adjoint() * &other.matrix;
        let tr = tr.trace();
        let overlap = tr.norm() / self.dim() as f64;
        let phase = if tr.norm() > POPULATED_EPS {
            tr / tr.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let max_deviation = self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (b - phase * a).norm())
            .fold(0.0, f64::max);
        Ok(PhaseComparison {
            overlap,
            phase,
            max_deviation,
        })
    }
}

fn is_identity(m: &DMatrix<Complex64>, tol: f64) -> bool {
    m.iter().enumerate().all(|(k, v)| {
        let (r, c) = (k % m.nrows(), k / m.nrows());
        let expect = if r == c { 1.0 } else { 0.0 };
        (v - Complex64::new(expect, 0.0)).norm() <= tol
    })
}

fn zero_outside(matrix: &mut DMatrix<Complex64>, domain: &[usize]) {
    for c in 0..matrix.ncols() {
        if domain.binary_search(&c).is_err() {
            matrix.column_mut(c).fill(Complex64::new(0.0, 0.0));
        }
    }
}

/// Controlled-SWAP on the logical space: identity for control `|0>`, target swap for `|1>`.
pub fn ideal_fredkin() -> ModeOperator {
    let mut matrix = DMatrix::zeros(8, 8);
    for label in LogicalLabel::all() {
        let out = if label.control == 1 {
            LogicalLabel::new(1, label.target3, label.target2)
        } else {
            label
        };
        matrix[(out.index(), label.index())] = Complex64::new(1.0, 0.0);
    }
    ModeOperator::new(Basis::Logical, matrix).expect("8x8 logical matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::basis::Polarization;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn label(s: &str) -> LogicalLabel {
        s.parse().unwrap()
    }

    #[test]
    fn fredkin_examples() {
        let u = ideal_fredkin();
        let out = u.apply_logical(&LogicalAmplitudes::basis(label("101"))).unwrap();
        assert_eq!(out, LogicalAmplitudes::basis(label("110")));
        let out = u.apply_logical(&LogicalAmplitudes::basis(label("001"))).unwrap();
        assert_eq!(out, LogicalAmplitudes::basis(label("001")));

        let mut input = [Complex64::new(0.0, 0.0); 8];
        input[label("001").index()] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        input[label("101").index()] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let out = u.apply_logical(&LogicalAmplitudes(input)).unwrap();
        assert_eq!(out[label("001")], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(out[label("110")], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fredkin_is_hermitian_involution() {
        let u = ideal_fredkin();
        assert!(u.is_unitary(1e-12));
        let m = u.matrix();
        assert!((m - m.adjoint()).iter().all(|v| v.norm() < 1e-12));
        let sq = m * m;
        assert!(is_identity(&sq, 1e-12));
    }

    #[test]
    fn fredkin_swaps_exactly_one_pair() {
        let m = ideal_fredkin().matrix().clone();
        let moved: Vec<usize> = (0..8).filter(|&i| m[(i, i)].norm() < 0.5).collect();
        assert_eq!(moved, vec![label("101").index(), label("110").index()]);
    }

    #[test]
    fn then_tracks_domain() {
        let ws = Workspace::default();
        let down = ModeOperator::from_mode_map(ws, |m| Some((m.with_ell(m.ell() - 2), Complex64::new(1.0, 0.0))));
        let up = ModeOperator::from_mode_map(ws, |m| Some((m.with_ell(m.ell() + 2), Complex64::new(1.0, 0.0))));
        assert!(down.is_unitary(1e-12));
        let round = down.then(&up).unwrap();
        // ell = -3, -2 overflow on the way down.
        assert_eq!(round.domain().len(), ws.dim() - 4);
        let s = HybridState::basis(ws, BasisMode::new(Polarization::H, 1)).unwrap();
        assert_eq!(round.apply(&s).unwrap(), s);
        let bad = HybridState::basis(ws, BasisMode::new(Polarization::H, -2)).unwrap();
        assert!(round.apply(&bad).is_err());
    }

    #[test]
    fn phase_comparison() {
        let u = ideal_fredkin();
        let phase = Complex64::from_polar(1.0, 1.1);
        let v = ModeOperator::new(Basis::Logical, u.matrix() * phase).unwrap();
        let cmp = u.compare_up_to_phase(&v).unwrap();
        assert!(cmp.is_equivalent(1e-12));
        assert!((cmp.phase - phase).norm() < 1e-12);
        let id = ModeOperator::identity(Basis::Logical);
        assert!(!u.compare_up_to_phase(&id).unwrap().is_equivalent(1e-6));
    }
}
