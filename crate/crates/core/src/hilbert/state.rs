use std::ops::Index;

use nalgebra::DVector;
use num_complex::Complex64;

use super::basis::{BasisMode, LogicalLabel, Workspace};
use crate::error::{Error, Result};

/// Amplitudes below this magnitude count as unpopulated.
pub const POPULATED_EPS: f64 = 1e-12;

/// Out-of-logical-space weight tolerated by [`HybridState::decode_logical`].
pub const LEAKAGE_TOL: f64 = 1e-9;

/// Pure single-photon state over polarization and OAM.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    workspace: Workspace,
    amplitudes: DVector<Complex64>,
}

impl HybridState {
    pub fn zeros(workspace: Workspace) -> Self {
        HybridState {
            workspace,
            amplitudes: DVector::zeros(workspace.dim()),
        }
    }

    pub fn basis(workspace: Workspace, mode: BasisMode) -> Result<Self> {
        let mut state = Self::zeros(workspace);
        state.amplitudes[workspace.index(mode)?] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn from_amplitudes(workspace: Workspace, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != workspace.dim() {
            return Err(Error::DimensionMismatch {
                expected: workspace.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(HybridState { workspace, amplitudes })
    }

    /// Builds a state from `(mode, amplitude)` terms; repeated modes add.
    pub fn from_terms<I>(workspace: Workspace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisMode, Complex64)>,
    {
        let mut state = Self::zeros(workspace);
        for (mode, amp) in terms {
            state.amplitudes[workspace.index(mode)?] += amp;
        }
        Ok(state)
    }

    /// Basis state carrying a computational label, using the polarization/OAM coding.
    pub fn encode_logical(workspace: Workspace, label: LogicalLabel) -> Self {
        Self::basis(workspace, label.mode()).expect("logical modes fit every valid workspace")
    }

    pub fn embed_logical(workspace: Workspace, logical: &LogicalAmplitudes) -> Self {
        let mut state = Self::zeros(workspace);
        for (idx, amp) in workspace.logical_indices().iter().zip(logical.0.iter()) {
            state.amplitudes[*idx] = *amp;
        }
        state
    }

    pub fn workspace(&self) -> Workspace {
        self.workspace
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, mode: BasisMode) -> Complex64 {
        self.workspace
            .index(mode)
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= POPULATED_EPS {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        self.amplitudes.unscale_mut(norm);
        Ok(self)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &HybridState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        self.amplitudes *= factor;
        self
    }

    pub fn add(&self, other: &HybridState) -> Result<Self> {
        if self.workspace != other.workspace {
            return Err(Error::DimensionMismatch {
                expected: self.workspace.dim(),
                found: other.workspace.dim(),
            });
        }
        Ok(HybridState {
            workspace: self.workspace,
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    /// Populated basis modes, in basis order.
    pub fn support(&self) -> impl Iterator<Item = (BasisMode, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > POPULATED_EPS)
            .map(|(i, a)| (self.workspace.mode(i), *a))
    }

    /// Rebuilds the state by sending each populated mode through `map`.
    ///
    /// Fails with `WorkspaceOverflow` if any populated mode is mapped out of the workspace.
    pub fn map_modes<F>(&self, mut map: F) -> Result<Self>
    where
        F: FnMut(BasisMode) -> (BasisMode, Complex64),
    {
        let mut out = Self::zeros(self.workspace);
        for (mode, amp) in self.support() {
            let (target, factor) = map(mode);
            out.amplitudes[self.workspace.index(target)?] += amp * factor;
        }
        Ok(out)
    }

    /// Keeps only the modes selected by `keep`.
    pub fn project<F>(&self, keep: F) -> Self
    where
        F: Fn(BasisMode) -> bool,
    {
        let mut out = self.clone();
        for (i, amp) in out.amplitudes.iter_mut().enumerate() {
            if !keep(self.workspace.mode(i)) {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn leakage_weight(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.workspace.mode(*i).oam.is_logical())
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn decode_logical(&self) -> Result<LogicalAmplitudes> {
        let weight = self.leakage_weight();
        if weight > LEAKAGE_TOL {
            return Err(Error::Leakage { weight });
        }
        let mut out = [Complex64::new(0.0, 0.0); 8];
        for (slot, idx) in out.iter_mut().zip(self.workspace.logical_indices()) {
            *slot = self.amplitudes[idx];
        }
        Ok(LogicalAmplitudes(out))
    }

    /// `|<a|b>| = 1` for normalized states, within `tol`.
    pub fn equal_up_to_global_phase(&self, other: &HybridState, tol: f64) -> bool {
        self.workspace == other.workspace
            && self.is_normalized(tol)
            && other.is_normalized(tol)
            && (self.inner(other).norm() - 1.0).abs() <= tol
    }
}

/// Amplitudes over the eight computational labels, indexed by [`LogicalLabel::index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalAmplitudes(pub [Complex64; 8]);

impl LogicalAmplitudes {
    pub fn basis(label: LogicalLabel) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); 8];
        amps[label.index()] = Complex64::new(1.0, 0.0);
        LogicalAmplitudes(amps)
    }

    pub fn get(&self, label: LogicalLabel) -> Complex64 {
        self.0[label.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (LogicalLabel, Complex64)> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(|(i, a)| (LogicalLabel::from_index(i), *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn from_vector(v: &DVector<Complex64>) -> Result<Self> {
        if v.len() != 8 {
            return Err(Error::DimensionMismatch {
                expected: 8,
                found: v.len(),
            });
        }
        let mut out = [Complex64::new(0.0, 0.0); 8];
        out.copy_from_slice(v.as_slice());
        Ok(LogicalAmplitudes(out))
    }
}

impl Index<LogicalLabel> for LogicalAmplitudes {
    type Output = Complex64;

    fn index(&self, label: LogicalLabel) -> &Complex64 {
        &self.0[label.index()]
    }
}
