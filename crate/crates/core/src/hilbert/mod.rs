//! Hybrid polarization/OAM mode space, states, operators and density matrices.
//!
//! Coding: the control qubit is polarization (V = `|0>`, H = `|1>`); the two target qubits
//! share one OAM qudit with `ell = -1, -2, 0, +1` carrying `|00>, |01>, |10>, |11>`.

mod basis;
mod density;
mod operator;
pub mod serial;
mod state;

pub use basis::{
    BasisMode, LogicalLabel, OamMode, Polarization, Workspace, BASIS_ORDERING, BASIS_ORDERING_VERSION,
    DEFAULT_HALF_WIDTH, LOGICAL_OAM,
};
pub use density::{DensityMatrix, EIGEN_FLOOR, LOGICAL_DIM};
pub use operator::{ideal_fredkin, Basis, LogicalRestriction, ModeOperator, PhaseComparison};
pub use serial::{operator_from_json, operator_to_json, state_from_json, state_to_json};
pub use state::{HybridState, LogicalAmplitudes, LEAKAGE_TOL, POPULATED_EPS};

/// Encodes a computational label in the default workspace.
pub fn encode_logical(label: LogicalLabel) -> HybridState {
    HybridState::encode_logical(Workspace::default(), label)
}

pub fn decode_logical(state: &HybridState) -> crate::Result<LogicalAmplitudes> {
    state.decode_logical()
}
