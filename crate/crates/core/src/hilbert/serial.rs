//! JSON documents for states and operators.
//!
//! Complex numbers are written as `[re, im]` pairs. Every document carries the workspace
//! half-width and the basis-ordering version so matrices compare bit-for-bit across runs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{Workspace, BASIS_ORDERING, BASIS_ORDERING_VERSION};
use super::operator::{Basis, ModeOperator};
use super::state::HybridState;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisHeader {
    /// `"workspace"` or `"logical"`.
    pub space: String,
    pub half_width: Option<u32>,
    pub ordering_version: u32,
    pub ordering: String,
}

impl BasisHeader {
    fn for_basis(basis: Basis) -> Self {
        let (space, half_width) = match basis {
            Basis::Workspace(ws) => ("workspace", Some(ws.half_width())),
            Basis::Logical => ("logical", None),
        };
        BasisHeader {
            space: space.to_string(),
            half_width,
            ordering_version: BASIS_ORDERING_VERSION,
            ordering: if half_width.is_some() {
                BASIS_ORDERING.to_string()
            } else {
                "label index c*4 + t2*2 + t3".to_string()
            },
        }
    }

    fn basis(&self) -> Result<Basis> {
        if self.ordering_version != BASIS_ORDERING_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported basis ordering version {}",
                self.ordering_version
            )));
        }
        match (self.space.as_str(), self.half_width) {
            ("workspace", Some(l)) => Ok(Basis::Workspace(Workspace::new(l)?)),
            ("logical", _) => Ok(Basis::Logical),
            (space, _) => Err(Error::InvalidParameter(format!("unknown basis header {space:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateDocument {
    pub header: BasisHeader,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorDocument {
    pub header: BasisHeader,
    pub domain: Vec<usize>,
    /// Row-major.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl From<&HybridState> for StateDocument {
    fn from(state: &HybridState) -> Self {
        StateDocument {
            header: BasisHeader::for_basis(Basis::Workspace(state.workspace())),
            amplitudes: state.amplitudes().iter().map(pair).collect(),
        }
    }
}

impl TryFrom<&StateDocument> for HybridState {
    type Error = Error;

    fn try_from(doc: &StateDocument) -> Result<Self> {
        match doc.header.basis()? {
            Basis::Workspace(ws) => HybridState::from_amplitudes(
                ws,
                DVector::from_iterator(doc.amplitudes.len(), doc.amplitudes.iter().map(complex)),
            ),
            Basis::Logical => Err(Error::InvalidParameter(
                "states are serialized over the workspace".into(),
            )),
        }
    }
}

impl From<&ModeOperator> for OperatorDocument {
    fn from(op: &ModeOperator) -> Self {
        let m = op.matrix();
        OperatorDocument {
            header: BasisHeader::for_basis(op.basis()),
            domain: op.domain().to_vec(),
            matrix: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| pair(&m[(r, c)])).collect())
                .collect(),
        }
    }
}

impl TryFrom<&OperatorDocument> for ModeOperator {
    type Error = Error;

    fn try_from(doc: &OperatorDocument) -> Result<Self> {
        let basis = doc.header.basis()?;
        let dim = basis.dim();
        if doc.matrix.len() != dim || doc.matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: doc.matrix.len(),
            });
        }
        let matrix = DMatrix::from_fn(dim, dim, |r, c| complex(&doc.matrix[r][c]));
        ModeOperator::with_domain(basis, matrix, doc.domain.clone())
    }
}

pub fn state_to_json(state: &HybridState) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateDocument::from(state))?)
}

pub fn state_from_json(json: &str) -> Result<HybridState> {
    let doc: StateDocument = serde_json::from_str(json)?;
    HybridState::try_from(&doc)
}

pub fn operator_to_json(op: &ModeOperator) -> Result<String> {
    Ok(serde_json::to_string_pretty(&OperatorDocument::from(op))?)
}

pub fn operator_from_json(json: &str) -> Result<ModeOperator> {
    let doc: OperatorDocument = serde_json::from_str(json)?;
    ModeOperator::try_from(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::operator::ideal_fredkin;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn state_json_round_trip(amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 14)) {
            let ws = Workspace::default();
            let v = DVector::from_iterator(14, amps.iter().map(|&(re, im)| Complex64::new(re, im)));
            let state = HybridState::from_amplitudes(ws, v).unwrap();
            let back = state_from_json(&state_to_json(&state).unwrap()).unwrap();
            prop_assert_eq!(back, state);
        }
    }

    #[test]
    fn operator_json_round_trip() {
        let u = ideal_fredkin();
        let json = operator_to_json(&u).unwrap();
        assert!(json.contains("\"ordering_version\": 1"));
        assert_eq!(operator_from_json(&json).unwrap(), u);
    }

    #[test]
    fn rejects_unknown_version() {
        let mut doc = OperatorDocument::from(&ideal_fredkin());
        doc.header.ordering_version = 99;
        assert!(ModeOperator::try_from(&doc).is_err());
    }
}
