//! Mode-space operators for the bench components.
//!
//! Wave plates act on polarization only, with Jones matrices in (H, V) order and the fast
//! axis at angle `theta` from horizontal. Dove prisms, mirrors and spiral phase plates act
//! on the OAM label only.

mod routing;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hilbert::{BasisMode, HybridState, ModeOperator, Polarization, Workspace};

pub use routing::{parity_sorter, pbs_route, Port, Routed, Splitter};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Propagation direction through a Dove prism; the OAM phase flips sign between the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Element {
    Hwp {
        theta: f64,
    },
    Qwp {
        theta: f64,
    },
    DovePrism {
        alpha: f64,
        direction: Direction,
    },
    Spp {
        charge: i32,
    },
    Mirror {},
    /// Uniform phase `e^{i delta}` on everything passing through.
    PhaseShift {
        delta: f64,
    },
    /// Passes one polarization unchanged; defined only on that polarization.
    PbsPort {
        port: Polarization,
    },
}

impl Element {
    pub fn operator(&self, workspace: Workspace) -> ModeOperator {
        match *self {
            Element::Hwp { theta } => hwp_operator(workspace, theta),
            Element::Qwp { theta } => qwp_operator(workspace, theta),
            Element::DovePrism { alpha, direction } => dove_operator(workspace, alpha, direction),
            Element::Spp { charge } => spp_operator(workspace, charge),
            Element::Mirror {} => mirror_operator(workspace),
            Element::PhaseShift { delta } => phase_shift_operator(workspace, delta),
            Element::PbsPort { port } => {
                ModeOperator::from_mode_map(workspace, move |m| (m.polarization == port).then_some((m, re(1.0))))
            }
        }
    }

    /// Propagates a state through the element.
    ///
    /// Mode-permuting elements report `WorkspaceOverflow` when a populated mode would be
    /// shifted past the workspace edge.
    pub fn apply(&self, state: &HybridState) -> Result<HybridState> {
        match *self {
            Element::Hwp { .. } | Element::Qwp { .. } | Element::PhaseShift { .. } => {
                self.operator(state.workspace()).apply(state)
            }
            Element::PbsPort { port } => Ok(state.project(|m| m.polarization == port)),
            Element::DovePrism { alpha, direction } => state.map_modes(|m| dove_map(m, alpha, direction)),
            Element::Spp { charge } => state.map_modes(|m| (m.with_ell(m.ell() + charge), re(1.0))),
            Element::Mirror {} => state.map_modes(|m| (m.with_ell(-m.ell()), re(1.0))),
        }
    }
}

fn jones_rotated(theta: f64, fast: Complex64, slow: Complex64) -> [[Complex64; 2]; 2] {
    // R(theta) diag(fast, slow) R(-theta)
    let (s, c) = theta.sin_cos();
    [
        [fast * c * c + slow * s * s, (fast - slow) * c * s],
        [(fast - slow) * c * s, fast * s * s + slow * c * c],
    ]
}

/// Half-wave plate: `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`.
pub fn hwp_operator(workspace: Workspace, theta: f64) -> ModeOperator {
    ModeOperator::polarization(workspace, jones_rotated(theta, re(1.0), re(-1.0)))
}

/// Quarter-wave plate: `diag(1, i)` at `theta = 0`, rotated with the fast axis.
pub fn qwp_operator(workspace: Workspace, theta: f64) -> ModeOperator {
    ModeOperator::polarization(workspace, jones_rotated(theta, re(1.0), I))
}

fn dove_map(mode: BasisMode, alpha: f64, direction: Direction) -> (BasisMode, Complex64) {
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let phase = Complex64::from_polar(1.0, sign * 2.0 * mode.ell() as f64 * alpha);
    (mode.with_ell(-mode.ell()), I * phase)
}

/// Dove prism at angle `alpha`: `|l> -> i exp(+-i 2 l alpha) |-l>`.
pub fn dove_operator(workspace: Workspace, alpha: f64, direction: Direction) -> ModeOperator {
    ModeOperator::from_mode_map(workspace, |m| Some(dove_map(m, alpha, direction)))
}

/// Spiral phase plate: `|l> -> |l + charge>`; modes that would leave the workspace are
/// outside the operator's domain.
pub fn spp_operator(workspace: Workspace, charge: i32) -> ModeOperator {
    ModeOperator::from_mode_map(workspace, |m| Some((m.with_ell(m.ell() + charge), re(1.0))))
}

pub fn mirror_operator(workspace: Workspace) -> ModeOperator {
    ModeOperator::from_mode_map(workspace, |m| Some((m.with_ell(-m.ell()), re(1.0))))
}

pub fn phase_shift_operator(workspace: Workspace, delta: f64) -> ModeOperator {
    let phase = Complex64::from_polar(1.0, delta);
    ModeOperator::from_mode_map(workspace, move |m| Some((m, phase)))
}

/// Angles used on the physical bench.
pub mod angles {
    use super::PI;

    pub const SORTER_HWP_FIRST: f64 = PI / 8.0;
    pub const SORTER_HWP_SECOND: f64 = 3.0 * PI / 8.0;
    pub const SORTER_DOVE: f64 = PI / 4.0;
    pub const COMPENSATION_QWP: f64 = 0.0;
    pub const COMPENSATION_HWP: f64 = PI / 2.0;
}
