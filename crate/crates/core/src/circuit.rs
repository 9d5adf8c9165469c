//! Multi-arm optical benches and their composed operators.
//!
//! A [`Bench`] is a sequence of stages. A stage is either a single [`Element`] acting on
//! the whole beam, or a [`Split`]: a router sends each port into its own arm, the arms run
//! their own stages, and the same router merges them again.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::{Element, Port, Routed, Splitter};
use crate::error::{Error, Result};
use crate::hilbert::{
    Basis, BasisMode, HybridState, LogicalRestriction, ModeOperator, Polarization, Workspace, DEFAULT_HALF_WIDTH,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Element(Element),
    Split(Split),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub splitter: Splitter,
    pub arms: Vec<Arm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub name: String,
    pub port: Port,
    #[serde(default)]
    pub stages: Vec<Stage>,
}

/// Input modes on which a bench's operator is assembled.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Workspace,
    /// The eight computational basis modes.
    Logical,
    Modes(Vec<BasisMode>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bench {
    pub name: String,
    #[serde(default = "default_half_width")]
    pub half_width: u32,
    #[serde(default)]
    pub domain: Domain,
    #[serde(default)]
    pub stages: Vec<Stage>,
}

fn default_half_width() -> u32 {
    DEFAULT_HALF_WIDTH
}

/// Output of one propagation through a bench.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub state: HybridState,
    /// Weight dropped at recombiners because an arm moved light out of its port's family.
    pub rejected: f64,
}

/// Composed bench operator.
#[derive(Clone, Debug)]
pub struct CircuitOperator {
    /// Workspace operator; its domain is the bench's input domain.
    pub operator: ModeOperator,
    /// Rejected weight per domain column, in domain order.
    pub rejected: Vec<f64>,
}

impl CircuitOperator {
    /// Logical block with per-input leakage out of the logical modes.
    pub fn logical(&self) -> Result<LogicalRestriction> {
        self.operator.restrict_to_logical()
    }

    pub fn max_rejected(&self) -> f64 {
        self.rejected.iter().copied().fold(0.0, f64::max)
    }
}

impl Bench {
    pub fn new(name: impl Into<String>) -> Self {
        Bench {
            name: name.into(),
            half_width: DEFAULT_HALF_WIDTH,
            domain: Domain::Workspace,
            stages: Vec::new(),
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_half_width(mut self, half_width: u32) -> Self {
        self.half_width = half_width;
        self
    }

    pub fn element(mut self, element: Element) -> Self {
        self.stages.push(Stage::Element(element));
        self
    }

    pub fn split(mut self, splitter: Splitter, arms: Vec<Arm>) -> Self {
        self.stages.push(Stage::Split(Split { splitter, arms }));
        self
    }

    /// Runs `self`, then `next`. The input domain is `self`'s.
    pub fn then(&self, next: &Bench) -> Result<Bench> {
        if self.half_width != next.half_width {
            return Err(Error::Composition(format!(
                "cannot chain benches on workspaces L={} and L={}",
                self.half_width, next.half_width
            )));
        }
        let mut out = self.clone();
        out.name = format!("{} + {}", self.name, next.name);
        out.stages.extend(next.stages.iter().cloned());
        Ok(out)
    }

    pub fn workspace(&self) -> Result<Workspace> {
        Workspace::new(self.half_width)
    }

    /// Every split must feed each of its ports into exactly one arm.
    pub fn validate(&self) -> Result<()> {
        self.workspace()?;
        validate_stages(&self.stages, &self.name)
    }

    pub fn propagate(&self, state: &HybridState) -> Result<Propagation> {
        if state.workspace() != self.workspace()? {
            return Err(Error::DimensionMismatch {
                expected: self.workspace()?.dim(),
                found: state.workspace().dim(),
            });
        }
        self.validate()?;
        let mut rejected = 0.0;
        let state = run_stages(&self.stages, state.clone(), &mut rejected)?;
        Ok(Propagation { state, rejected })
    }

    pub fn domain_indices(&self) -> Result<Vec<usize>> {
        let ws = self.workspace()?;
        match &self.domain {
            Domain::Workspace => Ok((0..ws.dim()).collect()),
            Domain::Logical => Ok(ws.logical_indices().to_vec()),
            Domain::Modes(modes) => modes.iter().map(|m| ws.index(*m)).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Bench> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(json: &str) -> Result<Bench> {
        let bench: Bench = serde_json::from_str(json)?;
        bench.validate()?;
        Ok(bench)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

fn validate_stages(stages: &[Stage], context: &str) -> Result<()> {
    for stage in stages {
        if let Stage::Split(split) = stage {
            for port in split.splitter.ports() {
                let n = split.arms.iter().filter(|a| a.port == port).count();
                if n == 0 {
                    return Err(Error::Composition(format!(
                        "{context}: {:?} port {port} is left dangling",
                        split.splitter
                    )));
                }
                if n > 1 {
                    return Err(Error::Composition(format!(
                        "{context}: {:?} port {port} feeds {n} arms",
                        split.splitter
                    )));
                }
            }
            if let Some(arm) = split.arms.iter().find(|a| !split.splitter.ports().contains(&a.port)) {
                return Err(Error::Composition(format!(
                    "{context}: arm {:?} uses port {} which {:?} does not have",
                    arm.name, arm.port, split.splitter
                )));
            }
            for arm in &split.arms {
                validate_stages(&arm.stages, &format!("{context}/{}", arm.name))?;
            }
        }
    }
    Ok(())
}

fn run_stages(stages: &[Stage], mut state: HybridState, rejected: &mut f64) -> Result<HybridState> {
    for stage in stages {
        state = match stage {
            Stage::Element(element) => element.apply(&state)?,
            Stage::Split(split) => {
                let routed = split.splitter.route(&state);
                let mut outputs = Vec::with_capacity(2);
                for beam in routed {
                    let arm = split
                        .arms
                        .iter()
                        .find(|a| a.port == beam.port)
                        .ok_or_else(|| Error::Composition(format!("port {} is left dangling", beam.port)))?;
                    outputs.push(Routed {
                        port: beam.port,
                        state: run_stages(&arm.stages, beam.state, rejected)?,
                    });
                }
                let (merged, lost) = split.splitter.recombine(&outputs)?;
                *rejected += lost;
                merged
            }
        };
    }
    Ok(state)
}

/// Exact operator of a bench, assembled column by column over its input domain.
pub fn circuit_operator(bench: &Bench) -> Result<CircuitOperator> {
    let ws = bench.workspace()?;
    bench.validate()?;
    let domain = bench.domain_indices()?;
    let dim = ws.dim();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut rejected = Vec::with_capacity(domain.len());
    for &col in &domain {
        let input = HybridState::basis(ws, ws.mode(col))?;
        let mut lost = 0.0;
        let out = run_stages(&bench.stages, input, &mut lost)?;
        matrix.set_column(col, out.amplitudes());
        rejected.push(lost);
    }
    Ok(CircuitOperator {
        operator: ModeOperator::with_domain(Basis::Workspace(ws), matrix, domain)?,
        rejected,
    })
}

fn arm(name: &str, port: Port, stages: Vec<Stage>) -> Arm {
    Arm {
        name: name.to_string(),
        port,
        stages,
    }
}

fn mirrors(n: usize) -> Vec<Stage> {
    vec![Stage::Element(Element::Mirror {}); n]
}

/// Lower (V) arm: steering mirror plus a two-mirror delay line; three reflections in all.
fn lower_arm() -> Arm {
    arm("lower", Port::Lower, mirrors(3))
}

/// Upper (H) arm: parity sort, odd modes reflected once, even modes shifted by an SPP
/// of charge -2, parity recombine.
fn upper_arm() -> Arm {
    arm(
        "upper",
        Port::Upper,
        vec![Stage::Split(Split {
            splitter: Splitter::ParitySorter,
            arms: vec![
                arm("odd", Port::Odd, mirrors(1)),
                arm("even", Port::Even, vec![Stage::Element(Element::Spp { charge: -2 })]),
            ],
        })],
    )
}

/// OAM labels entering the arms after the input reflection (`+2, +1, 0, -1`).
fn reflected_logical_oam() -> [i32; 4] {
    [2, 1, 0, -1]
}

fn arm_bench(name: &str, polarization: Polarization, arm: Arm) -> Bench {
    Bench::new(name)
        .with_domain(Domain::Modes(
            reflected_logical_oam()
                .iter()
                .map(|&l| BasisMode::new(polarization, l))
                .collect(),
        ))
        .with_half_width(DEFAULT_HALF_WIDTH)
        .with_stages(arm.stages)
}

impl Bench {
    pub fn with_stages(mut self, stages: Vec<Stage>) -> Self {
        self.stages = stages;
        self
    }
}

/// Lower-arm map on the V block: `|l> -> |-l>`, undoing the input reflection.
pub fn lower_arm_map() -> Result<CircuitOperator> {
    circuit_operator(&arm_bench("lower arm", Polarization::V, lower_arm()))
}

/// Upper-arm map on the H block: `+2 -> 0, +1 -> -1, 0 -> -2, -1 -> +1`.
pub fn upper_arm_map() -> Result<CircuitOperator> {
    circuit_operator(&arm_bench("upper arm", Polarization::H, upper_arm()))
}

/// Reference Fredkin bench: input reflection, PBS split into the parity-sorting upper arm
/// and the mirror-only lower arm, PBS recombination.
pub fn build_fredkin() -> Bench {
    Bench::new("fredkin")
        .with_domain(Domain::Logical)
        .element(Element::Mirror {})
        .split(Splitter::Pbs, vec![upper_arm(), lower_arm()])
}
