//! GHZ family, Fredkin-based preparation and the Mermin inequality.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::Bench;
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HybridState, LogicalAmplitudes, LogicalLabel};
use crate::measurement::Axes;

/// `|psi_{mu lambda omega}> = sum_j (-1)^{mu j} |j, j^lambda, j^omega> / sqrt 2`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GhzLabel {
    pub mu: u8,
    pub lambda: u8,
    pub omega: u8,
}

impl GhzLabel {
    pub const GHZ1: GhzLabel = GhzLabel {
        mu: 0,
        lambda: 0,
        omega: 1,
    };
    pub const GHZ2: GhzLabel = GhzLabel {
        mu: 0,
        lambda: 1,
        omega: 0,
    };

    pub fn new(mu: u8, lambda: u8, omega: u8) -> Self {
        GhzLabel {
            mu: mu & 1,
            lambda: lambda & 1,
            omega: omega & 1,
        }
    }

    pub fn all() -> impl Iterator<Item = GhzLabel> {
        (0..8u8).map(|i| GhzLabel::new(i >> 2, i >> 1, i))
    }

    pub fn amplitudes(&self) -> LogicalAmplitudes {
        let mut amps = [Complex64::new(0.0, 0.0); 8];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..2u8 {
            let label = LogicalLabel::new(j, j ^ self.lambda, j ^ self.omega);
            let sign = if self.mu * j == 1 { -1.0 } else { 1.0 };
            amps[label.index()] += Complex64::new(sign * h, 0.0);
        }
        LogicalAmplitudes(amps)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.amplitudes()).expect("normalized GHZ state")
    }
}

impl fmt::Display for GhzLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GhzLabel::GHZ1 => f.write_str("GHZ1"),
            GhzLabel::GHZ2 => f.write_str("GHZ2"),
            _ => write!(f, "psi{}{}{}", self.mu, self.lambda, self.omega),
        }
    }
}

/// Accepts `GHZ1`, `GHZ2`, or three bits `mu lambda omega` such as `100` or `1,0,0`.
impl FromStr for GhzLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GHZ1" => return Ok(GhzLabel::GHZ1),
            "GHZ2" => return Ok(GhzLabel::GHZ2),
            _ => {}
        }
        let bits: Vec<u8> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidParameter(format!("bad GHZ label {s:?}"))),
            })
            .collect::<Result<_>>()?;
        match bits.as_slice() {
            &[mu, lambda, omega] => Ok(GhzLabel::new(mu, lambda, omega)),
            _ => Err(Error::InvalidParameter(format!("bad GHZ label {s:?}"))),
        }
    }
}

pub fn ghz_state(label: GhzLabel) -> HybridState {
    HybridState::embed_logical(Default::default(), &label.amplitudes())
}

/// Runs `bench` on `(|0> + |1>)/sqrt 2 (x) |target_bits>`.
pub fn prepare_ghz(bench: &Bench, target_bits: (u8, u8)) -> Result<HybridState> {
    let ws = bench.workspace()?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = [Complex64::new(0.0, 0.0); 8];
    amps[LogicalLabel::new(0, target_bits.0, target_bits.1).index()] = h;
    amps[LogicalLabel::new(1, target_bits.0, target_bits.1).index()] = h;
    let input = HybridState::embed_logical(ws, &LogicalAmplitudes(amps));
    Ok(bench.propagate(&input)?.state)
}

/// Prepares `label` with one pass through `bench`: control in `(|0> + (-1)^mu |1>)/sqrt 2`,
/// targets in `|lambda omega>`. A controlled swap reaches the label only when
/// `lambda != omega`.
pub fn prepare_ghz_label(bench: &Bench, label: GhzLabel) -> Result<HybridState> {
    if label.lambda == label.omega {
        return Err(Error::InvalidParameter(format!(
            "{label} is not reachable by a controlled swap from a product input"
        )));
    }
    let ws = bench.workspace()?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if label.mu == 1 { -h } else { h };
    let mut amps = [Complex64::new(0.0, 0.0); 8];
    amps[LogicalLabel::new(0, label.lambda, label.omega).index()] = Complex64::new(h, 0.0);
    amps[LogicalLabel::new(1, label.lambda, label.omega).index()] = Complex64::new(sign, 0.0);
    let input = HybridState::embed_logical(ws, &LogicalAmplitudes(amps));
    Ok(bench.propagate(&input)?.state)
}

/// `tr(rho sigma_a (x) sigma_b (x) sigma_c)`
pub fn correlation(rho: &DensityMatrix, axes: Axes) -> f64 {
    rho.expectation(&axes.observable())
}

/// Mermin terms in order `XXX, XYY, YXY, YYX`; the last enters with a minus sign.
pub const MERMIN_TERMS: [&str; 4] = ["XXX", "XYY", "YXY", "YYX"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MerminValue {
    pub s_m: f64,
    pub terms: [f64; 4],
}

impl MerminValue {
    pub fn from_terms(terms: [f64; 4]) -> Self {
        MerminValue {
            s_m: (terms[0] + terms[1] + terms[2] - terms[3]).abs(),
            terms,
        }
    }

    pub fn violates_classical_bound(&self) -> bool {
        self.s_m > CLASSICAL_BOUND
    }
}

pub const CLASSICAL_BOUND: f64 = 2.0;
pub const QUANTUM_MAXIMUM: f64 = 4.0;

pub fn mermin_value(rho: &DensityMatrix) -> MerminValue {
    MerminValue::from_terms(MERMIN_TERMS.map(|t| correlation(rho, t.parse().expect("valid setting"))))
}

/// Depolarizing weight that brings an ideal `S_M = 4` down to `s_m`.
pub fn depolarizing_for_mermin(s_m: f64) -> f64 {
    1.0 - s_m / QUANTUM_MAXIMUM
}
