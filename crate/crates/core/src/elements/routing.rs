use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{BasisMode, HybridState, Polarization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    /// H polarization out of a PBS.
    Upper,
    /// V polarization out of a PBS.
    Lower,
    Even,
    Odd,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Port::Upper => "upper",
            Port::Lower => "lower",
            Port::Even => "even",
            Port::Odd => "odd",
        };
        f.write_str(name)
    }
}

/// Ideal two-port router; amplitudes and phases pass unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Polarizing beam splitter.
    Pbs,
    /// OAM parity sorter.
    ParitySorter,
}

/// One output port of a splitter with the amplitude it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    pub port: Port,
    pub state: HybridState,
}

impl Splitter {
    pub fn ports(&self) -> [Port; 2] {
        match self {
            Splitter::Pbs => [Port::Upper, Port::Lower],
            Splitter::ParitySorter => [Port::Even, Port::Odd],
        }
    }

    pub fn port_of(&self, mode: BasisMode) -> Port {
        match self {
            Splitter::Pbs => match mode.polarization {
                Polarization::H => Port::Upper,
                Polarization::V => Port::Lower,
            },
            Splitter::ParitySorter => {
                if mode.oam.is_even() {
                    Port::Even
                } else {
                    Port::Odd
                }
            }
        }
    }

    pub fn route(&self, state: &HybridState) -> [Routed; 2] {
        self.ports().map(|port| Routed {
            port,
            state: state.project(|m| self.port_of(m) == port),
        })
    }

    /// Merges both ports back into one beam.
    ///
    /// Each port only accepts light in the mode family it was routed for; anything an arm
    /// moved into the other family is rejected. Returns the merged state and the rejected
    /// weight.
    pub fn recombine(&self, arms: &[Routed]) -> Result<(HybridState, f64)> {
        let ports = self.ports();
        for port in ports {
            let n = arms.iter().filter(|a| a.port == port).count();
            if n != 1 {
                return Err(Error::Composition(format!(
                    "{self:?} recombination needs exactly one beam on port {port}, got {n}"
                )));
            }
        }
        if let Some(stray) = arms.iter().find(|a| !ports.contains(&a.port)) {
            return Err(Error::Composition(format!("{self:?} has no port {}", stray.port)));
        }
        let workspace = arms[0].state.workspace();
        let mut out = HybridState::zeros(workspace);
        let mut rejected = 0.0;
        for arm in arms {
            let kept = arm.state.project(|m| self.port_of(m) == arm.port);
            rejected += (arm.state.norm_sqr() - kept.norm_sqr()).max(0.0);
            out = out.add(&kept)?;
        }
        Ok((out, rejected))
    }
}

pub fn parity_sorter() -> Splitter {
    Splitter::ParitySorter
}

/// H to the upper port, V to the lower port.
pub fn pbs_route(state: &HybridState) -> [Routed; 2] {
    Splitter::Pbs.route(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Workspace;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn s(terms: &[(Polarization, i32, f64)]) -> HybridState {
        HybridState::from_terms(
            Workspace::default(),
            terms
                .iter()
                .map(|&(p, l, a)| (BasisMode::new(p, l), Complex64::new(a, 0.0))),
        )
        .unwrap()
    }

    #[test]
    fn parity_routing() {
        let sorter = parity_sorter();
        let [even, odd] = sorter.route(&s(&[(Polarization::H, 0, 1.0)]));
        assert_eq!((even.port, even.state.norm_sqr()), (Port::Even, 1.0));
        assert_eq!(odd.state.norm_sqr(), 0.0);
        let [even, odd] = sorter.route(&s(&[(Polarization::H, 1, 1.0)]));
        assert_eq!(even.state.norm_sqr(), 0.0);
        assert_eq!((odd.port, odd.state.norm_sqr()), (Port::Odd, 1.0));
        let [even, odd] = sorter.route(&s(&[
            (Polarization::V, 0, FRAC_1_SQRT_2),
            (Polarization::V, 1, FRAC_1_SQRT_2),
        ]));
        assert!((even.state.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((odd.state.norm_sqr() - 0.5).abs() < 1e-15);
        assert_eq!(sorter.port_of(BasisMode::new(Polarization::H, -3)), Port::Odd);
        assert_eq!(sorter.port_of(BasisMode::new(Polarization::H, -2)), Port::Even);
    }

    #[test]
    fn pbs_routing() {
        let [up, low] = pbs_route(&s(&[(Polarization::H, 0, 1.0)]));
        assert_eq!(
            (up.port, up.state.norm_sqr(), low.state.norm_sqr()),
            (Port::Upper, 1.0, 0.0)
        );
        let [up, low] = pbs_route(&s(&[(Polarization::V, 0, 1.0)]));
        assert_eq!(
            (low.port, low.state.norm_sqr(), up.state.norm_sqr()),
            (Port::Lower, 1.0, 0.0)
        );
        let [up, low] = pbs_route(&s(&[
            (Polarization::H, 0, FRAC_1_SQRT_2),
            (Polarization::V, 0, FRAC_1_SQRT_2),
        ]));
        assert!((up.state.amplitude(BasisMode::new(Polarization::H, 0)).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((low.state.amplitude(BasisMode::new(Polarization::V, 0)).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn split_then_recombine_is_identity() {
        let state = s(&[
            (Polarization::H, -3, 0.5),
            (Polarization::V, 2, 0.5),
            (Polarization::H, 1, 0.5),
            (Polarization::V, 0, 0.5),
        ]);
        for splitter in [Splitter::Pbs, Splitter::ParitySorter] {
            let (out, rejected) = splitter.recombine(&splitter.route(&state)).unwrap();
            assert_eq!(out, state);
            assert_eq!(rejected, 0.0);
        }
    }

    #[test]
    fn recombine_rejects_dangling_ports() {
        let state = s(&[(Polarization::H, 0, 1.0)]);
        let [up, _] = pbs_route(&state);
        assert!(matches!(
            Splitter::Pbs.recombine(std::slice::from_ref(&up)),
            Err(Error::Composition(_))
        ));
        assert!(Splitter::Pbs.recombine(&[up.clone(), up]).is_err());
    }

    #[test]
    fn recombine_counts_rejected_weight() {
        let state = s(&[(Polarization::H, 0, 1.0)]);
        let [up, low] = pbs_route(&state);
        let flipped = Routed {
            port: Port::Upper,
            state: s(&[(Polarization::V, 0, 1.0)]),
        };
        let _ = up;
        let (out, rejected) = Splitter::Pbs.recombine(&[flipped, low]).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
        assert_eq!(rejected, 1.0);
    }
}
