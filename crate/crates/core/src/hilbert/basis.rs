use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag of the basis ordering written into serialized states and operators.
///
/// Ordering: polarization-major with H before V, then `ell` ascending from `-L` to `+L`.
pub const BASIS_ORDERING_VERSION: u32 = 1;
pub const BASIS_ORDERING: &str = "polarization-major (H, V); ell ascending -L..=+L";

pub const DEFAULT_HALF_WIDTH: u32 = 3;

/// OAM charges carrying the two target qubits, in logical order `00, 01, 10, 11`.
pub const LOGICAL_OAM: [i32; 4] = [-1, -2, 0, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    /// Control-qubit value: V encodes `|0>`, H encodes `|1>`.
    pub fn control_bit(self) -> u8 {
        match self {
            Polarization::V => 0,
            Polarization::H => 1,
        }
    }

    pub fn from_control_bit(bit: u8) -> Self {
        if bit == 0 {
            Polarization::V
        } else {
            Polarization::H
        }
    }

    fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// Topological charge of an OAM mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OamMode(pub i32);

impl OamMode {
    pub fn ell(self) -> i32 {
        self.0
    }

    pub fn is_even(self) -> bool {
        self.0.rem_euclid(2) == 0
    }

    /// Two-bit target value for logical modes, `None` elsewhere.
    pub fn target_bits(self) -> Option<u8> {
        LOGICAL_OAM.iter().position(|&l| l == self.0).map(|p| p as u8)
    }

    pub fn from_target_bits(bits: u8) -> Self {
        OamMode(LOGICAL_OAM[(bits & 0b11) as usize])
    }

    pub fn is_logical(self) -> bool {
        self.target_bits().is_some()
    }
}

/// Truncated hybrid mode space: two polarizations times OAM charges `-L..=L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Workspace {
    half_width: u32,
}

impl Default for Workspace {
    fn default() -> Self {
        Workspace {
            half_width: DEFAULT_HALF_WIDTH,
        }
    }
}

impl Workspace {
    /// The logical modes reach `ell = -2`, so `L >= 2` is required.
    pub fn new(half_width: u32) -> Result<Self> {
        if half_width < 2 {
            return Err(Error::InvalidParameter(format!(
                "workspace half-width must be at least 2, got {half_width}"
            )));
        }
        if half_width > 64 {
            return Err(Error::InvalidParameter(format!(
                "workspace half-width {half_width} is unreasonably large"
            )));
        }
        Ok(Workspace { half_width })
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn modes_per_polarization(&self) -> usize {
        2 * self.half_width as usize + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.modes_per_polarization()
    }

    pub fn contains(&self, ell: i32) -> bool {
        ell.unsigned_abs() <= self.half_width
    }

    pub fn index(&self, mode: BasisMode) -> Result<usize> {
        if !self.contains(mode.oam.0) {
            return Err(Error::WorkspaceOverflow {
                ell: mode.oam.0,
                half_width: self.half_width,
            });
        }
        let slot = (mode.oam.0 + self.half_width as i32) as usize;
        Ok(mode.polarization.offset() * self.modes_per_polarization() + slot)
    }

    pub fn mode(&self, index: usize) -> BasisMode {
        let per = self.modes_per_polarization();
        let polarization = if index / per == 0 {
            Polarization::H
        } else {
            Polarization::V
        };
        let ell = (index % per) as i32 - self.half_width as i32;
        BasisMode::new(polarization, ell)
    }

    pub fn modes(&self) -> impl Iterator<Item = BasisMode> + '_ {
        (0..self.dim()).map(move |i| self.mode(i))
    }

    /// Workspace indices of the eight logical basis states, in logical label order.
    pub fn logical_indices(&self) -> [usize; 8] {
        let mut out = [0; 8];
        for label in LogicalLabel::all() {
            out[label.index()] = self
                .index(label.mode())
                .expect("logical modes fit every valid workspace");
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisMode {
    pub polarization: Polarization,
    pub oam: OamMode,
}

impl BasisMode {
    pub fn new(polarization: Polarization, ell: i32) -> Self {
        BasisMode {
            polarization,
            oam: OamMode(ell),
        }
    }

    pub fn ell(&self) -> i32 {
        self.oam.0
    }

    pub fn with_ell(self, ell: i32) -> Self {
        BasisMode::new(self.polarization, ell)
    }

    pub fn logical_label(&self) -> Option<LogicalLabel> {
        let targets = self.oam.target_bits()?;
        Some(LogicalLabel::from_index(
            ((self.polarization.control_bit() << 2) | targets) as usize,
        ))
    }
}

impl fmt::Display for BasisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{:?}, ell={:+}>", self.polarization, self.oam.0)
    }
}

/// Three-qubit computational label `|control target2 target3>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicalLabel {
    pub control: u8,
    pub target2: u8,
    pub target3: u8,
}

impl LogicalLabel {
    pub fn new(control: u8, target2: u8, target3: u8) -> Self {
        LogicalLabel {
            control: control & 1,
            target2: target2 & 1,
            target3: target3 & 1,
        }
    }

    /// Index in the 8-dimensional logical space, control as the most significant bit.
    pub fn index(&self) -> usize {
        ((self.control << 2) | (self.target2 << 1) | self.target3) as usize
    }

    pub fn from_index(index: usize) -> Self {
        LogicalLabel::new((index >> 2) as u8 & 1, (index >> 1) as u8 & 1, index as u8 & 1)
    }

    pub fn all() -> impl Iterator<Item = LogicalLabel> {
        (0..8).map(LogicalLabel::from_index)
    }

    pub fn target_bits(&self) -> u8 {
        (self.target2 << 1) | self.target3
    }

    pub fn mode(&self) -> BasisMode {
        BasisMode {
            polarization: Polarization::from_control_bit(self.control),
            oam: OamMode::from_target_bits(self.target_bits()),
        }
    }

    pub fn bits(&self) -> String {
        format!("{}{}{}", self.control, self.target2, self.target3)
    }
}

impl fmt::Display for LogicalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.bits())
    }
}

impl FromStr for LogicalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches('|').trim_end_matches(['>', '⟩']);
        let bits: Vec<u8> = digits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidParameter(format!("bad logical label {s:?}"))),
            })
            .collect::<Result<_>>()?;
        if bits.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "logical label {s:?} must have three bits"
            )));
        }
        Ok(LogicalLabel::new(bits[0], bits[1], bits[2]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let ws = Workspace::new(4).unwrap();
        for i in 0..ws.dim() {
            assert_eq!(ws.index(ws.mode(i)).unwrap(), i);
        }
    }

    #[test]
    fn ordering_is_polarization_major() {
        let ws = Workspace::default();
        assert_eq!(ws.index(BasisMode::new(Polarization::H, -3)).unwrap(), 0);
        assert_eq!(ws.index(BasisMode::new(Polarization::H, 3)).unwrap(), 6);
        assert_eq!(ws.index(BasisMode::new(Polarization::V, -3)).unwrap(), 7);
        assert_eq!(ws.dim(), 14);
    }

    #[test]
    fn out_of_range_mode_overflows() {
        let ws = Workspace::default();
        let err = ws.index(BasisMode::new(Polarization::V, -4)).unwrap_err();
        assert!(matches!(err, Error::WorkspaceOverflow { ell: -4, half_width: 3 }));
    }

    #[test]
    fn too_small_workspace_rejected() {
        assert!(Workspace::new(1).is_err());
    }

    #[test]
    fn coding_table() {
        let cases = [
            ("000", Polarization::V, -1),
            ("001", Polarization::V, -2),
            ("010", Polarization::V, 0),
            ("011", Polarization::V, 1),
            ("100", Polarization::H, -1),
            ("101", Polarization::H, -2),
            ("110", Polarization::H, 0),
            ("111", Polarization::H, 1),
        ];
        for (bits, pol, ell) in cases {
            let label: LogicalLabel = bits.parse().unwrap();
            assert_eq!(label.mode(), BasisMode::new(pol, ell), "{bits}");
            assert_eq!(label.mode().logical_label(), Some(label));
        }
    }

    #[test]
    fn label_parsing() {
        assert_eq!("|110>".parse::<LogicalLabel>().unwrap().index(), 6);
        assert!("12".parse::<LogicalLabel>().is_err());
        assert!("0101".parse::<LogicalLabel>().is_err());
    }
}
