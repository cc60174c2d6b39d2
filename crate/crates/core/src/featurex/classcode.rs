//! Four-bit ABCG fault codes and the fixed 11-class enumeration.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Number of fault classes (10 fault types plus the no-fault state).
pub const CLASS_COUNT: usize = 11;

/// Fault code as four bits (A, B, C, G): which phases are involved and
/// whether the fault is grounded. `0000` is the no-fault state. The
/// all-ones code `1111` (three-phase-to-ground) is folded into `1110`,
/// so exactly eleven states exist.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassCode {
    bits: u8, // bit 3 = A, bit 2 = B, bit 1 = C, bit 0 = G
}

/// The eleven valid codes in class-label order: no-fault, the three LG
/// faults, three LL, three LLG, then LLL (covering LLLG).
pub const CLASS_CODES: [ClassCode; CLASS_COUNT] = [
    ClassCode { bits: 0b0000 }, // 0: no fault
    ClassCode { bits: 0b1001 }, // 1: A-G
    ClassCode { bits: 0b0101 }, // 2: B-G
    ClassCode { bits: 0b0011 }, // 3: C-G
    ClassCode { bits: 0b1100 }, // 4: A-B
    ClassCode { bits: 0b1010 }, // 5: A-C
    ClassCode { bits: 0b0110 }, // 6: B-C
    ClassCode { bits: 0b1101 }, // 7: A-B-G
    ClassCode { bits: 0b1011 }, // 8: A-C-G
    ClassCode { bits: 0b0111 }, // 9: B-C-G
    ClassCode { bits: 0b1110 }, // 10: A-B-C (and A-B-C-G)
];

pub const NO_FAULT: ClassCode = CLASS_CODES[0];

impl ClassCode {
    /// Builds a code from the four ABCG flags. `1111` normalizes to `1110`.
    /// Combinations outside the eleven valid states (a single phase without
    /// ground, or ground alone) are rejected.
    pub fn new(a: bool, b: bool, c: bool, g: bool) -> Result<Self> {
        let mut bits = (a as u8) << 3 | (b as u8) << 2 | (c as u8) << 1 | g as u8;
        if bits == 0b1111 {
            bits = 0b1110;
        }
        let code = ClassCode { bits };
        if CLASS_CODES.contains(&code) {
            Ok(code)
        } else {
            Err(Error::validation(format!(
                "invalid fault code {}{}{}{}: not one of the 11 states",
                a as u8, b as u8, c as u8, g as u8
            )))
        }
    }

    pub fn no_fault() -> Self {
        NO_FAULT
    }

    /// Class label 0..=10 per the fixed enumeration.
    pub fn label(&self) -> u8 {
        CLASS_CODES
            .iter()
            .position(|c| c == self)
            .expect("ClassCode is always one of the 11 states") as u8
    }

    pub fn from_label(label: u8) -> Result<Self> {
        CLASS_CODES
            .get(label as usize)
            .copied()
            .ok_or_else(|| Error::validation(format!("class label {label} out of range 0..=10")))
    }

    /// Parses a four-character bit string such as `"1001"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 4 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::validation(format!("malformed fault code '{s}'")));
        }
        let bit = |i: usize| s.as_bytes()[i] == b'1';
        ClassCode::new(bit(0), bit(1), bit(2), bit(3))
    }

    pub fn is_no_fault(&self) -> bool {
        self.bits == 0
    }

    /// True when the fault current has a path to ground.
    pub fn grounded(&self) -> bool {
        self.bits & 1 == 1
    }

    /// Involvement flags for phases A, B, C.
    pub fn phases(&self) -> [bool; 3] {
        [
            self.bits & 0b1000 != 0,
            self.bits & 0b0100 != 0,
            self.bits & 0b0010 != 0,
        ]
    }
}

impl fmt::Display for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}{}",
            (self.bits >> 3) & 1,
            (self.bits >> 2) & 1,
            (self.bits >> 1) & 1,
            self.bits & 1
        )
    }
}

impl fmt::Debug for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassCode({self})")
    }
}

impl TryFrom<String> for ClassCode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        ClassCode::parse(&s)
    }
}

impl From<ClassCode> for String {
    fn from(c: ClassCode) -> String {
        c.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_has_eleven_distinct_states() {
        let mut seen = std::collections::HashSet::new();
        for code in CLASS_CODES {
            assert!(seen.insert(code.bits));
        }
        assert_eq!(seen.len(), 11);
    }

    #[test]
    fn label_code_round_trip() {
        for label in 0..CLASS_COUNT as u8 {
            let code = ClassCode::from_label(label).unwrap();
            assert_eq!(code.label(), label);
            let reparsed = ClassCode::parse(&code.to_string()).unwrap();
            assert_eq!(reparsed, code);
        }
    }

    #[test]
    fn three_phase_grounded_folds_into_lll() {
        let lllg = ClassCode::new(true, true, true, true).unwrap();
        let lll = ClassCode::new(true, true, true, false).unwrap();
        assert_eq!(lllg, lll);
        assert_eq!(lllg.label(), 10);
    }

    #[test]
    fn invalid_combinations_rejected() {
        // single phase without ground
        assert!(ClassCode::new(true, false, false, false).is_err());
        // ground alone
        assert!(ClassCode::new(false, false, false, true).is_err());
        assert!(ClassCode::parse("10x1").is_err());
        assert!(ClassCode::parse("101").is_err());
    }

    #[test]
    fn lg_a_is_label_one() {
        let code = ClassCode::parse("1001").unwrap();
        assert_eq!(code.label(), 1);
        assert!(code.grounded());
        assert_eq!(code.phases(), [true, false, false]);
    }
}
