//! Phase letters of the plan alphabet.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A plan phase assigned to one trajectory step.
///
/// `O` collects everything that belongs to no plan phase (environment setup,
/// package installs, submission, unrecognised tools).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhaseLetter {
    /// Navigation: search, open and read files.
    N,
    /// Reproduction: write or run new tests before the first patch.
    R,
    /// Patch: edit application code.
    P,
    /// Validation: write or run new tests after the first patch.
    V,
    /// Regression test execution before the first patch.
    RG,
    /// Regression test execution after the first patch.
    VG,
    /// Summary of changes before submission.
    S,
    /// Out of plan.
    O,
}

impl PhaseLetter {
    pub const ALL: [PhaseLetter; 8] = [
        PhaseLetter::N,
        PhaseLetter::R,
        PhaseLetter::P,
        PhaseLetter::V,
        PhaseLetter::RG,
        PhaseLetter::VG,
        PhaseLetter::S,
        PhaseLetter::O,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLetter::N => "N",
            PhaseLetter::R => "R",
            PhaseLetter::P => "P",
            PhaseLetter::V => "V",
            PhaseLetter::RG => "RG",
            PhaseLetter::VG => "VG",
            PhaseLetter::S => "S",
            PhaseLetter::O => "O",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            PhaseLetter::N => "Navigation",
            PhaseLetter::R => "Reproduction",
            PhaseLetter::P => "Patch",
            PhaseLetter::V => "Validation",
            PhaseLetter::RG => "Regression testing (before patch)",
            PhaseLetter::VG => "Regression testing (after patch)",
            PhaseLetter::S => "Summary of changes",
            PhaseLetter::O => "Out of plan",
        }
    }
}

impl fmt::Display for PhaseLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseLetter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PhaseLetter::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidPlan(format!("unknown phase letter {s:?}")))
    }
}

/// Parses a comma- or space-separated letter list such as `N,R,P,V`.
pub fn parse_letters(s: &str) -> Result<Vec<PhaseLetter>, Error> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_round_trip_through_text() {
        for l in PhaseLetter::ALL {
            assert_eq!(l.as_str().parse::<PhaseLetter>().unwrap(), l);
        }
        assert_eq!(
            parse_letters("RG, N R,P").unwrap(),
            vec![PhaseLetter::RG, PhaseLetter::N, PhaseLetter::R, PhaseLetter::P]
        );
        assert!("X".parse::<PhaseLetter>().is_err());
    }
}
