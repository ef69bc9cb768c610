//! Plan specifications: the phase alphabet and its expected order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseLetter;

/// A plan's phase alphabet together with the order the phases should first
/// appear in. Each letter appears exactly once in `expected_sequence`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPlanSpec")]
pub struct PlanSpec {
    name: String,
    expected_sequence: Vec<PhaseLetter>,
}

#[derive(Deserialize)]
struct RawPlanSpec {
    name: String,
    expected_sequence: Vec<PhaseLetter>,
}

impl TryFrom<RawPlanSpec> for PlanSpec {
    type Error = Error;

    fn try_from(raw: RawPlanSpec) -> Result<Self> {
        PlanSpec::new(raw.name, raw.expected_sequence)
    }
}

impl PlanSpec {
    pub fn new(name: impl Into<String>, expected_sequence: Vec<PhaseLetter>) -> Result<Self> {
        let name = name.into();
        if expected_sequence.is_empty() {
            return Err(Error::InvalidPlan(format!("{name}: empty phase sequence")));
        }
        if expected_sequence.contains(&PhaseLetter::O) {
            return Err(Error::InvalidPlan(format!("{name}: O is not a plan phase")));
        }
        let distinct: BTreeSet<_> = expected_sequence.iter().collect();
        if distinct.len() != expected_sequence.len() {
            return Err(Error::InvalidPlan(format!("{name}: repeated phase in sequence")));
        }
        Ok(PlanSpec {
            name,
            expected_sequence,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expected_sequence(&self) -> &[PhaseLetter] {
        &self.expected_sequence
    }

    pub fn alphabet(&self) -> BTreeSet<PhaseLetter> {
        self.expected_sequence.iter().copied().collect()
    }

    /// m = |Φ|.
    pub fn len(&self) -> usize {
        self.expected_sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expected_sequence.is_empty()
    }

    pub fn contains(&self, letter: PhaseLetter) -> bool {
        self.expected_sequence.contains(&letter)
    }

    /// Loads a custom spec from JSON: `{"name": .., "expected_sequence": ["N", ..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl fmt::Display for PlanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters: Vec<&str> = self.expected_sequence.iter().map(|l| l.as_str()).collect();
        write!(f, "<{}>", letters.join(", "))
    }
}

/// The eight studied plan settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingName {
    Standard,
    NoPlan,
    NoReproduction,
    NoValidation,
    Regression,
    Summary,
    Reordered,
    Reminded,
}

impl SettingName {
    pub const ALL: [SettingName; 8] = [
        SettingName::Standard,
        SettingName::NoPlan,
        SettingName::NoReproduction,
        SettingName::NoValidation,
        SettingName::Regression,
        SettingName::Summary,
        SettingName::Reordered,
        SettingName::Reminded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SettingName::Standard => "standard",
            SettingName::NoPlan => "no_plan",
            SettingName::NoReproduction => "no_reproduction",
            SettingName::NoValidation => "no_validation",
            SettingName::Regression => "regression",
            SettingName::Summary => "summary",
            SettingName::Reordered => "reordered",
            SettingName::Reminded => "reminded",
        }
    }

    /// Expected first-occurrence order; `None` for the setting without a plan.
    pub fn formulation(self) -> Option<Vec<PhaseLetter>> {
        use PhaseLetter::*;
        match self {
            SettingName::Standard | SettingName::Reminded => Some(vec![N, R, P, V]),
            SettingName::NoPlan => None,
            SettingName::NoReproduction => Some(vec![N, P, V]),
            SettingName::NoValidation => Some(vec![N, R, P]),
            SettingName::Regression => Some(vec![RG, N, R, P, V, VG]),
            SettingName::Summary => Some(vec![N, R, P, V, S]),
            SettingName::Reordered => Some(vec![N, P, R, V]),
        }
    }

    pub fn plan_spec(self) -> Option<PlanSpec> {
        self.formulation()
            .map(|seq| PlanSpec::new(self.as_str(), seq).expect("catalogue formulations are valid"))
    }
}

impl fmt::Display for SettingName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SettingName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SettingName::ALL
            .into_iter()
            .find(|n| n.as_str() == norm)
            .ok_or_else(|| Error::UnknownSetting(s.to_string()))
    }
}

/// Plan selected for scoring: a catalogue setting (possibly without a plan)
/// or a custom spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanChoice {
    Spec(PlanSpec),
    /// No plan was instructed; compliance metrics are not applicable.
    NoPlan,
}

impl PlanChoice {
    pub fn from_setting(name: SettingName) -> Self {
        match name.plan_spec() {
            Some(spec) => PlanChoice::Spec(spec),
            None => PlanChoice::NoPlan,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            PlanChoice::Spec(s) => s.name(),
            PlanChoice::NoPlan => SettingName::NoPlan.as_str(),
        }
    }

    pub fn spec(&self) -> Option<&PlanSpec> {
        match self {
            PlanChoice::Spec(s) => Some(s),
            PlanChoice::NoPlan => None,
        }
    }
}
