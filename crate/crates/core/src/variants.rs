//! Prompt variants for the studied plan settings.
//!
//! A base prompt carries a single plan marker. Rendering replaces it with the
//! setting's numbered phase instructions, or removes it when no plan is given.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseLetter;
use crate::plan::{PlanSpec, SettingName};

pub const PLAN_MARKER: &str = "{{PLAN}}";
pub const DEFAULT_REMINDER_PERIOD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariationKind {
    Baseline,
    Reduction,
    Augmentation,
    Reordering,
    Repeating,
}

impl VariationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariationKind::Baseline => "baseline",
            VariationKind::Reduction => "reduction",
            VariationKind::Augmentation => "augmentation",
            VariationKind::Reordering => "reordering",
            VariationKind::Repeating => "repeating",
        }
    }
}

/// Instruction text for one phase. Overridable per setting.
pub fn default_phase_instruction(letter: PhaseLetter) -> &'static str {
    match letter {
        PhaseLetter::N => "Explore the repository: search for, open, and read the files related to the issue so you understand the code involved and can locate the components to change.",
        PhaseLetter::R => "Write a new script or test that reproduces the reported bug and run it to confirm that it fails on the current code.",
        PhaseLetter::P => "Edit the application source code to fix the bug.",
        PhaseLetter::V => "Run your reproduction test again, and write additional tests if needed, to confirm the fix works and handles edge cases.",
        PhaseLetter::RG => "Run the repository's existing regression tests related to the affected code and record which tests pass before you change anything.",
        PhaseLetter::VG => "Run the repository's existing regression tests again and make sure your change does not break any of them.",
        PhaseLetter::S => "Before submitting, write a short summary of the changes you made and why.",
        PhaseLetter::O => "",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSetting {
    pub name: SettingName,
    /// `None` only for the setting without a plan.
    pub spec: Option<PlanSpec>,
    pub variation_kind: VariationKind,
    pub description: String,
    /// Text substituted for the plan marker.
    pub prompt_template: String,
}

impl PlanSetting {
    pub fn builtin(name: SettingName) -> Self {
        let (variation_kind, description) = match name {
            SettingName::Standard => (VariationKind::Baseline, "Standard navigation, reproduction, patch, validation plan"),
            SettingName::NoPlan => (VariationKind::Reduction, "Plan removed from the system prompt"),
            SettingName::NoReproduction => (VariationKind::Reduction, "Reproduction phase removed"),
            SettingName::NoValidation => (VariationKind::Reduction, "Validation phase removed"),
            SettingName::Regression => (VariationKind::Augmentation, "Regression test execution added before navigation and after validation"),
            SettingName::Summary => (VariationKind::Augmentation, "Change summary added before submission"),
            SettingName::Reordered => (VariationKind::Reordering, "Patch moved before reproduction"),
            SettingName::Reminded => (VariationKind::Repeating, "Standard plan re-injected periodically"),
        };
        let spec = name.plan_spec();
        let prompt_template = spec.as_ref().map(plan_block).unwrap_or_default();
        PlanSetting {
            name,
            spec,
            variation_kind,
            description: description.to_string(),
            prompt_template,
        }
    }

    pub fn with_template(mut self, template: impl Into<String>) -> Self {
        self.prompt_template = template.into();
        self
    }

    /// Reminder schedule for the repeating setting.
    pub fn reminder(&self) -> Option<ReminderSchedule> {
        (self.name == SettingName::Reminded).then(|| ReminderSchedule::new(DEFAULT_REMINDER_PERIOD, self.prompt_template.clone()).expect("period is positive"))
    }
}

pub fn catalogue() -> Vec<PlanSetting> {
    SettingName::ALL.into_iter().map(PlanSetting::builtin).collect()
}

/// Numbered instruction list for a plan, one line per phase.
pub fn plan_block(spec: &PlanSpec) -> String {
    let mut out = String::from("Follow these steps to resolve the issue:\n");
    for (i, &letter) in spec.expected_sequence().iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, default_phase_instruction(letter)));
    }
    out
}

/// Replaces the single plan marker in `base_prompt`. Everything outside the
/// marker is preserved byte for byte.
pub fn render_prompt(setting: &PlanSetting, base_prompt: &str) -> Result<String> {
    match base_prompt.matches(PLAN_MARKER).count() {
        0 => Err(Error::MissingMarker(PLAN_MARKER.into())),
        1 => Ok(base_prompt.replacen(PLAN_MARKER, &setting.prompt_template, 1)),
        _ => Err(Error::DuplicateMarker(PLAN_MARKER.into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReminderSchedule {
    period_steps: usize,
    pub reminder_text: String,
}

impl ReminderSchedule {
    pub fn new(period_steps: usize, reminder_text: impl Into<String>) -> Result<Self> {
        if period_steps == 0 {
            return Err(Error::Config("reminder period must be at least 1".into()));
        }
        Ok(ReminderSchedule {
            period_steps,
            reminder_text: reminder_text.into(),
        })
    }

    pub fn period_steps(&self) -> usize {
        self.period_steps
    }
}

impl Default for ReminderSchedule {
    fn default() -> Self {
        let spec = SettingName::Standard.plan_spec().expect("standard has a plan");
        ReminderSchedule {
            period_steps: DEFAULT_REMINDER_PERIOD,
            reminder_text: plan_block(&spec),
        }
    }
}

/// Steps after which the reminder is injected again: every multiple of the
/// period up to and including `trajectory_length`.
pub fn reminder_positions(schedule: &ReminderSchedule, trajectory_length: usize) -> Vec<usize> {
    (schedule.period_steps..=trajectory_length)
        .step_by(schedule.period_steps)
        .collect()
}
