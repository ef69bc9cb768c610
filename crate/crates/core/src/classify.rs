//! Step-to-phase classification.
//!
//! A configurable rule list runs first (first match wins); steps no rule
//! matches fall through to the default rulebook below. Reproduction and
//! validation are told apart by whether application code has been patched
//! yet; agent-written tests by whether the file was created in-session.
//!
//! | step                                               | before patch | after patch |
//! |----------------------------------------------------|--------------|-------------|
//! | `file_view` / `file_search`                        | N            | N           |
//! | create/edit of a test file                         | R            | V           |
//! | create/edit of any other file                      | P            | P           |
//! | shell run of an agent-created test                 | R            | V           |
//! | shell run of a pre-existing test or test runner    | RG           | VG          |
//! | message with a summary marker after the last edit  | S            | S           |
//! | anything else                                      | O            | O           |

use std::collections::HashSet;

use globset::{Glob, GlobBuilder, GlobSet, GlobSetBuilder};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ActionKind, StepRecord, TrajectoryRecord};
use crate::phase::PhaseLetter;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// Globs identifying test files. Patterns are matched against the
    /// repository-relative path and every trailing component suffix of it.
    pub test_path_patterns: Vec<String>,
    /// Commands that run an existing test suite.
    pub test_runner_commands: Vec<String>,
    /// Leading path prefixes stripped before matching (sandbox repo roots).
    pub path_prefixes: Vec<String>,
    /// Case-insensitive phrases marking a summary-of-changes message.
    pub summary_markers: Vec<String>,
    /// Ordered rules consulted before the default rulebook.
    pub rule_overrides: Vec<Rule>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        ClassifierConfig {
            test_path_patterns: s(&["test_*", "*_test.*", "tests/**", "reproduce*", "repro*"]),
            test_runner_commands: s(&["pytest", "py.test", "tox", "nosetests", "nose2", "unittest", "runtests.py"]),
            path_prefixes: s(&["/testbed/", "/repo/", "/app/", "/workspace/"]),
            summary_markers: s(&[
                "summary of changes",
                "summary of the changes",
                "## summary",
                "changes made:",
                "in summary",
            ]),
            rule_overrides: Vec::new(),
        }
    }
}

impl ClassifierConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One override rule. Every present condition must hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(default)]
    pub action_kind: Option<ActionKind>,
    #[serde(default)]
    pub path_glob: Option<String>,
    #[serde(default)]
    pub command_regex: Option<String>,
    #[serde(default)]
    pub is_error: Option<bool>,
    /// Restrict to steps before (`false`) or after (`true`) the first patch.
    #[serde(default)]
    pub after_first_patch: Option<bool>,
    pub letter: PhaseLetter,
}

struct CompiledRule {
    action_kind: Option<ActionKind>,
    path_glob: Option<globset::GlobMatcher>,
    command_regex: Option<Regex>,
    is_error: Option<bool>,
    after_first_patch: Option<bool>,
    letter: PhaseLetter,
}

/// State threaded left to right through a trajectory.
#[derive(Debug, Clone, Default)]
pub struct ClassificationContext {
    /// Whether an application-code edit (a P step) has occurred.
    pub patched: bool,
    /// Normalised paths the agent created during this trajectory.
    pub created: HashSet<String>,
    /// Index of the last create/edit step in the whole trajectory.
    pub last_edit_index: Option<usize>,
}

impl ClassificationContext {
    pub fn for_trajectory(traj: &TrajectoryRecord) -> Self {
        ClassificationContext {
            last_edit_index: traj
                .steps
                .iter()
                .filter(|s| matches!(s.action_kind, ActionKind::FileEdit | ActionKind::FileCreate))
                .map(|s| s.index)
                .max(),
            ..Default::default()
        }
    }
}

/// Compiled form of a [`ClassifierConfig`].
pub struct Classifier {
    tests: GlobSet,
    runners: Vec<String>,
    prefixes: Vec<String>,
    markers: Vec<String>,
    rules: Vec<CompiledRule>,
}

impl Classifier {
    pub fn new(cfg: &ClassifierConfig) -> Result<Self> {
        let mut tests = GlobSetBuilder::new();
        for pat in &cfg.test_path_patterns {
            tests.add(glob(pat)?);
        }
        let tests = tests.build().map_err(|e| Error::Config(e.to_string()))?;
        let rules = cfg
            .rule_overrides
            .iter()
            .map(|r| {
                Ok(CompiledRule {
                    action_kind: r.action_kind,
                    path_glob: r.path_glob.as_deref().map(glob).transpose()?.map(|g| g.compile_matcher()),
                    command_regex: r
                        .command_regex
                        .as_deref()
                        .map(Regex::new)
                        .transpose()
                        .map_err(|e| Error::Config(e.to_string()))?,
                    is_error: r.is_error,
                    after_first_patch: r.after_first_patch,
                    letter: r.letter,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Classifier {
            tests,
            runners: cfg.test_runner_commands.clone(),
            prefixes: cfg.path_prefixes.clone(),
            markers: cfg.summary_markers.iter().map(|m| m.to_lowercase()).collect(),
            rules,
        })
    }

    /// Repository-relative form of a path as written in a log.
    pub fn normalize_path(&self, path: &str) -> String {
        let mut p = path.trim().trim_matches(|c| c == '"' || c == '\'');
        for prefix in &self.prefixes {
            if let Some(rest) = p.strip_prefix(prefix.as_str()) {
                p = rest;
                break;
            }
        }
        while let Some(rest) = p.strip_prefix("./") {
            p = rest;
        }
        p.trim_start_matches('/').to_string()
    }

    pub fn is_test_path(&self, normalized: &str) -> bool {
        if self.tests.is_match(normalized) {
            return true;
        }
        normalized
            .match_indices('/')
            .any(|(i, _)| self.tests.is_match(&normalized[i + 1..]))
    }

    pub fn classify_step(&self, step: &StepRecord, ctx: &ClassificationContext) -> PhaseLetter {
        let target = step.target_path.as_deref().map(|p| self.normalize_path(p));
        for rule in &self.rules {
            if self.rule_matches(rule, step, target.as_deref(), ctx) {
                return rule.letter;
            }
        }
        self.default_letter(step, target.as_deref(), ctx)
    }

    fn rule_matches(&self, rule: &CompiledRule, step: &StepRecord, target: Option<&str>, ctx: &ClassificationContext) -> bool {
        rule.action_kind.is_none_or(|k| k == step.action_kind)
            && rule.is_error.is_none_or(|e| e == step.is_error)
            && rule.after_first_patch.is_none_or(|a| a == ctx.patched)
            && rule
                .path_glob
                .as_ref()
                .is_none_or(|g| target.is_some_and(|t| g.is_match(t)))
            && rule
                .command_regex
                .as_ref()
                .is_none_or(|re| re.is_match(&step.command_text))
    }

    fn default_letter(&self, step: &StepRecord, target: Option<&str>, ctx: &ClassificationContext) -> PhaseLetter {
        let test_phase = if ctx.patched { PhaseLetter::V } else { PhaseLetter::R };
        let regression_phase = if ctx.patched { PhaseLetter::VG } else { PhaseLetter::RG };
        match step.action_kind {
            ActionKind::FileView | ActionKind::FileSearch => PhaseLetter::N,
            ActionKind::FileCreate | ActionKind::FileEdit => match target {
                Some(t) if self.is_test_path(t) => test_phase,
                _ => PhaseLetter::P,
            },
            ActionKind::ShellExec => {
                let refs = self.referenced_paths(step, target);
                if refs.iter().any(|p| ctx.created.contains(p) && self.is_test_path(p)) {
                    test_phase
                } else if self.runs_test_suite(&step.command_text) || refs.iter().any(|p| self.is_test_path(p)) {
                    regression_phase
                } else {
                    PhaseLetter::O
                }
            }
            ActionKind::Message => {
                let text = step.command_text.to_lowercase();
                let after_last_edit = ctx.last_edit_index.is_some_and(|last| step.index > last);
                if after_last_edit && self.markers.iter().any(|m| text.contains(m.as_str())) {
                    PhaseLetter::S
                } else {
                    PhaseLetter::O
                }
            }
            ActionKind::Submit | ActionKind::Other => PhaseLetter::O,
        }
    }

    fn referenced_paths(&self, step: &StepRecord, target: Option<&str>) -> Vec<String> {
        let mut out: Vec<String> = target.map(str::to_string).into_iter().collect();
        out.extend(
            step.command_text
                .split(|c: char| c.is_whitespace() || matches!(c, ';' | '&' | '|' | '(' | ')'))
                .map(|t| t.trim_matches(|c| c == '"' || c == '\''))
                .filter(|t| !t.is_empty() && !t.starts_with('-') && (t.contains('.') || t.contains('/')))
                .map(|t| self.normalize_path(t.split("::").next().unwrap_or(t))),
        );
        out
    }

    fn runs_test_suite(&self, command: &str) -> bool {
        command
            .split(|c: char| c.is_whitespace() || matches!(c, ';' | '&' | '|'))
            .filter(|t| !t.is_empty())
            .any(|t| {
                let base = t.rsplit('/').next().unwrap_or(t);
                self.runners.iter().any(|r| r == base)
            })
    }

    fn advance(&self, step: &StepRecord, letter: PhaseLetter, ctx: &mut ClassificationContext) {
        if letter == PhaseLetter::P {
            ctx.patched = true;
        }
        if step.action_kind == ActionKind::FileCreate {
            if let Some(p) = &step.target_path {
                ctx.created.insert(self.normalize_path(p));
            }
        }
    }

    /// One letter per step, in step order, in a single forward pass.
    pub fn classify_trajectory(&self, traj: &TrajectoryRecord) -> Vec<(usize, PhaseLetter)> {
        let mut ctx = ClassificationContext::for_trajectory(traj);
        traj.steps
            .iter()
            .map(|step| {
                let letter = self.classify_step(step, &ctx);
                self.advance(step, letter, &mut ctx);
                (step.index, letter)
            })
            .collect()
    }
}

fn glob(pattern: &str) -> Result<Glob> {
    GlobBuilder::new(pattern)
        .literal_separator(true)
        .build()
        .map_err(|e| Error::Config(format!("{pattern}: {e}")))
}

pub fn classify_trajectory(traj: &TrajectoryRecord, cfg: &ClassifierConfig) -> Result<Vec<(usize, PhaseLetter)>> {
    Ok(Classifier::new(cfg)?.classify_trajectory(traj))
}
