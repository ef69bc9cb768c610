//! Trajectory records and the parsers that produce them.
//!
//! The canonical on-disk form is line-delimited JSON: a header line with the
//! trajectory metadata followed by one line per step. Vendor dumps are read by
//! adapters that map their entries onto the same records.

mod canonical;
mod swe_agent;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use canonical::{to_canonical, write_canonical};
pub use swe_agent::map_action as map_swe_agent_action;

pub const DEFAULT_EXCERPT_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    FileView,
    FileSearch,
    FileCreate,
    FileEdit,
    ShellExec,
    Submit,
    Message,
    Other,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::FileView => "file_view",
            ActionKind::FileSearch => "file_search",
            ActionKind::FileCreate => "file_create",
            ActionKind::FileEdit => "file_edit",
            ActionKind::ShellExec => "shell_exec",
            ActionKind::Submit => "submit",
            ActionKind::Message => "message",
            ActionKind::Other => "other",
        }
    }

    /// Total mapping: unrecognised tags become `Other`.
    pub fn from_tag(tag: &str) -> Self {
        match tag.trim().to_ascii_lowercase().as_str() {
            "file_view" => ActionKind::FileView,
            "file_search" => ActionKind::FileSearch,
            "file_create" => ActionKind::FileCreate,
            "file_edit" => ActionKind::FileEdit,
            "shell_exec" => ActionKind::ShellExec,
            "submit" => ActionKind::Submit,
            "message" => ActionKind::Message,
            _ => ActionKind::Other,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ActionKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ActionKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let tag = String::deserialize(d)?;
        Ok(ActionKind::from_tag(&tag))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    #[default]
    Unknown,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
            Difficulty::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" | "<15 min fix" => Ok(Difficulty::Easy),
            "medium" | "15 min - 1 hour" => Ok(Difficulty::Medium),
            "hard" | "1-4 hours" | ">4 hours" => Ok(Difficulty::Hard),
            "" | "unknown" => Ok(Difficulty::Unknown),
            other => Err(Error::Config(format!("unknown difficulty {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based ordinal within the trajectory.
    pub index: usize,
    pub action_kind: ActionKind,
    #[serde(default)]
    pub target_path: Option<String>,
    #[serde(default)]
    pub command_text: String,
    #[serde(default)]
    pub output_excerpt: String,
    #[serde(default)]
    pub is_error: bool,
}

impl StepRecord {
    pub fn new(index: usize, action_kind: ActionKind, command_text: impl Into<String>) -> Self {
        StepRecord {
            index,
            action_kind,
            target_path: None,
            command_text: command_text.into(),
            output_excerpt: String::new(),
            is_error: false,
        }
    }

    pub fn with_target(mut self, path: impl Into<String>) -> Self {
        self.target_path = Some(path.into());
        self
    }

    pub fn with_error(mut self, is_error: bool) -> Self {
        self.is_error = is_error;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub trajectory_id: String,
    pub instance_id: String,
    pub model_name: String,
    pub plan_setting_name: String,
    pub difficulty: Difficulty,
    pub resolved: Option<bool>,
    pub steps: Vec<StepRecord>,
}

impl TrajectoryRecord {
    /// Checks the record invariants: non-empty, contiguous 1-based indices,
    /// at most one submit and only as the final step.
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let invalid = |message: String| Error::InvalidTrajectory {
            id: self.trajectory_id.clone(),
            message,
        };
        if self.trajectory_id.is_empty() {
            return Err(invalid("empty trajectory_id".into()));
        }
        let last = self.steps.len();
        for (pos, step) in self.steps.iter().enumerate() {
            if step.index != pos + 1 {
                return Err(invalid(format!(
                    "step index {} at position {}, expected {}",
                    step.index,
                    pos + 1,
                    pos + 1
                )));
            }
            if step.action_kind == ActionKind::Submit && step.index != last {
                return Err(invalid(format!("submit at step {} is not the final step", step.index)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    /// Sorted by `trajectory_id`.
    pub trajectories: Vec<TrajectoryRecord>,
    pub provenance: String,
}

impl Corpus {
    /// Builds a corpus from in-memory records, rejecting duplicate ids.
    pub fn from_records(records: Vec<TrajectoryRecord>, provenance: impl Into<String>) -> Result<Self> {
        let mut by_id: BTreeMap<String, TrajectoryRecord> = BTreeMap::new();
        for rec in records {
            if by_id.contains_key(&rec.trajectory_id) {
                return Err(Error::DuplicateTrajectory {
                    id: rec.trajectory_id.clone(),
                    first: "<memory>".into(),
                    second: "<memory>".into(),
                });
            }
            by_id.insert(rec.trajectory_id.clone(), rec);
        }
        Ok(Corpus {
            trajectories: by_id.into_values().collect(),
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LogFormat {
    #[default]
    Canonical,
    SweAgent,
}

impl FromStr for LogFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(LogFormat::Canonical),
            "swe-agent" | "swe_agent" => Ok(LogFormat::SweAgent),
            other => Err(Error::Config(format!("unknown log format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub format: LogFormat,
    /// Byte budget for `output_excerpt`; longer observations are truncated.
    pub excerpt_budget: usize,
    /// Name of the source (usually the file path). Adapters without an
    /// embedded id derive `trajectory_id` from its stem.
    pub source_name: Option<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            format: LogFormat::Canonical,
            excerpt_budget: DEFAULT_EXCERPT_BUDGET,
            source_name: None,
        }
    }
}

impl ParseOptions {
    pub fn with_format(format: LogFormat) -> Self {
        ParseOptions {
            format,
            ..Default::default()
        }
    }
}

pub fn parse_trajectory(raw_log: &str, format: LogFormat) -> Result<TrajectoryRecord> {
    parse_trajectory_with(raw_log, &ParseOptions::with_format(format))
}

pub fn parse_trajectory_with(raw_log: &str, opts: &ParseOptions) -> Result<TrajectoryRecord> {
    let rec = match opts.format {
        LogFormat::Canonical => canonical::parse(raw_log, opts)?,
        LogFormat::SweAgent => swe_agent::parse(raw_log, opts)?,
    };
    rec.validate()?;
    Ok(rec)
}

pub(crate) fn truncate_excerpt(text: &str, budget: usize) -> String {
    if text.len() <= budget {
        return text.to_string();
    }
    let mut end = budget;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    text[..end].to_string()
}

fn read_one(path: &Path, opts: &ParseOptions) -> Result<TrajectoryRecord> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let opts = ParseOptions {
        source_name: Some(path.display().to_string()),
        ..opts.clone()
    };
    parse_trajectory_with(&raw, &opts).map_err(|e| Error::ParseFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Result of a lenient load: the corpus of files that parsed, and the
/// failures for those that did not.
#[derive(Debug, Default)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub failures: Vec<(PathBuf, Error)>,
}

/// Loads every path into one corpus. Fails on the first unreadable or
/// malformed file (in path order) and on duplicate trajectory ids.
pub fn load_corpus<P: AsRef<Path> + Sync>(paths: &[P], opts: &ParseOptions) -> Result<Corpus> {
    let report = load_inner(paths, opts)?;
    match report.failures.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(report.corpus),
    }
}

/// Like [`load_corpus`] but collects per-file failures instead of aborting.
/// Duplicate ids are still fatal.
pub fn load_corpus_lenient<P: AsRef<Path> + Sync>(paths: &[P], opts: &ParseOptions) -> Result<LoadReport> {
    load_inner(paths, opts)
}

fn load_inner<P: AsRef<Path> + Sync>(paths: &[P], opts: &ParseOptions) -> Result<LoadReport> {
    let parsed: Vec<Result<TrajectoryRecord>> = paths
        .par_iter()
        .map(|p| read_one(p.as_ref(), opts))
        .collect();

    let mut by_id: BTreeMap<String, (usize, TrajectoryRecord)> = BTreeMap::new();
    let mut failures = Vec::new();
    for (i, res) in parsed.into_iter().enumerate() {
        match res {
            Ok(rec) => {
                if let Some((first, _)) = by_id.get(&rec.trajectory_id) {
                    return Err(Error::DuplicateTrajectory {
                        id: rec.trajectory_id.clone(),
                        first: paths[*first].as_ref().display().to_string(),
                        second: paths[i].as_ref().display().to_string(),
                    });
                }
                by_id.insert(rec.trajectory_id.clone(), (i, rec));
            }
            Err(e) => failures.push((paths[i].as_ref().to_path_buf(), e)),
        }
    }
    let loaded = by_id.len();
    Ok(LoadReport {
        corpus: Corpus {
            trajectories: by_id.into_values().map(|(_, r)| r).collect(),
            provenance: format!("{loaded} trajectories from {} files", paths.len()),
        },
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn one_step(id: &str) -> String {
        format!(
            "{{\"trajectory_id\":\"{id}\",\"instance_id\":\"x\",\"model_name\":\"m\",\"plan_setting_name\":\"standard\"}}\n\
             {{\"index\":1,\"action_kind\":\"file_view\",\"target_path\":\"a.py\",\"command_text\":\"open a.py\"}}\n"
        )
    }

    #[test]
    fn loads_distinct_ids() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.jsonl", &one_step("t2"));
        let b = write(dir.path(), "b.jsonl", &one_step("t1"));
        let corpus = load_corpus(&[a, b], &ParseOptions::default()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.trajectories[0].trajectory_id, "t1");
    }

    #[test]
    fn duplicate_ids_name_both_sources() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.jsonl", &one_step("same"));
        let b = write(dir.path(), "b.jsonl", &one_step("same"));
        let err = load_corpus(&[a, b], &ParseOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("a.jsonl") && msg.contains("b.jsonl"), "{msg}");
    }

    #[test]
    fn empty_path_list_is_empty_corpus() {
        let paths: Vec<PathBuf> = vec![];
        let corpus = load_corpus(&paths, &ParseOptions::default()).unwrap();
        assert!(corpus.is_empty());
    }

    #[test]
    fn missing_file_is_io_error_and_lenient_load_keeps_the_rest() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.jsonl", &one_step("t1"));
        let missing = dir.path().join("nope.jsonl");
        let err = load_corpus(&[a.clone(), missing.clone()], &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        let report = load_corpus_lenient(&[a, missing], &ParseOptions::default()).unwrap();
        assert_eq!(report.corpus.len(), 1);
        assert_eq!(report.failures.len(), 1);
    }

    #[test]
    fn excerpt_truncation_respects_char_boundaries() {
        assert_eq!(truncate_excerpt("héllo", 2), "h");
        assert_eq!(truncate_excerpt("abc", 10), "abc");
    }

    #[test]
    fn validate_rejects_early_submit() {
        let rec = TrajectoryRecord {
            trajectory_id: "t".into(),
            instance_id: "i".into(),
            model_name: "m".into(),
            plan_setting_name: "standard".into(),
            difficulty: Difficulty::Unknown,
            resolved: None,
            steps: vec![
                StepRecord::new(1, ActionKind::Submit, "submit"),
                StepRecord::new(2, ActionKind::FileView, "open a"),
            ],
        };
        assert!(matches!(rec.validate(), Err(Error::InvalidTrajectory { .. })));
    }
}
