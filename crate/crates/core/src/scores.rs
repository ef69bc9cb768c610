//! Corpus scoring and the per-trajectory score files.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::Classifier;
use crate::compliance::{score_langutory, ComplianceScores};
use crate::error::{Error, Result};
use crate::graphectory::{build_graphectory, graphectory_stats, GraphectoryStats};
use crate::ingest::{Corpus, Difficulty, TrajectoryRecord};
use crate::langutory::{build_langutory, Langutory};
use crate::plan::PlanChoice;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub trajectory_id: String,
    pub instance_id: String,
    pub model_name: String,
    pub plan_setting_name: String,
    pub difficulty: Difficulty,
    pub resolved: Option<bool>,
    /// Plan the trajectory was scored against.
    pub plan: String,
    pub langutory: String,
    /// `None` when no plan was instructed.
    pub scores: Option<ComplianceScores>,
    pub graph: GraphectoryStats,
}

impl ScoreRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "nc" => return Some(self.graph.nc as f64),
            "tec" => return Some(self.graph.tec as f64),
            "lc" => return Some(self.graph.lc as f64),
            "resolved" => return self.resolved.map(|r| if r { 1.0 } else { 0.0 }),
            _ => {}
        }
        let s = self.scores.as_ref()?;
        match name {
            "ppc" => Some(s.ppc),
            "poc" => Some(s.poc),
            "ppf" => Some(s.ppf),
            "pc" => Some(s.pc),
            _ => None,
        }
    }
}

pub const METRIC_NAMES: [&str; 8] = ["ppc", "poc", "ppf", "pc", "nc", "tec", "lc", "resolved"];

pub fn langutory_of(traj: &TrajectoryRecord, classifier: &Classifier) -> Result<Langutory> {
    build_langutory(&classifier.classify_trajectory(traj))
}

pub fn score_record(traj: &TrajectoryRecord, plan: &PlanChoice, classifier: &Classifier) -> Result<ScoreRecord> {
    traj.validate()?;
    let lang = langutory_of(traj, classifier)?;
    let graph = graphectory_stats(&build_graphectory(traj)?);
    Ok(ScoreRecord {
        trajectory_id: traj.trajectory_id.clone(),
        instance_id: traj.instance_id.clone(),
        model_name: traj.model_name.clone(),
        plan_setting_name: traj.plan_setting_name.clone(),
        difficulty: traj.difficulty,
        resolved: traj.resolved,
        plan: plan.name().to_string(),
        langutory: lang.compressed().to_string(),
        scores: plan.spec().map(|spec| score_langutory(&lang, spec)),
        graph,
    })
}

/// Runs `f` on a pool with `jobs` threads, or inline when `jobs <= 1`.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Scores every trajectory; output order follows the corpus (sorted by id)
/// regardless of `jobs`.
pub fn score_corpus(corpus: &Corpus, plan: &PlanChoice, classifier: &Classifier, jobs: usize) -> Result<Vec<ScoreRecord>> {
    with_jobs(jobs, || {
        if jobs <= 1 {
            corpus.trajectories.iter().map(|t| score_record(t, plan, classifier)).collect()
        } else {
            corpus.trajectories.par_iter().map(|t| score_record(t, plan, classifier)).collect()
        }
    })?
}

pub fn corpus_langutories(corpus: &Corpus, classifier: &Classifier, jobs: usize) -> Result<Vec<Langutory>> {
    with_jobs(jobs, || {
        if jobs <= 1 {
            corpus.trajectories.iter().map(|t| langutory_of(t, classifier)).collect()
        } else {
            corpus.trajectories.par_iter().map(|t| langutory_of(t, classifier)).collect()
        }
    })?
}

pub fn write_scores_jsonl<W: Write>(records: &[ScoreRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<scores>", e))?;
    }
    Ok(())
}

pub fn read_scores_jsonl<R: BufRead>(input: R) -> Result<Vec<ScoreRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<scores>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn join_letters<'a>(it: impl Iterator<Item = &'a crate::phase::PhaseLetter>) -> String {
    it.map(|l| l.as_str()).collect::<Vec<_>>().join(";")
}

pub const CSV_HEADER: [&str; 19] = [
    "trajectory_id",
    "instance_id",
    "plan_setting_name",
    "model_name",
    "difficulty",
    "resolved",
    "plan",
    "ppc",
    "poc",
    "ppf",
    "pc",
    "missing_phases",
    "extra_phases",
    "first_occurrence_indices",
    "lis_length",
    "langutory",
    "nc",
    "tec",
    "lc",
];

/// Flat CSV, full precision; not-applicable metrics are empty cells.
pub fn write_scores_csv<W: Write>(records: &[ScoreRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let s = r.scores.as_ref();
        let firsts = s
            .map(|s| {
                s.first_occurrence_indices
                    .iter()
                    .map(|i| i.map_or("-".to_string(), |v| v.to_string()))
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        w.write_record([
            r.trajectory_id.clone(),
            r.instance_id.clone(),
            r.plan_setting_name.clone(),
            r.model_name.clone(),
            r.difficulty.to_string(),
            r.resolved.map(|b| b.to_string()).unwrap_or_default(),
            r.plan.clone(),
            fmt_opt(s.map(|s| s.ppc)),
            fmt_opt(s.map(|s| s.poc)),
            fmt_opt(s.map(|s| s.ppf)),
            fmt_opt(s.map(|s| s.pc)),
            s.map(|s| join_letters(s.missing_phases.iter())).unwrap_or_default(),
            s.map(|s| join_letters(s.extra_phases.iter())).unwrap_or_default(),
            firsts,
            s.map(|s| s.lis_length.to_string()).unwrap_or_default(),
            r.langutory.clone(),
            r.graph.nc.to_string(),
            r.graph.tec.to_string(),
            r.graph.lc.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
