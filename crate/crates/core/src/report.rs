//! Consolidated human-readable report, in plain text and CSV.
//!
//! Numbers are rounded to two decimals here; score files keep full precision.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Difficulty;
use crate::scores::ScoreRecord;
use crate::stats::sets::IntersectionTable;
use crate::stats::{group_scores, GroupField, GroupedScores, MetricSummary, TestMethod};

/// One statistical comparison, as written by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `mannwhitney`, `mcnemar` or `pearson`.
    pub test: String,
    pub metric: String,
    pub a: String,
    pub b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub method: Option<TestMethod>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportInputs<'a> {
    pub scores: &'a [ScoreRecord],
    pub intersection: Option<&'a IntersectionTable>,
    /// `None` when no stats inputs were given; the tests section is then omitted.
    pub tests: Option<&'a [TestResult]>,
}

type MetricOf = fn(&GroupedScores) -> Option<MetricSummary>;
type ValueOf = Box<dyn Fn(&GroupedScores) -> Option<f64>>;

const METRICS: [(&str, MetricOf); 4] = [
    ("PPC", |g| g.ppc),
    ("POC", |g| g.poc),
    ("PPF", |g| g.ppf),
    ("PC", |g| g.pc),
];

pub const TESTS_OMITTED: &str = "tests section omitted: no statistical inputs given";

pub fn r2(v: f64) -> String {
    format!("{v:.2}")
}

fn opt2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), r2)
}

struct Grid {
    models: Vec<String>,
    difficulties: Vec<Difficulty>,
    cells: Vec<GroupedScores>,
}

impl Grid {
    fn new(scores: &[ScoreRecord]) -> Self {
        let cells = group_scores(scores, &[GroupField::Model, GroupField::Difficulty]);
        let models: BTreeSet<String> = cells.iter().filter_map(|g| g.key.model.clone()).collect();
        let difficulties: BTreeSet<Difficulty> = cells.iter().filter_map(|g| g.key.difficulty).collect();
        Grid {
            models: models.into_iter().collect(),
            difficulties: difficulties.into_iter().collect(),
            cells,
        }
    }

    fn cell(&self, model: &str, d: Difficulty) -> Option<&GroupedScores> {
        self.cells
            .iter()
            .find(|g| g.key.model.as_deref() == Some(model) && g.key.difficulty == Some(d))
    }
}

fn pad_table(rows: &[Vec<String>], out: &mut String) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s:<w$}", w = widths[i]))
            .collect();
        let _ = writeln!(out, "  {}", line.join("  ").trim_end());
    }
}

pub fn render_text(inputs: &ReportInputs<'_>) -> String {
    let mut out = String::new();
    let scores = inputs.scores;
    let applicable = scores.iter().filter(|r| r.scores.is_some()).count();
    let _ = writeln!(out, "Plan compliance report");
    let _ = writeln!(out, "======================");
    let _ = writeln!(
        out,
        "trajectories: {}  scored: {}  not applicable: {}",
        scores.len(),
        applicable,
        scores.len() - applicable
    );

    let grid = Grid::new(scores);
    let header: Vec<String> = std::iter::once("model".to_string())
        .chain(grid.difficulties.iter().map(|d| d.to_string()))
        .collect();
    let mut tables: Vec<(&str, ValueOf)> = METRICS
        .iter()
        .map(|&(name, f)| (name, Box::new(move |g: &GroupedScores| f(g).map(|m| m.mean)) as ValueOf))
        .collect();
    tables.push(("Success rate", Box::new(|g: &GroupedScores| g.success_rate())));
    for (name, value) in &tables {
        let _ = writeln!(out, "\n{name} (mean) by model x difficulty");
        let mut rows = vec![header.clone()];
        for m in &grid.models {
            let mut row = vec![m.clone()];
            for d in &grid.difficulties {
                row.push(opt2(grid.cell(m, *d).and_then(value)));
            }
            rows.push(row);
        }
        pad_table(&rows, &mut out);
    }

    let _ = writeln!(out, "\nPer-trajectory scores");
    let mut rows = vec![["trajectory", "setting", "langutory", "PPC", "POC", "PPF", "PC"].map(String::from).to_vec()];
    for r in scores {
        let s = r.scores.as_ref();
        rows.push(vec![
            r.trajectory_id.clone(),
            r.plan_setting_name.clone(),
            r.langutory.clone(),
            opt2(s.map(|s| s.ppc)),
            opt2(s.map(|s| s.poc)),
            opt2(s.map(|s| s.ppf)),
            opt2(s.map(|s| s.pc)),
        ]);
    }
    pad_table(&rows, &mut out);

    let _ = writeln!(out, "\nResolved-instance intersections");
    match inputs.intersection {
        Some(t) => {
            let mut rows = vec![vec!["settings".to_string(), "count".to_string()]];
            for (set, n) in t.rows() {
                rows.push(vec![set.iter().cloned().collect::<Vec<_>>().join("+"), n.to_string()]);
            }
            pad_table(&rows, &mut out);
        }
        None => {
            let _ = writeln!(out, "  (no intersection table given)");
        }
    }

    match inputs.tests {
        Some(tests) => {
            let _ = writeln!(out, "\nStatistical tests");
            let mut rows = vec![["test", "metric", "a", "b", "n_a", "n_b", "statistic", "p", "method"]
                .map(String::from)
                .to_vec()];
            for t in tests {
                rows.push(vec![
                    t.test.clone(),
                    t.metric.clone(),
                    t.a.clone(),
                    t.b.clone(),
                    t.n_a.to_string(),
                    t.n_b.to_string(),
                    r2(t.statistic),
                    t.p_value.map_or("-".into(), |p| format!("{p:.4}")),
                    t.method.map_or("-".into(), |m| format!("{m:?}").to_lowercase()),
                ]);
            }
            pad_table(&rows, &mut out);
        }
        None => {
            let _ = writeln!(out, "\n{TESTS_OMITTED}");
        }
    }
    out
}

/// Long-form CSV: `section,key,column,value`.
pub fn render_csv(inputs: &ReportInputs<'_>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "key", "column", "value"])?;
    let grid = Grid::new(inputs.scores);
    for g in &grid.cells {
        let key = g.key.to_string();
        for (name, f) in METRICS {
            w.write_record(["mean_by_model_difficulty", &key, name, &opt2(f(g).map(|m| m.mean))])?;
        }
        w.write_record(["mean_by_model_difficulty", &key, "success_rate", &opt2(g.success_rate())])?;
        w.write_record(["mean_by_model_difficulty", &key, "n", &g.trajectories.to_string()])?;
    }
    for r in inputs.scores {
        let s = r.scores.as_ref();
        for (name, v) in [
            ("PPC", s.map(|s| s.ppc)),
            ("POC", s.map(|s| s.poc)),
            ("PPF", s.map(|s| s.ppf)),
            ("PC", s.map(|s| s.pc)),
        ] {
            w.write_record(["trajectory", &r.trajectory_id, name, &opt2(v)])?;
        }
    }
    if let Some(t) = inputs.intersection {
        for (set, n) in t.rows() {
            let key = set.iter().cloned().collect::<Vec<_>>().join("+");
            w.write_record(["intersection", &key, "count", &n.to_string()])?;
        }
    }
    if let Some(tests) = inputs.tests {
        for t in tests {
            let key = format!("{}:{}:{}:{}", t.test, t.metric, t.a, t.b);
            w.write_record(["test", &key, "statistic", &r2(t.statistic)])?;
            w.write_record(["test", &key, "p_value", &t.p_value.map_or("-".into(), |p| format!("{p:.4}"))])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}
