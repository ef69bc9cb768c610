//! Stage-wise phase transition flows across a corpus.
//!
//! Each phase string is collapsed to its sequence of phase changes. Stage `s`
//! carries the transition out of the `s`-th phase: to the next phase, or to
//! TERMINAL when the trajectory ends there. At the stage horizon any further
//! activity is folded into TERMINAL and flagged as truncated.

mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use svg::{render_svg, StyleConfig};

use crate::error::{Error, Result};
use crate::langutory::{runs, Langutory};
use crate::phase::PhaseLetter;

pub const DEFAULT_MAX_STAGES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowTarget {
    Phase(PhaseLetter),
    /// The trajectory ended after this phase.
    Terminal,
    /// The trajectory continued past the stage horizon.
    Truncated,
}

impl FlowTarget {
    pub fn is_termination(self) -> bool {
        !matches!(self, FlowTarget::Phase(_))
    }
}

impl fmt::Display for FlowTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowTarget::Phase(l) => write!(f, "{l}"),
            FlowTarget::Terminal | FlowTarget::Truncated => f.write_str("TERMINAL"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowKey {
    pub stage: usize,
    pub from: PhaseLetter,
    pub to: FlowTarget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTable {
    pub max_stages: usize,
    pub flows: BTreeMap<FlowKey, u64>,
    pub population: u64,
}

/// Maximal runs of identical letters collapsed to one letter each.
pub fn collapse_runs(lang: &Langutory) -> Vec<PhaseLetter> {
    collapse_letters(lang.letters())
}

pub fn collapse_letters(letters: &[PhaseLetter]) -> Vec<PhaseLetter> {
    runs(letters).into_iter().map(|(l, _)| l).collect()
}

impl FlowTable {
    pub fn new(max_stages: usize) -> Result<Self> {
        if max_stages == 0 {
            return Err(Error::Config("stage horizon must be at least 1".into()));
        }
        Ok(FlowTable {
            max_stages,
            flows: BTreeMap::new(),
            population: 0,
        })
    }

    /// Adds one trajectory's collapsed phase sequence. Empty sequences are
    /// ignored.
    pub fn add_sequence(&mut self, seq: &[PhaseLetter]) {
        if seq.is_empty() {
            return;
        }
        self.population += 1;
        let horizon = seq.len().min(self.max_stages);
        for stage in 1..=horizon {
            let from = seq[stage - 1];
            let to = if stage == seq.len() {
                FlowTarget::Terminal
            } else if stage == self.max_stages {
                FlowTarget::Truncated
            } else {
                FlowTarget::Phase(seq[stage])
            };
            *self.flows.entry(FlowKey { stage, from, to }).or_insert(0) += 1;
        }
    }

    /// Combines two tables over the same horizon. Commutative and associative.
    pub fn merge(mut self, other: &FlowTable) -> Result<Self> {
        if self.max_stages != other.max_stages {
            return Err(Error::Config(format!(
                "cannot merge flows with horizons {} and {}",
                self.max_stages, other.max_stages
            )));
        }
        self.population += other.population;
        for (k, v) in &other.flows {
            *self.flows.entry(*k).or_insert(0) += v;
        }
        Ok(self)
    }

    /// Deepest stage with any flow.
    pub fn stage_count(&self) -> usize {
        self.flows.keys().map(|k| k.stage).max().unwrap_or(0)
    }

    /// Trajectories reaching stage `s` (population for stage 1).
    pub fn arrivals(&self, stage: usize) -> u64 {
        if stage <= 1 {
            return self.population;
        }
        self.flows
            .iter()
            .filter(|(k, _)| k.stage == stage - 1 && !k.to.is_termination())
            .map(|(_, v)| v)
            .sum()
    }

    pub fn outflow(&self, stage: usize) -> u64 {
        self.flows
            .iter()
            .filter(|(k, _)| k.stage == stage && !k.to.is_termination())
            .map(|(_, v)| v)
            .sum()
    }

    pub fn terminations(&self, stage: usize) -> u64 {
        self.flows
            .iter()
            .filter(|(k, _)| k.stage == stage && k.to.is_termination())
            .map(|(_, v)| v)
            .sum()
    }

    /// Verifies flow conservation at every stage and node. Returns a
    /// description of the first violation.
    pub fn check_conservation(&self) -> std::result::Result<(), String> {
        let mut total_terminations = 0;
        for stage in 1..=self.stage_count().max(1) {
            let arrivals = self.arrivals(stage);
            let out = self.outflow(stage);
            let term = self.terminations(stage);
            if arrivals != out + term {
                return Err(format!("stage {stage}: arrivals {arrivals} != outflow {out} + terminations {term}"));
            }
            total_terminations += term;
            if stage > 1 {
                for letter in PhaseLetter::ALL {
                    let into: u64 = self
                        .flows
                        .iter()
                        .filter(|(k, _)| k.stage == stage - 1 && k.to == FlowTarget::Phase(letter))
                        .map(|(_, v)| v)
                        .sum();
                    let out_of: u64 = self
                        .flows
                        .iter()
                        .filter(|(k, _)| k.stage == stage && k.from == letter)
                        .map(|(_, v)| v)
                        .sum();
                    if into != out_of {
                        return Err(format!("stage {stage} node {letter}: in {into} != out {out_of}"));
                    }
                }
            }
        }
        if total_terminations != self.population {
            return Err(format!(
                "terminations {total_terminations} != population {}",
                self.population
            ));
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<FlowRecord> {
        self.flows
            .iter()
            .map(|(k, &count)| FlowRecord {
                stage: k.stage,
                from: k.from.to_string(),
                to: k.to.to_string(),
                count,
                proportion: if self.population == 0 {
                    0.0
                } else {
                    count as f64 / self.population as f64
                },
                truncated: k.to == FlowTarget::Truncated,
            })
            .collect()
    }

    pub fn to_data(&self) -> FlowData {
        FlowData {
            population: self.population,
            max_stages: self.max_stages,
            records: self.records(),
        }
    }
}

pub fn build_flow<'a>(langs: impl IntoIterator<Item = &'a Langutory>, max_stages: usize) -> Result<FlowTable> {
    let mut table = FlowTable::new(max_stages)?;
    for lang in langs {
        table.add_sequence(&collapse_runs(lang));
    }
    Ok(table)
}

/// Parallel reduction; equal to [`build_flow`] on the same input.
pub fn build_flow_parallel(langs: &[Langutory], max_stages: usize) -> Result<FlowTable> {
    let empty = FlowTable::new(max_stages)?;
    langs
        .par_iter()
        .fold(
            || empty.clone(),
            |mut t, lang| {
                t.add_sequence(&collapse_runs(lang));
                t
            },
        )
        .map(Ok::<_, Error>)
        .try_reduce(|| empty.clone(), |a, b| a.merge(&b))
}

/// One table per stratum key.
pub fn build_flow_stratified<'a, K: Ord + Clone>(
    items: impl IntoIterator<Item = (K, &'a Langutory)>,
    max_stages: usize,
) -> Result<BTreeMap<K, FlowTable>> {
    FlowTable::new(max_stages)?;
    let mut out: BTreeMap<K, FlowTable> = BTreeMap::new();
    for (key, lang) in items {
        out.entry(key)
            .or_insert_with(|| FlowTable::new(max_stages).expect("horizon checked"))
            .add_sequence(&collapse_runs(lang));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub stage: usize,
    pub from: String,
    pub to: String,
    pub count: u64,
    pub proportion: f64,
    pub truncated: bool,
}

/// Machine-readable flow file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowData {
    pub population: u64,
    pub max_stages: usize,
    pub records: Vec<FlowRecord>,
}

#[derive(Debug, Clone)]
pub struct SankeyArtifacts {
    pub data_json: PathBuf,
    pub data_csv: PathBuf,
    pub svg: PathBuf,
}

/// Writes `<stem>.json`, `<stem>.csv` and `<stem>.svg` under `dir`.
pub fn emit_sankey(flow: &FlowTable, style: &StyleConfig, dir: &Path, stem: &str) -> Result<SankeyArtifacts> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data_json = dir.join(format!("{stem}.json"));
    let data_csv = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));

    let json = serde_json::to_string_pretty(&flow.to_data())?;
    std::fs::write(&data_json, json + "\n").map_err(|e| Error::io(&data_json, e))?;

    let mut w = csv::Writer::from_path(&data_csv)?;
    for rec in flow.records() {
        w.serialize(rec)?;
    }
    w.flush().map_err(|e| Error::io(&data_csv, e))?;

    std::fs::write(&svg_path, render_svg(flow, style)).map_err(|e| Error::io(&svg_path, e))?;
    Ok(SankeyArtifacts {
        data_json,
        data_csv,
        svg: svg_path,
    })
}
