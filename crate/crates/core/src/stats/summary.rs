//! Grouped summaries of per-trajectory scores.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::compliance::ComplianceScores;
use crate::error::{Error, Result};
use crate::ingest::Difficulty;
use crate::scores::ScoreRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupField {
    Model,
    Setting,
    Difficulty,
    Resolved,
}

impl GroupField {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupField::Model => "model",
            GroupField::Setting => "setting",
            GroupField::Difficulty => "difficulty",
            GroupField::Resolved => "resolved",
        }
    }
}

impl std::str::FromStr for GroupField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "model" | "model_name" => Ok(GroupField::Model),
            "setting" | "plan_setting" | "plan_setting_name" => Ok(GroupField::Setting),
            "difficulty" => Ok(GroupField::Difficulty),
            "resolved" | "outcome" => Ok(GroupField::Resolved),
            other => Err(Error::Config(format!("unknown grouping field `{other}`"))),
        }
    }
}

/// Group identity; `None` fields are not grouped on.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub model: Option<String>,
    pub setting: Option<String>,
    pub difficulty: Option<Difficulty>,
    pub resolved: Option<String>,
}

impl GroupKey {
    fn of(rec: &ScoreRecord, fields: &[GroupField]) -> Self {
        let mut key = GroupKey::default();
        for f in fields {
            match f {
                GroupField::Model => key.model = Some(rec.model_name.clone()),
                GroupField::Setting => key.setting = Some(rec.plan_setting_name.clone()),
                GroupField::Difficulty => key.difficulty = Some(rec.difficulty),
                GroupField::Resolved => {
                    key.resolved = Some(match rec.resolved {
                        Some(true) => "resolved".into(),
                        Some(false) => "unresolved".into(),
                        None => "unlabelled".into(),
                    })
                }
            }
        }
        key
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [
            self.model.clone(),
            self.setting.clone(),
            self.difficulty.map(|d| d.to_string()),
            self.resolved.clone(),
        ]
        .into_iter()
        .flatten()
        .collect();
        if parts.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&parts.join("/"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Some(MetricSummary {
            mean: sorted.iter().sum::<f64>() / n as f64,
            median,
            min: sorted[0],
            max: sorted[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedScores {
    pub key: GroupKey,
    /// Trajectories in the group, including those without applicable scores.
    pub trajectories: usize,
    pub values: Vec<ComplianceScores>,
    pub ppc: Option<MetricSummary>,
    pub poc: Option<MetricSummary>,
    pub ppf: Option<MetricSummary>,
    pub pc: Option<MetricSummary>,
    pub resolved: usize,
    pub labelled: usize,
    pub mean_nc: f64,
    pub mean_tec: f64,
    pub mean_lc: f64,
}

impl GroupedScores {
    /// Resolved share among trajectories with an outcome label.
    pub fn success_rate(&self) -> Option<f64> {
        (self.labelled > 0).then(|| self.resolved as f64 / self.labelled as f64)
    }

    fn build(key: GroupKey, recs: &[&ScoreRecord]) -> Self {
        let values: Vec<ComplianceScores> = recs.iter().filter_map(|r| r.scores.clone()).collect();
        let pick = |f: fn(&ComplianceScores) -> f64| MetricSummary::of(&values.iter().map(f).collect::<Vec<_>>());
        let n = recs.len().max(1) as f64;
        GroupedScores {
            key,
            trajectories: recs.len(),
            ppc: pick(|s| s.ppc),
            poc: pick(|s| s.poc),
            ppf: pick(|s| s.ppf),
            pc: pick(|s| s.pc),
            values,
            resolved: recs.iter().filter(|r| r.resolved == Some(true)).count(),
            labelled: recs.iter().filter(|r| r.resolved.is_some()).count(),
            mean_nc: recs.iter().map(|r| r.graph.nc as f64).sum::<f64>() / n,
            mean_tec: recs.iter().map(|r| r.graph.tec as f64).sum::<f64>() / n,
            mean_lc: recs.iter().map(|r| r.graph.lc as f64).sum::<f64>() / n,
        }
    }
}

/// Groups records by the given fields; groups are ordered by key.
pub fn group_scores(records: &[ScoreRecord], fields: &[GroupField]) -> Vec<GroupedScores> {
    let mut groups: BTreeMap<GroupKey, Vec<&ScoreRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(GroupKey::of(r, fields)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(k, recs)| GroupedScores::build(k, &recs))
        .collect()
}

/// One row per group: the grouping columns, counts, then full-precision
/// summaries. Missing values are empty cells.
pub fn write_summary_csv<W: std::io::Write>(groups: &[GroupedScores], fields: &[GroupField], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = fields.iter().map(|f| f.as_str().to_string()).collect();
    header.extend(["n", "scored", "success_rate"].map(String::from));
    for m in ["ppc", "poc", "ppf", "pc"] {
        for stat in ["mean", "median", "min", "max"] {
            header.push(format!("{m}_{stat}"));
        }
    }
    header.extend(["mean_nc", "mean_tec", "mean_lc"].map(String::from));
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for g in groups {
        let mut row: Vec<String> = fields
            .iter()
            .map(|f| match f {
                GroupField::Model => g.key.model.clone(),
                GroupField::Setting => g.key.setting.clone(),
                GroupField::Difficulty => g.key.difficulty.map(|d| d.to_string()),
                GroupField::Resolved => g.key.resolved.clone(),
            })
            .map(Option::unwrap_or_default)
            .collect();
        row.push(g.trajectories.to_string());
        row.push(g.values.len().to_string());
        row.push(opt(g.success_rate()));
        for m in [g.ppc, g.poc, g.ppf, g.pc] {
            row.push(opt(m.map(|s| s.mean)));
            row.push(opt(m.map(|s| s.median)));
            row.push(opt(m.map(|s| s.min)));
            row.push(opt(m.map(|s| s.max)));
        }
        row.extend([g.mean_nc, g.mean_tec, g.mean_lc].map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_fields_parse() {
        assert_eq!("Resolved".parse::<GroupField>().unwrap(), GroupField::Resolved);
        assert_eq!("model_name".parse::<GroupField>().unwrap(), GroupField::Model);
        assert!("colour".parse::<GroupField>().is_err());
    }

    #[test]
    fn summary_of_values() {
        let s = MetricSummary::of(&[1.0, 0.5, 1.0, 0.0]).unwrap();
        assert_eq!((s.mean, s.median, s.min, s.max), (0.625, 0.75, 0.0, 1.0));
        assert_eq!(MetricSummary::of(&[0.2]).unwrap().median, 0.2);
        assert!(MetricSummary::of(&[]).is_none());
    }
}
