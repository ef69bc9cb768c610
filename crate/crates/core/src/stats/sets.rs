//! Outcome bookkeeping across runs and plan settings.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Corpus;

/// Resolved label per instance id.
pub type Outcomes = BTreeMap<String, Option<bool>>;

fn outcomes_of(corpus: &Corpus) -> Result<Outcomes> {
    let mut out = Outcomes::new();
    for t in &corpus.trajectories {
        if out.insert(t.instance_id.clone(), t.resolved).is_some() {
            return Err(Error::InstanceMismatch(format!(
                "instance {} appears more than once in one run",
                t.instance_id
            )));
        }
    }
    Ok(out)
}

fn same_instances<'a>(maps: impl IntoIterator<Item = (&'a str, &'a Outcomes)>) -> Result<()> {
    let mut iter = maps.into_iter();
    let Some((first_name, first)) = iter.next() else {
        return Ok(());
    };
    for (name, other) in iter {
        if !first.keys().eq(other.keys()) {
            let only_first = first.keys().filter(|k| !other.contains_key(*k)).count();
            let only_other = other.keys().filter(|k| !first.contains_key(*k)).count();
            return Err(Error::InstanceMismatch(format!(
                "{first_name} and {name} differ ({only_first} vs {only_other} unshared instances)"
            )));
        }
    }
    Ok(())
}

/// Instances whose resolved label is known and identical in every run.
pub fn deterministic_subset(runs: &[Corpus]) -> Result<BTreeSet<String>> {
    let maps = runs.iter().map(outcomes_of).collect::<Result<Vec<_>>>()?;
    deterministic_subset_from_outcomes(&maps)
}

pub fn deterministic_subset_from_outcomes(runs: &[Outcomes]) -> Result<BTreeSet<String>> {
    if runs.len() < 2 {
        return Err(Error::InstanceMismatch(format!("need at least two runs, got {}", runs.len())));
    }
    let names: Vec<String> = (1..=runs.len()).map(|i| format!("run {i}")).collect();
    same_instances(names.iter().map(String::as_str).zip(runs))?;
    if runs[0].is_empty() {
        return Err(Error::InstanceMismatch("runs share no instances".into()));
    }
    Ok(runs[0]
        .iter()
        .filter(|(id, first)| first.is_some() && runs[1..].iter().all(|r| r.get(*id) == Some(*first)))
        .map(|(id, _)| id.clone())
        .collect())
}

/// UpSet-style exclusive intersections: every instance is counted once, in
/// the exact set of settings that resolved it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionTable {
    pub settings: Vec<String>,
    pub memberships: BTreeMap<String, BTreeSet<String>>,
    pub intersection_counts: BTreeMap<BTreeSet<String>, usize>,
}

impl IntersectionTable {
    /// Number of instances resolved under each setting.
    pub fn set_sizes(&self) -> BTreeMap<String, usize> {
        self.settings
            .iter()
            .map(|s| (s.clone(), self.memberships.values().filter(|m| m.contains(s)).count()))
            .collect()
    }

    /// Rows sorted by descending count, then by membership.
    pub fn rows(&self) -> Vec<(&BTreeSet<String>, usize)> {
        let mut rows: Vec<_> = self.intersection_counts.iter().map(|(k, &v)| (k, v)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }

    /// CSV with one 0/1 column per setting followed by the count.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.settings.iter().map(String::as_str).collect();
        header.push("count");
        w.write_record(&header)?;
        for (set, count) in self.rows() {
            let mut row: Vec<String> = self
                .settings
                .iter()
                .map(|s| if set.contains(s) { "1".into() } else { "0".into() })
                .collect();
            row.push(count.to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let n = header.len().saturating_sub(1);
        let settings: Vec<String> = header.iter().take(n).map(str::to_string).collect();
        let mut intersection_counts = BTreeMap::new();
        for rec in r.records() {
            let rec = rec?;
            let set: BTreeSet<String> = settings
                .iter()
                .enumerate()
                .filter(|(i, _)| rec.get(*i) == Some("1"))
                .map(|(_, s)| s.clone())
                .collect();
            let count = rec
                .get(n)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::Config("intersection row without a count".into()))?;
            intersection_counts.insert(set, count);
        }
        Ok(IntersectionTable {
            settings,
            memberships: BTreeMap::new(),
            intersection_counts,
        })
    }
}

pub fn intersection_table(corpora: &BTreeMap<String, Corpus>) -> Result<IntersectionTable> {
    let maps = corpora
        .iter()
        .map(|(k, c)| Ok((k.clone(), outcomes_of(c)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    intersection_table_from_outcomes(&maps)
}

pub fn intersection_table_from_outcomes(by_setting: &BTreeMap<String, Outcomes>) -> Result<IntersectionTable> {
    same_instances(by_setting.iter().map(|(k, v)| (k.as_str(), v)))?;
    let settings: Vec<String> = by_setting.keys().cloned().collect();
    let mut memberships: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (setting, outcomes) in by_setting {
        for (id, resolved) in outcomes {
            let entry = memberships.entry(id.clone()).or_default();
            if *resolved == Some(true) {
                entry.insert(setting.clone());
            }
        }
    }
    let mut intersection_counts = BTreeMap::new();
    for set in memberships.values().filter(|s| !s.is_empty()) {
        *intersection_counts.entry(set.clone()).or_insert(0) += 1;
    }
    Ok(IntersectionTable {
        settings,
        memberships,
        intersection_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcomes(pairs: &[(&str, Option<bool>)]) -> Outcomes {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn consistent_instances_survive() {
        let runs = vec![
            outcomes(&[("x", Some(true)), ("y", Some(true)), ("z", Some(false))]),
            outcomes(&[("x", Some(true)), ("y", Some(false)), ("z", Some(false))]),
            outcomes(&[("x", Some(true)), ("y", Some(true)), ("z", Some(false))]),
        ];
        assert_eq!(deterministic_subset_from_outcomes(&runs).unwrap(), set(&["x", "z"]));
    }

    #[test]
    fn unlabelled_instances_are_not_deterministic() {
        let runs = vec![outcomes(&[("x", None)]), outcomes(&[("x", None)])];
        assert!(deterministic_subset_from_outcomes(&runs).unwrap().is_empty());
    }

    #[test]
    fn mismatched_or_empty_instance_sets_are_errors() {
        let a = outcomes(&[("x", Some(true))]);
        let b = outcomes(&[("y", Some(true))]);
        assert!(matches!(deterministic_subset_from_outcomes(&[a.clone(), b]), Err(Error::InstanceMismatch(_))));
        assert!(deterministic_subset_from_outcomes(&[a]).is_err());
        assert!(deterministic_subset_from_outcomes(&[Outcomes::new(), Outcomes::new()]).is_err());
    }

    #[test]
    fn exclusive_intersections() {
        // i1: standard only; i2: standard + no_plan; i3: all three;
        // i4: none; i5: reminded only.
        let by: BTreeMap<String, Outcomes> = [
            ("standard", outcomes(&[("i1", Some(true)), ("i2", Some(true)), ("i3", Some(true)), ("i4", Some(false)), ("i5", Some(false))])),
            ("no_plan", outcomes(&[("i1", Some(false)), ("i2", Some(true)), ("i3", Some(true)), ("i4", Some(false)), ("i5", None)])),
            ("reminded", outcomes(&[("i1", Some(false)), ("i2", Some(false)), ("i3", Some(true)), ("i4", Some(false)), ("i5", Some(true))])),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let t = intersection_table_from_outcomes(&by).unwrap();
        assert_eq!(t.intersection_counts.get(&set(&["standard"])), Some(&1));
        assert_eq!(t.intersection_counts.get(&set(&["no_plan", "standard"])), Some(&1));
        assert_eq!(t.intersection_counts.get(&set(&["no_plan", "reminded", "standard"])), Some(&1));
        assert_eq!(t.intersection_counts.get(&set(&["reminded"])), Some(&1));
        assert_eq!(t.intersection_counts.values().sum::<usize>(), 4);
        assert_eq!(t.set_sizes().get("standard"), Some(&3));

        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("no_plan,reminded,standard,count\n"));
        let back = IntersectionTable::read_csv(&text).unwrap();
        assert_eq!(back.intersection_counts, t.intersection_counts);
    }
}
