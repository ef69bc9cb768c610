//! Shared fixtures and oracles for the integration tests.
#![allow(dead_code)]

use plancomp::ingest::{ActionKind, Corpus, Difficulty, StepRecord, TrajectoryRecord};
use plancomp::phase::PhaseLetter;
use plancomp::plan::{PlanSpec, SettingName};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn traj(id: &str, steps: Vec<StepRecord>) -> TrajectoryRecord {
    TrajectoryRecord {
        trajectory_id: id.to_string(),
        instance_id: format!("{id}-instance"),
        model_name: "fixture-model".to_string(),
        plan_setting_name: "standard".to_string(),
        difficulty: Difficulty::Unknown,
        resolved: None,
        steps,
    }
}

fn step(i: usize, kind: ActionKind, cmd: &str, target: &str) -> StepRecord {
    StepRecord::new(i, kind, cmd).with_target(target)
}

/// Navigate, reproduce twice, patch, validate three times, patch, validate.
pub fn compliant_example() -> TrajectoryRecord {
    use ActionKind::*;
    traj(
        "compliant",
        vec![
            step(1, FileView, "open xarray/core/nanops.py", "xarray/core/nanops.py"),
            step(2, FileCreate, "create reproduce.py", "reproduce.py"),
            step(3, ShellExec, "python reproduce.py", "reproduce.py"),
            step(4, FileEdit, "edit xarray/core/nanops.py", "xarray/core/nanops.py"),
            step(5, FileCreate, "create test_comprehensive.py", "test_comprehensive.py"),
            step(6, ShellExec, "python test_comprehensive.py", "test_comprehensive.py"),
            step(7, ShellExec, "python reproduce.py", "reproduce.py"),
            step(8, FileEdit, "edit xarray/core/nanops.py", "xarray/core/nanops.py"),
            step(9, ShellExec, "python test_comprehensive.py", "test_comprehensive.py"),
        ],
    )
}

/// Reproduction first (steps 1-4), then navigation, a failed and a
/// successful patch, and one validation run.
pub fn out_of_order_example() -> TrajectoryRecord {
    use ActionKind::*;
    traj(
        "out-of-order",
        vec![
            step(1, FileCreate, "create reproduce_bug.py", "reproduce_bug.py"),
            step(2, ShellExec, "python reproduce_bug.py", "reproduce_bug.py"),
            step(3, FileEdit, "edit reproduce_bug.py", "reproduce_bug.py"),
            step(4, ShellExec, "python reproduce_bug.py", "reproduce_bug.py"),
            step(5, FileSearch, "find_file core.py", "src/core.py"),
            step(6, FileView, "open src/core.py", "src/core.py"),
            step(7, FileView, "goto 120", "src/core.py"),
            step(8, FileEdit, "edit 120:125", "src/core.py").with_error(true),
            step(9, FileEdit, "edit 120:126", "src/core.py"),
            step(10, ShellExec, "python reproduce_bug.py", "reproduce_bug.py"),
        ],
    )
}

/// Navigation then a patch: no reproduction, no validation.
pub fn partial_example() -> TrajectoryRecord {
    use ActionKind::*;
    traj(
        "partial",
        vec![
            step(1, FileSearch, "search_dir parse_header", "lib"),
            step(2, FileView, "open lib/parser.py", "lib/parser.py"),
            step(3, FileView, "scroll_down", "lib/parser.py"),
            step(4, FileEdit, "edit 40:42", "lib/parser.py"),
        ],
    )
}

pub fn standard() -> PlanSpec {
    SettingName::Standard.plan_spec().expect("standard has a plan")
}

/// The seven settings that carry a plan.
pub fn plan_specs() -> Vec<PlanSpec> {
    SettingName::ALL.iter().filter_map(|s| s.plan_spec()).collect()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_letters(rng: &mut StdRng, max_len: usize) -> Vec<PhaseLetter> {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| *PhaseLetter::ALL.choose(rng).unwrap()).collect()
}

/// A random trajectory built from step kinds the default classifier maps to
/// every phase letter.
pub fn random_trajectory(rng: &mut StdRng, id: &str, max_len: usize) -> TrajectoryRecord {
    use ActionKind::*;
    let n = rng.gen_range(1..=max_len);
    let mut steps = Vec::with_capacity(n);
    for i in 1..=n {
        let s = match rng.gen_range(0..9) {
            0 => step(i, FileView, "open src/mod.py", &format!("src/mod{}.py", rng.gen_range(0..4))),
            1 => step(i, FileSearch, "search_dir foo", "src"),
            2 => step(i, FileCreate, "create reproduce.py", "reproduce.py"),
            3 => step(i, ShellExec, "python reproduce.py", "reproduce.py"),
            4 => step(i, FileEdit, "edit 1:2", &format!("src/mod{}.py", rng.gen_range(0..4))),
            5 => StepRecord::new(i, ShellExec, "pytest tests/test_mod.py"),
            6 => StepRecord::new(i, ShellExec, "ls -la"),
            7 => StepRecord::new(i, Message, "Summary of the changes made"),
            _ => step(i, FileCreate, "create tests/test_new.py", "tests/test_new.py"),
        };
        steps.push(s);
    }
    let mut t = traj(id, steps);
    t.model_name = ["model-a", "model-b", "model-c"].choose(rng).unwrap().to_string();
    t.difficulty = *[Difficulty::Easy, Difficulty::Medium, Difficulty::Hard, Difficulty::Unknown]
        .choose(rng)
        .unwrap();
    t.resolved = [Some(true), Some(false), None].choose(rng).copied().flatten();
    t
}

pub fn synthetic_corpus(seed: u64, size: usize) -> Corpus {
    let mut r = rng(seed);
    let records = (0..size)
        .map(|i| random_trajectory(&mut r, &format!("traj-{i:04}"), 40))
        .collect();
    Corpus::from_records(records, "synthetic").unwrap()
}

/// LIS by enumerating every subsequence.
pub fn brute_force_lis(xs: &[i64]) -> usize {
    let n = xs.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let picked: Vec<i64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| xs[i]).collect();
        if picked.windows(2).all(|w| w[0] < w[1]) {
            best = best.max(picked.len());
        }
    }
    best
}

fn midrank_u(a: &[f64], b: &[f64]) -> f64 {
    // U by direct pair counting: ties count one half.
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided Mann-Whitney p by enumerating every relabelling of the pooled
/// sample.
pub fn permutation_mann_whitney_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (na, n) = (a.len(), pooled.len());
    let mean = (a.len() * b.len()) as f64 / 2.0;
    let observed = (midrank_u(a, b) - mean).abs();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let (xa, xb): (Vec<f64>, Vec<f64>) = {
            let mut xa = Vec::new();
            let mut xb = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 { xa.push(*v) } else { xb.push(*v) }
            }
            (xa, xb)
        };
        total += 1;
        if (midrank_u(&xa, &xb) - mean).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

pub fn binomial_two_sided(b: u64, c: u64) -> f64 {
    let n = b + c;
    let k = b.min(c);
    let choose = |n: u64, k: u64| (0..k).fold(1.0f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let tail: f64 = (0..=k).map(|i| choose(n, i)).sum::<f64>() / 2f64.powi(n as i32);
    (2.0 * tail).min(1.0)
}
