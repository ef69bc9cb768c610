//! Plan compliance metrics.
//!
//! For a phase string `L` and plan alphabet `Φ` with `m = |Φ|`:
//!
//! * `ppc = |Φ ∩ letters(L)| / m`
//! * `poc = LIS(first-occurrence indices of Φ in expected order) / m`;
//!   phases that never occur contribute nothing to the LIS input
//! * `ppf = m / |Φ ∪ letters(L)|`
//! * `pc  = (ppc · poc · ppf)^(1/3)`

mod lis;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use lis::longest_increasing_subsequence;

use crate::classify::Classifier;
use crate::error::Result;
use crate::ingest::TrajectoryRecord;
use crate::langutory::{build_langutory, first_occurrences, Langutory};
use crate::phase::PhaseLetter;
use crate::plan::PlanSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceScores {
    pub ppc: f64,
    pub poc: f64,
    pub ppf: f64,
    pub pc: f64,
    /// Plan phases that never occur.
    pub missing_phases: BTreeSet<PhaseLetter>,
    /// Letters that occur but are outside the plan alphabet.
    pub extra_phases: BTreeSet<PhaseLetter>,
    /// First-occurrence index per plan phase, in expected order.
    pub first_occurrence_indices: Vec<Option<usize>>,
    pub lis_length: usize,
}

fn distinct(lang: &Langutory) -> BTreeSet<PhaseLetter> {
    lang.letters().iter().copied().collect()
}

pub fn compute_ppc(lang: &Langutory, plan: &PlanSpec) -> f64 {
    let seen = distinct(lang);
    let covered = plan.alphabet().intersection(&seen).count();
    covered as f64 / plan.len() as f64
}

fn order_lis(lang: &Langutory, plan: &PlanSpec) -> (Vec<Option<usize>>, usize) {
    let firsts: Vec<Option<usize>> = first_occurrences(lang, plan).into_iter().map(|(_, i)| i).collect();
    let present: Vec<usize> = firsts.iter().flatten().copied().collect();
    let lis = longest_increasing_subsequence(&present);
    (firsts, lis)
}

pub fn compute_poc(lang: &Langutory, plan: &PlanSpec) -> f64 {
    let (_, lis) = order_lis(lang, plan);
    lis as f64 / plan.len() as f64
}

pub fn compute_ppf(lang: &Langutory, plan: &PlanSpec) -> f64 {
    let alphabet = plan.alphabet();
    let union = alphabet.union(&distinct(lang)).count();
    alphabet.len() as f64 / union as f64
}

/// Geometric mean of the three component metrics; exactly zero when any
/// component is zero.
pub fn compute_pc(ppc: f64, poc: f64, ppf: f64) -> f64 {
    if ppc == 0.0 || poc == 0.0 || ppf == 0.0 {
        return 0.0;
    }
    (ppc * poc * ppf).cbrt()
}

/// All four metrics plus diagnostics for an already-built phase string.
pub fn score_langutory(lang: &Langutory, plan: &PlanSpec) -> ComplianceScores {
    let seen = distinct(lang);
    let alphabet = plan.alphabet();
    let (firsts, lis) = order_lis(lang, plan);
    let ppc = compute_ppc(lang, plan);
    let poc = lis as f64 / plan.len() as f64;
    let ppf = compute_ppf(lang, plan);
    ComplianceScores {
        ppc,
        poc,
        ppf,
        pc: compute_pc(ppc, poc, ppf),
        missing_phases: alphabet.difference(&seen).copied().collect(),
        extra_phases: seen.difference(&alphabet).copied().collect(),
        first_occurrence_indices: firsts,
        lis_length: lis,
    }
}

/// Classify, build the phase string, and score it.
pub fn score_trajectory(traj: &TrajectoryRecord, plan: &PlanSpec, classifier: &Classifier) -> Result<ComplianceScores> {
    traj.validate()?;
    let lang = build_langutory(&classifier.classify_trajectory(traj))?;
    Ok(score_langutory(&lang, plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::SettingName;
    use proptest::prelude::*;
    use PhaseLetter::*;

    const EPS: f64 = 1e-12;

    fn lang(letters: &[PhaseLetter]) -> Langutory {
        Langutory::from_letters(letters).unwrap()
    }

    fn spec(s: SettingName) -> PlanSpec {
        s.plan_spec().unwrap()
    }

    #[test]
    fn ppc_examples() {
        let std = spec(SettingName::Standard);
        assert_eq!(compute_ppc(&lang(&[N, N, N, P]), &std), 0.5);
        assert_eq!(compute_ppc(&lang(&[N, R, R, P, V, V, V, P, V]), &std), 1.0);
        assert_eq!(compute_ppc(&lang(&[O, O]), &std), 0.0);
    }

    #[test]
    fn poc_examples() {
        let std = spec(SettingName::Standard);
        assert_eq!(compute_poc(&lang(&[R, R, R, R, N, N, N, P, P, V]), &std), 0.75);
        assert_eq!(compute_poc(&lang(&[N, R, R, P, V, V, V, P, V]), &std), 1.0);
        // N at 1, P at 4, R and V absent: LIS([1, 4]) = 2 over m = 4.
        assert_eq!(compute_poc(&lang(&[N, N, N, P]), &std), 0.5);
    }

    #[test]
    fn ppf_examples() {
        let std = spec(SettingName::Standard);
        assert_eq!(compute_ppf(&lang(&[N, R, R, P, V, V, V, P, V]), &std), 1.0);
        assert!((compute_ppf(&lang(&[N, O, P]), &std) - 0.8).abs() < EPS);
        let reg = spec(SettingName::Regression);
        assert!((compute_ppf(&lang(&[RG, N, S, O]), &reg) - 0.75).abs() < EPS);
    }

    #[test]
    fn pc_examples() {
        assert_eq!(compute_pc(1.0, 1.0, 1.0), 1.0);
        assert_eq!(compute_pc(0.0, 0.5, 1.0), 0.0);
        // 0.25^(1/3) = 2^(-2/3) = 0.629960524947436582383...
        assert!((compute_pc(0.5, 0.5, 1.0) - 0.629_960_524_947_436_6).abs() < EPS);
    }

    #[test]
    fn all_out_of_plan_scores() {
        let s = score_langutory(&lang(&[O]), &spec(SettingName::Standard));
        assert_eq!((s.ppc, s.poc, s.pc), (0.0, 0.0, 0.0));
        assert!((s.ppf - 0.8).abs() < EPS);
        assert_eq!(s.missing_phases.len(), 4);
        assert_eq!(s.extra_phases, [O].into_iter().collect());
    }

    fn arb_case() -> impl Strategy<Value = (Vec<PhaseLetter>, SettingName)> {
        (
            proptest::collection::vec(proptest::sample::select(PhaseLetter::ALL.to_vec()), 1..30),
            proptest::sample::select(SettingName::ALL.iter().copied().filter(|s| *s != SettingName::NoPlan).collect::<Vec<_>>()),
        )
    }

    proptest! {
        #[test]
        fn bounds_and_geometric_mean((letters, setting) in arb_case()) {
            let plan = spec(setting);
            let s = score_langutory(&lang(&letters), &plan);
            for v in [s.ppc, s.poc, s.pc] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(s.ppf > 0.0 && s.ppf <= 1.0);
            prop_assert!((s.pc - (s.ppc * s.poc * s.ppf).cbrt()).abs() < EPS);
            prop_assert_eq!(s.ppc == 1.0, s.missing_phases.is_empty());
            prop_assert_eq!(s.ppf == 1.0, s.extra_phases.is_empty());
            let ordered = s.lis_length == plan.len();
            prop_assert_eq!(s.pc == 1.0, s.missing_phases.is_empty() && s.extra_phases.is_empty() && ordered);
        }

        #[test]
        fn poc_floor_when_all_present((letters, setting) in arb_case()) {
            let plan = spec(setting);
            let mut letters = letters;
            letters.extend(plan.expected_sequence().iter().rev());
            let s = score_langutory(&lang(&letters), &plan);
            prop_assert!(s.poc >= 1.0 / plan.len() as f64);
        }

        #[test]
        fn adding_new_foreign_letter_lowers_ppf((letters, setting) in arb_case()) {
            let plan = spec(setting);
            let l = lang(&letters);
            let before = compute_ppf(&l, &plan);
            if let Some(&extra) = PhaseLetter::ALL.iter().find(|x| !plan.contains(**x) && !letters.contains(x)) {
                let mut more = letters.clone();
                more.push(extra);
                prop_assert!(compute_ppf(&lang(&more), &plan) < before);
            }
        }
    }
}
