use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::TestMethod;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitneyConfig {
    /// Exact permutation distribution when both samples are at most this
    /// large; tie-corrected normal approximation otherwise.
    pub exact_max_n: usize,
    pub continuity_correction: bool,
}

impl Default for MannWhitneyConfig {
    fn default() -> Self {
        MannWhitneyConfig {
            exact_max_n: 20,
            continuity_correction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitneyResult {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: TestMethod,
}

/// Mid-ranks (1-based) of `values`; tied values share the mean of their ranks.
/// Returned doubled so they are integral.
fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end+1, doubled mean = start + end + 2
        let r = (start + end + 2) as u64;
        for &i in &order[start..=end] {
            ranks[i] = r;
        }
        start = end + 1;
    }
    ranks
}

fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        total += t * t * t - t;
        i = j + 1;
    }
    total
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitneyResult> {
    mann_whitney_u_with(a, b, &MannWhitneyConfig::default())
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], cfg: &MannWhitneyConfig) -> Result<MannWhitneyResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Degenerate("NaN in sample".into()));
    }
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&combined);
    let ra2: u64 = ranks[..a.len()].iter().sum();
    // 2U = 2R_a - n_a(n_a + 1)
    let u2 = ra2 - na * (na + 1);
    let u = u2 as f64 / 2.0;

    if a.len() <= cfg.exact_max_n && b.len() <= cfg.exact_max_n {
        let p = exact_two_sided(&ranks, a.len(), u2, na * nb);
        return Ok(MannWhitneyResult {
            u,
            p_value: p,
            method: TestMethod::Exact,
        });
    }

    let n = (na + nb) as f64;
    let (naf, nbf) = (na as f64, nb as f64);
    let mean = naf * nbf / 2.0;
    let var = naf * nbf / 12.0 * ((n + 1.0) - tie_term(&combined) / (n * (n - 1.0)));
    let p = if var <= 0.0 {
        1.0
    } else {
        let mut dev = (u - mean).abs();
        if cfg.continuity_correction {
            dev = (dev - 0.5).max(0.0);
        }
        let z = dev / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(MannWhitneyResult {
        u,
        p_value: p,
        method: TestMethod::Normal,
    })
}

/// Exact permutation p-value: the share of all ways to pick `na` of the
/// pooled (doubled mid-)ranks whose U is at least as far from its mean as
/// the observed one. Counts subsets by rank sum with a knapsack table.
fn exact_two_sided(ranks: &[u64], na: usize, u2_obs: u64, two_mean: u64) -> f64 {
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[k * width + s]: subsets of size k with doubled rank sum s
    let mut ways = vec![0u128; (na + 1) * width];
    ways[0] = 1;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=na).rev() {
            for s in (r..width).rev() {
                let add = ways[(k - 1) * width + s - r];
                if add != 0 {
                    ways[k * width + s] += add;
                }
            }
        }
    }
    let base = (na as u64) * (na as u64 + 1);
    let obs_dev = (u2_obs as i128 - two_mean as i128).abs();
    let mut total: u128 = 0;
    let mut extreme: u128 = 0;
    for s in 0..width {
        let w = ways[na * width + s];
        if w == 0 {
            continue;
        }
        total += w;
        let u2 = s as i128 - base as i128;
        if (u2 - two_mean as i128).abs() >= obs_dev {
            extreme += w;
        }
    }
    (extreme as f64 / total as f64).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_average_ties() {
        assert_eq!(doubled_midranks(&[1.0, 2.0, 2.0, 4.0]), vec![2, 5, 5, 8]);
    }

    #[test]
    fn complete_separation() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        // only 1 of C(6,3) = 20 arrangements on each side is as extreme
        assert!((r.p_value - 2.0 / 20.0).abs() < 1e-12);
        let r = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u, 9.0);
    }

    #[test]
    fn identical_samples_give_p_one() {
        let x = [0.1, 0.5, 0.5, 0.9];
        let r = mann_whitney_u(&x, &x).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.u, 8.0);
    }

    #[test]
    fn all_tied_large_samples() {
        let x = vec![1.0; 30];
        let r = mann_whitney_u(&x, &x).unwrap();
        assert_eq!(r.method, TestMethod::Normal);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn normal_approximation_for_large_samples() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 10.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.method, TestMethod::Normal);
        // U = 900 - sum over a of (#b below) = 900 - 30*... ; compare to a
        // direct count of pairs a_i > b_j plus half ties.
        let direct: f64 = a
            .iter()
            .map(|x| b.iter().map(|y| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 }).sum::<f64>())
            .sum();
        assert_eq!(r.u, direct);
        assert!(r.p_value < 0.05);
    }

    #[test]
    fn empty_sample_is_error() {
        assert!(matches!(mann_whitney_u(&[], &[1.0]), Err(Error::EmptySample)));
        assert!(matches!(mann_whitney_u(&[f64::NAN], &[1.0]), Err(Error::Degenerate(_))));
    }
}
