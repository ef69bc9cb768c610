//! Statistical comparisons and corpus-level aggregation.

mod mann_whitney;
mod mcnemar;
pub mod sets;
mod summary;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub use mann_whitney::{mann_whitney_u, mann_whitney_u_with, MannWhitneyConfig, MannWhitneyResult};
pub use mcnemar::{mcnemar, mcnemar_counts, McNemarConfig, McNemarResult};
pub use sets::{
    deterministic_subset, deterministic_subset_from_outcomes, intersection_table, intersection_table_from_outcomes,
    IntersectionTable, Outcomes,
};
pub use summary::{group_scores, write_summary_csv, GroupField, GroupKey, GroupedScores, MetricSummary};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    Normal,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonResult {
    pub r: f64,
    /// Two-sided, from the t distribution with n - 2 degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<PearsonResult> {
    let r = pearson_r(x, y)?;
    let n = x.len();
    let p_value = if n < 3 || r.abs() >= 1.0 {
        if r.abs() >= 1.0 && n >= 3 { 0.0 } else { 1.0 }
    } else {
        let df = (n - 2) as f64;
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(PearsonResult { r, p_value, n })
}

/// Product-moment correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Degenerate(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("need at least two pairs".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_p_matches_t_distribution() {
        // reference value from scipy.stats.pearsonr
        let t = pearson_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((t.r - 0.8).abs() < 1e-12);
        assert!((t.p_value - 0.104_088_038_661_828).abs() < 1e-9);
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        // means 2.5 and 5; co-deviation sum 11; squared deviation sums 5 and 26
        let expected = 11.0 / (5.0f64 * 26.0).sqrt();
        assert!((pearson_r(&x, &[2.0, 4.0, 5.0, 9.0]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson_r(&[1.0], &[1.0]).is_err());
        assert!(pearson_r(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0], &[1.0]).is_err());
    }
}
