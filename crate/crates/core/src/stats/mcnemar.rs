use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::TestMethod;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarConfig {
    /// Exact binomial test when `b + c` is below this; chi-square with
    /// continuity correction otherwise.
    pub exact_below: u64,
}

impl Default for McNemarConfig {
    fn default() -> Self {
        McNemarConfig { exact_below: 25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// `min(b, c)` for the exact test, the chi-square statistic otherwise.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Pairs (true, false).
    pub b: u64,
    /// Pairs (false, true).
    pub c: u64,
    pub method: TestMethod,
}

pub fn mcnemar(pairs: &[(bool, bool)]) -> McNemarResult {
    let b = pairs.iter().filter(|&&(x, y)| x && !y).count() as u64;
    let c = pairs.iter().filter(|&&(x, y)| !x && y).count() as u64;
    mcnemar_counts(b, c, &McNemarConfig::default())
}

/// McNemar's test from the discordant counts alone.
pub fn mcnemar_counts(b: u64, c: u64, cfg: &McNemarConfig) -> McNemarResult {
    let n = b + c;
    if n == 0 {
        return McNemarResult {
            statistic: 0.0,
            p_value: 1.0,
            b,
            c,
            method: TestMethod::Exact,
        };
    }
    if n < cfg.exact_below {
        let k = b.min(c);
        // P(X <= k) for X ~ Binomial(n, 1/2), by exact integer counting
        let mut coef: f64 = 1.0;
        let mut tail = 0.0;
        for i in 0..=k {
            if i > 0 {
                coef = coef * (n - i + 1) as f64 / i as f64;
            }
            tail += coef;
        }
        let p = (2.0 * tail / 2f64.powi(n as i32)).min(1.0);
        return McNemarResult {
            statistic: k as f64,
            p_value: p,
            b,
            c,
            method: TestMethod::Exact,
        };
    }
    let diff = (b as f64 - c as f64).abs() - 1.0;
    let stat = diff.max(0.0).powi(2) / n as f64;
    let chi = ChiSquared::new(1.0).expect("one degree of freedom");
    McNemarResult {
        statistic: stat,
        p_value: chi.sf(stat),
        b,
        c,
        method: TestMethod::ChiSquare,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concordant_pairs_give_p_one() {
        let r = mcnemar(&[(true, true), (false, false), (true, true)]);
        assert_eq!((r.b, r.c, r.p_value), (0, 0, 1.0));
    }

    #[test]
    fn one_sided_discordance() {
        let r = mcnemar_counts(10, 0, &McNemarConfig::default());
        assert!((r.p_value - 2.0 * 0.5f64.powi(10)).abs() < 1e-12);
        assert_eq!(r.method, TestMethod::Exact);
    }

    #[test]
    fn balanced_discordance() {
        assert_eq!(mcnemar_counts(5, 5, &McNemarConfig::default()).p_value, 1.0);
    }

    #[test]
    fn chi_square_branch() {
        let r = mcnemar_counts(30, 10, &McNemarConfig::default());
        assert_eq!(r.method, TestMethod::ChiSquare);
        // (|30 - 10| - 1)^2 / 40 = 9.025
        assert!((r.statistic - 9.025).abs() < 1e-12);
        // chi2(1) survival = erfc(sqrt(x / 2))
        assert!((r.p_value - 0.002_663_119_259).abs() < 1e-10, "{}", r.p_value);
    }

    #[test]
    fn order_of_pairs_does_not_matter() {
        let mut pairs = vec![(true, false), (true, true), (false, true), (false, false), (true, false)];
        let a = mcnemar(&pairs);
        pairs.reverse();
        assert_eq!(a, mcnemar(&pairs));
    }
}
