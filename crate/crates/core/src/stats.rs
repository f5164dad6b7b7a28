//! Paired significance testing.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Smallest number of pairs accepted by [`wilcoxon_signed_rank`]; below this
/// the normal approximation is too coarse.
pub const MIN_PAIRS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {MIN_PAIRS} pairs, got {0}")]
    TooFewPairs(usize),
    #[error("non-finite sample value")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WilcoxonResult {
    /// Pairs with a non-zero difference.
    pub n: usize,
    /// Sum of ranks of positive differences `a - b`.
    pub w_plus: f64,
    pub w_minus: f64,
    /// Standardized statistic, positive when `a` tends to exceed `b`.
    pub z: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

/// Ranks of `values` (1-based), ties sharing the average rank. Also returns
/// `sum (t^3 - t)` over tie groups.
pub fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Wilcoxon signed-rank test on paired samples with the normal
/// approximation. Zero differences are dropped, tied absolute differences
/// get average ranks and the variance is tie-corrected.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_PAIRS {
        return Err(StatsError::TooFewPairs(a.len()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult { n, w_plus: 0.0, w_minus: 0.0, z: 0.0, p_value: 1.0 });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let nf = n as f64;
    let total = nf * (nf + 1.0) / 2.0;
    let w_minus = total - w_plus;
    let mean = total / 2.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return Ok(WilcoxonResult { n, w_plus, w_minus, z: 0.0, p_value: 1.0 });
    }
    let z = (w_plus - mean) / var.sqrt();
    let normal = Normal::standard();
    let p_value = (2.0 * normal.cdf(-z.abs())).min(1.0);
    Ok(WilcoxonResult { n, w_plus, w_minus, z, p_value })
}
