//! Two-sided Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped and tied absolute differences share their
//! average rank. With at most [`EXACT_MAX_N`] non-zero differences the null
//! distribution of `W+` is enumerated over every sign assignment of the
//! actual ranks; larger samples use the normal approximation with
//! continuity and tie corrections.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

pub const EXACT_MAX_N: usize = 12;
/// Smallest number of pairs accepted.
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// True when the null hypothesis of no difference is not rejected.
    pub same: bool,
    pub p_value: f64,
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Number of non-zero differences.
    pub n_used: usize,
    pub exact: bool,
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Exact two-sided p-value by enumerating all `2^n` sign patterns.
fn exact_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let total = 1u32 << n;
    // Ranks are multiples of 1/2; compare on doubled integers.
    let doubled: Vec<i64> = ranks.iter().map(|r| (2.0 * r).round() as i64).collect();
    let observed = (2.0 * w_plus).round() as i64;
    let (mut le, mut ge) = (0u32, 0u32);
    for mask in 0..total {
        let w: i64 = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| doubled[i])
            .sum();
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    let tail = le.min(ge) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

fn normal_p_value(ranks: &[f64], abs_diffs: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = abs_diffs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let diff = w_plus - mean;
    let corrected = (diff.abs() - 0.5).max(0.0);
    let z = corrected / var.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Paired test of `a` against `b` at significance level `alpha`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_PAIRS {
        return Err(EvalError::TooFewPairs {
            min: MIN_PAIRS,
            got: a.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvalError::InvalidAlpha(alpha));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(WilcoxonResult {
            same: true,
            p_value: 1.0,
            w_plus: 0.0,
            n_used: 0,
            exact: true,
        });
    }
    let abs_diffs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs_diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let exact = diffs.len() <= EXACT_MAX_N;
    let p_value = if exact {
        exact_p_value(&ranks, w_plus)
    } else {
        normal_p_value(&ranks, &abs_diffs, w_plus)
    };
    Ok(WilcoxonResult {
        same: p_value > alpha,
        p_value,
        w_plus,
        n_used: diffs.len(),
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = wilcoxon_signed_rank(&a, &a, 0.05).unwrap();
        assert!(r.same);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn all_positive_exact() {
        for n in 5..=12usize {
            let a: Vec<f64> = (1..=n).map(|i| i as f64 + 10.0).collect();
            let b = vec![0.0; n];
            let r = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
            assert!(r.exact);
            assert_eq!(r.p_value, 2.0 / 2f64.powi(n as i32));
        }
        let a: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let r = wilcoxon_signed_rank(&a, &[0.0; 8], 0.05).unwrap();
        assert!((r.p_value - 0.0078125).abs() < 1e-15);
        assert!(!r.same);
    }

    #[test]
    fn exact_matches_hand_enumeration_with_ties() {
        // |d| = 1, 1, 2, 3, 4 -> ranks 1.5, 1.5, 3, 4, 5; signs + - + + -.
        let a = [1.0, 0.0, 2.0, 3.0, 0.0];
        let b = [0.0, 1.0, 0.0, 0.0, 4.0];
        let r = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
        assert_eq!(r.w_plus, 8.5);
        // Brute-force oracle over the 32 sign patterns.
        let ranks = [1.5, 1.5, 3.0, 4.0, 5.0];
        let sums: Vec<f64> = (0..32u32)
            .map(|m| (0..5).filter(|i| m & (1 << i) != 0).map(|i| ranks[i]).sum())
            .collect();
        let le = sums.iter().filter(|s| **s <= 8.5).count() as f64 / 32.0;
        let ge = sums.iter().filter(|s| **s >= 8.5).count() as f64 / 32.0;
        assert_eq!(r.p_value, (2.0 * le.min(ge)).min(1.0));
    }

    #[test]
    fn errors() {
        assert_eq!(
            wilcoxon_signed_rank(&[1.0; 5], &[1.0; 6], 0.05).unwrap_err(),
            EvalError::LengthMismatch(5, 6)
        );
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0; 4], &[2.0; 4], 0.05),
            Err(EvalError::TooFewPairs { .. })
        ));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn shift_of_both_samples_keeps_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..20).map(|_| rng.random::<f64>() + 0.2).collect();
            let base = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
            // Shift by a power of two so every paired difference stays exact.
            let a2: Vec<f64> = a.iter().map(|v| v + 8.0).collect();
            let b2: Vec<f64> = b.iter().map(|v| v + 8.0).collect();
            let shifted = wilcoxon_signed_rank(&a2, &b2, 0.05).unwrap();
            assert_eq!(base.same, shifted.same);
        }
    }

    #[test]
    fn null_rejection_rate_is_calibrated() {
        let mut rejections = 0;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..25).map(|_| rng.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..25).map(|_| rng.sample(StandardNormal)).collect();
            if !wilcoxon_signed_rank(&a, &b, 0.05).unwrap().same {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / 1000.0;
        assert!((0.03..=0.08).contains(&rate), "rate {rate}");
    }
}
