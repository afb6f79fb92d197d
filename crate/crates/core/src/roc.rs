//! Empirical ROC area via the Mann-Whitney rank identity.

use crate::error::{Error, Result};

/// Probability that a random positive outscores a random negative, ties
/// counted as one half.
///
/// Computed from midranks in `O(n log n)`. Ranks are doubled so every
/// intermediate is an exact integer, which makes the result bit-identical
/// to counting pairs directly.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("AUC scores must not be NaN".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of doubled midranks over positives. A tie group occupying
    // 1-based ranks lo..=hi has doubled midrank lo + hi.
    let mut pos_rank_sum2: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let doubled_midrank = (start + 1 + end) as u64;
        let positives = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        pos_rank_sum2 += positives * doubled_midrank;
        start = end;
    }

    // 2U = 2R⁺ - n⁺(n⁺ + 1)
    let u2 = pos_rank_sum2 - n_pos * (n_pos + 1);
    Ok(u2 as f64 / (2 * n_pos * n_neg) as f64)
}
