use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(score_pos > score_neg) + ½ P(tie)`, with midranks for tied scores.
///
/// Labels are `+1` (positive) and anything else (negative).
pub fn roc_score<T: Scalar>(scores: &[T], labels: &[i8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), actual: scores.len() });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::OneClassOnly);
    }
    let values: Vec<f64> = scores.iter().map(|s| s.to_f64_lossy()).collect();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig("ROC scores contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    // ranks are 1-based; a tie group spanning ranks lo..=hi gets (lo+hi)/2
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        pos_rank_sum += midrank * pos_in_group as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}
