//! Evaluation metrics for the link prediction and completion tasks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counting one half. `None` unless both classes are present.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of positive ranks with tied groups sharing their mean rank. Ranks
    // are doubled so every quantity stays an integer.
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start + 1 ..= end, mean doubled = start + 1 + end
        let doubled_mean = (start + 1 + end) as u64;
        let group_pos = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        doubled_rank_sum += doubled_mean * group_pos;
        start = end;
    }
    let p = positives as u64;
    let doubled_u = doubled_rank_sum - p * (p + 1);
    Some(doubled_u as f64 / (2.0 * positives as f64 * negatives as f64))
}

/// Root mean squared error of `x` on `(row, col, value)` test entries.
pub fn rmse(x: &Matrix, truth: &[(usize, usize, f64)]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::UndefinedMetric("rmse of an empty test set"));
    }
    let mut sum = 0.0;
    for &(row, col, value) in truth {
        if row >= x.rows() || col >= x.cols() {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                rows: x.rows(),
                cols: x.cols(),
            });
        }
        let d = x[(row, col)] - value;
        sum += d * d;
    }
    Ok(libm::sqrt(sum / truth.len() as f64))
}
