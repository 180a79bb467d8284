use crate::error::{AdaptiveError, Result};
use crate::policy::TraceEntry;

pub fn accuracy(scores: &[f64], labels: &[u8], threshold: f64) -> f64 {
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| u8::from(s > threshold) == y)
        .count();
    hits as f64 / labels.len().max(1) as f64
}

/// Area under the ROC curve from midranks of the scores.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 || scores.len() != labels.len() {
        return Err(AdaptiveError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// Share of samples that request each resolution, plus the share still in
/// the gray zone after the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    /// `ratios[k]`: fraction that computed resolution `k + 1`.
    pub ratios: Vec<f64>,
    pub unresolved: f64,
}

pub fn demand_histogram(
    traces: &[TraceEntry],
    resolutions: usize,
    in_zone: impl Fn(f64) -> bool,
) -> Demand {
    let n = traces.len().max(1) as f64;
    let ratios = (1..=resolutions)
        .map(|r| traces.iter().filter(|t| t.resolutions_used >= r).count() as f64 / n)
        .collect();
    let unresolved = traces
        .iter()
        .filter(|t| t.resolutions_used == resolutions && in_zone(t.final_output))
        .count() as f64
        / n;
    Demand { ratios, unresolved }
}
