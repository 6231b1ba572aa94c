//! Anomaly-detection evaluation: ranking AUC, contamination-threshold F1,
//! and unweighted cross-client averaging.
//!
//! Anomalies are the positive class and higher scores mean more anomalous
//! throughout.

use serde::Serialize;

use crate::error::{Error, Result};

/// One client's test-set evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClientEval {
    pub client_id: usize,
    pub auc: f64,
    pub f1: f64,
    /// Score of the last flagged item under the contamination rule.
    pub threshold: f64,
}

/// Per-client evaluations plus their unweighted means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_client: Vec<ClientEval>,
    pub macro_auc: f64,
    pub macro_f1: f64,
}

impl EvalReport {
    /// Stable line-oriented rendering: one record per client, then the
    /// macro block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.per_client {
            out.push_str(&format!(
                "client {}: auc={:.6} f1={:.6} threshold={:?}\n",
                c.client_id, c.auc, c.f1, c.threshold
            ));
        }
        out.push_str(&format!(
            "macro: auc={:.6} f1={:.6}\n",
            self.macro_auc, self.macro_f1
        ));
        out
    }
}

fn check_two_classes(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Evaluation(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Evaluation(
            "need at least one anomaly and one normal to evaluate".into(),
        ));
    }
    Ok(())
}

/// Mann-Whitney rank AUC with ties counted half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_two_classes(scores, labels)?;
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));

    // Average ranks over tie groups, 1-based.
    let mut ranks = vec![0.0; n];
    let mut lo = 0;
    while lo < n {
        let mut hi = lo;
        while hi + 1 < n && scores[order[hi + 1]] == scores[order[lo]] {
            hi += 1;
        }
        let avg = (lo + 1 + hi + 1) as f64 / 2.0;
        for &idx in &order[lo..=hi] {
            ranks[idx] = avg;
        }
        lo = hi + 1;
    }

    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = n - n_pos;
    let rank_sum: f64 = (0..n).filter(|&i| labels[i]).map(|i| ranks[i]).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Indices of the `count` highest scores; ties broken by input order.
pub(crate) fn flagged_indices(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    order.truncate(count);
    order
}

/// F1 with the threshold set by the contamination rule: flag exactly as many
/// items as there are true anomalies. Returns (f1, threshold).
pub fn f1_at_contamination(scores: &[f64], labels: &[bool]) -> Result<(f64, f64)> {
    check_two_classes(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let flagged = flagged_indices(scores, n_pos);
    let threshold = scores[*flagged.last().expect("n_pos >= 1")];
    let tp = flagged.iter().filter(|&&i| labels[i]).count();
    let fp = n_pos - tp;
    let fn_ = n_pos - tp;
    let denominator = 2 * tp + fp + fn_;
    let f1 = if denominator == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denominator as f64
    };
    Ok((f1, threshold))
}

/// Unweighted mean over per-client evaluations.
pub fn macro_average(per_client: Vec<ClientEval>) -> Result<EvalReport> {
    if per_client.is_empty() {
        return Err(Error::Evaluation("no client evaluations to average".into()));
    }
    let inv = 1.0 / per_client.len() as f64;
    let macro_auc = per_client.iter().map(|c| c.auc).sum::<f64>() * inv;
    let macro_f1 = per_client.iter().map(|c| c.f1).sum::<f64>() * inv;
    Ok(EvalReport {
        per_client,
        macro_auc,
        macro_f1,
    })
}
