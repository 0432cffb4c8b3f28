//! Evaluation metrics: conditional entropy for clustering quality, ROC-AUC
//! for anomaly detection, and per-window negative log-likelihood.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::compressor::Segment;
use crate::decomposer::ComponentMatrices;
use crate::mdl;
use crate::synthgen::TickLabel;
use crate::tensor::WindowTensor;
use crate::{Error, Result};

/// Counts of (predicted label, true label) pairs; rows are predictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_pairs<P: Eq + Hash, T: Eq + Hash>(pred: &[P], truth: &[T]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
        }
        if pred.is_empty() {
            return Err(Error::EmptyInput("label sequences"));
        }
        let mut p_ids: HashMap<&P, usize> = HashMap::new();
        let mut t_ids: HashMap<&T, usize> = HashMap::new();
        for p in pred {
            let next = p_ids.len();
            p_ids.entry(p).or_insert(next);
        }
        for t in truth {
            let next = t_ids.len();
            t_ids.entry(t).or_insert(next);
        }
        let mut counts = vec![vec![0u64; t_ids.len()]; p_ids.len()];
        for (p, t) in pred.iter().zip(truth) {
            counts[p_ids[p]][t_ids[t]] += 1;
        }
        Ok(Self { counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Conditional entropy of the truth given the prediction, in bits:
    /// `-sum_ij (CM_ij / total) * log2(CM_ij / rowsum_i)`, `0 log 0 = 0`.
    pub fn conditional_entropy(&self) -> f64 {
        let total = self.total() as f64;
        let mut ce = 0.0;
        for row in &self.counts {
            let row_sum: u64 = row.iter().sum();
            if row_sum == 0 {
                continue;
            }
            for &c in row {
                if c > 0 {
                    let p = c as f64 / total;
                    ce -= p * (c as f64 / row_sum as f64).log2();
                }
            }
        }
        ce
    }
}

/// Conditional entropy between two labelings (prediction first).
pub fn conditional_entropy<P: Eq + Hash, T: Eq + Hash>(pred: &[P], truth: &[T]) -> Result<f64> {
    Ok(ConfusionMatrix::from_pairs(pred, truth)?.conditional_entropy())
}

/// Area under the ROC curve via the rank statistic, ties averaged.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Config("scores must not be NaN".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    // average ranks over tied scores (1-based ranks)
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Per-event code length of a window under a regime, in bits:
/// `data_cost(window, theta) / N`.
pub fn window_nll(window: &WindowTensor, theta: &ComponentMatrices) -> Result<f64> {
    let n = window.event_total();
    if n == 0 {
        return Err(Error::EmptyInput("window"));
    }
    Ok(mdl::data_cost(window, theta) / n as f64)
}

/// Expands a segment log into one regime id per window. Windows are
/// `tau`-aligned from tick 0; each takes the regime of the last shift at or
/// before its start.
pub fn regimes_per_window(segments: &[Segment], n_windows: u64, tau: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(n_windows as usize);
    let mut cur = segments.first().map_or(0, |s| s.regime);
    let mut next = 0usize;
    for w in 0..n_windows {
        let start = w * tau as u64;
        while next < segments.len() && segments[next].start_tick <= start {
            cur = segments[next].regime;
            next += 1;
        }
        out.push(cur);
    }
    out
}

/// Majority truth label per window; ties go to the label seen first.
pub fn majority_window_labels(labels: &[TickLabel], tau: u32, n_windows: u64) -> Vec<String> {
    let mut out = Vec::with_capacity(n_windows as usize);
    for w in 0..n_windows {
        let start = w * tau as u64;
        let end = start + tau as u64;
        let mut counts: Vec<(&str, usize)> = Vec::new();
        for l in labels.iter().filter(|l| l.tick >= start && l.tick < end) {
            match counts.iter_mut().find(|(s, _)| *s == l.label) {
                Some((_, c)) => *c += 1,
                None => counts.push((&l.label, 1)),
            }
        }
        let best = counts
            .iter()
            .max_by_key(|&&(_, c)| c)
            .map(|&(s, _)| s.to_string())
            .unwrap_or_default();
        out.push(best);
    }
    out
}

/// True when any tick of the window carries the anomaly label.
pub fn window_has_anomaly(labels: &[TickLabel], tau: u32, window: u64) -> bool {
    let start = window * tau as u64;
    let end = start + tau as u64;
    labels
        .iter()
        .any(|l| l.tick >= start && l.tick < end && l.label == crate::synthgen::ANOMALY_LABEL)
}

/// Metrics document written by the evaluation commands.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ce: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nll_per_window: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_nll: Option<f64>,
}
