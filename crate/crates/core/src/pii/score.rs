//! Precision/recall scoring against an annotated benchmark.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{FileSpans, PiiSpan};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KindScore {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    /// `None` (serialized as null) when no predictions exist for the kind.
    pub precision: Option<f64>,
    /// `None` when no gold spans exist for the kind.
    pub recall: Option<f64>,
}

impl KindScore {
    fn finalize(&mut self) {
        let tp = self.true_positives as f64;
        self.precision = match self.true_positives + self.false_positives {
            0 => None,
            denom => Some(tp / denom as f64),
        };
        self.recall = match self.true_positives + self.false_negatives {
            0 => None,
            denom => Some(tp / denom as f64),
        };
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PiiScoreReport {
    /// Keyed by entity class: "email", "ip_address", "key".
    pub per_kind: BTreeMap<String, KindScore>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("predictions reference unknown file id {0:?}")]
    UnknownFile(String),
}

/// A prediction is a true positive iff it overlaps a gold span of the same
/// entity class by at least one byte; matching is greedy by overlap length
/// and each gold span matches at most one prediction. Remaining predictions
/// are false positives, remaining gold spans false negatives.
pub fn score_benchmark(
    predicted: &[FileSpans],
    gold: &[FileSpans],
) -> Result<PiiScoreReport, ScoreError> {
    let gold_ids: BTreeSet<&str> = gold.iter().map(|f| f.id.as_str()).collect();
    for file in predicted {
        if !gold_ids.contains(file.id.as_str()) {
            return Err(ScoreError::UnknownFile(file.id.clone()));
        }
    }
    let by_id: BTreeMap<&str, &FileSpans> = predicted.iter().map(|f| (f.id.as_str(), f)).collect();

    let mut report = PiiScoreReport::default();
    for gold_file in gold {
        let empty = Vec::new();
        let pred_spans = by_id
            .get(gold_file.id.as_str())
            .map(|f| &f.spans)
            .unwrap_or(&empty);
        score_file(pred_spans, &gold_file.spans, &mut report);
    }
    for score in report.per_kind.values_mut() {
        score.finalize();
    }
    Ok(report)
}

fn overlap_len(a: &PiiSpan, b: &PiiSpan) -> usize {
    let start = a.start.max(b.start);
    let end = a.end.min(b.end);
    end.saturating_sub(start)
}

fn score_file(predicted: &[PiiSpan], gold: &[PiiSpan], report: &mut PiiScoreReport) {
    // Candidate matches sorted by descending overlap; ties broken by span
    // positions so scoring is deterministic.
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (pi, pred) in predicted.iter().enumerate() {
        for (gi, g) in gold.iter().enumerate() {
            if pred.kind.entity_class() == g.kind.entity_class() {
                let len = overlap_len(pred, g);
                if len > 0 {
                    candidates.push((len, pi, gi));
                }
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut pred_matched = vec![false; predicted.len()];
    let mut gold_matched = vec![false; gold.len()];
    for (_, pi, gi) in candidates {
        if !pred_matched[pi] && !gold_matched[gi] {
            pred_matched[pi] = true;
            gold_matched[gi] = true;
            entry(report, predicted[pi].kind.entity_class()).true_positives += 1;
        }
    }
    for (pi, matched) in pred_matched.iter().enumerate() {
        if !matched {
            entry(report, predicted[pi].kind.entity_class()).false_positives += 1;
        }
    }
    for (gi, matched) in gold_matched.iter().enumerate() {
        if !matched {
            entry(report, gold[gi].kind.entity_class()).false_negatives += 1;
        }
    }
}

fn entry<'a>(report: &'a mut PiiScoreReport, kind: &str) -> &'a mut KindScore {
    report.per_kind.entry(kind.to_string()).or_default()
}
