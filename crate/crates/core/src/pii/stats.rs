//! Corpus-level PII statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FileSpans;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PiiStatsReport {
    pub n_files: u64,
    pub n_files_with_pii: u64,
    /// Total detected entities across the corpus.
    pub n_secrets: u64,
    /// Files with at least one redactable span, i.e. files redaction alters.
    pub n_modified_files: u64,
    /// Secrets-per-file statistics over files with at least one detection.
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub p99: f64,
    pub p999: f64,
    /// Detections by entity class.
    pub per_kind: BTreeMap<String, u64>,
}

/// Expects one entry per scanned file, including files with empty span
/// lists; per-file statistics are computed over files with detections, which
/// is also how the denominator of `mean` is defined.
pub fn pii_corpus_stats(detections: &[FileSpans]) -> PiiStatsReport {
    let mut report = PiiStatsReport {
        n_files: detections.len() as u64,
        ..PiiStatsReport::default()
    };
    let mut counts: Vec<u64> = Vec::new();
    for file in detections {
        let n = file.spans.len() as u64;
        report.n_secrets += n;
        if n > 0 {
            report.n_files_with_pii += 1;
            counts.push(n);
        }
        if file.spans.iter().any(|s| s.redactable) {
            report.n_modified_files += 1;
        }
        for span in &file.spans {
            *report
                .per_kind
                .entry(span.kind.entity_class().to_string())
                .or_insert(0) += 1;
        }
    }
    if !counts.is_empty() {
        counts.sort_unstable();
        report.mean = report.n_secrets as f64 / counts.len() as f64;
        report.median = percentile(&counts, 50.0);
        report.p95 = percentile(&counts, 95.0);
        report.p99 = percentile(&counts, 99.0);
        report.p999 = percentile(&counts, 99.9);
    }
    report
}

/// Nearest-rank percentile over an ascending-sorted slice: the value at
/// one-based rank ceil(p/100 * n).
fn percentile(sorted: &[u64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1] as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pii::{PiiKind, PiiSpan};

    fn file_with(id: &str, n: usize) -> FileSpans {
        FileSpans {
            id: id.into(),
            spans: (0..n)
                .map(|i| PiiSpan {
                    start: i * 10,
                    end: i * 10 + 5,
                    kind: PiiKind::Key,
                    detector: "t".into(),
                    redactable: true,
                })
                .collect(),
        }
    }

    #[test]
    fn mean_and_median_over_files_with_detections() {
        let detections = vec![
            file_with("a", 1),
            file_with("b", 1),
            file_with("c", 2),
            file_with("d", 0),
        ];
        let report = pii_corpus_stats(&detections);
        assert_eq!(report.n_files, 4);
        assert_eq!(report.n_files_with_pii, 3);
        assert_eq!(report.n_secrets, 4);
        assert!((report.mean - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.median, 1.0);
    }

    #[test]
    fn all_zero_corpus_reports_zero_stats() {
        let detections = vec![file_with("a", 0), file_with("b", 0)];
        let report = pii_corpus_stats(&detections);
        assert_eq!(report.n_files_with_pii, 0);
        assert_eq!(report.n_modified_files, 0);
        assert_eq!(report.mean, 0.0);
        assert_eq!(report.median, 0.0);
        assert_eq!(report.p999, 0.0);
    }

    #[test]
    fn modified_files_require_a_redactable_span() {
        let mut not_redactable = file_with("a", 1);
        not_redactable.spans[0].redactable = false;
        let report = pii_corpus_stats(&[not_redactable, file_with("b", 1)]);
        assert_eq!(report.n_files_with_pii, 2);
        assert_eq!(report.n_modified_files, 1);
    }

    #[test]
    fn percentiles_match_a_counting_oracle() {
        // Planted counts: file i has (i % 7) + 1 secrets, 1000 files.
        let detections: Vec<FileSpans> = (0..1000)
            .map(|i| file_with(&format!("f{i}"), (i % 7) + 1))
            .collect();
        let report = pii_corpus_stats(&detections);

        // Oracle: smallest value v such that at least ceil(p*n) counts are <= v.
        let counts: Vec<u64> = detections.iter().map(|f| f.spans.len() as u64).collect();
        let oracle = |p: f64| -> f64 {
            let need = (p * counts.len() as f64).ceil() as usize;
            let mut v = 1u64;
            loop {
                let covered = counts.iter().filter(|&&c| c <= v).count();
                if covered >= need {
                    return v as f64;
                }
                v += 1;
            }
        };
        assert_eq!(report.median, oracle(0.50));
        assert_eq!(report.p95, oracle(0.95));
        assert_eq!(report.p99, oracle(0.99));
        assert_eq!(report.p999, oracle(0.999));
    }
}
