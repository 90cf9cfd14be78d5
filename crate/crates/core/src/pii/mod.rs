//! PII detection, redaction, and benchmark scoring.
//!
//! Detects emails, IP addresses, and secret keys in file content, replaces
//! them with synthetic values while preserving every byte outside the
//! detected spans, and scores detector output against annotated benchmarks.
//! All detectors are pure functions of their input text and are safe to call
//! from any number of workers.

mod emails;
mod gibberish;
mod ips;
mod keys;
pub mod patterns;
mod redact;
mod score;
mod stats;

pub use emails::detect_emails;
pub use gibberish::GibberishModel;
pub use ips::{detect_ips, is_private_ip, raw_ip_candidates, AllowList};
pub use keys::{detect_keys, KeyDetectorConfig, KEY_PLUGINS};
pub use redact::{redact_file, RedactionError, RedactionResult, ReplacementPool};
pub use score::{score_benchmark, KindScore, PiiScoreReport, ScoreError};
pub use stats::{pii_corpus_stats, PiiStatsReport};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiiKind {
    Email,
    Ipv4,
    Ipv6,
    Key,
}

impl PiiKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PiiKind::Email => "email",
            PiiKind::Ipv4 => "ipv4",
            PiiKind::Ipv6 => "ipv6",
            PiiKind::Key => "key",
        }
    }

    /// The two IP kinds score and plot as one entity class.
    pub fn entity_class(&self) -> &'static str {
        match self {
            PiiKind::Email => "email",
            PiiKind::Ipv4 | PiiKind::Ipv6 => "ip_address",
            PiiKind::Key => "key",
        }
    }
}

/// A detected entity, as byte offsets into the file content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiiSpan {
    pub start: usize,
    pub end: usize,
    pub kind: PiiKind,
    /// Which rule fired, e.g. `"email_regex"` or `"base64_entropy"`.
    pub detector: String,
    pub redactable: bool,
}

impl PiiSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &PiiSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Resolves overlaps by keeping the longer span; ties keep the earlier start.
/// The result is sorted by start offset and non-overlapping.
pub fn merge_spans(mut spans: Vec<PiiSpan>) -> Vec<PiiSpan> {
    // Longest first so a kept span shadows everything it overlaps.
    spans.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.start.cmp(&b.start))
            .then(a.end.cmp(&b.end))
    });
    let mut kept: Vec<PiiSpan> = Vec::with_capacity(spans.len());
    for span in spans {
        if !kept.iter().any(|k| k.overlaps(&span)) {
            kept.push(span);
        }
    }
    kept.sort_by_key(|s| (s.start, s.end));
    kept
}

/// Runs all three detectors over one file's content and merges the results.
pub fn detect_all(
    content: &str,
    allow: &AllowList,
    keys: &KeyDetectorConfig,
    gibberish: &GibberishModel,
) -> Vec<PiiSpan> {
    let mut spans = detect_emails(content, false);
    spans.extend(detect_ips(content, allow));
    spans.extend(detect_keys(content, keys, gibberish));
    merge_spans(spans)
}

/// Detection output record for one file: `{"id": ..., "spans": [...]}` JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileSpans {
    pub id: String,
    pub spans: Vec<PiiSpan>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(start: usize, end: usize, kind: PiiKind) -> PiiSpan {
        PiiSpan {
            start,
            end,
            kind,
            detector: "test".into(),
            redactable: true,
        }
    }

    #[test]
    fn merge_keeps_longer_span_on_overlap() {
        let merged = merge_spans(vec![
            span(0, 10, PiiKind::Key),
            span(5, 12, PiiKind::Email),
            span(20, 25, PiiKind::Ipv4),
        ]);
        assert_eq!(merged.len(), 2);
        assert_eq!((merged[0].start, merged[0].end), (0, 10));
        assert_eq!((merged[1].start, merged[1].end), (20, 25));
    }

    #[test]
    fn merge_tie_keeps_earlier_start() {
        let merged = merge_spans(vec![span(5, 10, PiiKind::Key), span(3, 8, PiiKind::Key)]);
        assert_eq!(merged.len(), 1);
        assert_eq!((merged[0].start, merged[0].end), (3, 8));
    }

    #[test]
    fn merge_sorts_disjoint_spans_by_start() {
        let merged = merge_spans(vec![span(30, 40, PiiKind::Key), span(0, 4, PiiKind::Email)]);
        assert_eq!(merged[0].start, 0);
        assert_eq!(merged[1].start, 30);
    }
}
