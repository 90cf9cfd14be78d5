//! Email detection.

use super::patterns;
use super::{PiiKind, PiiSpan};

/// Replacement domain used by the redactor; matches on this domain come back
/// non-redactable so a second redaction pass is a no-op.
pub const REPLACEMENT_DOMAIN: &str = "example.com";

/// Detect email addresses.
///
/// With `prefilter` set, the looser pre-filtering pattern used for benchmark
/// construction is applied instead of the detection pattern.
pub fn detect_emails(content: &str, prefilter: bool) -> Vec<PiiSpan> {
    if prefilter {
        return patterns::email_prefilter_regex()
            .captures_iter(content)
            .filter_map(|c| c.get(1))
            .map(|m| make_span(content, m.start(), m.end(), "email_prefilter_regex"))
            .collect();
    }
    patterns::email_regex()
        .captures_iter(content)
        .filter_map(|c| c.ok().and_then(|c| c.get(1)))
        .map(|m| make_span(content, m.start(), m.end(), "email_regex"))
        .collect()
}

fn make_span(content: &str, start: usize, end: usize, detector: &str) -> PiiSpan {
    let matched = &content[start..end];
    let redactable = !matched
        .rsplit_once('@')
        .is_some_and(|(_, domain)| domain == REPLACEMENT_DOMAIN);
    PiiSpan {
        start,
        end,
        kind: PiiKind::Email,
        detector: detector.to_string(),
        redactable,
    }
}
