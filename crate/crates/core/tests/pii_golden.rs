//! Cross-engine parity for the bundled detection regexes.
//!
//! `data/golden_pii_spans.json` holds byte-offset capture spans produced by
//! the reference engine (see `data/derive_golden_spans.py`). The Rust
//! detectors must reproduce every span exactly — including the quirky cases:
//! partial matches like `fe80:`, boundary characters consumed by the IP
//! context wrapper, and matches that begin at CJK characters.

use serde::Deserialize;

use codeprep_core::pii::{detect_emails, raw_ip_candidates};

#[derive(Deserialize)]
struct GoldenCase {
    text: String,
    spans: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct GoldenFile {
    email_cases: Vec<GoldenCase>,
    ip_cases: Vec<GoldenCase>,
    prefilter_cases: Vec<GoldenCase>,
}

fn golden() -> GoldenFile {
    serde_json::from_str(include_str!("data/golden_pii_spans.json")).unwrap()
}

#[test]
fn email_regex_matches_reference_engine_spans() {
    for case in golden().email_cases {
        let spans: Vec<(usize, usize)> = detect_emails(&case.text, false)
            .into_iter()
            .map(|s| (s.start, s.end))
            .collect();
        assert_eq!(spans, case.spans, "email case {:?}", case.text);
    }
}

#[test]
fn ip_regex_matches_reference_engine_spans() {
    for case in golden().ip_cases {
        assert_eq!(
            raw_ip_candidates(&case.text),
            case.spans,
            "ip case {:?}",
            case.text
        );
    }
}

#[test]
fn prefilter_regex_matches_reference_engine_spans() {
    for case in golden().prefilter_cases {
        let spans: Vec<(usize, usize)> = detect_emails(&case.text, true)
            .into_iter()
            .map(|s| (s.start, s.end))
            .collect();
        assert_eq!(spans, case.spans, "prefilter case {:?}", case.text);
    }
}

#[test]
fn golden_file_covers_at_least_fifty_cases() {
    let g = golden();
    assert!(g.email_cases.len() + g.ip_cases.len() + g.prefilter_cases.len() >= 50);
}
