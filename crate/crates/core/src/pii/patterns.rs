//! Bundled detection patterns and their compilation.
//!
//! The pattern files under `data/` are transcribed verbatim in the reference
//! engine's dialect (Python `regex`). [`to_engine_dialect`] performs the two
//! mechanical translations the Rust engines need — emulating VERBOSE mode by
//! stripping whitespace outside character classes, and rewriting `\b` inside
//! a character class to `\x08` (backspace), which is what the reference
//! engine parses there. Nothing about the match semantics is altered; the
//! golden-span tests pin cross-engine parity.

use std::sync::OnceLock;

pub const EMAIL_PATTERN: &str = include_str!("../../data/email_pattern.txt");
pub const EMAIL_PREFILTER_PATTERN: &str = include_str!("../../data/email_prefilter_pattern.txt");
pub const IPV4_PATTERN: &str = include_str!("../../data/ipv4_pattern.txt");
pub const IPV6_PATTERN: &str = include_str!("../../data/ipv6_pattern.txt");
pub const IP_CONTEXT_PREFIX: &str = include_str!("../../data/ip_context_prefix.txt");
pub const IP_CONTEXT_SUFFIX: &str = include_str!("../../data/ip_context_suffix.txt");
pub const IP_ALLOWLIST: &str = include_str!("../../data/ip_allowlist.txt");

/// Translate a bundled pattern to the dialect the Rust regex engines accept.
///
/// `verbose` strips whitespace outside character classes, mirroring the
/// reference engine's VERBOSE flag (none of the bundled patterns use
/// whitespace inside classes or `#` comments, so this is the whole flag).
pub fn to_engine_dialect(pattern: &str, verbose: bool) -> String {
    let mut out = String::with_capacity(pattern.len());
    let mut chars = pattern.chars().peekable();
    let mut in_class = false;
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let next = chars.next();
                match next {
                    Some('b') if in_class => out.push_str("\\x08"),
                    Some(n) => {
                        out.push('\\');
                        out.push(n);
                    }
                    None => out.push('\\'),
                }
            }
            '[' if !in_class => {
                in_class = true;
                out.push(c);
            }
            ']' if in_class => {
                in_class = false;
                out.push(c);
            }
            _ if verbose && !in_class && c.is_whitespace() => {}
            _ => out.push(c),
        }
    }
    out
}

/// The email pattern needs a backtracking engine: it has look-around
/// assertions on both sides of the capture group.
pub fn email_regex() -> &'static fancy_regex::Regex {
    static RE: OnceLock<fancy_regex::Regex> = OnceLock::new();
    RE.get_or_init(|| {
        fancy_regex::Regex::new(&to_engine_dialect(EMAIL_PATTERN, true))
            .expect("bundled email pattern must compile")
    })
}

pub fn email_prefilter_regex() -> &'static regex::Regex {
    static RE: OnceLock<regex::Regex> = OnceLock::new();
    RE.get_or_init(|| {
        regex::Regex::new(&to_engine_dialect(EMAIL_PREFILTER_PATTERN, false))
            .expect("bundled email prefilter pattern must compile")
    })
}

/// The composed IP pattern: context wrapper around `(ipv4|ipv6)`. The wrapper
/// consumes its boundary characters rather than asserting them, which is an
/// observable property of the original pipeline (two addresses separated by
/// a single space yield one match) and is preserved here.
pub fn ip_regex() -> &'static regex::Regex {
    static RE: OnceLock<regex::Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let composed = format!("{IP_CONTEXT_PREFIX}{IPV4_PATTERN}|{IPV6_PATTERN}{IP_CONTEXT_SUFFIX}");
        regex::Regex::new(&to_engine_dialect(&composed, false))
            .expect("bundled ip pattern must compile")
    })
}

/// The 14 bundled allowlist addresses, one per line.
pub fn allowlist_entries() -> impl Iterator<Item = &'static str> {
    IP_ALLOWLIST.lines().map(str::trim).filter(|l| !l.is_empty())
}
