//! IP address detection.
//!
//! Regex candidates are kept only when they parse as structurally valid
//! addresses. Allowlisted and private addresses are still reported, but with
//! `redactable = false`; addresses of the form a.b.c.d with four single-digit
//! octets are dropped entirely unless "dns" or "server" appears within 100
//! characters of the match (those are overwhelmingly version strings).

use std::collections::BTreeSet;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use super::patterns;
use super::{PiiKind, PiiSpan};

/// Exact non-redactable addresses: the bundled public-resolver list plus any
/// per-run additions (the redactor registers its replacement pool here so a
/// second pass leaves replacements alone).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllowList {
    exact: BTreeSet<String>,
}

impl AllowList {
    /// The 14 bundled popular-DNS entries.
    pub fn bundled() -> AllowList {
        AllowList {
            exact: patterns::allowlist_entries().map(str::to_string).collect(),
        }
    }

    pub fn empty() -> AllowList {
        AllowList {
            exact: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, addr: &str) {
        self.exact.insert(addr.to_string());
    }

    pub fn contains(&self, addr: &str) -> bool {
        self.exact.contains(addr)
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.exact.iter().map(String::as_str)
    }
}

impl Default for AllowList {
    fn default() -> Self {
        AllowList::bundled()
    }
}

/// Loopback, RFC1918, and link-local ranges for IPv4; loopback and
/// unique-local/link-local for IPv6. These are never redacted.
pub fn is_private_ip(addr: &IpAddr) -> bool {
    match addr {
        IpAddr::V4(v4) => v4.is_private() || v4.is_loopback() || v4.is_link_local(),
        IpAddr::V6(v6) => {
            v6.is_loopback()
                || (v6.segments()[0] & 0xfe00) == 0xfc00 // unique local fc00::/7
                || (v6.segments()[0] & 0xffc0) == 0xfe80 // link local fe80::/10
        }
    }
}

/// Raw capture-group spans of the composed IP regex, before any validity
/// checking. Exposed so regex fidelity can be pinned independently of the
/// filtering rules layered on top.
pub fn raw_ip_candidates(content: &str) -> Vec<(usize, usize)> {
    patterns::ip_regex()
        .captures_iter(content)
        .filter_map(|c| c.get(1).map(|g| (g.start(), g.end())))
        .collect()
}

pub fn detect_ips(content: &str, allow: &AllowList) -> Vec<PiiSpan> {
    let mut spans = Vec::new();
    for (start, end) in raw_ip_candidates(content) {
        let candidate = &content[start..end];
        let (kind, addr) = match parse_candidate(candidate) {
            Some(parsed) => parsed,
            None => continue,
        };
        let allowlisted = allow.contains(candidate) || is_private_ip(&addr);
        if !allowlisted
            && is_single_digit_quad(candidate)
            && !has_dns_server_context(content, start, end)
        {
            continue;
        }
        spans.push(PiiSpan {
            start,
            end,
            kind,
            detector: match kind {
                PiiKind::Ipv4 => "ipv4_regex".to_string(),
                _ => "ipv6_regex".to_string(),
            },
            redactable: !allowlisted,
        });
    }
    spans
}

fn parse_candidate(candidate: &str) -> Option<(PiiKind, IpAddr)> {
    if let Ok(v4) = candidate.parse::<Ipv4Addr>() {
        return Some((PiiKind::Ipv4, IpAddr::V4(v4)));
    }
    if let Ok(v6) = candidate.parse::<Ipv6Addr>() {
        return Some((PiiKind::Ipv6, IpAddr::V6(v6)));
    }
    None
}

fn is_single_digit_quad(candidate: &str) -> bool {
    let parts: Vec<&str> = candidate.split('.').collect();
    parts.len() == 4 && parts.iter().all(|p| p.len() == 1)
}

/// "dns" or "server", case-insensitive, within 100 characters before or
/// after the span. Windows are measured in characters, not bytes.
fn has_dns_server_context(content: &str, start: usize, end: usize) -> bool {
    let before: String = content[..start]
        .chars()
        .rev()
        .take(100)
        .collect::<Vec<char>>()
        .into_iter()
        .rev()
        .collect();
    let after: String = content[end..].chars().take(100).collect();
    let window = format!("{}{}", before.to_lowercase(), after.to_lowercase());
    window.contains("dns") || window.contains("server")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn detected(content: &str) -> Vec<(String, bool)> {
        detect_ips(content, &AllowList::bundled())
            .into_iter()
            .map(|s| (content[s.start..s.end].to_string(), s.redactable))
            .collect()
    }

    #[test]
    fn public_address_is_redactable() {
        assert_eq!(
            detected("server at 203.0.113.7"),
            vec![("203.0.113.7".to_string(), true)]
        );
    }

    #[test]
    fn allowlisted_resolver_is_kept_but_not_redactable() {
        assert_eq!(detected("8.8.8.8"), vec![("8.8.8.8".to_string(), false)]);
    }

    #[test]
    fn version_like_quad_is_dropped_without_context() {
        assert!(detected("v1.2.3.4 release").is_empty());
        assert!(detected("3.2.1.4 is the build").is_empty());
    }

    #[test]
    fn single_digit_quad_kept_with_dns_or_server_context() {
        assert_eq!(
            detected("dns entry 2.3.4.5 added"),
            vec![("2.3.4.5".to_string(), true)]
        );
        assert_eq!(
            detected("the server uses 2.3.4.5 now"),
            vec![("2.3.4.5".to_string(), true)]
        );
    }

    #[test]
    fn private_ranges_are_not_redactable() {
        assert_eq!(
            detected("use 10.0.0.1 locally"),
            vec![("10.0.0.1".to_string(), false)]
        );
        assert_eq!(
            detected("bind 127.0.0.1:8080"),
            vec![("127.0.0.1".to_string(), false)]
        );
        assert_eq!(detected("::1 loopback"), vec![("::1".to_string(), false)]);
        assert_eq!(
            detected("addr fdff:aaaa::1 ula"),
            vec![("fdff:aaaa::1".to_string(), false)]
        );
    }

    #[test]
    fn invalid_formats_are_dropped_after_regex() {
        // "fe80:" alone satisfies the regex but is not a parseable address.
        assert!(detected("fe80::1%eth0").is_empty());
        assert!(detected("999.999.999.999").is_empty());
    }

    #[test]
    fn valid_ipv6_full_form_is_detected() {
        assert_eq!(
            detected("2001:db8:85a3:0:0:8a2e:370:7334 full"),
            vec![("2001:db8:85a3:0:0:8a2e:370:7334".to_string(), true)]
        );
    }

    #[test]
    fn every_bundled_allowlist_entry_detects_non_redactable() {
        for entry in AllowList::bundled().entries() {
            let content = format!("resolver {entry} configured");
            let spans = detect_ips(&content, &AllowList::bundled());
            assert_eq!(spans.len(), 1, "entry {entry} not detected");
            assert!(!spans[0].redactable, "entry {entry} must not be redactable");
        }
    }
}
