//! Deterministic sentence cleaning for classification instances.
//!
//! Two rules, both pure erasures of the original text:
//!
//! 1. A leading enumerator — optional whitespace, digits, one of `.` `)` `:`,
//!    then whitespace — is stripped. The mandatory trailing whitespace
//!    protects decimals and section numbers such as `3.5`.
//! 2. The parenthesized placeholder `([link])` is deleted wherever it
//!    occurs, absorbing one adjacent whitespace run; a bare `[link]` is a
//!    syntactic constituent ("shown in [link]") and is always kept.
//!
//! [`clean_sentence`] repeats both rules until the text stabilizes, so an
//! enumerator exposed by a deletion (`([link]) 42. text`) is stripped too
//! and cleaning a second time never changes anything.
//!
//! These rules apply to sentence-classification text only; token-level data
//! is never cleaned.

use std::sync::LazyLock;

use regex::Regex;

/// The parenthesized placeholder that gets deleted.
const PAREN_LINK: &str = "([link])";
/// The bare placeholder that is retained.
const BARE_LINK: &str = "[link]";

static ENUMERATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*[0-9]+[.):]\s+").expect("enumeration pattern compiles"));

/// What a cleaning pass did to one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanReport {
    pub original: String,
    pub cleaned: String,
    /// Whether a leading enumerator was stripped.
    pub removed_enumeration: bool,
    /// Number of `([link])` occurrences deleted.
    pub removed_links: usize,
    /// Number of `[link]` occurrences retained in the cleaned text.
    pub kept_links: usize,
}

fn count_kept_links(text: &str) -> usize {
    text.matches(BARE_LINK).count()
}

/// Strip one leading enumerator such as `41. `, `3) `, or `12: `.
pub fn strip_enumeration(text: &str) -> CleanReport {
    let (cleaned, removed) = match ENUMERATION.find(text) {
        Some(m) => (text[m.end()..].to_string(), true),
        None => (text.to_string(), false),
    };
    let kept_links = count_kept_links(&cleaned);
    CleanReport {
        original: text.to_string(),
        cleaned,
        removed_enumeration: removed,
        removed_links: 0,
        kept_links,
    }
}

/// One deletion pass over the text; returns the result and removal count.
fn strip_links_pass(text: &str) -> (String, usize) {
    let mut cleaned = String::with_capacity(text.len());
    let mut removed = 0;
    let mut rest = text;
    while let Some(pos) = rest.find(PAREN_LINK) {
        let before = &rest[..pos];
        let after = &rest[pos + PAREN_LINK.len()..];
        removed += 1;
        if before.ends_with(char::is_whitespace) {
            // "tree ([link])" -> "tree": absorb the preceding whitespace run.
            cleaned.push_str(before.trim_end());
            rest = after;
        } else if cleaned.is_empty() && before.is_empty() {
            // Sentence-initial occurrence: absorb the following whitespace.
            rest = after.trim_start();
        } else {
            // Flush against other text on both sides: delete the literal only.
            cleaned.push_str(before);
            rest = after;
        }
    }
    cleaned.push_str(rest);
    (cleaned, removed)
}

/// Delete `([link])` occurrences; keep bare `[link]`.
///
/// Deletion can in principle splice a new `([link])` together out of its
/// surroundings, so the pass repeats until none remain — the cleaned text
/// never contains the parenthesized form.
pub fn strip_links(text: &str) -> CleanReport {
    let mut cleaned = text.to_string();
    let mut removed = 0;
    loop {
        let (next, n) = strip_links_pass(&cleaned);
        cleaned = next;
        removed += n;
        if n == 0 {
            break;
        }
    }
    let kept_links = count_kept_links(&cleaned);
    CleanReport {
        original: text.to_string(),
        cleaned,
        removed_enumeration: false,
        removed_links: removed,
        kept_links,
    }
}

/// One enumerator + links + whitespace-collapse pass.
fn clean_pass(text: &str) -> CleanReport {
    let enumeration = strip_enumeration(text);
    let links = strip_links(&enumeration.cleaned);
    let cleaned = links
        .cleaned
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    let kept_links = count_kept_links(&cleaned);
    CleanReport {
        original: text.to_string(),
        cleaned,
        removed_enumeration: enumeration.removed_enumeration,
        removed_links: links.removed_links,
        kept_links,
    }
}

/// Full cleaning: strip leading enumerators, delete parenthesized links,
/// collapse whitespace runs to single spaces, and trim.
///
/// The pass repeats until the text stops changing, which makes the function
/// idempotent even on stacked enumerators (`8. 42. text`) or enumerators
/// uncovered by a link deletion. Every pass only erases characters, so the
/// loop terminates.
pub fn clean_sentence(text: &str) -> CleanReport {
    let mut cleaned = text.to_string();
    let mut removed_enumeration = false;
    let mut removed_links = 0;
    loop {
        let pass = clean_pass(&cleaned);
        removed_enumeration |= pass.removed_enumeration;
        removed_links += pass.removed_links;
        let stable = pass.cleaned == cleaned;
        cleaned = pass.cleaned;
        if stable {
            break;
        }
    }
    let kept_links = count_kept_links(&cleaned);
    CleanReport {
        original: text.to_string(),
        cleaned,
        removed_enumeration,
        removed_links,
        kept_links,
    }
}
