//! Weakly-supervised corpus augmentation from encyclopedia summaries.
//!
//! The pipeline mines term spans out of an annotated corpus, looks each term
//! up via [`wiki::WikiClient`], and turns every summary whose first sentence
//! actually contains the term into a new labeled example: the opening
//! sentence of an encyclopedia article about a term is, almost by
//! construction, a definition of it. Emission targets either the sentence
//! classification task (`text<TAB>1` lines) or the sequence labeling task
//! (tab-separated token rows with `B-Term`/`I-Term` over the located span
//! and, optionally, `B-Definition`/`I-Definition` after the first copula).
//!
//! Every mined term is accounted for: it either becomes an example or a
//! recorded skip with a reason, never a silent drop. Because lookups are
//! cached on disk, reruns against a fixed cache reproduce the output
//! byte for byte.
//!
//! A caveat worth knowing: such examples are biased. The term almost always
//! opens the sentence, so the emitted position histogram (term start index
//! vs. count) makes the skew visible before anyone trains on the data.

pub mod wiki;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::corpus::{serialize, BioTag, ColumnFormat, LabelRule, Sentence, Token};

pub use wiki::{FetchOutcome, FetchPolicy, RateLimiter, WikiClient};

/// Errors from term lookup, caching, and augmented-corpus emission.
#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid fetch policy: {0}")]
    BadPolicy(String),
    #[error("cannot look up an empty term")]
    EmptyTerm,
    #[error("term `{term}` is not cached and the client is offline")]
    OfflineMiss { term: String },
    #[error("fetching `{term}` failed: {msg}")]
    Network { term: String, msg: String },
    #[error("{url}: unexpected HTTP status {status}")]
    HttpStatus { url: String, status: u16 },
    #[error("{url}: unusable response: {msg}")]
    BadResponse { url: String, msg: String },
    #[error("cache entry {path} is corrupt: {msg}")]
    BadCacheEntry { path: String, msg: String },
    #[error("term span {start}..{end} does not fit a {len}-token sentence")]
    BadSpan {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Why a mined term produced no example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// No article exists for the term.
    NotFound,
    /// The title resolves to a disambiguation page, not an article.
    Disambiguation,
    /// The article exists but its summary extract is empty.
    EmptyExtract,
    /// The summary's first sentence does not contain the term verbatim.
    TermAbsent,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::NotFound => "article not found",
            SkipReason::Disambiguation => "disambiguation page",
            SkipReason::EmptyExtract => "empty summary extract",
            SkipReason::TermAbsent => "term not present in summary sentence",
        })
    }
}

/// A weakly-labeled sentence built from an article summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentExample {
    /// The mined term the example was built for.
    pub term: String,
    /// The summary's first sentence, verbatim.
    pub sentence: String,
    /// Half-open token span `[start, end)` of the term within the
    /// whitespace-split sentence.
    pub term_span: (usize, usize),
    /// URL the summary was fetched from; empty until enriched by the
    /// pipeline.
    pub source_url: String,
    /// RFC 3339 fetch timestamp; empty until enriched by the pipeline.
    pub fetched_at: String,
}

/// A term that yielded no example, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSkip {
    pub term: String,
    pub reason: SkipReason,
}

/// Outcome of an augmentation run over a term list.
///
/// Every input term lands in exactly one of the two vectors, so
/// `examples.len() + skips.len()` always equals the number of terms given.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AugmentReport {
    pub examples: Vec<AugmentExample>,
    pub skips: Vec<TermSkip>,
}

impl AugmentReport {
    /// Number of terms processed.
    pub fn total(&self) -> usize {
        self.examples.len() + self.skips.len()
    }
}

/// Mines the distinct `Term` spans out of annotated sentences.
///
/// A span is a `B-Term` token plus any immediately following `I-Term`
/// tokens, joined with single spaces. Other term-like types (aliases,
/// referential or ordered terms) are deliberately not mined: their surface
/// forms ("it", "the former") make poor lookup titles. Duplicates are
/// dropped case-insensitively, keeping the first occurrence in corpus order.
pub fn extract_terms(sentences: &[Sentence]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut terms = Vec::new();
    for sentence in sentences {
        let mut i = 0;
        while i < sentence.tokens.len() {
            if sentence.tokens[i].tag != BioTag::begin("Term") {
                i += 1;
                continue;
            }
            let mut parts = vec![sentence.tokens[i].text.as_str()];
            i += 1;
            while i < sentence.tokens.len() && sentence.tokens[i].tag == BioTag::inside("Term") {
                parts.push(sentence.tokens[i].text.as_str());
                i += 1;
            }
            let term = parts.join(" ");
            if seen.insert(term.to_lowercase()) {
                terms.push(term);
            }
        }
    }
    terms
}

/// Locates the first case-insensitive, whitespace-token-aligned occurrence
/// of `term` in `sentence`.
///
/// Tokens must match exactly (up to case); punctuation glued to a token
/// defeats the match, which errs toward dropping an example over emitting a
/// wrong span. Returns `None` when the term does not occur. The returned
/// example carries empty provenance fields for the pipeline to fill in.
pub fn label_term(sentence: &str, term: &str) -> Option<AugmentExample> {
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let needle: Vec<String> = term.split_whitespace().map(str::to_lowercase).collect();
    if needle.is_empty() || tokens.len() < needle.len() {
        return None;
    }
    for start in 0..=tokens.len() - needle.len() {
        let window = &tokens[start..start + needle.len()];
        if window
            .iter()
            .zip(&needle)
            .all(|(tok, want)| tok.to_lowercase() == *want)
        {
            return Some(AugmentExample {
                term: term.to_string(),
                sentence: sentence.to_string(),
                term_span: (start, start + needle.len()),
                source_url: String::new(),
                fetched_at: String::new(),
            });
        }
    }
    None
}

/// Looks up every term and partitions the results into examples and skips.
///
/// Lookup outcomes that mean "nothing usable here" become recorded skips;
/// retryable failures (network trouble, offline cache misses, unexpected
/// statuses) abort the run with an error so they are never mistaken for
/// exhausted terms. Terms are processed in the order given.
pub fn augment_terms(
    client: &WikiClient,
    terms: &[String],
) -> Result<AugmentReport, AugmentError> {
    let mut report = AugmentReport::default();
    for term in terms {
        match client.fetch_first_sentence(term)? {
            FetchOutcome::Fetched {
                sentence,
                url,
                fetched_at,
            } => match label_term(&sentence, term) {
                Some(mut example) => {
                    example.source_url = url;
                    example.fetched_at = fetched_at;
                    report.examples.push(example);
                }
                None => report.skips.push(TermSkip {
                    term: term.clone(),
                    reason: SkipReason::TermAbsent,
                }),
            },
            FetchOutcome::Skipped(reason) => report.skips.push(TermSkip {
                term: term.clone(),
                reason,
            }),
        }
    }
    debug_assert_eq!(report.total(), terms.len());
    Ok(report)
}

/// Which downstream task the emitted file feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentTask {
    /// Sentence classification: one `text<TAB>1` line per example.
    Classification,
    /// Sequence labeling: tab-separated token rows with BIO tags.
    Tagging,
}

/// How tokens after the term span are labeled in tagging output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefinitionLabeling {
    /// Tokens after the first copula (`is`/`are`/`was`/`were`) following the
    /// term span are labeled `B-Definition`/`I-Definition`.
    #[default]
    CopulaSplit,
    /// Only the term span is labeled; everything else is `O`.
    TermOnly,
}

/// The rendered augmentation artifacts, ready to write to disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentOutput {
    /// The task-specific data file.
    pub data: String,
    /// `start_index<TAB>count` histogram of where terms sit in their
    /// sentences, sorted by index.
    pub position_bias: String,
}

/// Histogram of term start positions across examples.
pub fn position_bias(examples: &[AugmentExample]) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for ex in examples {
        *hist.entry(ex.term_span.0).or_insert(0) += 1;
    }
    hist
}

/// Renders examples into a task-specific data file plus the position-bias
/// histogram.
///
/// Classification output normalizes each sentence to single spaces and
/// labels every line `1`. Tagging output is eight-column corpus format with
/// character offsets computed over the space-joined sentence and the source
/// column carrying the article URL; it re-parses cleanly with the default
/// schema.
pub fn emit_augmented(
    examples: &[AugmentExample],
    task: AugmentTask,
    labeling: DefinitionLabeling,
) -> Result<AugmentOutput, AugmentError> {
    let mut data = String::new();
    let mut sentences = Vec::new();
    for (idx, ex) in examples.iter().enumerate() {
        let tokens: Vec<&str> = ex.sentence.split_whitespace().collect();
        let (start, end) = ex.term_span;
        if start >= end || end > tokens.len() {
            return Err(AugmentError::BadSpan {
                start,
                end,
                len: tokens.len(),
            });
        }
        match task {
            AugmentTask::Classification => {
                data.push_str(&tokens.join(" "));
                data.push_str("\t1\n");
            }
            AugmentTask::Tagging => {
                let tags = span_tags(&tokens, ex.term_span, labeling);
                let source = if ex.source_url.is_empty() {
                    "augmented"
                } else {
                    &ex.source_url
                };
                let mut offset = 0u64;
                let rows = tokens
                    .iter()
                    .zip(tags)
                    .map(|(text, tag)| {
                        let start_char = offset;
                        let end_char = start_char + text.chars().count() as u64;
                        offset = end_char + 1; // single joining space
                        Token::untagged(*text, source, start_char, end_char, tag)
                    })
                    .collect();
                sentences.push(Sentence::new(
                    rows,
                    "augmented",
                    idx,
                    LabelRule::DefinitionSubstring,
                ));
            }
        }
    }
    if task == AugmentTask::Tagging {
        data = serialize(&sentences, ColumnFormat::Eight);
    }

    let mut bias = String::new();
    for (index, count) in position_bias(examples) {
        bias.push_str(&format!("{index}\t{count}\n"));
    }
    Ok(AugmentOutput {
        data,
        position_bias: bias,
    })
}

/// Copula forms that split a definitional sentence into term and definition.
const COPULAS: [&str; 4] = ["is", "are", "was", "were"];

/// BIO tags for one example: `B-Term`/`I-Term` over the span, and under
/// [`DefinitionLabeling::CopulaSplit`] `B-Definition`/`I-Definition` over
/// everything after the first copula that follows the span.
fn span_tags(tokens: &[&str], span: (usize, usize), labeling: DefinitionLabeling) -> Vec<BioTag> {
    let mut tags = vec![BioTag::Outside; tokens.len()];
    tags[span.0] = BioTag::begin("Term");
    for tag in tags.iter_mut().take(span.1).skip(span.0 + 1) {
        *tag = BioTag::inside("Term");
    }
    if labeling == DefinitionLabeling::CopulaSplit {
        let copula = (span.1..tokens.len())
            .find(|&i| COPULAS.contains(&tokens[i].to_lowercase().as_str()));
        if let Some(at) = copula {
            if at + 1 < tokens.len() {
                tags[at + 1] = BioTag::begin("Definition");
                for tag in tags.iter_mut().skip(at + 2) {
                    *tag = BioTag::inside("Definition");
                }
            }
        }
    }
    tags
}
