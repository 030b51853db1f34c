//! Data model for DEFT-format corpora.
//!
//! A corpus file is a sequence of sentences separated by blank lines; each
//! token occupies one line of tab-separated columns
//! `TOKEN SOURCE START END TAG TAG_ID ROOT_ID RELATION`. The raw-text
//! releases carry only the first four columns, so the parser accepts both
//! widths via [`ColumnFormat`].
//!
//! See [`format`] for parsing/serialization and [`split`] for deterministic
//! holdout splits.

pub mod format;
pub mod split;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

pub use format::{
    concat_folder, parse_file, parse_str, read_instances, serialize, serialize_instances,
    to_classification, write_file, write_instances, ParseOptions,
};
pub use split::{holdout_split, parse_fraction};

/// Errors arising from corpus parsing, validation, and splitting.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{origin}:{line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount {
        origin: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{origin}:{line}: tag `{tag}` is not in the schema alphabet")]
    UnknownTag {
        origin: String,
        line: usize,
        tag: String,
    },
    #[error("{origin}:{line}: non-numeric character offset `{value}`")]
    BadOffset {
        origin: String,
        line: usize,
        value: String,
    },
    #[error("{origin}:{line}: empty token text")]
    EmptyToken { origin: String, line: usize },
    #[error("{origin}:{line}: end offset {end} must exceed start offset {start}")]
    OffsetRange {
        origin: String,
        line: usize,
        start: u64,
        end: u64,
    },
    #[error("{origin}:{line}: token start offset decreases within the sentence")]
    OffsetOrder { origin: String, line: usize },
    #[error("{origin}:{line}: {msg}")]
    InstanceLine {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("schema has no tag types")]
    EmptySchema,
    #[error("duplicate tag type `{0}` in schema")]
    DuplicateType(String),
    #[error("invalid tag type `{0}`: must be non-empty without whitespace")]
    BadType(String),
    #[error("holdout fraction must lie strictly between 0 and 1, got `{0}`")]
    BadFraction(String),
    #[error("holdout split needs at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A BIO tag: `O`, or a positioned tag like `B-Term` / `I-Definition`.
///
/// The string form splits at the first hyphen, so multi-part type names such
/// as `Alias-Term` survive a round trip.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BioTag {
    Outside,
    Begin(String),
    Inside(String),
}

impl BioTag {
    /// Convenience constructor for `B-<type>`.
    pub fn begin(tag_type: impl Into<String>) -> Self {
        BioTag::Begin(tag_type.into())
    }

    /// Convenience constructor for `I-<type>`.
    pub fn inside(tag_type: impl Into<String>) -> Self {
        BioTag::Inside(tag_type.into())
    }

    /// The tag's type, or `None` for `O`.
    pub fn tag_type(&self) -> Option<&str> {
        match self {
            BioTag::Outside => None,
            BioTag::Begin(t) | BioTag::Inside(t) => Some(t),
        }
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, BioTag::Outside)
    }

    pub fn is_inside(&self) -> bool {
        matches!(self, BioTag::Inside(_))
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::Outside => f.write_str("O"),
            BioTag::Begin(t) => write!(f, "B-{t}"),
            BioTag::Inside(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for BioTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(BioTag::Outside);
        }
        match s.split_once('-') {
            Some(("B", t)) if !t.is_empty() => Ok(BioTag::Begin(t.to_string())),
            Some(("I", t)) if !t.is_empty() => Ok(BioTag::Inside(t.to_string())),
            _ => Err(format!("`{s}` is not a BIO tag")),
        }
    }
}

/// The closed alphabet of BIO tags and the legality of transitions between
/// them.
///
/// The alphabet is ordered `O` first, then `B-T`, `I-T` for each type in
/// inventory order; that order doubles as the decoder's deterministic
/// tie-break order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSchema {
    types: Vec<String>,
    alphabet: Vec<BioTag>,
    index: HashMap<String, usize>,
}

impl TagSchema {
    /// The fine-grained inventory used by the shared-task annotation files.
    pub const DEFAULT_TYPES: [&'static str; 8] = [
        "Term",
        "Definition",
        "Alias-Term",
        "Referential-Term",
        "Referential-Definition",
        "Ordered-Term",
        "Ordered-Definition",
        "Secondary-Definition",
    ];

    /// Build a schema from an ordered tag-type inventory.
    pub fn from_types<I, S>(types: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let types: Vec<String> = types.into_iter().map(Into::into).collect();
        if types.is_empty() {
            return Err(CorpusError::EmptySchema);
        }
        let mut alphabet = vec![BioTag::Outside];
        let mut index = HashMap::new();
        index.insert("O".to_string(), 0);
        for t in &types {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(CorpusError::BadType(t.clone()));
            }
            for tag in [BioTag::begin(t.clone()), BioTag::inside(t.clone())] {
                let rendered = tag.to_string();
                if index.insert(rendered.clone(), alphabet.len()).is_some() {
                    return Err(CorpusError::DuplicateType(t.clone()));
                }
                alphabet.push(tag);
            }
        }
        Ok(TagSchema {
            types,
            alphabet,
            index,
        })
    }

    /// Parse a schema from text: one tag type per line, `#` comments and
    /// blank lines ignored.
    pub fn from_lines(content: &str) -> Result<Self, CorpusError> {
        let types = content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect::<Vec<_>>();
        Self::from_types(types)
    }

    /// The ordered tag-type inventory.
    pub fn types(&self) -> &[String] {
        &self.types
    }

    /// Full tag alphabet in schema order (`O` at index 0).
    pub fn alphabet(&self) -> &[BioTag] {
        &self.alphabet
    }

    /// Alphabet size, `2 * |types| + 1`.
    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        false // an alphabet always contains at least `O`
    }

    /// Index of a tag in the alphabet, if present.
    pub fn tag_index(&self, tag: &BioTag) -> Option<usize> {
        // Render-free lookup for the common variants.
        match tag {
            BioTag::Outside => Some(0),
            _ => self.index.get(&tag.to_string()).copied(),
        }
    }

    /// Look up a rendered tag string such as `B-Term`.
    pub fn index_of_str(&self, rendered: &str) -> Option<usize> {
        self.index.get(rendered).copied()
    }

    /// The tag at an alphabet index.
    pub fn tag_at(&self, idx: usize) -> &BioTag {
        &self.alphabet[idx]
    }

    pub fn contains(&self, tag: &BioTag) -> bool {
        self.tag_index(tag).is_some()
    }

    /// Whether a tag may open a sentence: `I-X` never may.
    pub fn start_legal(&self, tag: &BioTag) -> bool {
        !tag.is_inside()
    }

    /// Whether `next` may immediately follow `prev`: `I-X` requires `B-X` or
    /// `I-X` before it; every other pair is legal.
    pub fn transition_legal(&self, prev: &BioTag, next: &BioTag) -> bool {
        match next {
            BioTag::Inside(t) => matches!(
                prev,
                BioTag::Begin(p) | BioTag::Inside(p) if p == t
            ),
            _ => true,
        }
    }

    /// `start_legal`/`transition_legal` over alphabet indices, for decoder
    /// inner loops.
    pub fn start_legal_idx(&self, tag: usize) -> bool {
        self.start_legal(&self.alphabet[tag])
    }

    pub fn transition_legal_idx(&self, prev: usize, next: usize) -> bool {
        self.transition_legal(&self.alphabet[prev], &self.alphabet[next])
    }
}

impl Default for TagSchema {
    fn default() -> Self {
        Self::from_types(Self::DEFAULT_TYPES).expect("default inventory is valid")
    }
}

/// How a sentence's binary definition label is derived from its tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelRule {
    /// Label 1 iff any token's tag type contains the substring `Definition`
    /// (covers referential/ordered/secondary definitions).
    #[default]
    DefinitionSubstring,
    /// Label 1 iff any token carries the primary `Definition` type exactly.
    PrimaryOnly,
}

impl LabelRule {
    /// Whether a single tag marks its sentence as containing a definition.
    pub fn marks_definition(&self, tag: &BioTag) -> bool {
        match tag.tag_type() {
            None => false,
            Some(t) => match self {
                LabelRule::DefinitionSubstring => t.contains("Definition"),
                LabelRule::PrimaryOnly => t == "Definition",
            },
        }
    }

    /// Derive the binary sentence label from a token sequence.
    pub fn sentence_label(&self, tokens: &[Token]) -> u8 {
        u8::from(tokens.iter().any(|tok| self.marks_definition(&tok.tag)))
    }
}

/// One corpus row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Surface form (non-empty).
    pub text: String,
    /// Source-document identifier from the corpus file.
    pub source: String,
    /// Inclusive character offset in the source document.
    pub start_char: u64,
    /// Exclusive character offset in the source document.
    pub end_char: u64,
    pub tag: BioTag,
    /// Annotation instance id; `-1` (or empty) when absent.
    pub tag_id: String,
    /// Relation head id; `-1` (or empty) when absent.
    pub root_id: String,
    /// Relation label; `0` (or empty) when absent.
    pub relation: String,
}

impl Token {
    /// A token with no annotation beyond its tag, using the absent-value
    /// sentinels for the relation columns.
    pub fn untagged(
        text: impl Into<String>,
        source: impl Into<String>,
        start_char: u64,
        end_char: u64,
        tag: BioTag,
    ) -> Self {
        Token {
            text: text.into(),
            source: source.into(),
            start_char,
            end_char,
            tag,
            tag_id: "-1".to_string(),
            root_id: "-1".to_string(),
            relation: "0".to_string(),
        }
    }
}

/// A token sequence with its derived binary label and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Originating corpus file (not the SOURCE column, which names the
    /// document the file was annotated from).
    pub source: String,
    /// Position within the originating file, 0-based.
    pub index: usize,
    /// 1 iff the sentence contains a definition under the active
    /// [`LabelRule`].
    pub label: u8,
}

impl Sentence {
    /// Build a sentence, deriving its label under `rule`.
    pub fn new(tokens: Vec<Token>, source: impl Into<String>, index: usize, rule: LabelRule) -> Self {
        let label = rule.sentence_label(&tokens);
        Sentence {
            tokens,
            source: source.into(),
            index,
            label,
        }
    }

    /// Token texts joined with single spaces.
    pub fn joined_text(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&tok.text);
        }
        out
    }

    /// The sentence's tags in token order.
    pub fn tags(&self) -> Vec<BioTag> {
        self.tokens.iter().map(|t| t.tag.clone()).collect()
    }
}

/// A subtask-1 unit: cleaned or space-joined sentence text plus its label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationInstance {
    pub text: String,
    pub label: u8,
}

impl ClassificationInstance {
    pub fn new(text: impl Into<String>, label: u8) -> Self {
        ClassificationInstance {
            text: text.into(),
            label,
        }
    }
}

/// Column widths accepted by the parser and emitted by the serializer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnFormat {
    /// `TOKEN SOURCE START END` — raw-text releases; tags default to `O`.
    Four,
    /// `TOKEN SOURCE START END TAG TAG_ID ROOT_ID RELATION`.
    #[default]
    Eight,
}

impl ColumnFormat {
    pub fn columns(&self) -> usize {
        match self {
            ColumnFormat::Four => 4,
            ColumnFormat::Eight => 8,
        }
    }
}
