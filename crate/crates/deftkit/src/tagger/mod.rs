//! Linear-chain sequence tagging: feature extraction, BIO-constrained
//! Viterbi decoding, averaged-perceptron training, and validation of tag
//! sequences produced elsewhere.

pub mod decode;
pub mod features;
pub mod train;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::{BioTag, LabelRule, Sentence, TagSchema};
use crate::scalar::Scalar;

pub use features::{extract_features, features_at, token_shape, FeatureInterner};
pub use train::{train_perceptron, train_perceptron_logged, TrainLog};

/// Interned feature ids for one token position (binary indicators).
pub type FeatureVector = Vec<usize>;

/// A sentence's tags in token order.
pub type TagSequence = Vec<BioTag>;

/// Errors from training and model persistence.
#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("no training sentences")]
    Empty,
    #[error("sentence {sentence}, token {position}: tag `{tag}` is not in the schema")]
    UnknownTag {
        sentence: usize,
        position: usize,
        tag: String,
    },
    #[error("emission matrix shape does not match features x tags: {0}")]
    EmissionShape(String),
    #[error("transition matrix must be tags x tags, got {0}")]
    TransitionShape(String),
    #[error("transition weight for illegal pair {prev} -> {next} must be zero")]
    IllegalTransitionWeight { prev: String, next: String },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("feature name `{0:?}` may not contain tabs or newlines")]
    BadFeatureName(String),
    #[error("{origin}:{line}: {msg}")]
    BadModel {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A BIO-legality violation found by [`validate_sequence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub position: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The tag is outside the schema alphabet.
    UnknownTag(String),
    /// An `I-X` without `B-X`/`I-X` immediately before it.
    DanglingInside(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::UnknownTag(tag) => {
                write!(f, "position {}: tag `{tag}` is not in the schema", self.position)
            }
            ViolationKind::DanglingInside(tag) => write!(
                f,
                "position {}: `{tag}` has no matching B/I tag before it",
                self.position
            ),
        }
    }
}

/// List every BIO-legality violation in a tag sequence. Empty means legal.
pub fn validate_sequence(tags: &[BioTag], schema: &TagSchema) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (position, tag) in tags.iter().enumerate() {
        if !schema.contains(tag) {
            violations.push(Violation {
                position,
                kind: ViolationKind::UnknownTag(tag.to_string()),
            });
        }
        if let BioTag::Inside(tag_type) = tag {
            let supported = position > 0
                && matches!(
                    &tags[position - 1],
                    BioTag::Begin(prev) | BioTag::Inside(prev) if prev == tag_type
                );
            if !supported {
                violations.push(Violation {
                    position,
                    kind: ViolationKind::DanglingInside(tag.to_string()),
                });
            }
        }
    }
    violations
}

/// Re-tag a sentence with predicted tags, re-deriving its label.
///
/// All other token columns are copied through unchanged, so serializing the
/// result yields the input file format with only the TAG column replaced.
pub fn apply_tags(sentence: &Sentence, tags: &[BioTag], rule: LabelRule) -> Sentence {
    assert_eq!(
        sentence.tokens.len(),
        tags.len(),
        "tag sequence length must match the sentence"
    );
    let tokens = sentence
        .tokens
        .iter()
        .zip(tags)
        .map(|(tok, tag)| {
            let mut tok = tok.clone();
            tok.tag = tag.clone();
            tok
        })
        .collect();
    Sentence::new(tokens, sentence.source.clone(), sentence.index, rule)
}

const MODEL_HEADER: &str = "deftkit-tagger v1";

/// Emission + transition weights over a tag schema.
///
/// Transition weights exist only for schema-legal pairs; illegality is a
/// hard decoding constraint, not a stored −∞.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel<S> {
    schema: TagSchema,
    features: FeatureInterner,
    /// `[feature_id][tag_id]`.
    emission: Vec<Vec<S>>,
    /// `[prev_tag][next_tag]`, dense; illegal cells are structurally zero.
    transition: Vec<Vec<S>>,
}

impl<S: Scalar> ChainModel<S> {
    /// An all-zero model over `schema` with no features.
    pub fn new(schema: TagSchema) -> Self {
        let t = schema.len();
        ChainModel {
            schema,
            features: FeatureInterner::new(),
            emission: Vec::new(),
            transition: vec![vec![S::zero(); t]; t],
        }
    }

    /// Assemble a model from explicit parts, validating shapes and the
    /// legal-transitions-only invariant.
    pub fn from_parts(
        schema: TagSchema,
        feature_names: Vec<String>,
        emission: Vec<Vec<S>>,
        transition: Vec<Vec<S>>,
    ) -> Result<Self, TaggerError> {
        let t = schema.len();
        if emission.len() != feature_names.len() {
            return Err(TaggerError::EmissionShape(format!(
                "{} rows for {} features",
                emission.len(),
                feature_names.len()
            )));
        }
        if let Some(row) = emission.iter().find(|r| r.len() != t) {
            return Err(TaggerError::EmissionShape(format!(
                "row of width {} for {} tags",
                row.len(),
                t
            )));
        }
        if transition.len() != t || transition.iter().any(|r| r.len() != t) {
            return Err(TaggerError::TransitionShape(format!(
                "{}x{:?}",
                transition.len(),
                transition.first().map(Vec::len)
            )));
        }
        for (p, row) in transition.iter().enumerate() {
            for (n, &w) in row.iter().enumerate() {
                if w != S::zero() && !schema.transition_legal_idx(p, n) {
                    return Err(TaggerError::IllegalTransitionWeight {
                        prev: schema.tag_at(p).to_string(),
                        next: schema.tag_at(n).to_string(),
                    });
                }
            }
        }
        let mut features = FeatureInterner::new();
        for name in &feature_names {
            if name.contains('\t') || name.contains('\n') {
                return Err(TaggerError::BadFeatureName(name.clone()));
            }
            if features.get(name).is_some() {
                return Err(TaggerError::DuplicateFeature(name.clone()));
            }
            features.intern(name);
        }
        Ok(ChainModel {
            schema,
            features,
            emission,
            transition,
        })
    }

    pub fn schema(&self) -> &TagSchema {
        &self.schema
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn emission_weight(&self, feature: usize, tag: usize) -> S {
        self.emission[feature][tag]
    }

    pub fn transition_weight(&self, prev: usize, next: usize) -> S {
        self.transition[prev][next]
    }

    /// Interned feature vectors for a token sequence; unseen features drop
    /// out (they could only ever contribute zero).
    pub fn feature_ids(&self, texts: &[String]) -> Vec<FeatureVector> {
        (0..texts.len())
            .map(|position| {
                features_at(texts, position)
                    .iter()
                    .filter_map(|name| self.features.get(name))
                    .collect()
            })
            .collect()
    }

    /// Decode interned feature vectors to the argmax legal tag sequence.
    pub fn decode(&self, features: &[FeatureVector]) -> TagSequence {
        self.decode_scored(features).0
    }

    /// Decode and also return the argmax score.
    pub fn decode_scored(&self, features: &[FeatureVector]) -> (TagSequence, S) {
        let (ids, score) = decode::viterbi_ids(
            &self.schema,
            features,
            |f, t| self.emission[f][t],
            |p, t| self.transition[p][t],
        );
        let tags = ids.iter().map(|&t| self.schema.tag_at(t).clone()).collect();
        (tags, score)
    }

    /// Score an arbitrary tag assignment under the decoder's objective.
    /// `None` if a tag is outside the schema.
    pub fn sequence_score(&self, features: &[FeatureVector], tags: &[BioTag]) -> Option<S> {
        let ids: Option<Vec<usize>> = tags.iter().map(|t| self.schema.tag_index(t)).collect();
        let ids = ids?;
        if ids.len() != features.len() {
            return None;
        }
        Some(decode::score_ids(
            features,
            &ids,
            |f, t| self.emission[f][t],
            |p, t| self.transition[p][t],
        ))
    }

    /// Tag a sequence of token texts.
    pub fn tag_texts(&self, texts: &[String]) -> TagSequence {
        self.decode(&self.feature_ids(texts))
    }

    /// Tag a parsed sentence's tokens.
    pub fn tag_sentence(&self, sentence: &Sentence) -> TagSequence {
        let texts: Vec<String> = sentence.tokens.iter().map(|t| t.text.clone()).collect();
        self.tag_texts(&texts)
    }

    /// Render the model as its versioned flat file: schema block, transition
    /// block, emission block. Zero weights are omitted.
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_HEADER);
        out.push('\n');
        out.push_str("[schema]\n");
        for tag_type in self.schema.types() {
            out.push_str(tag_type);
            out.push('\n');
        }
        out.push_str("[transitions]\n");
        for (p, row) in self.transition.iter().enumerate() {
            for (n, &w) in row.iter().enumerate() {
                if w != S::zero() {
                    out.push_str(&format!(
                        "{}\t{}\t{}\n",
                        self.schema.tag_at(p),
                        self.schema.tag_at(n),
                        w
                    ));
                }
            }
        }
        out.push_str("[emissions]\n");
        for (f, row) in self.emission.iter().enumerate() {
            for (t, &w) in row.iter().enumerate() {
                if w != S::zero() {
                    out.push_str(&format!(
                        "{}\t{}\t{}\n",
                        self.features.name(f),
                        self.schema.tag_at(t),
                        w
                    ));
                }
            }
        }
        out
    }

    /// Parse a model file produced by [`Self::to_model_string`].
    pub fn from_model_str(content: &str, origin: &str) -> Result<Self, TaggerError> {
        let err = |line: usize, msg: String| TaggerError::BadModel {
            origin: origin.to_string(),
            line,
            msg,
        };
        let parse_weight = |line: usize, s: &str| -> Result<S, TaggerError> {
            let value: f64 = s
                .parse()
                .map_err(|_| err(line, format!("unparseable weight `{s}`")))?;
            S::from_f64(value).ok_or_else(|| err(line, format!("weight `{s}` overflows")))
        };

        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Schema,
            Transitions,
            Emissions,
        }

        let mut section = Section::Preamble;
        let mut saw_header = false;
        let mut types: Vec<String> = Vec::new();
        let mut schema: Option<TagSchema> = None;
        let mut transition: Vec<Vec<S>> = Vec::new();
        let mut features = FeatureInterner::new();
        let mut emission: Vec<Vec<S>> = Vec::new();

        for (line_no, raw_line) in content.lines().enumerate() {
            let line_no = line_no + 1;
            let line = raw_line.trim_end();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != MODEL_HEADER {
                    return Err(err(
                        line_no,
                        format!("unsupported model header `{line}`, expected `{MODEL_HEADER}`"),
                    ));
                }
                saw_header = true;
                continue;
            }
            match line {
                "[schema]" => {
                    section = Section::Schema;
                    continue;
                }
                "[transitions]" => {
                    if section != Section::Schema {
                        return Err(err(line_no, "[transitions] must follow [schema]".to_string()));
                    }
                    let built = TagSchema::from_types(types.clone())
                        .map_err(|e| err(line_no, e.to_string()))?;
                    transition = vec![vec![S::zero(); built.len()]; built.len()];
                    schema = Some(built);
                    section = Section::Transitions;
                    continue;
                }
                "[emissions]" => {
                    if section != Section::Transitions {
                        return Err(err(line_no, "[emissions] must follow [transitions]".to_string()));
                    }
                    section = Section::Emissions;
                    continue;
                }
                _ => {}
            }
            match section {
                Section::Preamble => {
                    return Err(err(line_no, format!("unexpected line `{line}` before [schema]")))
                }
                Section::Schema => types.push(line.to_string()),
                Section::Transitions => {
                    let schema = schema.as_ref().expect("schema built at section start");
                    let mut cols = line.split('\t');
                    let (prev, next, weight) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
                        (Some(p), Some(n), Some(w), None) => (p, n, w),
                        _ => {
                            return Err(err(
                                line_no,
                                "expected `prev<TAB>next<TAB>weight`".to_string(),
                            ))
                        }
                    };
                    let p = schema
                        .index_of_str(prev)
                        .ok_or_else(|| err(line_no, format!("unknown tag `{prev}`")))?;
                    let n = schema
                        .index_of_str(next)
                        .ok_or_else(|| err(line_no, format!("unknown tag `{next}`")))?;
                    if !schema.transition_legal_idx(p, n) {
                        return Err(err(
                            line_no,
                            format!("transition {prev} -> {next} is illegal under the schema"),
                        ));
                    }
                    transition[p][n] = parse_weight(line_no, weight)?;
                }
                Section::Emissions => {
                    let schema = schema.as_ref().expect("schema built before emissions");
                    let mut cols = line.split('\t');
                    let (name, tag, weight) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
                        (Some(f), Some(t), Some(w), None) => (f, t, w),
                        _ => {
                            return Err(err(
                                line_no,
                                "expected `feature<TAB>tag<TAB>weight`".to_string(),
                            ))
                        }
                    };
                    let t = schema
                        .index_of_str(tag)
                        .ok_or_else(|| err(line_no, format!("unknown tag `{tag}`")))?;
                    let f = features.intern(name);
                    if f == emission.len() {
                        emission.push(vec![S::zero(); schema.len()]);
                    }
                    emission[f][t] = parse_weight(line_no, weight)?;
                }
            }
        }
        if !saw_header {
            return Err(err(0, "empty model file".to_string()));
        }
        let schema = schema.ok_or_else(|| err(0, "missing [transitions] section".to_string()))?;
        if section != Section::Emissions {
            return Err(err(0, "missing [emissions] section".to_string()));
        }
        Ok(ChainModel {
            schema,
            features,
            emission,
            transition,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TaggerError> {
        fs::write(path, self.to_model_string()).map_err(|source| TaggerError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TaggerError> {
        let content = fs::read_to_string(path).map_err(|source| TaggerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_model_str(&content, &path.display().to_string())
    }
}

/// Decode interned feature vectors with `model` (free-function form of
/// [`ChainModel::decode`]).
pub fn viterbi_decode<S: Scalar>(model: &ChainModel<S>, features: &[FeatureVector]) -> TagSequence {
    model.decode(features)
}
