//! Toolkit for definition extraction over DEFT-format corpora.
//!
//! The pipeline mirrors the two classic subtasks of the shared-task setting:
//! sentence classification (does a sentence contain a definition?) and
//! token-level sequence labelling with fine-grained BIO tags. The crate
//! provides:
//!
//! * [`corpus`] — parsing, validation, serialization and conversion of the
//!   tab-separated DEFT annotation format, plus deterministic holdout splits.
//! * [`clean`] — the deterministic sentence-cleaning rules (leading
//!   enumerators, `([link])` placeholders).
//! * [`classify`] — a multinomial Naive Bayes bag-of-words baseline and the
//!   line-aligned external-prediction contract.
//! * [`tagger`] — feature extraction, a linear-chain model trained with the
//!   averaged structured perceptron, and BIO-constrained Viterbi decoding.
//! * [`metrics`] — per-class / weighted / macro / micro precision, recall and
//!   F1 for both subtasks.
//! * [`augment`] — Wikipedia first-sentence augmentation with caching, rate
//!   limiting and a position-bias report.
//!
//! Model weights and metric values are generic over the [`Scalar`] float
//! type; the aliases below fix the default `f64` instantiations used by the
//! CLI and the on-disk model formats.

pub mod augment;
pub mod classify;
pub mod clean;
pub mod corpus;
pub mod metrics;
pub mod scalar;
pub mod tagger;

pub use scalar::Scalar;

/// Scalar type used by the CLI and the persisted model files.
pub type DefaultScalar = f64;

/// Naive Bayes sentence classifier at the default precision.
pub type NaiveBayes = classify::NaiveBayesModel<DefaultScalar>;

/// Linear-chain sequence tagger at the default precision.
pub type Tagger = tagger::ChainModel<DefaultScalar>;

/// Evaluation report at the default precision.
pub type Report = metrics::EvalReport<DefaultScalar>;
