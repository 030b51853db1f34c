//! Multinomial Naive Bayes bag-of-words sentence classifier, plus the
//! line-aligned contract for scoring predictions produced elsewhere.
//!
//! Training uses Laplace smoothing (α = 1 by default) over a vocabulary
//! fixed in sorted term order, which makes the learned parameters exactly
//! invariant to the order of training instances. Prediction skips terms
//! outside the training vocabulary and accumulates per-term counts in
//! vocabulary order, so scores are exactly invariant to word order too.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::ClassificationInstance;
use crate::scalar::Scalar;

/// Errors from training, prediction alignment, and model persistence.
#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training data is empty")]
    Empty,
    #[error("training data contains only label {0}")]
    SingleClass(u8),
    #[error("smoothing alpha must be positive and finite, got {0}")]
    BadAlpha(String),
    #[error("{origin}:{line}: {msg}")]
    BadPrediction {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("expected {expected} predictions, found {found}")]
    PredictionCount { expected: usize, found: usize },
    #[error("{origin}:{line}: {msg}")]
    BadModel {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("model invariant violated: {0}")]
    Invariant(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Lowercase and split on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Term inventory over a training set: dense indices in sorted term order,
/// document frequencies, and the document count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    total_docs: usize,
}

impl Vocabulary {
    /// Build from tokenized documents. Terms get dense indices in sorted
    /// order, so the vocabulary is independent of document order.
    pub fn build(documents: &[Vec<String>]) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in documents {
            let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for term in seen {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let mut terms = Vec::with_capacity(df.len());
        let mut doc_freq = Vec::with_capacity(df.len());
        let mut index = HashMap::with_capacity(df.len());
        for (term, freq) in df {
            index.insert(term.to_string(), terms.len());
            terms.push(term.to_string());
            doc_freq.push(freq);
        }
        Vocabulary {
            terms,
            index,
            doc_freq,
            total_docs: documents.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, idx: usize) -> &str {
        &self.terms[idx]
    }

    pub fn doc_freq(&self, idx: usize) -> usize {
        self.doc_freq[idx]
    }

    pub fn total_docs(&self) -> usize {
        self.total_docs
    }
}

/// A binary prediction: label plus the log-odds of class 1.
///
/// `label == 1` exactly when `score > 0`; a tie at zero predicts the
/// majority class 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<S> {
    pub label: u8,
    pub score: S,
}

impl<S: Scalar> Prediction<S> {
    fn from_score(score: S) -> Self {
        Prediction {
            label: u8::from(score > S::zero()),
            score,
        }
    }
}

const MODEL_HEADER: &str = "deftkit-nb v1";

/// Trained multinomial Naive Bayes parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel<S> {
    alpha: S,
    log_prior: [S; 2],
    /// Per-term `[log P(t|0), log P(t|1)]`, indexed like `terms`.
    log_lik: Vec<[S; 2]>,
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl<S: Scalar> NaiveBayesModel<S> {
    pub fn alpha(&self) -> S {
        self.alpha
    }

    pub fn vocab_len(&self) -> usize {
        self.terms.len()
    }

    pub fn log_prior(&self, class: u8) -> S {
        self.log_prior[class as usize]
    }

    /// Check the probability-mass invariants: priors and per-class term
    /// distributions each sum to 1 within 1e-9.
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let tolerance = S::from_f64(1e-9).expect("tolerance");
        let one = S::one();
        let prior_mass = self.log_prior[0].exp() + self.log_prior[1].exp();
        if (prior_mass - one).abs() > tolerance {
            return Err(ClassifyError::Invariant(format!(
                "priors sum to {prior_mass}"
            )));
        }
        for class in 0..2 {
            let mass: S = self.log_lik.iter().map(|ll| ll[class].exp()).sum();
            if (mass - one).abs() > tolerance {
                return Err(ClassifyError::Invariant(format!(
                    "class {class} term mass sums to {mass}"
                )));
            }
        }
        Ok(())
    }
}

/// Train with Laplace smoothing `alpha`. Requires both labels in the data.
pub fn train_nb<S: Scalar>(
    instances: &[ClassificationInstance],
    alpha: S,
) -> Result<NaiveBayesModel<S>, ClassifyError> {
    if alpha <= S::zero() || !alpha.is_finite() {
        return Err(ClassifyError::BadAlpha(format!("{alpha}")));
    }
    if instances.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let class_counts = [
        instances.iter().filter(|i| i.label == 0).count(),
        instances.iter().filter(|i| i.label == 1).count(),
    ];
    if class_counts[0] == 0 {
        return Err(ClassifyError::SingleClass(1));
    }
    if class_counts[1] == 0 {
        return Err(ClassifyError::SingleClass(0));
    }

    let documents: Vec<Vec<String>> = instances.iter().map(|i| tokenize(&i.text)).collect();
    let vocab = Vocabulary::build(&documents);

    // Token counts per (term, class), and total tokens per class.
    let mut term_counts = vec![[0usize; 2]; vocab.len()];
    let mut class_tokens = [0usize; 2];
    for (doc, inst) in documents.iter().zip(instances) {
        let class = inst.label as usize;
        class_tokens[class] += doc.len();
        for term in doc {
            let idx = vocab.index_of(term).expect("training term is in vocabulary");
            term_counts[idx][class] += 1;
        }
    }

    let n = S::from_count(instances.len());
    let log_prior = [
        (S::from_count(class_counts[0]) / n).ln(),
        (S::from_count(class_counts[1]) / n).ln(),
    ];
    let vocab_size = S::from_count(vocab.len());
    let mut log_lik = Vec::with_capacity(vocab.len());
    for counts in &term_counts {
        let mut ll = [S::zero(); 2];
        for class in 0..2 {
            let num = S::from_count(counts[class]) + alpha;
            let den = S::from_count(class_tokens[class]) + alpha * vocab_size;
            ll[class] = (num / den).ln();
        }
        log_lik.push(ll);
    }

    let model = NaiveBayesModel {
        alpha,
        log_prior,
        log_lik,
        terms: (0..vocab.len()).map(|i| vocab.term(i).to_string()).collect(),
        index: (0..vocab.len())
            .map(|i| (vocab.term(i).to_string(), i))
            .collect(),
    };
    model.validate()?;
    Ok(model)
}

/// Score one sentence: log-odds of class 1, with unseen terms skipped.
pub fn predict_nb<S: Scalar>(model: &NaiveBayesModel<S>, text: &str) -> Prediction<S> {
    // Per-term counts accumulated in vocabulary order make the score exactly
    // invariant to word order.
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for term in tokenize(text) {
        if let Some(idx) = model.index.get(&term) {
            *counts.entry(*idx).or_insert(0) += 1;
        }
    }
    let score_for = |class: usize| -> S {
        let mut total = model.log_prior[class];
        for (&idx, &count) in &counts {
            total += S::from_count(count) * model.log_lik[idx][class];
        }
        total
    };
    let score = score_for(1) - score_for(0);
    Prediction::from_score(score)
}

/// Where predictions come from: the trained model, or a file produced by an
/// external system.
pub enum PredictionSource<'a, S> {
    Model(&'a NaiveBayesModel<S>),
    External(&'a [Prediction<S>]),
}

/// One prediction per instance, order preserved. External predictions must
/// align line-for-line with the instances.
pub fn predictions_for<S: Scalar>(
    source: PredictionSource<'_, S>,
    instances: &[ClassificationInstance],
) -> Result<Vec<Prediction<S>>, ClassifyError> {
    match source {
        PredictionSource::Model(model) => Ok(instances
            .iter()
            .map(|inst| predict_nb(model, &inst.text))
            .collect()),
        PredictionSource::External(preds) => {
            if preds.len() != instances.len() {
                return Err(ClassifyError::PredictionCount {
                    expected: instances.len(),
                    found: preds.len(),
                });
            }
            Ok(preds.to_vec())
        }
    }
}

/// Parse an external predictions file: one `label` or `label<TAB>score` per
/// line. A missing score is synthesized as ±1 to satisfy the sign contract.
pub fn parse_external_predictions<S: Scalar>(
    content: &str,
    origin: &str,
) -> Result<Vec<Prediction<S>>, ClassifyError> {
    let mut predictions = Vec::new();
    for (line_no, raw_line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.trim_end();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| ClassifyError::BadPrediction {
            origin: origin.to_string(),
            line: line_no,
            msg,
        };
        let (label_str, score_str) = match line.split_once('\t') {
            Some((l, s)) => (l, Some(s)),
            None => (line, None),
        };
        let label: u8 = match label_str {
            "0" => 0,
            "1" => 1,
            other => return Err(err(format!("label must be 0 or 1, got `{other}`"))),
        };
        let score = match score_str {
            None => {
                if label == 1 {
                    S::one()
                } else {
                    -S::one()
                }
            }
            Some(s) => {
                let value: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("unparseable score `{s}`")))?;
                let score = S::from_f64(value).ok_or_else(|| err(format!("score `{s}` overflows")))?;
                let implied = u8::from(score > S::zero());
                if implied != label {
                    return Err(err(format!(
                        "label {label} conflicts with score {s}: scores are log-odds of class 1, positive iff label 1"
                    )));
                }
                score
            }
        };
        predictions.push(Prediction { label, score });
    }
    Ok(predictions)
}

/// Read an external predictions file from disk.
pub fn read_external_predictions<S: Scalar>(
    path: &Path,
) -> Result<Vec<Prediction<S>>, ClassifyError> {
    let content = fs::read_to_string(path).map_err(|source| ClassifyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_external_predictions(&content, &path.display().to_string())
}

impl<S: Scalar> NaiveBayesModel<S> {
    /// Render the model in its versioned flat-file form.
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_HEADER);
        out.push('\n');
        out.push_str(&format!("alpha {}\n", self.alpha));
        out.push_str(&format!("vocab {}\n", self.terms.len()));
        out.push_str(&format!("prior0 {}\n", self.log_prior[0]));
        out.push_str(&format!("prior1 {}\n", self.log_prior[1]));
        for (term, ll) in self.terms.iter().zip(&self.log_lik) {
            out.push_str(&format!("{term}\t{}\t{}\n", ll[0], ll[1]));
        }
        out
    }

    /// Parse a model file produced by [`Self::to_model_string`].
    pub fn from_model_str(content: &str, origin: &str) -> Result<Self, ClassifyError> {
        let err = |line: usize, msg: String| ClassifyError::BadModel {
            origin: origin.to_string(),
            line,
            msg,
        };
        let parse_float = |line: usize, s: &str| -> Result<S, ClassifyError> {
            let value: f64 = s
                .parse()
                .map_err(|_| err(line, format!("unparseable number `{s}`")))?;
            S::from_f64(value).ok_or_else(|| err(line, format!("number `{s}` overflows")))
        };

        let mut lines = content.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (line_no, first) = lines
            .next()
            .map(|(i, l)| (i, l.to_string()))
            .ok_or_else(|| err(0, "empty model file".to_string()))?;
        if first != MODEL_HEADER {
            return Err(err(
                line_no,
                format!("unsupported model header `{first}`, expected `{MODEL_HEADER}`"),
            ));
        }

        let mut expect_header = |key: &str| -> Result<(usize, String), ClassifyError> {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| err(0, format!("missing `{key}` header line")))?;
            let value = line
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .ok_or_else(|| err(line_no, format!("expected `{key} <value>`")))?;
            Ok((line_no, value.to_string()))
        };
        let (l, alpha) = expect_header("alpha")?;
        let alpha = parse_float(l, &alpha)?;
        let (l, vocab) = expect_header("vocab")?;
        let vocab: usize = vocab
            .parse()
            .map_err(|_| err(l, format!("unparseable vocab size `{vocab}`")))?;
        let (l, prior0) = expect_header("prior0")?;
        let prior0 = parse_float(l, &prior0)?;
        let (l, prior1) = expect_header("prior1")?;
        let prior1 = parse_float(l, &prior1)?;

        let mut terms = Vec::with_capacity(vocab);
        let mut log_lik = Vec::with_capacity(vocab);
        let mut index = HashMap::with_capacity(vocab);
        for (line_no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (term, ll0, ll1) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(t), Some(a), Some(b), None) => (t, a, b),
                _ => return Err(err(line_no, "expected `term<TAB>ll0<TAB>ll1`".to_string())),
            };
            if index.insert(term.to_string(), terms.len()).is_some() {
                return Err(err(line_no, format!("duplicate term `{term}`")));
            }
            terms.push(term.to_string());
            log_lik.push([parse_float(line_no, ll0)?, parse_float(line_no, ll1)?]);
        }
        if terms.len() != vocab {
            return Err(err(
                0,
                format!("header claims {vocab} terms but file has {}", terms.len()),
            ));
        }
        Ok(NaiveBayesModel {
            alpha,
            log_prior: [prior0, prior1],
            log_lik,
            terms,
            index,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        fs::write(path, self.to_model_string()).map_err(|source| ClassifyError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let content = fs::read_to_string(path).map_err(|source| ClassifyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_model_str(&content, &path.display().to_string())
    }
}
