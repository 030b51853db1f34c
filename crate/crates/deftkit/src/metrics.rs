//! Precision / recall / F1 reporting for both subtasks.
//!
//! Sentence classification scores the two classes `0` ("Not Definition") and
//! `1` ("Definition"). Token scoring counts exact tag matches over the full
//! alphabet; tags in the exclude set (by default `O`) still appear in the
//! per-class table but are left out of the weighted, macro, and micro
//! aggregates.
//!
//! Conventions: a precision or recall with zero denominator is 0; F1 is 0
//! whenever P + R = 0 (per-class F1 is computed as `2·TP / (2·TP + FP + FN)`,
//! which equals `2PR/(P+R)` under that convention and avoids the
//! intermediate rounding). Macro-F1 averages the per-class F1 of included
//! classes with nonzero support.

use std::collections::HashSet;

use thiserror::Error;

use crate::corpus::{BioTag, TagSchema};
use crate::scalar::Scalar;
use crate::tagger::TagSequence;

/// Errors from the scoring entry points.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gold and prediction lengths differ: {gold} vs {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("cannot score an empty gold/prediction set")]
    Empty,
    #[error("sentence {sentence}: gold has {gold} tokens but prediction has {pred}")]
    ShapeMismatch {
        sentence: usize,
        gold: usize,
        pred: usize,
    },
    #[error("sentence {sentence}, token {position}: tag `{tag}` is not in the schema")]
    UnknownTag {
        sentence: usize,
        position: usize,
        tag: String,
    },
    #[error("label {0} is not binary")]
    BadLabel(u8),
}

/// Scores and raw confusion counts for one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics<S> {
    /// Machine-readable key (`0`, `1`, or a rendered tag like `B-Term`).
    pub key: String,
    /// Human-readable label for the report table.
    pub label: String,
    pub precision: S,
    pub recall: S,
    pub f1: S,
    /// Gold occurrences: `tp + fn`.
    pub support: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Whether this class feeds the weighted/macro/micro aggregates.
    pub included: bool,
}

/// Per-class table plus weighted, macro, and micro aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<S> {
    pub classes: Vec<ClassMetrics<S>>,
    pub weighted_precision: S,
    pub weighted_recall: S,
    pub weighted_f1: S,
    /// Unweighted mean F1 over included classes with nonzero support.
    pub macro_f1: S,
    pub micro_precision: S,
    pub micro_recall: S,
    pub micro_f1: S,
}

impl<S: Scalar> EvalReport<S> {
    /// Look up a class row by its machine key.
    pub fn class(&self, key: &str) -> Option<&ClassMetrics<S>> {
        self.classes.iter().find(|c| c.key == key)
    }

    /// Total gold support over included classes.
    pub fn included_support(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| c.included)
            .map(|c| c.support)
            .sum()
    }
}

fn ratio<S: Scalar>(num: usize, den: usize) -> S {
    if den == 0 {
        S::zero()
    } else {
        S::from_count(num) / S::from_count(den)
    }
}

/// Core scorer over dense class ids. `names` pairs machine keys with display
/// labels; `included[c]` controls aggregate membership.
fn score_indexed<S: Scalar>(
    gold: &[usize],
    pred: &[usize],
    names: &[(String, String)],
    included: &[bool],
) -> EvalReport<S> {
    let n_classes = names.len();
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (&g, &p) in gold.iter().zip(pred) {
        if g == p {
            tp[g] += 1;
        } else {
            fn_[g] += 1;
            fp[p] += 1;
        }
    }

    let mut classes = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let support = tp[c] + fn_[c];
        let f1_den = 2 * tp[c] + fp[c] + fn_[c];
        classes.push(ClassMetrics {
            key: names[c].0.clone(),
            label: names[c].1.clone(),
            precision: ratio(tp[c], tp[c] + fp[c]),
            recall: ratio(tp[c], support),
            f1: ratio(2 * tp[c], f1_den),
            support,
            tp: tp[c],
            fp: fp[c],
            fn_: fn_[c],
            included: included[c],
        });
    }

    let total_support: usize = classes
        .iter()
        .filter(|c| c.included)
        .map(|c| c.support)
        .sum();
    let weigh = |metric: fn(&ClassMetrics<S>) -> S| -> S {
        if total_support == 0 {
            return S::zero();
        }
        let sum: S = classes
            .iter()
            .filter(|c| c.included)
            .map(|c| metric(c) * S::from_count(c.support))
            .sum();
        sum / S::from_count(total_support)
    };

    let macro_classes: Vec<&ClassMetrics<S>> = classes
        .iter()
        .filter(|c| c.included && c.support > 0)
        .collect();
    let macro_f1 = if macro_classes.is_empty() {
        S::zero()
    } else {
        let sum: S = macro_classes.iter().map(|c| c.f1).sum();
        sum / S::from_count(macro_classes.len())
    };

    let (mut m_tp, mut m_fp, mut m_fn) = (0usize, 0usize, 0usize);
    for c in classes.iter().filter(|c| c.included) {
        m_tp += c.tp;
        m_fp += c.fp;
        m_fn += c.fn_;
    }

    EvalReport {
        weighted_precision: weigh(|c| c.precision),
        weighted_recall: weigh(|c| c.recall),
        weighted_f1: weigh(|c| c.f1),
        macro_f1,
        micro_precision: ratio(m_tp, m_tp + m_fp),
        micro_recall: ratio(m_tp, m_tp + m_fn),
        micro_f1: ratio(2 * m_tp, 2 * m_tp + m_fp + m_fn),
        classes,
    }
}

/// Score binary sentence labels. Class 0 is "Not Definition", class 1 is
/// "Definition"; both feed every aggregate.
pub fn score_classification<S: Scalar>(
    gold: &[u8],
    pred: &[u8],
) -> Result<EvalReport<S>, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&bad) = gold.iter().chain(pred).find(|&&l| l > 1) {
        return Err(MetricsError::BadLabel(bad));
    }
    let gold_ids: Vec<usize> = gold.iter().map(|&l| l as usize).collect();
    let pred_ids: Vec<usize> = pred.iter().map(|&l| l as usize).collect();
    let names = [
        ("0".to_string(), "Not Definition".to_string()),
        ("1".to_string(), "Definition".to_string()),
    ];
    Ok(score_indexed(&gold_ids, &pred_ids, &names, &[true, true]))
}

/// Score token tag sequences sentence-by-sentence.
///
/// The report table covers the schema's full alphabet; tags in `exclude` are
/// shown but do not feed the aggregates.
pub fn score_tokens<S: Scalar>(
    gold: &[TagSequence],
    pred: &[TagSequence],
    schema: &TagSchema,
    exclude: &[BioTag],
) -> Result<EvalReport<S>, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut gold_ids = Vec::new();
    let mut pred_ids = Vec::new();
    for (sentence, (g_seq, p_seq)) in gold.iter().zip(pred).enumerate() {
        if g_seq.len() != p_seq.len() {
            return Err(MetricsError::ShapeMismatch {
                sentence,
                gold: g_seq.len(),
                pred: p_seq.len(),
            });
        }
        for (position, tag) in g_seq.iter().enumerate() {
            gold_ids.push(schema.tag_index(tag).ok_or_else(|| MetricsError::UnknownTag {
                sentence,
                position,
                tag: tag.to_string(),
            })?);
        }
        for (position, tag) in p_seq.iter().enumerate() {
            pred_ids.push(schema.tag_index(tag).ok_or_else(|| MetricsError::UnknownTag {
                sentence,
                position,
                tag: tag.to_string(),
            })?);
        }
    }

    let excluded: HashSet<usize> = exclude.iter().filter_map(|t| schema.tag_index(t)).collect();
    let names: Vec<(String, String)> = schema
        .alphabet()
        .iter()
        .map(|t| (t.to_string(), t.to_string()))
        .collect();
    let included: Vec<bool> = (0..schema.len()).map(|i| !excluded.contains(&i)).collect();
    Ok(score_indexed(&gold_ids, &pred_ids, &names, &included))
}

/// The default token-scoring exclusion: `O` only.
pub fn default_exclude() -> Vec<BioTag> {
    vec![BioTag::Outside]
}

/// Render the report as a fixed-width table, values to two decimals.
pub fn render_report<S: Scalar>(report: &EvalReport<S>) -> String {
    let mut name_width = "weighted avg".len();
    for c in &report.classes {
        let extra = if c.included { 0 } else { 2 }; // trailing " *"
        name_width = name_width.max(c.label.len() + extra);
    }
    name_width += 2;

    let mut out = String::new();
    let header = format!(
        "{:<name_width$}{:>10}{:>10}{:>10}{:>10}\n",
        "", "P", "R", "F1", "support"
    );
    out.push_str(&header);

    let fmt_row = |out: &mut String, label: &str, p: S, r: S, f1: S, support: usize| {
        out.push_str(&format!(
            "{:<name_width$}{:>10.2}{:>10.2}{:>10.2}{:>10}\n",
            label, p, r, f1, support
        ));
    };

    let mut any_excluded = false;
    for c in &report.classes {
        let label = if c.included {
            c.label.clone()
        } else {
            any_excluded = true;
            format!("{} *", c.label)
        };
        fmt_row(&mut out, &label, c.precision, c.recall, c.f1, c.support);
    }

    let total = report.included_support();
    fmt_row(
        &mut out,
        "weighted avg",
        report.weighted_precision,
        report.weighted_recall,
        report.weighted_f1,
        total,
    );
    out.push_str(&format!(
        "{:<name_width$}{:>10}{:>10}{:>10.2}{:>10}\n",
        "macro f1", "-", "-", report.macro_f1, "-"
    ));
    fmt_row(
        &mut out,
        "micro avg",
        report.micro_precision,
        report.micro_recall,
        report.micro_f1,
        total,
    );
    if any_excluded {
        out.push_str("* excluded from weighted/macro/micro averages\n");
    }
    out
}

/// Render the report as machine-readable `key value` lines at full precision.
pub fn render_machine<S: Scalar>(report: &EvalReport<S>) -> String {
    let mut out = String::new();
    for c in &report.classes {
        out.push_str(&format!("class.{}.precision {}\n", c.key, c.precision));
        out.push_str(&format!("class.{}.recall {}\n", c.key, c.recall));
        out.push_str(&format!("class.{}.f1 {}\n", c.key, c.f1));
        out.push_str(&format!("class.{}.support {}\n", c.key, c.support));
        out.push_str(&format!("class.{}.tp {}\n", c.key, c.tp));
        out.push_str(&format!("class.{}.fp {}\n", c.key, c.fp));
        out.push_str(&format!("class.{}.fn {}\n", c.key, c.fn_));
    }
    out.push_str(&format!("weighted.precision {}\n", report.weighted_precision));
    out.push_str(&format!("weighted.recall {}\n", report.weighted_recall));
    out.push_str(&format!("weighted.f1 {}\n", report.weighted_f1));
    out.push_str(&format!("macro.f1 {}\n", report.macro_f1));
    out.push_str(&format!("micro.precision {}\n", report.micro_precision));
    out.push_str(&format!("micro.recall {}\n", report.micro_recall));
    out.push_str(&format!("micro.f1 {}\n", report.micro_f1));
    out
}
