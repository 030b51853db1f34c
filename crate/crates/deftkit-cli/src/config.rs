//! Run configuration: a TOML file provides defaults, command-line flags
//! override them, and built-in defaults fill whatever remains.
//!
//! The file keeps experiments reproducible (one artifact names the whole
//! run); the flag overrides keep exploration cheap. Every command resolves
//! the two layers into a flat, fully-populated settings struct up front, and
//! that resolved struct — not the raw file — is what gets hashed into the
//! run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{config_error, CliError, CliResult};

/// Top-level TOML configuration. Every field is optional; unknown keys are
/// rejected so typos fail loudly instead of silently using defaults.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Subtask selector: 1 = sentence classification, 2 = sequence labeling.
    pub task: Option<u8>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub augment: AugmentSection,
}

/// Paths shared across commands; each command reads the ones it needs.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Primary input: corpus folder or data file, per command.
    pub input: Option<PathBuf>,
    /// Output directory.
    pub out: Option<PathBuf>,
    /// Tag schema file (one tag type per line); default inventory if unset.
    pub schema: Option<PathBuf>,
    /// Trained model file (for `tag`).
    pub model: Option<PathBuf>,
    /// Gold-standard file (for `evaluate`).
    pub gold: Option<PathBuf>,
    /// Predictions file (for `evaluate`).
    pub pred: Option<PathBuf>,
}

/// Corpus reading and conversion options.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// Input column count: 4 (raw) or 8 (annotated).
    pub format: Option<u8>,
    /// Sentence label rule: "substring" or "primary".
    pub label_rule: Option<String>,
    /// Apply text cleaning during `convert`.
    pub clean: Option<bool>,
}

/// Model hyperparameters.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Laplace smoothing strength (task 1).
    pub alpha: Option<f64>,
    /// Perceptron training epochs (task 2).
    pub epochs: Option<usize>,
    /// RNG seed for shuffles and splits.
    pub seed: Option<u64>,
    /// Holdout fraction, e.g. "0.2" or "1/5"; empty = no holdout.
    pub holdout: Option<String>,
}

/// Evaluation options.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Include the `O` tag in token-level aggregates.
    pub include_outside: Option<bool>,
}

/// Augmentation options.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    /// File of terms to look up, one per line.
    pub terms: Option<PathBuf>,
    /// Corpus folder to mine terms from instead of a term file.
    pub mine: Option<PathBuf>,
    /// Response cache directory.
    pub cache: Option<PathBuf>,
    /// Never touch the network; cold cache misses become errors.
    pub offline: Option<bool>,
    /// Maximum request rate in requests per second.
    pub rate_limit: Option<f64>,
    /// Endpoint prefix override (for mock servers).
    pub base_url: Option<String>,
    /// Label only the term span, skipping the copula-split definition rule.
    pub term_only: Option<bool>,
}

impl Config {
    /// Load a config file, or return the empty config when none was given.
    pub fn load_opt(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let content = fs::read_to_string(path).map_err(|e| {
            CliError::Config(
                anyhow::Error::new(e).context(format!("reading config {}", path.display())),
            )
        })?;
        toml::from_str(&content).map_err(|e| {
            CliError::Config(
                anyhow::Error::new(e).context(format!("parsing config {}", path.display())),
            )
        })
    }
}

/// Flag value if present, else config value, else the built-in default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag value if present, else config value.
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Flag value if present, else config value, else a configuration error
/// naming the missing setting.
pub fn need<T: Clone>(flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
    pick_opt(flag, file)
        .map(Ok)
        .unwrap_or_else(|| config_error(format!("missing required setting `{name}`")))
}

/// Parse and validate the task selector.
pub fn resolve_task(flag: Option<u8>, file: Option<u8>) -> CliResult<u8> {
    let task = need(flag, file, "task")?;
    if task == 1 || task == 2 {
        Ok(task)
    } else {
        config_error(format!("task must be 1 or 2, got {task}"))
    }
}

/// Parse and validate the column format selector.
pub fn resolve_format(flag: Option<u8>, file: Option<u8>) -> CliResult<deftkit::corpus::ColumnFormat> {
    match pick(flag, file, 8) {
        4 => Ok(deftkit::corpus::ColumnFormat::Four),
        8 => Ok(deftkit::corpus::ColumnFormat::Eight),
        other => config_error(format!("format must be 4 or 8 columns, got {other}")),
    }
}

/// Parse and validate the sentence label rule.
pub fn resolve_label_rule(
    flag: Option<String>,
    file: Option<String>,
) -> CliResult<deftkit::corpus::LabelRule> {
    match pick(flag, file, "substring".to_string()).as_str() {
        "substring" => Ok(deftkit::corpus::LabelRule::DefinitionSubstring),
        "primary" => Ok(deftkit::corpus::LabelRule::PrimaryOnly),
        other => config_error(format!(
            "label rule must be `substring` or `primary`, got `{other}`"
        )),
    }
}

/// Load the tag schema from a file, or fall back to the default inventory.
pub fn resolve_schema(path: Option<&Path>) -> CliResult<deftkit::corpus::TagSchema> {
    let Some(path) = path else {
        return Ok(deftkit::corpus::TagSchema::default());
    };
    crate::error::require_exists(path, "schema file")?;
    let content = fs::read_to_string(path).map_err(|e| {
        CliError::Config(
            anyhow::Error::new(e).context(format!("reading schema {}", path.display())),
        )
    })?;
    deftkit::corpus::TagSchema::from_lines(&content).map_err(|e| CliError::Config(e.into()))
}
