//! Command-level error classification behind the process exit codes.
//!
//! Every failure is sorted into one of three buckets: bad run configuration
//! (exit 2), bad or inconsistent data (exit 1), or network trouble (exit 3).
//! The sorting happens in the `From` impls so command code can use `?` on
//! library results and still exit with the right code.

use std::path::Path;

use deftkit::augment::AugmentError;
use deftkit::classify::ClassifyError;
use deftkit::corpus::CorpusError;
use deftkit::metrics::MetricsError;
use deftkit::tagger::TaggerError;

/// A failure bucketed by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: input files are malformed, inconsistent, or unwritable
    /// outputs.
    Data(anyhow::Error),
    /// Exit 2: the run was misconfigured (flags, config file, missing
    /// paths, invalid hyperparameters).
    Config(anyhow::Error),
    /// Exit 3: the network failed, an endpoint answered unexpectedly, or an
    /// offline run hit a cold cache.
    Network(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Config(_) => 2,
            CliError::Network(_) => 3,
        }
    }

    pub fn inner(&self) -> &anyhow::Error {
        match self {
            CliError::Data(e) | CliError::Config(e) | CliError::Network(e) => e,
        }
    }
}

/// Shorthand for a configuration failure built from a message.
pub fn config_error<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(anyhow::anyhow!(msg.into())))
}

/// Shorthand for a data failure built from a message.
pub fn data_error<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Data(anyhow::anyhow!(msg.into())))
}

/// Configuration precondition: the path must exist before the run starts.
pub fn require_exists(path: &Path, what: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        config_error(format!("{what} `{}` does not exist", path.display()))
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> Self {
        match err {
            // A bad holdout fraction is a user setting, not a data defect.
            CorpusError::BadFraction(_) => CliError::Config(err.into()),
            _ => CliError::Data(err.into()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(err: ClassifyError) -> Self {
        match err {
            ClassifyError::BadAlpha(_) => CliError::Config(err.into()),
            _ => CliError::Data(err.into()),
        }
    }
}

impl From<TaggerError> for CliError {
    fn from(err: TaggerError) -> Self {
        CliError::Data(err.into())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        CliError::Data(err.into())
    }
}

impl From<AugmentError> for CliError {
    fn from(err: AugmentError) -> Self {
        match err {
            AugmentError::Network { .. }
            | AugmentError::HttpStatus { .. }
            | AugmentError::BadResponse { .. }
            | AugmentError::OfflineMiss { .. } => CliError::Network(err.into()),
            AugmentError::BadPolicy(_) => CliError::Config(err.into()),
            _ => CliError::Data(err.into()),
        }
    }
}

/// Writing an output file failed.
pub fn write_failed(path: &Path, source: std::io::Error) -> CliError {
    CliError::Data(anyhow::Error::new(source).context(format!("writing {}", path.display())))
}
