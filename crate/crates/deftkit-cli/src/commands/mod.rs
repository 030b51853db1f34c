//! The six pipeline subcommands.

pub mod augment;
pub mod clean;
pub mod convert;
pub mod evaluate;
pub mod tag;
pub mod train;

use std::path::{Path, PathBuf};

use crate::error::{data_error, require_exists, CliError, CliResult};

/// Every regular, non-hidden file in a corpus folder, in lexicographic
/// order. The order makes folder-level operations deterministic.
pub fn corpus_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    require_exists(dir, "corpus folder")?;
    let entries = std::fs::read_dir(dir).map_err(|e| {
        CliError::Data(anyhow::Error::new(e).context(format!("listing {}", dir.display())))
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| {
            CliError::Data(anyhow::Error::new(e).context(format!("listing {}", dir.display())))
        })?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    if files.is_empty() {
        return data_error(format!("no corpus files in {}", dir.display()));
    }
    files.sort();
    Ok(files)
}
