//! `clean`: normalize an existing `text<TAB>label` instance file.
//!
//! Applies the enumeration/link/whitespace rules to each instance, drops
//! instances whose text cleans away entirely, and prints a one-line summary
//! of what changed.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use deftkit::clean::clean_sentence;
use deftkit::corpus::{read_instances, serialize_instances};

use crate::config::{self, Config};
use crate::error::{require_exists, CliResult};
use crate::manifest::{ensure_out_dir, write_output, Manifest};

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// Instance file (`text<TAB>label` lines).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Settings {
    input: String,
    out: String,
}

#[derive(Debug, Serialize)]
struct Details {
    sentences: usize,
    kept: usize,
    enumerations_stripped: usize,
    links_removed: usize,
    links_kept: usize,
    dropped_empty: usize,
}

pub fn run(cfg: &Config, args: CleanArgs) -> CliResult<()> {
    let input = config::need(args.input, cfg.paths.input.clone(), "paths.input")?;
    let out = config::need(args.out, cfg.paths.out.clone(), "paths.out")?;
    require_exists(&input, "instance file")?;
    let settings = Settings {
        input: input.display().to_string(),
        out: out.display().to_string(),
    };

    let mut instances = read_instances(&input)?;
    let mut details = Details {
        sentences: instances.len(),
        kept: 0,
        enumerations_stripped: 0,
        links_removed: 0,
        links_kept: 0,
        dropped_empty: 0,
    };
    instances.retain_mut(|inst| {
        let report = clean_sentence(&inst.text);
        details.enumerations_stripped += usize::from(report.removed_enumeration);
        details.links_removed += report.removed_links;
        details.links_kept += report.kept_links;
        if report.cleaned.is_empty() {
            details.dropped_empty += 1;
            return false;
        }
        inst.text = report.cleaned;
        true
    });
    details.kept = instances.len();

    ensure_out_dir(&out)?;
    write_output(&out, "cleaned.tsv", &serialize_instances(&instances))?;
    Manifest::new("clean", &settings)
        .input(&input)
        .output("cleaned.tsv")
        .details(&details)
        .write(&out)?;

    println!(
        "cleaned {} sentences: {} enumerations stripped, {} links removed, {} links kept{}",
        details.sentences,
        details.enumerations_stripped,
        details.links_removed,
        details.links_kept,
        if details.dropped_empty > 0 {
            format!(", {} emptied and dropped", details.dropped_empty)
        } else {
            String::new()
        }
    );
    Ok(())
}
