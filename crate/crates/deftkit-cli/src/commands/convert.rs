//! `convert`: turn a corpus folder into task-ready files.
//!
//! Task 1 concatenates the folder into one `text<TAB>label` instance file
//! (optionally cleaned). Task 2 concatenates into one canonical-form token
//! file and reports BIO violations found in the gold tags. Both leave a
//! manifest with per-file sentence counts and the label distribution.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use deftkit::clean::clean_sentence;
use deftkit::corpus::{
    concat_folder, serialize, serialize_instances, to_classification, ParseOptions,
};
use deftkit::tagger::validate_sequence;

use crate::config::{self, Config};
use crate::error::{config_error, CliResult};
use crate::manifest::{ensure_out_dir, write_output, Manifest};

use super::corpus_files;

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Corpus folder of tab-separated files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subtask: 1 = classification instances, 2 = token passthrough.
    #[arg(long)]
    pub task: Option<u8>,
    /// Apply text cleaning to task-1 instances.
    #[arg(long)]
    pub clean: bool,
    /// Input column count: 4 (raw) or 8 (annotated).
    #[arg(long)]
    pub format: Option<u8>,
    /// Tag schema file, one tag type per line.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Sentence label rule: substring | primary.
    #[arg(long)]
    pub label_rule: Option<String>,
}

/// Fully-resolved settings; hashed into the manifest.
#[derive(Debug, Serialize)]
struct Settings {
    task: u8,
    input: String,
    out: String,
    clean: bool,
    format: u8,
    schema: Option<String>,
    label_rule: String,
}

#[derive(Debug, Serialize)]
struct CleanCounts {
    enumerations_stripped: usize,
    links_removed: usize,
    links_kept: usize,
    dropped_empty: usize,
}

#[derive(Debug, Serialize)]
struct Details {
    files: BTreeMap<String, usize>,
    sentences: usize,
    labels: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clean: Option<CleanCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bio_violations: Option<usize>,
}

pub fn run(cfg: &Config, args: ConvertArgs) -> CliResult<()> {
    let task = config::resolve_task(args.task, cfg.task)?;
    let input = config::need(args.input, cfg.paths.input.clone(), "paths.input")?;
    let out = config::need(args.out, cfg.paths.out.clone(), "paths.out")?;
    let clean = args.clean || cfg.corpus.clean.unwrap_or(false);
    let format = config::resolve_format(args.format, cfg.corpus.format)?;
    let schema_path = config::pick_opt(args.schema, cfg.paths.schema.clone());
    let label_rule =
        config::resolve_label_rule(args.label_rule, cfg.corpus.label_rule.clone())?;
    if clean && task == 2 {
        return config_error(
            "cleaning applies to task-1 instances only; token files keep their offsets",
        );
    }

    let schema = config::resolve_schema(schema_path.as_deref())?;
    let settings = Settings {
        task,
        input: input.display().to_string(),
        out: out.display().to_string(),
        clean,
        format: format.columns() as u8,
        schema: schema_path.as_ref().map(|p| p.display().to_string()),
        label_rule: format!("{label_rule:?}"),
    };

    let files = corpus_files(&input)?;
    let opts = ParseOptions { format, label_rule };
    let sentences = concat_folder(&files, &schema, opts)?;

    let mut per_file: BTreeMap<String, usize> = BTreeMap::new();
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    for s in &sentences {
        *per_file.entry(s.source.clone()).or_insert(0) += 1;
        *labels.entry(s.label.to_string()).or_insert(0) += 1;
    }

    ensure_out_dir(&out)?;
    let mut manifest = Manifest::new("convert", &settings).input(&input);
    let (output_name, clean_counts, bio_violations);
    match task {
        1 => {
            let mut instances = to_classification(&sentences);
            clean_counts = if clean {
                let mut counts = CleanCounts {
                    enumerations_stripped: 0,
                    links_removed: 0,
                    links_kept: 0,
                    dropped_empty: 0,
                };
                instances.retain_mut(|inst| {
                    let report = clean_sentence(&inst.text);
                    counts.enumerations_stripped += usize::from(report.removed_enumeration);
                    counts.links_removed += report.removed_links;
                    counts.links_kept += report.kept_links;
                    if report.cleaned.is_empty() {
                        counts.dropped_empty += 1;
                        return false;
                    }
                    inst.text = report.cleaned;
                    true
                });
                Some(counts)
            } else {
                None
            };
            bio_violations = None;
            output_name = "instances.tsv";
            write_output(&out, output_name, &serialize_instances(&instances))?;
            println!(
                "converted {} sentences from {} files -> {}",
                instances.len(),
                files.len(),
                out.join(output_name).display()
            );
        }
        _ => {
            let violations: usize = sentences
                .iter()
                .map(|s| validate_sequence(&s.tags(), &schema).len())
                .sum();
            if violations > 0 {
                eprintln!("warning: gold tags contain {violations} BIO violations (kept as-is)");
            }
            clean_counts = None;
            bio_violations = Some(violations);
            output_name = "tokens.deft";
            write_output(&out, output_name, &serialize(&sentences, format))?;
            println!(
                "converted {} sentences from {} files -> {}",
                sentences.len(),
                files.len(),
                out.join(output_name).display()
            );
        }
    }

    let details = Details {
        files: per_file,
        sentences: sentences.len(),
        labels,
        clean: clean_counts,
        bio_violations,
    };
    manifest = manifest.output(output_name).details(details);
    manifest.write(&out)?;
    Ok(())
}
