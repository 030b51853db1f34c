//! `evaluate`: score predictions against gold labels.
//!
//! Task 1 compares an instance file's gold labels against a predictions file
//! (`label` or `label<TAB>score` lines, as written by `tag`). Task 2
//! compares two token files sentence-by-sentence. Both print the human
//! table and save it alongside full-precision machine-readable key-value
//! lines.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use deftkit::classify::read_external_predictions;
use deftkit::corpus::{parse_file, read_instances, ParseOptions};
use deftkit::metrics::{
    default_exclude, render_machine, render_report, score_classification, score_tokens,
};
use deftkit::Report;

use crate::config::{self, Config};
use crate::error::{require_exists, CliError, CliResult};
use crate::manifest::{ensure_out_dir, write_output, Manifest};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Gold data: instance file (task 1) or token file (task 2).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Predictions: label lines (task 1) or token file (task 2).
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subtask: 1 = sentence labels, 2 = token tags.
    #[arg(long)]
    pub task: Option<u8>,
    /// Include the `O` tag in token-level aggregates.
    #[arg(long)]
    pub include_outside: bool,
    /// Input column count for task-2 files: 4 or 8.
    #[arg(long)]
    pub format: Option<u8>,
    /// Tag schema file, one tag type per line.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Sentence label rule: substring | primary.
    #[arg(long)]
    pub label_rule: Option<String>,
}

#[derive(Debug, Serialize)]
struct Settings {
    task: u8,
    gold: String,
    pred: String,
    out: String,
    include_outside: bool,
    format: u8,
    schema: Option<String>,
    label_rule: String,
}

#[derive(Debug, Serialize)]
struct Details {
    items: usize,
    macro_f1: f64,
    micro_f1: f64,
    weighted_f1: f64,
}

pub fn run(cfg: &Config, args: EvaluateArgs) -> CliResult<()> {
    let task = config::resolve_task(args.task, cfg.task)?;
    let gold_path = config::need(args.gold, cfg.paths.gold.clone(), "paths.gold")?;
    let pred_path = config::need(args.pred, cfg.paths.pred.clone(), "paths.pred")?;
    let out = config::need(args.out, cfg.paths.out.clone(), "paths.out")?;
    let include_outside = args.include_outside || cfg.metrics.include_outside.unwrap_or(false);
    let format = config::resolve_format(args.format, cfg.corpus.format)?;
    let schema_path = config::pick_opt(args.schema, cfg.paths.schema.clone());
    let label_rule =
        config::resolve_label_rule(args.label_rule, cfg.corpus.label_rule.clone())?;
    require_exists(&gold_path, "gold file")?;
    require_exists(&pred_path, "predictions file")?;
    let schema = config::resolve_schema(schema_path.as_deref())?;

    let settings = Settings {
        task,
        gold: gold_path.display().to_string(),
        pred: pred_path.display().to_string(),
        out: out.display().to_string(),
        include_outside,
        format: format.columns() as u8,
        schema: schema_path.as_ref().map(|p| p.display().to_string()),
        label_rule: format!("{label_rule:?}"),
    };

    let (report, items): (Report, usize) = if task == 1 {
        let instances = read_instances(&gold_path)?;
        let predictions = read_external_predictions::<f64>(&pred_path)?;
        if predictions.len() != instances.len() {
            return Err(CliError::Data(anyhow::anyhow!(
                "gold has {} instances but predictions file has {} lines",
                instances.len(),
                predictions.len()
            )));
        }
        let gold: Vec<u8> = instances.iter().map(|i| i.label).collect();
        let pred: Vec<u8> = predictions.iter().map(|p| p.label).collect();
        (score_classification(&gold, &pred)?, instances.len())
    } else {
        let opts = ParseOptions { format, label_rule };
        let gold = parse_file(&gold_path, &schema, opts)?;
        let pred = parse_file(&pred_path, &schema, opts)?;
        let gold_tags: Vec<_> = gold.iter().map(|s| s.tags()).collect();
        let pred_tags: Vec<_> = pred.iter().map(|s| s.tags()).collect();
        let exclude = if include_outside {
            Vec::new()
        } else {
            default_exclude()
        };
        (
            score_tokens(&gold_tags, &pred_tags, &schema, &exclude)?,
            gold.len(),
        )
    };

    let table = render_report(&report);
    ensure_out_dir(&out)?;
    write_output(&out, "report.txt", &table)?;
    write_output(&out, "metrics.txt", &render_machine(&report))?;
    Manifest::new("evaluate", &settings)
        .input(&gold_path)
        .input(&pred_path)
        .output("report.txt")
        .output("metrics.txt")
        .details(Details {
            items,
            macro_f1: report.macro_f1,
            micro_f1: report.micro_f1,
            weighted_f1: report.weighted_f1,
        })
        .write(&out)?;
    print!("{table}");
    Ok(())
}
