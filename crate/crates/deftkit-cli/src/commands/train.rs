//! `train`: fit a model, optionally holding out part of the data for an
//! immediate evaluation.
//!
//! Task 1 fits the Naive Bayes classifier on an instance file; task 2 fits
//! the averaged-perceptron tagger on a token file. With `--holdout FRAC`,
//! that fraction is split off (seeded, reproducible) before training and the
//! trained model's report on it is printed and saved next to the model.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use deftkit::classify::train_nb;
use deftkit::corpus::{holdout_split, parse_file, parse_fraction, read_instances, ParseOptions};
use deftkit::metrics::{
    default_exclude, render_machine, render_report, score_classification, score_tokens,
};
use deftkit::tagger::train_perceptron_logged;
use deftkit::Report;

use crate::config::{self, Config};
use crate::error::{require_exists, CliResult};
use crate::manifest::{ensure_out_dir, write_output, Manifest};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data: instance file (task 1) or token file (task 2).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subtask: 1 = classifier, 2 = tagger.
    #[arg(long)]
    pub task: Option<u8>,
    /// Laplace smoothing strength (task 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Training epochs (task 2).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// RNG seed for shuffles and the holdout split.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Holdout fraction for an immediate evaluation, e.g. "0.2" or "1/5".
    #[arg(long)]
    pub holdout: Option<String>,
    /// Input column count for task 2: 4 or 8.
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
    input: String,
    out: String,
    alpha: f64,
    epochs: usize,
    seed: u64,
    holdout: Option<String>,
    format: u8,
    schema: Option<String>,
    label_rule: String,
}

#[derive(Debug, Serialize)]
struct Details {
    train_size: usize,
    eval_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    vocab: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mistakes_per_epoch: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holdout_macro_f1: Option<f64>,
}

pub fn run(cfg: &Config, args: TrainArgs) -> CliResult<()> {
    let task = config::resolve_task(args.task, cfg.task)?;
    let input = config::need(args.input, cfg.paths.input.clone(), "paths.input")?;
    let out = config::need(args.out, cfg.paths.out.clone(), "paths.out")?;
    let alpha = config::pick(args.alpha, cfg.model.alpha, 1.0);
    let epochs = config::pick(args.epochs, cfg.model.epochs, 10);
    let seed = config::pick(args.seed, cfg.model.seed, 42);
    let holdout = config::pick_opt(args.holdout, cfg.model.holdout.clone());
    let format = config::resolve_format(args.format, cfg.corpus.format)?;
    let schema_path = config::pick_opt(args.schema, cfg.paths.schema.clone());
    let label_rule =
        config::resolve_label_rule(args.label_rule, cfg.corpus.label_rule.clone())?;
    require_exists(&input, "training data")?;
    let schema = config::resolve_schema(schema_path.as_deref())?;
    // Parsed up front so a typo fails before any training happens.
    let holdout_fraction = holdout.as_deref().map(parse_fraction).transpose()?;

    let settings = Settings {
        task,
        input: input.display().to_string(),
        out: out.display().to_string(),
        alpha,
        epochs,
        seed,
        holdout: holdout.clone(),
        format: format.columns() as u8,
        schema: schema_path.as_ref().map(|p| p.display().to_string()),
        label_rule: format!("{label_rule:?}"),
    };
    ensure_out_dir(&out)?;
    let mut manifest = Manifest::new("train", &settings).seed(seed).input(&input);

    let mut details = Details {
        train_size: 0,
        eval_size: 0,
        vocab: None,
        mistakes_per_epoch: None,
        holdout_macro_f1: None,
    };
    let mut holdout_report: Option<Report> = None;
    let model_name;

    if task == 1 {
        let instances = read_instances(&input)?;
        let (train, eval) = match holdout_fraction {
            Some(fraction) => holdout_split(instances, fraction, seed)?,
            None => (instances, Vec::new()),
        };
        details.train_size = train.len();
        details.eval_size = eval.len();

        let model = train_nb(&train, alpha)?;
        details.vocab = Some(model.vocab_len());
        model_name = "model.nb";
        model.save(&out.join(model_name))?;

        if !eval.is_empty() {
            let gold: Vec<u8> = eval.iter().map(|i| i.label).collect();
            let pred: Vec<u8> = eval
                .iter()
                .map(|i| deftkit::classify::predict_nb(&model, &i.text).label)
                .collect();
            holdout_report = Some(score_classification(&gold, &pred)?);
        }
    } else {
        let opts = ParseOptions { format, label_rule };
        let sentences = parse_file(&input, &schema, opts)?;
        let (train, eval) = match holdout_fraction {
            Some(fraction) => holdout_split(sentences, fraction, seed)?,
            None => (sentences, Vec::new()),
        };
        details.train_size = train.len();
        details.eval_size = eval.len();

        let (model, log) = train_perceptron_logged::<f64>(&train, &schema, epochs, seed)?;
        details.mistakes_per_epoch = Some(log.mistakes_per_epoch);
        model_name = "model.tagger";
        model.save(&out.join(model_name))?;

        if !eval.is_empty() {
            let gold: Vec<_> = eval.iter().map(|s| s.tags()).collect();
            let pred: Vec<_> = eval.iter().map(|s| model.tag_sentence(s)).collect();
            holdout_report = Some(score_tokens(&gold, &pred, &schema, &default_exclude())?);
        }
    }

    manifest = manifest.output(model_name);
    if let Some(report) = &holdout_report {
        details.holdout_macro_f1 = Some(report.macro_f1);
        let table = render_report(report);
        write_output(&out, "report.txt", &table)?;
        write_output(&out, "metrics.txt", &render_machine(report))?;
        manifest = manifest.output("report.txt").output("metrics.txt");
        print!("{table}");
    }
    manifest.details(&details).write(&out)?;
    println!(
        "trained on {} items ({} held out) -> {}",
        details.train_size,
        details.eval_size,
        out.join(model_name).display()
    );
    Ok(())
}
