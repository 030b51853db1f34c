//! `tag`: run a trained model over data, producing a predictions file.
//!
//! Task 1 labels each instance with the classifier (`label<TAB>score` lines,
//! aligned with the input); task 2 retags each sentence with the tagger's
//! decoded BIO sequence, writing eight-column token rows. Gold annotations
//! in the input are ignored, never consulted.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use deftkit::corpus::{parse_file, serialize, ColumnFormat, ParseOptions};
use deftkit::tagger::apply_tags;
use deftkit::{NaiveBayes, Tagger};

use crate::config::{self, Config};
use crate::error::{require_exists, CliResult};
use crate::manifest::{ensure_out_dir, write_output, Manifest};

#[derive(Debug, Args)]
pub struct TagArgs {
    /// Trained model file from `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Data to label: instance file (task 1) or token file (task 2).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subtask: 1 = classify sentences, 2 = tag tokens.
    #[arg(long)]
    pub task: Option<u8>,
    /// Input column count for task 2: 4 or 8.
    #[arg(long)]
    pub format: Option<u8>,
    /// Sentence label rule applied to the retagged output: substring | primary.
    #[arg(long)]
    pub label_rule: Option<String>,
}

#[derive(Debug, Serialize)]
struct Settings {
    task: u8,
    model: String,
    input: String,
    out: String,
    format: u8,
    label_rule: String,
}

#[derive(Debug, Serialize)]
struct Details {
    items: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_positive: Option<usize>,
}

pub fn run(cfg: &Config, args: TagArgs) -> CliResult<()> {
    let task = config::resolve_task(args.task, cfg.task)?;
    let model_path = config::need(args.model, cfg.paths.model.clone(), "paths.model")?;
    let input = config::need(args.input, cfg.paths.input.clone(), "paths.input")?;
    let out = config::need(args.out, cfg.paths.out.clone(), "paths.out")?;
    let format = config::resolve_format(args.format, cfg.corpus.format)?;
    let label_rule =
        config::resolve_label_rule(args.label_rule, cfg.corpus.label_rule.clone())?;
    require_exists(&model_path, "model file")?;
    require_exists(&input, "input data")?;

    let settings = Settings {
        task,
        model: model_path.display().to_string(),
        input: input.display().to_string(),
        out: out.display().to_string(),
        format: format.columns() as u8,
        label_rule: format!("{label_rule:?}"),
    };
    ensure_out_dir(&out)?;
    let manifest = Manifest::new("tag", &settings)
        .input(&model_path)
        .input(&input);

    if task == 1 {
        let model = NaiveBayes::load(&model_path)?;
        let instances = deftkit::corpus::read_instances(&input)?;
        let mut lines = String::new();
        let mut positive = 0usize;
        for inst in &instances {
            let p = deftkit::classify::predict_nb(&model, &inst.text);
            positive += usize::from(p.label == 1);
            lines.push_str(&format!("{}\t{}\n", p.label, p.score));
        }
        write_output(&out, "predictions.tsv", &lines)?;
        manifest
            .output("predictions.tsv")
            .details(Details {
                items: instances.len(),
                predicted_positive: Some(positive),
            })
            .write(&out)?;
        println!(
            "classified {} sentences ({} predicted definitional) -> {}",
            instances.len(),
            positive,
            out.join("predictions.tsv").display()
        );
    } else {
        let model = Tagger::load(&model_path)?;
        let opts = ParseOptions { format, label_rule };
        let sentences = parse_file(&input, model.schema(), opts)?;
        let tagged: Vec<_> = sentences
            .iter()
            .map(|s| apply_tags(s, &model.tag_sentence(s), label_rule))
            .collect();
        write_output(&out, "tagged.deft", &serialize(&tagged, ColumnFormat::Eight))?;
        manifest
            .output("tagged.deft")
            .details(Details {
                items: tagged.len(),
                predicted_positive: None,
            })
            .write(&out)?;
        println!(
            "tagged {} sentences -> {}",
            tagged.len(),
            out.join("tagged.deft").display()
        );
    }
    Ok(())
}
