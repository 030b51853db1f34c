//! `augment`: build weakly-labeled examples from encyclopedia summaries.
//!
//! Terms come from a file (one per line) or are mined from an annotated
//! corpus folder. Each term's article summary is fetched (or replayed from
//! the cache), and summaries containing the term become task-1 instances or
//! task-2 token rows — written to their own files, never merged into real
//! training data, along with a skip ledger and the term-position histogram
//! that makes the data's positional bias visible.
//!
//! Live runs require a contact string in the `DEFTKIT_CONTACT` environment
//! variable for the outgoing `User-Agent`, per the endpoint's etiquette.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use deftkit::augment::{
    augment_terms, emit_augmented, extract_terms, AugmentTask, DefinitionLabeling, FetchPolicy,
    WikiClient,
};
use deftkit::corpus::{concat_folder, ParseOptions};

use crate::config::{self, Config};
use crate::error::{config_error, data_error, require_exists, CliError, CliResult};
use crate::manifest::{ensure_out_dir, write_output, Manifest};

use super::corpus_files;

/// Environment variable holding the operator's contact for live fetches.
pub const CONTACT_ENV: &str = "DEFTKIT_CONTACT";

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// File of terms to look up, one per line (# comments allowed).
    #[arg(long, conflicts_with = "mine")]
    pub terms: Option<PathBuf>,
    /// Annotated corpus folder to mine terms from instead.
    #[arg(long)]
    pub mine: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Subtask to emit for: 1 = instances, 2 = token rows.
    #[arg(long)]
    pub task: Option<u8>,
    /// Response cache directory.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Never touch the network; uncached terms become errors.
    #[arg(long)]
    pub offline: bool,
    /// Maximum request rate in requests per second.
    #[arg(long)]
    pub rate_limit: Option<f64>,
    /// Endpoint prefix override (for mock servers).
    #[arg(long)]
    pub base_url: Option<String>,
    /// Label only the term span; skip the copula-split definition rule.
    #[arg(long)]
    pub term_only: bool,
    /// Input column count when mining: 4 or 8.
    #[arg(long)]
    pub format: Option<u8>,
    /// Tag schema file used when mining.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Settings {
    task: u8,
    terms: Option<String>,
    mine: Option<String>,
    out: String,
    cache: String,
    offline: bool,
    rate_limit: f64,
    base_url: Option<String>,
    term_only: bool,
}

#[derive(Debug, Serialize)]
struct Details {
    terms: usize,
    examples: usize,
    skips: usize,
}

pub fn run(cfg: &Config, args: AugmentArgs) -> CliResult<()> {
    let task = config::resolve_task(args.task, cfg.task)?;
    let out = config::need(args.out, cfg.paths.out.clone(), "paths.out")?;
    let cache = config::need(args.cache, cfg.augment.cache.clone(), "augment.cache")?;
    let offline = args.offline || cfg.augment.offline.unwrap_or(false);
    let rate_limit = config::pick(args.rate_limit, cfg.augment.rate_limit, 1.0);
    let base_url = config::pick_opt(args.base_url, cfg.augment.base_url.clone());
    let term_only = args.term_only || cfg.augment.term_only.unwrap_or(false);

    // A --mine flag overrides any term source in the config; a --terms flag
    // overrides a configured mine folder. Exactly one source must remain.
    let (terms_path, mine_path) = match (&args.terms, &args.mine) {
        (Some(t), None) => (Some(t.clone()), None),
        (None, Some(m)) => (None, Some(m.clone())),
        (None, None) => match (&cfg.augment.terms, &cfg.augment.mine) {
            (Some(_), Some(_)) => {
                return config_error("config sets both augment.terms and augment.mine; pick one")
            }
            (t, m) => (t.clone(), m.clone()),
        },
        (Some(_), Some(_)) => unreachable!("clap rejects --terms with --mine"),
    };
    if terms_path.is_none() && mine_path.is_none() {
        return config_error("a term source is required: --terms FILE or --mine CORPUS_DIR");
    }

    let settings = Settings {
        task,
        terms: terms_path.as_ref().map(|p| p.display().to_string()),
        mine: mine_path.as_ref().map(|p| p.display().to_string()),
        out: out.display().to_string(),
        cache: cache.display().to_string(),
        offline,
        rate_limit,
        base_url: base_url.clone(),
        term_only,
    };

    let terms: Vec<String> = if let Some(path) = &terms_path {
        require_exists(path, "terms file")?;
        let content = std::fs::read_to_string(path).map_err(|e| {
            CliError::Data(anyhow::Error::new(e).context(format!("reading {}", path.display())))
        })?;
        content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    } else {
        let dir = mine_path.as_ref().expect("one source is set");
        let schema_path = config::pick_opt(args.schema, cfg.paths.schema.clone());
        let schema = config::resolve_schema(schema_path.as_deref())?;
        let format = config::resolve_format(args.format, cfg.corpus.format)?;
        let opts = ParseOptions {
            format,
            label_rule: Default::default(),
        };
        let files = corpus_files(dir)?;
        extract_terms(&concat_folder(&files, &schema, opts)?)
    };
    if terms.is_empty() {
        return data_error("no terms to look up");
    }

    let user_agent = user_agent(offline)?;
    let policy = FetchPolicy {
        rate_limit,
        cache_dir: cache.clone(),
        offline,
        user_agent,
    };
    let client = match &base_url {
        Some(base) => WikiClient::with_base_url(policy, base.clone())?,
        None => WikiClient::new(policy)?,
    };

    let report = augment_terms(&client, &terms)?;
    let labeling = if term_only {
        DefinitionLabeling::TermOnly
    } else {
        DefinitionLabeling::CopulaSplit
    };
    let augment_task = if task == 1 {
        AugmentTask::Classification
    } else {
        AugmentTask::Tagging
    };
    let output = emit_augmented(&report.examples, augment_task, labeling)?;

    let data_name = if task == 1 {
        "augmented.tsv"
    } else {
        "augmented.deft"
    };
    let mut skip_lines = String::new();
    for skip in &report.skips {
        skip_lines.push_str(&format!("{}\t{}\n", skip.term, skip.reason));
    }

    ensure_out_dir(&out)?;
    write_output(&out, data_name, &output.data)?;
    write_output(&out, "position_bias.tsv", &output.position_bias)?;
    write_output(&out, "skips.tsv", &skip_lines)?;
    Manifest::new("augment", &settings)
        .output(data_name)
        .output("position_bias.tsv")
        .output("skips.tsv")
        .details(Details {
            terms: terms.len(),
            examples: report.examples.len(),
            skips: report.skips.len(),
        })
        .write(&out)?;

    println!(
        "augmented {} of {} terms ({} skipped) -> {}",
        report.examples.len(),
        terms.len(),
        report.skips.len(),
        out.join(data_name).display()
    );
    Ok(())
}

/// The `User-Agent` for outgoing requests. Live runs must identify their
/// operator; offline runs never send it, so a placeholder suffices.
fn user_agent(offline: bool) -> CliResult<String> {
    let base = concat!("deftkit/", env!("CARGO_PKG_VERSION"));
    match std::env::var(CONTACT_ENV) {
        Ok(contact) if !contact.trim().is_empty() => Ok(format!("{base} ({contact})")),
        _ if offline => Ok(base.to_string()),
        _ => config_error(format!(
            "live fetches need a contact in ${CONTACT_ENV} (an email or URL) for the User-Agent"
        )),
    }
}
