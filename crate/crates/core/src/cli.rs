//! Command-line driver: `generate`, `run`, `rank` and `audit-confidence`.
//!
//! Exit codes: 0 success, 1 runtime or partial failure, 2 usage or config error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::data::{load_csv, make_noisy_blobs_with_layout, write_csv, BlobConfig, BlobKind, LABEL_COLUMN};
use crate::error::{Error, Result};
use crate::evaluation::confidence_histogram;
use crate::harness::{load_runlog, persist_runlog, rank_runlogs, run_experiment, ExperimentConfig, RunLog};
use crate::models::ClassifierSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const WORKERS_ENV: &str = "NOISYAL_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "noisyal", version, about = "Noise-aware batch active learning experiments")]
struct Cli {
    /// Suppress progress and summary output.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a noisy-blob dataset as CSV plus a metadata JSON.
    Generate {
        /// Blob generator config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; metadata goes next to it as `<stem>.meta.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write its results directory.
    Run(RunArgs),
    /// Friedman + Nemenyi ranking of strategies across run directories.
    Rank {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Directory for rank_report.json and rank_report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of cross-predicted maximum class probabilities.
    AuditConfidence {
        /// Dataset CSV.
        dataset: PathBuf,
        /// Classifier spec (JSON); defaults to a random forest.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Histogram CSV path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = LABEL_COLUMN)]
        label_column: String,
        /// Noise flag column to ignore as a feature.
        #[arg(long)]
        noise_column: Option<String>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted `key=value` override of an existing config key; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads; defaults to NOISYAL_WORKERS, then to all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let quiet = cli.quiet;
    let outcome = match cli.command {
        Command::Generate { config, out } => cmd_generate(&config, &out, quiet),
        Command::Run(args) => cmd_run(&args, quiet),
        Command::Rank { dirs, alpha, out } => cmd_rank(&dirs, alpha, out.as_deref(), quiet),
        Command::AuditConfidence {
            dataset,
            config,
            bins,
            out,
            seed,
            label_column,
            noise_column,
        } => cmd_audit_confidence(
            &dataset,
            config.as_deref(),
            bins,
            out.as_deref(),
            seed,
            &label_column,
            noise_column.as_deref(),
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Maps an error to the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::NotFound(_)
        | Error::Schema(_)
        | Error::SchemaVersion { .. }
        | Error::Parse { .. }
        | Error::InvalidDataset(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn read_config_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("{what}: {e}")))
}

#[derive(Serialize)]
struct BlobMeta<'a> {
    config: &'a BlobConfig,
    n_samples: usize,
    n_features: usize,
    n_classes: usize,
    n_noisy_samples: usize,
    blobs: Vec<BlobEntry<'a>>,
}

#[derive(Serialize)]
struct BlobEntry<'a> {
    center: &'a [f64],
    kind: BlobKind,
    n_samples: usize,
}

fn meta_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.meta.json"))
}

fn cmd_generate(config: &Path, out: &Path, quiet: bool) -> Result<i32> {
    let cfg: BlobConfig = parse_json(&read_config_text(config)?, "blob config")?;
    cfg.validate()?;
    let (dataset, layout) = make_noisy_blobs_with_layout(&cfg)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_csv(&dataset, out)?;
    let occupancy = layout.occupancy();
    let meta = BlobMeta {
        config: &cfg,
        n_samples: dataset.n_samples(),
        n_features: dataset.n_features(),
        n_classes: dataset.n_classes(),
        n_noisy_samples: dataset.noise_flags().map_or(0, |f| f.iter().filter(|&&b| b).count()),
        blobs: layout
            .centers
            .iter()
            .zip(&layout.kinds)
            .zip(occupancy)
            .map(|((c, &kind), n)| BlobEntry {
                center: c,
                kind,
                n_samples: n,
            })
            .collect(),
    };
    let meta_out = meta_path(out);
    fs::write(&meta_out, serde_json::to_string_pretty(&meta)? + "\n")?;
    if !quiet {
        println!(
            "wrote {} ({} samples, {} noisy) and {}",
            out.display(),
            meta.n_samples,
            meta.n_noisy_samples,
            meta_out.display()
        );
    }
    Ok(EXIT_OK)
}

/// Applies `key=value` overrides to a config document. Keys are dotted paths
/// that must already exist. Values are read as JSON when possible, comma
/// lists become arrays and anything else is a string.
pub fn apply_overrides(doc: &mut Value, overrides: &[String]) -> Result<()> {
    for ov in overrides {
        let (key, raw) = ov
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{ov}` is not key=value")))?;
        let mut slot = &mut *doc;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|m| m.get_mut(part))
                .ok_or_else(|| Error::Config(format!("override key `{key}` does not exist")))?;
        }
        let mut value = parse_override_value(raw);
        if slot.is_array() && !value.is_array() {
            value = Value::Array(vec![value]);
        }
        *slot = value;
    }
    Ok(())
}

fn parse_override_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|s| parse_override_value(s.trim())).collect());
    }
    Value::String(raw.to_string())
}

/// Loads the run config with overrides and flag values applied.
fn resolve_run_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let text = read_config_text(&args.config)?;
    let parsed: ExperimentConfig = parse_json(&text, "experiment config")?;
    // Round-trip through the typed config so every key with a default is
    // present and can be overridden.
    let mut doc = serde_json::to_value(&parsed)?;
    apply_overrides(&mut doc, &args.overrides)?;
    let mut cfg: ExperimentConfig = serde_json::from_value(doc)
        .map_err(|e| Error::Config(format!("after overrides: {e}")))?;
    cfg.resolve_paths(args.config.parent().unwrap_or(Path::new("")));
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    let env_workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV}: `{v}` is not a count")))?,
        ),
        Err(_) => None,
    };
    if let Some(w) = args.workers.or(env_workers) {
        cfg.workers = Some(w);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs, quiet: bool) -> Result<i32> {
    let cfg = resolve_run_config(args)?;
    let out = cfg
        .output_dir
        .clone()
        .ok_or_else(|| Error::Config("output_dir: pass --out or set it in the config".into()))?;
    let log = run_experiment(&cfg)?;
    persist_runlog(&log, &out)?;
    if !quiet {
        print_aggregates(&log);
        println!("results in {}", out.display());
    }
    for f in &log.failures {
        eprintln!(
            "cell {} repeat {} fold {} failed: {}",
            f.strategy, f.repeat, f.fold, f.message
        );
    }
    Ok(if log.failures.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

fn print_aggregates(log: &RunLog) {
    println!(
        "{:<12} {:>5} {:>16} {:>16} {:>16}",
        "strategy", "runs", "auc", "nsr", "rba"
    );
    for a in &log.aggregates {
        let nsr = match (a.nsr_mean, a.nsr_std) {
            (Some(m), Some(s)) => format!("{m:.3} ({s:.3})"),
            _ => "n/a".into(),
        };
        println!(
            "{:<12} {:>5} {:>16} {:>16} {:>16}",
            a.strategy.name(),
            a.n_runs,
            format!("{:.2} ({:.2})", a.auc_mean, a.auc_std),
            nsr,
            format!("{:.3} ({:.3})", a.rba_mean, a.rba_std)
        );
    }
}

fn cmd_rank(dirs: &[PathBuf], alpha: f64, out: Option<&Path>, quiet: bool) -> Result<i32> {
    let logs = dirs
        .iter()
        .map(|d| load_runlog(d))
        .collect::<Result<Vec<_>>>()?;
    let report = rank_runlogs(&logs, alpha).map_err(|e| match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    })?;
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        fs::write(out.join("rank_report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        fs::write(out.join("rank_report.txt"), report.summary())?;
    }
    if !quiet {
        print!("{}", report.summary());
    }
    Ok(EXIT_OK)
}

fn cmd_audit_confidence(
    dataset: &Path,
    config: Option<&Path>,
    bins: usize,
    out: Option<&Path>,
    seed: u64,
    label_column: &str,
    noise_column: Option<&str>,
) -> Result<i32> {
    if bins == 0 {
        return Err(Error::Config("bins: must be >= 1".into()));
    }
    let spec: ClassifierSpec = match config {
        Some(p) => parse_json(&read_config_text(p)?, "classifier spec")?,
        None => ClassifierSpec::default(),
    };
    spec.validate()?;
    let data = load_csv(dataset, label_column, noise_column)?;
    let hist = confidence_histogram(&data, &spec, bins, seed)?;
    match out {
        Some(p) => hist.write_csv(fs::File::create(p)?)?,
        None => hist.write_csv(std::io::stdout().lock())?,
    }
    Ok(EXIT_OK)
}
