//! The `otut` command line: filter, synthesize, train, evaluate, flag and
//! collate, driven by one TOML file with flag overrides.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use otut_core::models::Arch;

pub use config::PipelineConfig;

/// A bad invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_FATAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "otut", version, about = "Over- and under-translation detection for subtitle pairs")]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for synthesis and training; overrides the file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Keep clean, well-aligned seed pairs; log the rest with a reason.
    Filter {
        /// JSONL corpus, or the English SRT file with --srt-target.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Target-language SRT aligned cue by cue with --input.
        #[arg(long, requires = "tgt_lang")]
        srt_target: Option<PathBuf>,
        #[arg(long)]
        tgt_lang: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a labeled NE/OT/UT dataset from filtered seed pairs.
    Synthesize {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Total samples; overrides synthesis.num_samples.
        #[arg(long)]
        num_samples: Option<usize>,
    },
    /// Train a classification head on a synthesized dataset.
    Train {
        /// Directory holding train.jsonl and validation.jsonl.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_parser = commands::parse_arch)]
        arch: Option<Arch>,
        /// Output directory for the checkpoint and history.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a checkpoint on labeled pairs and report per language.
    Evaluate {
        /// Checkpoint file or the directory `train` wrote.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Labeled JSONL, or plain pairs when --annotations is given.
        #[arg(long)]
        input: PathBuf,
        /// CSV of per-annotator marks; gold labels come from unanimous pairs.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        annotators: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a verdict line for every input pair.
    Flag {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep pairs every annotator marked the same way.
    Collate {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = 3)]
        annotators: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Effective configuration: defaults, then the file, then flags.
pub fn effective_config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    match &cli.command {
        Command::Synthesize {
            num_samples: Some(n), ..
        } => cfg.synthesis.num_samples = *n,
        Command::Train { arch: Some(a), .. } => cfg.head.arch = *a,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(UsageError("--workers must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("cannot start worker pool: {e}"))?;
    }
    let cfg = effective_config(&cli)?;
    match cli.command {
        Command::Filter {
            input,
            srt_target,
            tgt_lang,
            out,
        } => commands::filter(
            &cfg,
            commands::FilterArgs {
                input,
                srt_target,
                tgt_lang,
                out,
            },
        ),
        Command::Synthesize { input, out, .. } => commands::synthesize(&cfg, input, out),
        Command::Train { dataset, out, .. } => commands::train_cmd(&cfg, dataset, out),
        Command::Evaluate {
            checkpoint,
            input,
            annotations,
            annotators,
            out,
        } => commands::evaluate(
            &cfg,
            commands::EvaluateArgs {
                checkpoint,
                input,
                annotations,
                annotators,
                out,
            },
        ),
        Command::Flag { checkpoint, input, out } => commands::flag(&cfg, checkpoint, input, out),
        Command::Collate {
            annotations,
            annotators,
            out,
        } => commands::collate(&cfg, annotations, annotators, out),
    }
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else {
        EXIT_FATAL
    }
}
