//! `textprep`: sub-character preprocessing, BPE, sharing-rate sampling and
//! scoring for CJK corpora.
//!
//! Exit status is 0 on success, 1 for input errors and 2 for contract
//! violations.

mod commands;
mod error;
mod io;
mod meta;
mod pipeline;
mod templates;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{
    BpeApplyArgs, BpeLearnArgs, BpeUndoArgs, Command, ComposeArgs, Ctx, DbValidateArgs, DecomposeArgs,
    EvalBleuArgs, EvalSignificanceArgs, SharingRateArgs, SharingSampleArgs, SharingStatsArgs,
};
use error::{CliError, Result};
use pipeline::{Manifest, Plan};
use templates::Template;

#[derive(Debug, Parser)]
#[command(name = "textprep", version, about = "CJK sub-character corpus toolkit")]
struct Cli {
    /// Database directory holding ids.txt and strokes.txt [default: bundled fixture]
    #[arg(long, global = true, value_name = "PATH")]
    db: Option<PathBuf>,
    /// Pipeline config (TOML), used by `pipeline run`
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Database checks
    #[command(subcommand)]
    Db(DbCmd),
    /// Rewrite CJK characters as ideograph or stroke sequences
    Decompose(DecomposeArgs),
    /// Restore characters from a decomposed corpus
    Compose(ComposeArgs),
    /// Byte-pair encoding
    #[command(subcommand)]
    Bpe(BpeCmd),
    /// Token sharing between corpora
    #[command(subcommand)]
    Sharing(SharingCmd),
    /// Scoring
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Configured step sequences with manifests
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Debug, Subcommand)]
enum DbCmd {
    /// Check closure, stroke coverage, arity and unambiguous decomposition
    Validate(DbValidateArgs),
}

#[derive(Debug, Subcommand)]
enum BpeCmd {
    /// Learn merges up to a vocabulary budget
    Learn(BpeLearnArgs),
    /// Segment a corpus with a learned model
    Apply(BpeApplyArgs),
    /// Join segmented subwords back into words
    Undo(BpeUndoArgs),
}

#[derive(Debug, Subcommand)]
enum SharingCmd {
    /// Type-level sharing rate of two corpora
    Rate(SharingRateArgs),
    /// Select sentences so the sharing rate approaches a target
    Sample(SharingSampleArgs),
    /// Sentence, token and vocabulary counts
    Stats(SharingStatsArgs),
}

#[derive(Debug, Subcommand)]
enum EvalCmd {
    /// Corpus BLEU
    Bleu(EvalBleuArgs),
    /// Paired bootstrap resampling between two systems
    Significance(EvalSignificanceArgs),
}

#[derive(Debug, Subcommand)]
enum PipelineCmd {
    /// Run the steps of --config and write a manifest
    Run(RunArgs),
    /// Re-run a manifest and check every recorded hash
    Replay(ReplayArgs),
    /// Print a built-in config
    #[command(subcommand)]
    Template(Template),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Manifest path [default: the config path with a .manifest.json extension]
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory to resolve recorded paths against instead of the recorded one
    #[arg(long)]
    base_dir: Option<PathBuf>,
}

fn emit(done: commands::Done) {
    if let Some(report) = done.report {
        print!("{report}");
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.config.is_some() && !matches!(cli.command, Cmd::Pipeline(PipelineCmd::Run(_))) {
        return Err(CliError::input("--config is only used by `pipeline run`"));
    }
    let ctx = Ctx::new(cli.db.clone());
    let cmd: &dyn Command = match &cli.command {
        Cmd::Db(DbCmd::Validate(a)) => a,
        Cmd::Decompose(a) => a,
        Cmd::Compose(a) => a,
        Cmd::Bpe(BpeCmd::Learn(a)) => a,
        Cmd::Bpe(BpeCmd::Apply(a)) => a,
        Cmd::Bpe(BpeCmd::Undo(a)) => a,
        Cmd::Sharing(SharingCmd::Rate(a)) => a,
        Cmd::Sharing(SharingCmd::Sample(a)) => a,
        Cmd::Sharing(SharingCmd::Stats(a)) => a,
        Cmd::Eval(EvalCmd::Bleu(a)) => a,
        Cmd::Eval(EvalCmd::Significance(a)) => a,
        Cmd::Pipeline(p) => return run_pipeline(p, &cli),
    };
    cmd.run(&ctx).map(emit)
}

fn run_pipeline(cmd: &PipelineCmd, cli: &Cli) -> Result<()> {
    match cmd {
        PipelineCmd::Run(a) => {
            let config = cli
                .config
                .as_deref()
                .ok_or_else(|| CliError::input("pipeline run needs --config PATH"))?;
            let plan = Plan::load(config)?;
            let db = cli.db.clone().map(std::path::absolute).transpose().map_err(CliError::input)?;
            let ctx = Ctx::new(db.or_else(|| plan.db.clone()));
            let manifest_path = a.manifest.clone().unwrap_or_else(|| pipeline::default_manifest_path(config));
            let manifest = pipeline::run(&plan, &ctx, &manifest_path)?;
            eprintln!(
                "{} steps complete; manifest {}",
                manifest.steps.len(),
                manifest_path.display()
            );
            Ok(())
        }
        PipelineCmd::Replay(a) => {
            let manifest = Manifest::load(&a.manifest)?;
            let n = pipeline::replay(&manifest, a.base_dir.as_deref(), cli.db.clone())?;
            eprintln!("{n} steps replayed; all hashes match");
            Ok(())
        }
        PipelineCmd::Template(t) => {
            print!("{}", t.render().map_err(CliError::input)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
