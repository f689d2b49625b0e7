//! Command arguments and their execution. The same argument structs back
//! the subcommands and the pipeline steps, so config keys match the flags.

use std::cell::OnceCell;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, ValueEnum};
use serde::{Deserialize, Serialize};
use textprep::sharing::occurrence_sharing_rate;
use textprep::{
    bleu_corpus, corpus_sharing_rate, corpus_stats, learn_bpe, paired_bootstrap, sample_with_sharing_rate,
    undo_corpus, validate_db, BpeError, BpeModel, DecompConfig, Decomposer, DecompositionDb, EvalError,
    Granularity, MarkerPolicy, RemovalMode, SampleError, SampleOutcome, SamplerConfig, VocabSet,
};

use crate::error::{CliError, Result};
use crate::io::{load_db, read_corpus, read_lines, read_text, write_lines, write_text};
use crate::meta::{self, Sidecar};

pub const MIN_RESAMPLES: usize = 100;

/// Shared state for one invocation. The database is loaded on first use.
pub struct Ctx {
    db_dir: Option<PathBuf>,
    db: OnceCell<DecompositionDb>,
}

impl Ctx {
    pub fn new(db_dir: Option<PathBuf>) -> Self {
        Ctx {
            db_dir,
            db: OnceCell::new(),
        }
    }

    pub fn db_dir(&self) -> Option<&Path> {
        self.db_dir.as_deref()
    }

    pub fn db(&self) -> Result<&DecompositionDb> {
        if let Some(db) = self.db.get() {
            return Ok(db);
        }
        let db = load_db(self.db_dir.as_deref())?;
        Ok(self.db.get_or_init(|| db))
    }
}

/// What a command read and wrote, plus any report text.
#[derive(Debug, Default)]
pub struct Done {
    pub report: Option<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl Done {
    fn read(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    fn wrote(mut self, path: &Path) -> Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    fn wrote_opt(self, path: Option<PathBuf>) -> Self {
        match path {
            Some(p) => self.wrote(&p),
            None => self,
        }
    }

    /// Sends the report to `out`, or keeps it for stdout.
    fn report(mut self, text: String, out: Option<&Path>) -> Result<Self> {
        match out {
            Some(path) => {
                write_text(path, &text)?;
                Ok(self.wrote(path))
            }
            None => {
                self.report = Some(text);
                Ok(self)
            }
        }
    }
}

/// Path slots of a command, named after their flags.
pub struct Slots<'a> {
    pub inputs: Vec<(&'static str, &'a mut PathBuf)>,
    pub outputs: Vec<(&'static str, &'a mut PathBuf)>,
}

pub trait Command {
    fn run(&self, ctx: &Ctx) -> Result<Done>;
    fn slots(&mut self) -> Slots<'_>;
    fn seed(&self) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
    Tsv,
}

fn yes() -> bool {
    true
}

fn default_granularity() -> Granularity {
    Granularity::Ideograph
}

fn default_resamples() -> usize {
    1000
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DbValidateArgs {
    /// Leave collisions unresolved instead of assigning duplication markers
    #[arg(long)]
    #[serde(default)]
    pub no_markers: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command for DbValidateArgs {
    fn run(&self, ctx: &Ctx) -> Result<Done> {
        let db = ctx.db()?;
        let report = if self.no_markers {
            validate_db(&db.clone().with_marker_policy(MarkerPolicy::Disabled))
        } else {
            validate_db(db)
        };
        let done = Done::default().report(format!("{report}\n"), self.out.as_deref())?;
        if !report.is_clean() {
            if let Some(text) = &done.report {
                print!("{text}");
            }
            return Err(CliError::contract("database is not usable for lossless decomposition"));
        }
        Ok(done)
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![],
            outputs: self.out.iter_mut().map(|p| ("out", p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DecomposeArgs {
    /// Whitespace-tokenized corpus, one sentence per line
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// character, ideograph or stroke
    #[arg(long, default_value = "ideograph")]
    #[serde(default = "default_granularity")]
    pub granularity: Granularity,
    /// Keep description characters in the output
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    #[serde(default = "yes")]
    pub idcs: bool,
    /// Fail on CJK characters missing from the database
    #[arg(long)]
    #[serde(default)]
    pub strict: bool,
}

impl DecomposeArgs {
    pub fn config(&self) -> DecompConfig {
        DecompConfig::new(self.granularity, self.idcs)
    }
}

impl Command for DecomposeArgs {
    fn run(&self, ctx: &Ctx) -> Result<Done> {
        let db = ctx.db()?;
        let lines = read_corpus(&self.input)?;
        let out = Decomposer::new(db, self.config())
            .strict(self.strict)
            .decompose_corpus(&lines)
            .map_err(|e| CliError::contract(format!("{}: {e}", self.input.display())))?;
        write_lines(&self.out, &out)?;
        let sidecar = Sidecar::new(db, self.config()).write(&self.out)?;
        Ok(Done::default().read(&self.input).wrote(&self.out).wrote_opt(sidecar))
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![("in", &mut self.input)],
            outputs: vec![("out", &mut self.out)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ComposeArgs {
    /// Decomposed corpus; its sidecar supplies the configuration
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Sidecar to use instead of the one next to the input
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Configuration for input without a sidecar
    #[arg(long)]
    pub granularity: Option<Granularity>,
    #[arg(long, action = ArgAction::Set)]
    pub idcs: Option<bool>,
}

impl ComposeArgs {
    fn config(&self, db: &DecompositionDb) -> Result<(DecompConfig, Option<PathBuf>)> {
        let (sidecar, meta_path) = match &self.meta {
            Some(p) => {
                let meta = Sidecar::parse(&read_text(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
                (Some(meta), Some(p.clone()))
            }
            None => {
                let meta = Sidecar::read(&self.input)?;
                let path = meta.as_ref().map(|_| Sidecar::path_for(&self.input));
                (meta, path)
            }
        };
        let explicit = self.granularity.map(|g| DecompConfig::new(g, self.idcs.unwrap_or(true)));
        let cfg = match (sidecar, explicit) {
            (Some(meta), explicit) => {
                meta.check_db(db)?;
                if let Some(mut cfg) = explicit {
                    cfg.idcs = self.idcs.unwrap_or(meta.config.idcs);
                    if !same_config(cfg, meta.config) {
                        return Err(CliError::contract(format!(
                            "requested {cfg} but the sidecar records {}",
                            meta.config
                        )));
                    }
                }
                meta.config
            }
            (None, Some(cfg)) => cfg,
            (None, None) => {
                return Err(CliError::input(format!(
                    "{}: no sidecar found; pass --granularity and --idcs",
                    self.input.display()
                )))
            }
        };
        Ok((cfg, meta_path))
    }
}

fn same_config(a: DecompConfig, b: DecompConfig) -> bool {
    (a.is_identity() && b.is_identity()) || a == b
}

impl Command for ComposeArgs {
    fn run(&self, ctx: &Ctx) -> Result<Done> {
        let db = ctx.db()?;
        let (cfg, meta_path) = self.config(db)?;
        let lines = read_corpus(&self.input)?;
        let out = Decomposer::new(db, cfg)
            .compose_corpus(&lines)
            .map_err(|e| CliError::contract(format!("{}: {e}", self.input.display())))?;
        write_lines(&self.out, &out)?;
        let mut done = Done::default().read(&self.input);
        if let Some(p) = meta_path {
            done = done.read(&p);
        }
        Ok(done.wrote(&self.out))
    }

    fn slots(&mut self) -> Slots<'_> {
        let mut inputs = vec![("in", &mut self.input)];
        inputs.extend(self.meta.iter_mut().map(|p| ("meta", p)));
        Slots {
            inputs,
            outputs: vec![("out", &mut self.out)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BpeLearnArgs {
    /// Training corpus; repeat for several languages
    #[arg(long = "in", required = true)]
    #[serde(rename = "in")]
    pub input: Vec<PathBuf>,
    /// Model directory
    #[arg(long)]
    pub out: PathBuf,
    /// Upper bound on distinct subwords in the segmented training corpus
    #[arg(long)]
    pub vocab_size: usize,
    /// One model per input, in a subdirectory named after the input file
    #[arg(long)]
    #[serde(default)]
    pub per_language: bool,
}

fn bpe_error(path: &Path, e: BpeError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    match e {
        BpeError::DanglingContinuation(_) => CliError::contract(msg),
        _ => CliError::input(msg),
    }
}

fn save_model(model: &BpeModel, dir: &Path, done: Done) -> Result<Done> {
    model
        .save_dir(dir)
        .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    Ok(done.wrote(&dir.join("codes")).wrote(&dir.join("vocab")))
}

impl Command for BpeLearnArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let mut done = Done::default();
        let mut corpora = Vec::with_capacity(self.input.len());
        for path in &self.input {
            corpora.push(read_lines(path)?);
            done = done.read(path);
        }
        if !self.per_language {
            let model = learn_bpe(corpora.iter().flatten(), self.vocab_size).map_err(|e| bpe_error(&self.out, e))?;
            return save_model(&model, &self.out, done);
        }
        let mut names = std::collections::BTreeSet::new();
        for (path, lines) in self.input.iter().zip(&corpora) {
            let name = path
                .file_name()
                .ok_or_else(|| CliError::input(format!("{}: not a file", path.display())))?;
            if !names.insert(name.to_os_string()) {
                return Err(CliError::input(format!(
                    "two inputs are named {}; per-language models need distinct file names",
                    name.to_string_lossy()
                )));
            }
            let model = learn_bpe(lines, self.vocab_size).map_err(|e| bpe_error(path, e))?;
            done = save_model(&model, &self.out.join(name), done)?;
        }
        Ok(done)
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: self.input.iter_mut().map(|p| ("in", p)).collect(),
            outputs: vec![("out", &mut self.out)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BpeApplyArgs {
    /// Model directory written by `bpe learn`
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

impl Command for BpeApplyArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let model = BpeModel::load_dir(&self.model).map_err(|e| bpe_error(&self.model, e))?;
        let lines = read_corpus(&self.input)?;
        write_lines(&self.out, &model.apply_corpus(&lines))?;
        let sidecar = meta::carry(&self.input, &self.out)?;
        let mut done = Done::default().read(&self.model.join("codes"));
        if self.model.join("vocab").exists() {
            done = done.read(&self.model.join("vocab"));
        }
        Ok(done.read(&self.input).wrote(&self.out).wrote_opt(sidecar))
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![("model", &mut self.model), ("in", &mut self.input)],
            outputs: vec![("out", &mut self.out)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BpeUndoArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

impl Command for BpeUndoArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let lines = read_corpus(&self.input)?;
        let out = undo_corpus(&lines).map_err(|e| CliError::contract(format!("{}: {e}", self.input.display())))?;
        write_lines(&self.out, &out)?;
        let sidecar = meta::carry(&self.input, &self.out)?;
        Ok(Done::default().read(&self.input).wrote(&self.out).wrote_opt(sidecar))
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![("in", &mut self.input)],
            outputs: vec![("out", &mut self.out)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SharingRateArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command for SharingRateArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let src = VocabSet::from_lines(read_lines(&self.src)?);
        let tgt = VocabSet::from_lines(read_lines(&self.tgt)?);
        let shared = src.shared_with(&tgt).len();
        let text = format!(
            "type_rate\t{:.6}\noccurrence_rate\t{:.6}\nsrc_types\t{}\ntgt_types\t{}\nshared_types\t{}\n",
            corpus_sharing_rate(&src, &tgt),
            occurrence_sharing_rate(&src, &tgt),
            src.len(),
            tgt.len(),
            shared
        );
        Done::default().read(&self.src).read(&self.tgt).report(text, self.out.as_deref())
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![("src", &mut self.src), ("tgt", &mut self.tgt)],
            outputs: self.out.iter_mut().map(|p| ("out", p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SharingStatsArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command for SharingStatsArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let s = corpus_stats(read_lines(&self.input)?);
        let mean = s.mean_word_length.map_or_else(|| "nan".to_string(), |m| format!("{m:.6}"));
        let text = format!(
            "sentences\t{}\ntokens\t{}\nvocab\t{}\ncodepoints\t{}\nmean_word_length\t{mean}\n",
            s.sentences, s.tokens, s.vocab, s.codepoints
        );
        Done::default().read(&self.input).report(text, self.out.as_deref())
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![("in", &mut self.input)],
            outputs: self.out.iter_mut().map(|p| ("out", p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SharingSampleArgs {
    /// Source-side pool
    #[arg(long)]
    pub src: PathBuf,
    /// Target-side pool
    #[arg(long)]
    pub tgt: PathBuf,
    /// Target sharing rate in [0, 1]
    #[arg(long)]
    pub r: f64,
    /// Sentences kept per iteration
    #[arg(long)]
    pub k: usize,
    /// Sentences to select per side
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// selected-only or full-draw
    #[arg(long, default_value = "selected-only")]
    #[serde(default)]
    pub removal: RemovalMode,
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
    /// Per-iteration trace as TSV
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Recheck the incremental state after every iteration
    #[arg(long)]
    #[serde(default)]
    pub audit: bool,
    /// Write what was selected when a pool runs dry instead of failing
    #[arg(long)]
    #[serde(default)]
    pub accept_partial: bool,
}

/// Non-empty lines and their positions in the file.
fn pool(lines: &[String]) -> (Vec<&str>, Vec<usize>) {
    lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (l.as_str(), i))
        .unzip()
}

impl Command for SharingSampleArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let src_lines = read_lines(&self.src)?;
        let tgt_lines = read_lines(&self.tgt)?;
        let (src, src_pos) = pool(&src_lines);
        let (tgt, tgt_pos) = pool(&tgt_lines);
        let cfg = SamplerConfig::new(self.r, self.k, self.n, self.seed)
            .removal(self.removal)
            .audit(self.audit);
        let (outcome, partial) = match sample_with_sharing_rate(&src, &tgt, &cfg) {
            Ok(o) => (o, None),
            Err(SampleError::PoolExhausted { side, partial }) if self.accept_partial => (*partial, Some(side)),
            Err(e) => {
                if let (SampleError::PoolExhausted { partial, .. }, Some(trace)) = (&e, &self.trace) {
                    write_trace(partial, trace)?;
                }
                return Err(sample_error(e));
            }
        };

        let pick = |idx: &[usize], pos: &[usize], lines: &[String]| -> Vec<String> {
            idx.iter().map(|&i| lines[pos[i]].clone()).collect()
        };
        write_lines(&self.out_src, &pick(&outcome.source, &src_pos, &src_lines))?;
        write_lines(&self.out_tgt, &pick(&outcome.target, &tgt_pos, &tgt_lines))?;
        let mut done = Done::default().read(&self.src).read(&self.tgt);
        done = done.wrote(&self.out_src).wrote_opt(meta::carry(&self.src, &self.out_src)?);
        done = done.wrote(&self.out_tgt).wrote_opt(meta::carry(&self.tgt, &self.out_tgt)?);
        if let Some(trace) = &self.trace {
            write_trace(&outcome, trace)?;
            done = done.wrote(trace);
        }
        if let Some(side) = partial {
            eprintln!("warning: {side} pool exhausted; writing a partial sample");
        }

        let mut text = String::new();
        let status = if partial.is_some() { "partial" } else { "complete" };
        let _ = writeln!(text, "status\t{status}");
        let _ = writeln!(text, "final_rate\t{:.6}", outcome.final_rate);
        let _ = writeln!(text, "iterations\t{}", outcome.trace.records.len());
        let _ = writeln!(text, "selected_src\t{}", outcome.source.len());
        let _ = writeln!(text, "selected_tgt\t{}", outcome.target.len());
        let _ = writeln!(text, "remaining_src\t{}", outcome.remaining[0]);
        let _ = writeln!(text, "remaining_tgt\t{}", outcome.remaining[1]);
        let _ = writeln!(text, "discarded_src\t{}", outcome.discarded[0]);
        let _ = writeln!(text, "discarded_tgt\t{}", outcome.discarded[1]);
        let _ = writeln!(text, "empty_lines_src\t{}", src_lines.len() - src.len());
        let _ = writeln!(text, "empty_lines_tgt\t{}", tgt_lines.len() - tgt.len());
        done.report = Some(text);
        Ok(done)
    }

    fn slots(&mut self) -> Slots<'_> {
        let mut outputs = vec![("out-src", &mut self.out_src), ("out-tgt", &mut self.out_tgt)];
        outputs.extend(self.trace.iter_mut().map(|p| ("trace", p)));
        Slots {
            inputs: vec![("src", &mut self.src), ("tgt", &mut self.tgt)],
            outputs,
        }
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

fn write_trace(outcome: &SampleOutcome, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    outcome.trace.write_tsv(&mut buf).expect("writing to memory");
    write_text(path, &String::from_utf8(buf).expect("trace is UTF-8"))
}

fn sample_error(e: SampleError) -> CliError {
    match e {
        SampleError::InvalidConfig(_) | SampleError::EmptyPool(_) | SampleError::EmptySentence { .. } => {
            CliError::input(e)
        }
        SampleError::Infeasible { .. } | SampleError::PoolExhausted { .. } | SampleError::AuditMismatch(_) => {
            CliError::contract(e)
        }
    }
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::LengthMismatch { .. } => CliError::contract(e),
        EvalError::Empty | EvalError::NoResamples => CliError::input(e),
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvalBleuArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    #[serde(default)]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command for EvalBleuArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        let hyp = read_lines(&self.hyp)?;
        let reference = read_lines(&self.reference)?;
        let r = bleu_corpus(&hyp, &reference).map_err(eval_error)?;
        let text = match self.report {
            ReportFormat::Text => format!("{r}\n"),
            ReportFormat::Json => json(&r),
            ReportFormat::Tsv => r.to_tsv(),
        };
        Done::default()
            .read(&self.hyp)
            .read(&self.reference)
            .report(text, self.out.as_deref())
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![("hyp", &mut self.hyp), ("ref", &mut self.reference)],
            outputs: self.out.iter_mut().map(|p| ("out", p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvalSignificanceArgs {
    #[arg(long)]
    pub hyp_a: PathBuf,
    #[arg(long)]
    pub hyp_b: PathBuf,
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: PathBuf,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    #[serde(default)]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command for EvalSignificanceArgs {
    fn run(&self, _: &Ctx) -> Result<Done> {
        if self.resamples < MIN_RESAMPLES {
            return Err(CliError::input(format!(
                "--resamples must be at least {MIN_RESAMPLES}, got {}",
                self.resamples
            )));
        }
        let a = read_lines(&self.hyp_a)?;
        let b = read_lines(&self.hyp_b)?;
        let reference = read_lines(&self.reference)?;
        let r = paired_bootstrap(&a, &b, &reference, self.resamples, self.seed).map_err(eval_error)?;
        let text = match self.report {
            ReportFormat::Json => json(&r),
            ReportFormat::Tsv => format!(
                "bleu_a\t{:.4}\nbleu_b\t{:.4}\ndelta_bleu\t{:.4}\np_value\t{:.4}\nresamples\t{}\nseed\t{}\ndegenerate\t{}\n",
                r.bleu_a, r.bleu_b, r.delta_bleu, r.p_value, r.resamples, r.seed, r.degenerate
            ),
            ReportFormat::Text => format!(
                "A: BLEU = {:.2}\nB: BLEU = {:.2}\ndelta = {:+.2}, p = {:.4} ({} resamples, seed {}){}\n",
                r.bleu_a,
                r.bleu_b,
                r.delta_bleu,
                r.p_value,
                r.resamples,
                r.seed,
                if r.degenerate { ", systems tie" } else { "" }
            ),
        };
        Done::default()
            .read(&self.hyp_a)
            .read(&self.hyp_b)
            .read(&self.reference)
            .report(text, self.out.as_deref())
    }

    fn slots(&mut self) -> Slots<'_> {
        Slots {
            inputs: vec![
                ("hyp-a", &mut self.hyp_a),
                ("hyp-b", &mut self.hyp_b),
                ("ref", &mut self.reference),
            ],
            outputs: self.out.iter_mut().map(|p| ("out", p)).collect(),
        }
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}
