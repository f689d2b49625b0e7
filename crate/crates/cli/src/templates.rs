//! Built-in pipeline configs.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use textprep::Granularity;

#[derive(Debug, Clone, Subcommand)]
pub enum Template {
    /// Decompose both sides, learn joint BPE, segment, sample at rate r
    Prep(PrepTemplate),
    /// Undo BPE on a translation, compose it and score it
    Score(ScoreTemplate),
}

#[derive(Debug, Clone, Args)]
pub struct PrepTemplate {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long, default_value = "ideograph")]
    pub granularity: Granularity,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub idcs: bool,
    #[arg(long, default_value_t = 8000)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 0.7)]
    pub r: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Directory for every output, relative to the config
    #[arg(long, default_value = "out")]
    pub out_dir: String,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreTemplate {
    /// BPE-segmented, decomposed system output
    #[arg(long)]
    pub hyp: PathBuf,
    /// Plain-text reference
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, default_value = "ideograph")]
    pub granularity: Granularity,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub idcs: bool,
    /// Composed output of a second system, for a significance test
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Required with --baseline
    #[arg(long, requires = "baseline")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: String,
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn path(p: &std::path::Path) -> String {
    quote(&p.to_string_lossy())
}

impl Template {
    /// The config as TOML, or an error message for inconsistent options.
    pub fn render(&self) -> Result<String, String> {
        match self {
            Template::Prep(t) => Ok(prep(t)),
            Template::Score(t) => score(t),
        }
    }
}

fn prep(t: &PrepTemplate) -> String {
    let o = |name: &str| quote(&format!("{}/{name}", t.out_dir));
    let g = quote(&t.granularity.to_string());
    let mut s = String::new();
    let _ = writeln!(s, "# prep: decompose, joint BPE, segment, sample at r = {}", t.r);
    for (side, input) in [("src", &t.src), ("tgt", &t.tgt)] {
        let _ = write!(
            s,
            "\n[[steps]]\nname = \"decompose-{side}\"\nop = \"decompose\"\nin = {}\nout = {}\ngranularity = {g}\nidcs = {}\n",
            path(input),
            o(&format!("{side}.dec")),
            t.idcs
        );
    }
    let _ = write!(
        s,
        "\n[[steps]]\nname = \"bpe\"\nop = \"bpe-learn\"\nin = [\"@decompose-src\", \"@decompose-tgt\"]\nout = {}\nvocab-size = {}\n",
        o("bpe"),
        t.vocab_size
    );
    for side in ["src", "tgt"] {
        let _ = write!(
            s,
            "\n[[steps]]\nname = \"segment-{side}\"\nop = \"bpe-apply\"\nmodel = \"@bpe\"\nin = \"@decompose-{side}\"\nout = {}\n",
            o(&format!("{side}.bpe"))
        );
    }
    let _ = write!(
        s,
        "\n[[steps]]\nname = \"rate\"\nop = \"sharing-rate\"\nsrc = \"@segment-src\"\ntgt = \"@segment-tgt\"\nout = {}\n",
        o("rate.tsv")
    );
    let _ = write!(
        s,
        "\n[[steps]]\nname = \"sample\"\nop = \"sharing-sample\"\nsrc = \"@segment-src\"\ntgt = \"@segment-tgt\"\nr = {:?}\nk = {}\nn = {}\nseed = {}\nout-src = {}\nout-tgt = {}\ntrace = {}\n",
        t.r,
        t.k,
        t.n,
        t.seed,
        o("train.src"),
        o("train.tgt"),
        o("trace.tsv")
    );
    s
}

fn score(t: &ScoreTemplate) -> Result<String, String> {
    let o = |name: &str| quote(&format!("{}/{name}", t.out_dir));
    let mut s = String::new();
    let _ = writeln!(s, "# score: undo BPE, compose, BLEU");
    let _ = write!(
        s,
        "\n[[steps]]\nname = \"join\"\nop = \"bpe-undo\"\nin = {}\nout = {}\n",
        path(&t.hyp),
        o("hyp.dec")
    );
    let _ = write!(
        s,
        "\n[[steps]]\nname = \"compose\"\nop = \"compose\"\nin = \"@join\"\nout = {}\ngranularity = {}\nidcs = {}\n",
        o("hyp.txt"),
        quote(&t.granularity.to_string()),
        t.idcs
    );
    let _ = write!(
        s,
        "\n[[steps]]\nname = \"bleu\"\nop = \"eval-bleu\"\nhyp = \"@compose\"\nref = {}\nreport = \"tsv\"\nout = {}\n",
        path(&t.reference),
        o("bleu.tsv")
    );
    if let Some(baseline) = &t.baseline {
        let seed = t.seed.ok_or("--baseline needs --seed")?;
        let _ = write!(
            s,
            "\n[[steps]]\nname = \"significance\"\nop = \"eval-significance\"\nhyp-a = \"@compose\"\nhyp-b = {}\nref = {}\nresamples = 1000\nseed = {seed}\nreport = \"tsv\"\nout = {}\n",
            path(baseline),
            path(&t.reference),
            o("significance.tsv")
        );
    }
    Ok(s)
}
