//! Ordered step lists read from TOML, run with a hash manifest, and replay.
//!
//! A step input written `@name` is the first output of the earlier step
//! `name`; `@name.flag` picks the output with that flag. Relative paths are
//! resolved against the config file's directory.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::{
    BpeApplyArgs, BpeLearnArgs, BpeUndoArgs, Command, ComposeArgs, Ctx, DbValidateArgs, DecomposeArgs, Done,
    EvalBleuArgs, EvalSignificanceArgs, SharingRateArgs, SharingSampleArgs, SharingStatsArgs,
};
use crate::error::{CliError, Result};
use crate::io::{is_stdio, read_text, sha256_bytes, sha256_file, write_text};

pub const MANIFEST_FORMAT: &str = "textprep-manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum StepOp {
    DbValidate(DbValidateArgs),
    Decompose(DecomposeArgs),
    Compose(ComposeArgs),
    BpeLearn(BpeLearnArgs),
    BpeApply(BpeApplyArgs),
    BpeUndo(BpeUndoArgs),
    SharingRate(SharingRateArgs),
    SharingStats(SharingStatsArgs),
    SharingSample(SharingSampleArgs),
    EvalBleu(EvalBleuArgs),
    EvalSignificance(EvalSignificanceArgs),
}

impl StepOp {
    pub fn command(&self) -> &dyn Command {
        match self {
            StepOp::DbValidate(a) => a,
            StepOp::Decompose(a) => a,
            StepOp::Compose(a) => a,
            StepOp::BpeLearn(a) => a,
            StepOp::BpeApply(a) => a,
            StepOp::BpeUndo(a) => a,
            StepOp::SharingRate(a) => a,
            StepOp::SharingStats(a) => a,
            StepOp::SharingSample(a) => a,
            StepOp::EvalBleu(a) => a,
            StepOp::EvalSignificance(a) => a,
        }
    }

    fn command_mut(&mut self) -> &mut dyn Command {
        match self {
            StepOp::DbValidate(a) => a,
            StepOp::Decompose(a) => a,
            StepOp::Compose(a) => a,
            StepOp::BpeLearn(a) => a,
            StepOp::BpeApply(a) => a,
            StepOp::BpeUndo(a) => a,
            StepOp::SharingRate(a) => a,
            StepOp::SharingStats(a) => a,
            StepOp::SharingSample(a) => a,
            StepOp::EvalBleu(a) => a,
            StepOp::EvalSignificance(a) => a,
        }
    }

    pub fn uses_db(&self) -> bool {
        matches!(self, StepOp::DbValidate(_) | StepOp::Decompose(_) | StepOp::Compose(_))
    }

    /// The same step with every relative path joined onto `base`.
    fn rebased(&self, base: &Path) -> StepOp {
        let mut op = self.clone();
        let slots = op.command_mut().slots();
        for (_, p) in slots.inputs.into_iter().chain(slots.outputs) {
            *p = base.join(&*p);
        }
        op
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub name: String,
    pub op: StepOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub base_dir: PathBuf,
    /// Database directory, already resolved against `base_dir`.
    pub db: Option<PathBuf>,
    pub config_sha256: String,
    pub steps: Vec<Step>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    db: Option<PathBuf>,
    #[serde(default)]
    steps: Vec<toml::Table>,
}

impl Plan {
    pub fn load(path: &Path) -> Result<Plan> {
        let text = read_text(path)?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let base = std::path::absolute(base).map_err(|e| crate::error::io_error(base, e))?;
        Self::parse(&text, &base).map_err(|e| e.context(path.display()))
    }

    /// Parses and validates a config. Nothing is executed.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Plan> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::input(e.message()))?;
        if raw.steps.is_empty() {
            return Err(CliError::input("config has no steps"));
        }
        let mut steps = Vec::with_capacity(raw.steps.len());
        for (i, mut table) in raw.steps.into_iter().enumerate() {
            let name = match table.remove("name") {
                Some(toml::Value::String(s)) => s,
                Some(_) => return Err(CliError::input(format!("step {}: name must be a string", i + 1))),
                None => format!("step{}", i + 1),
            };
            if name.is_empty() || name.contains('.') || name.starts_with('@') {
                return Err(CliError::input(format!("step {}: invalid name {name:?}", i + 1)));
            }
            let op: StepOp = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| CliError::input(format!("step {} ({name}): {}", i + 1, e.message())))?;
            steps.push(Step { name, op });
        }
        resolve(&mut steps)?;
        Ok(Plan {
            base_dir: base_dir.to_path_buf(),
            db: raw.db.map(|p| base_dir.join(p)),
            config_sha256: sha256_bytes(text.as_bytes()),
            steps,
        })
    }
}

/// Replaces `@` references by the paths they name and rejects references
/// to unknown or later steps.
fn resolve(steps: &mut [Step]) -> Result<()> {
    let mut all = HashSet::new();
    for s in steps.iter() {
        if !all.insert(s.name.clone()) {
            return Err(CliError::input(format!("duplicate step name {:?}", s.name)));
        }
    }
    let mut produced: HashMap<String, Vec<(&'static str, PathBuf)>> = HashMap::new();
    for step in steps.iter_mut() {
        let here = step.name.clone();
        let slots = step.op.command_mut().slots();
        for (flag, p) in slots.inputs {
            let s = p.to_string_lossy().into_owned();
            if is_stdio(p) {
                return Err(CliError::input(format!("step {here}: {flag} cannot be stdin in a pipeline")));
            }
            let Some(reference) = s.strip_prefix('@') else { continue };
            let (target, key) = match reference.split_once('.') {
                Some((t, k)) => (t, Some(k)),
                None => (reference, None),
            };
            let outputs = match produced.get(target) {
                Some(o) => o,
                None if all.contains(target) => {
                    return Err(CliError::input(format!(
                        "step {here}: {flag} refers to step {target}, which runs later"
                    )))
                }
                None => return Err(CliError::input(format!("step {here}: {flag} refers to unknown step {target}"))),
            };
            let found = match key {
                None => outputs.first(),
                Some(k) => outputs.iter().find(|(f, _)| *f == k),
            };
            let Some((_, path)) = found else {
                return Err(CliError::input(format!("step {here}: step {target} has no output {s}")));
            };
            *p = path.clone();
        }
        let mut outs = Vec::new();
        for (flag, p) in slots.outputs {
            if is_stdio(p) || p.to_string_lossy().starts_with('@') {
                return Err(CliError::input(format!("step {here}: {flag} must be a file path")));
            }
            outs.push((flag, p.clone()));
        }
        produced.insert(here, outs);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub name: String,
    pub params: StepOp,
    pub seed: Option<u64>,
    pub db_sha256: Option<String>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub status: Status,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub config_sha256: String,
    pub base_dir: PathBuf,
    /// `None` means the bundled database.
    pub db: Option<PathBuf>,
    pub status: Status,
    pub error: Option<String>,
    pub steps: Vec<StepRecord>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let m: Manifest = serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::input(format!("{}: unsupported format {:?}", path.display(), m.format)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_text(path, &text)
    }
}

/// Default manifest location: next to the config, `.manifest.json` extension.
pub fn default_manifest_path(config: &Path) -> PathBuf {
    config.with_extension("manifest.json")
}

fn hash_all(paths: &[PathBuf], base: &Path) -> Result<Vec<FileHash>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileHash {
                path: p.strip_prefix(base).unwrap_or(p).to_path_buf(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

fn execute(step: &Step, base: &Path, ctx: &Ctx) -> Result<(Done, Option<String>)> {
    let op = step.op.rebased(base);
    let done = op.command().run(ctx)?;
    let db_hash = if op.uses_db() {
        Some(ctx.db()?.content_hash().to_string())
    } else {
        None
    };
    Ok((done, db_hash))
}

fn print_report(step: &Step, done: &Done) {
    if let Some(report) = &done.report {
        print!("# {}\n{report}", step.name);
    }
}

/// Runs every step in order. The manifest is rewritten after each step, so
/// a failure leaves a record of what completed.
pub fn run(plan: &Plan, ctx: &Ctx, manifest_path: &Path) -> Result<Manifest> {
    let mut manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: plan.config_sha256.clone(),
        base_dir: plan.base_dir.clone(),
        db: ctx.db_dir().map(Path::to_path_buf),
        status: Status::Running,
        error: None,
        steps: Vec::new(),
    };
    manifest.save(manifest_path)?;
    for step in &plan.steps {
        let mut record = StepRecord {
            name: step.name.clone(),
            params: step.op.clone(),
            seed: step.op.command().seed(),
            db_sha256: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            status: Status::Running,
            error: None,
        };
        let outcome = execute(step, &plan.base_dir, ctx).and_then(|(done, db_hash)| {
            record.db_sha256 = db_hash;
            record.inputs = hash_all(&done.inputs, &plan.base_dir)?;
            record.outputs = hash_all(&done.outputs, &plan.base_dir)?;
            Ok(done)
        });
        match outcome {
            Ok(done) => {
                print_report(step, &done);
                record.status = Status::Complete;
                manifest.steps.push(record);
                manifest.save(manifest_path)?;
            }
            Err(e) => {
                let e = e.context(format!("step {}", step.name));
                record.status = Status::Failed;
                record.error = Some(e.to_string());
                manifest.steps.push(record);
                manifest.status = Status::Failed;
                manifest.error = Some(e.to_string());
                manifest.save(manifest_path)?;
                return Err(e);
            }
        }
    }
    manifest.status = Status::Complete;
    manifest.save(manifest_path)?;
    Ok(manifest)
}

/// Re-runs a completed manifest and checks that every input and output
/// hash matches the record.
pub fn replay(manifest: &Manifest, base_override: Option<&Path>, db_override: Option<PathBuf>) -> Result<usize> {
    if manifest.status != Status::Complete {
        return Err(CliError::input("manifest does not record a completed run"));
    }
    let base = base_override.unwrap_or(&manifest.base_dir);
    let ctx = Ctx::new(db_override.or_else(|| manifest.db.clone()));
    for record in &manifest.steps {
        let step = Step {
            name: record.name.clone(),
            op: record.params.clone(),
        };
        for input in &record.inputs {
            let now = sha256_file(&base.join(&input.path))?;
            if now != input.sha256 {
                return Err(CliError::contract(format!(
                    "step {}: input {} differs from the recorded run",
                    record.name,
                    input.path.display()
                )));
            }
        }
        let (done, db_hash) = execute(&step, base, &ctx).map_err(|e| e.context(format!("step {}", record.name)))?;
        if db_hash != record.db_sha256 {
            return Err(CliError::contract(format!(
                "step {}: database differs from the recorded run",
                record.name
            )));
        }
        let outputs = hash_all(&done.outputs, base)?;
        if outputs != record.outputs {
            let diff = outputs
                .iter()
                .zip(&record.outputs)
                .find(|(a, b)| a != b)
                .map_or_else(|| "output list".to_string(), |(a, _)| a.path.display().to_string());
            return Err(CliError::contract(format!(
                "step {}: {diff} differs from the recorded run",
                record.name
            )));
        }
    }
    Ok(manifest.steps.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Plan> {
        Plan::parse(text, Path::new("/base"))
    }

    #[test]
    fn references_resolve_to_earlier_outputs() {
        let plan = parse(
            r#"
            [[steps]]
            name = "dec"
            op = "decompose"
            in = "a.txt"
            out = "out/a.dec"

            [[steps]]
            op = "sharing-sample"
            src = "@dec"
            tgt = "@dec.out"
            r = 0.5
            k = 2
            n = 3
            seed = 1
            out-src = "s"
            out-tgt = "t"
            "#,
        )
        .unwrap();
        assert_eq!(plan.steps[1].name, "step2");
        let StepOp::SharingSample(s) = &plan.steps[1].op else { panic!() };
        assert_eq!(s.src, PathBuf::from("out/a.dec"));
        assert_eq!(s.tgt, PathBuf::from("out/a.dec"));
    }

    #[test]
    fn validation_errors_before_execution() {
        let unknown = r#"
            [[steps]]
            op = "bpe-undo"
            in = "@nowhere"
            out = "x"
        "#;
        assert!(parse(unknown).unwrap_err().to_string().contains("unknown step nowhere"));

        let later = r#"
            [[steps]]
            op = "bpe-undo"
            in = "@b"
            out = "x"
            [[steps]]
            name = "b"
            op = "bpe-undo"
            in = "y"
            out = "z"
        "#;
        assert!(parse(later).unwrap_err().to_string().contains("runs later"));

        let no_seed = r#"
            [[steps]]
            op = "eval-significance"
            hyp-a = "a"
            hyp-b = "b"
            ref = "r"
        "#;
        assert!(parse(no_seed).unwrap_err().to_string().contains("seed"));

        let typo = r#"
            [[steps]]
            op = "bpe-undo"
            in = "a"
            out = "b"
            outt = "c"
        "#;
        assert!(parse(typo).unwrap_err().to_string().contains("outt"));

        let dup = r#"
            [[steps]]
            name = "a"
            op = "bpe-undo"
            in = "a"
            out = "b"
            [[steps]]
            name = "a"
            op = "bpe-undo"
            in = "b"
            out = "c"
        "#;
        assert!(parse(dup).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn params_round_trip_through_json() {
        let plan = parse(
            r#"
            [[steps]]
            op = "eval-significance"
            hyp-a = "a"
            hyp-b = "b"
            ref = "r"
            seed = 4
            "#,
        )
        .unwrap();
        let json = serde_json::to_string(&plan.steps[0].op).unwrap();
        let back: StepOp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan.steps[0].op);
        assert_eq!(back.command().seed(), Some(4));
    }
}
