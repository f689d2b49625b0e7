//! Sampling two monolingual corpora towards a target token sharing rate.
//!
//! Each iteration draws `8·k` sentences from one side's pool, scores each by
//! the fraction of its tokens already shared between the two samples, and
//! keeps the `k` best-scoring sentences while the achieved rate is below
//! target (the `k` worst otherwise). Sides alternate, source first.
//!
//! The procedure is a deterministic function of the pools and the config:
//! draws use ChaCha8 seeded from `seed`, ties in the score sort keep draw
//! order, and a pool shrinks by `swap_remove` at descending positions.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentences drawn per iteration, as a multiple of `k`.
pub const DRAW_FACTOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl Side {
    fn idx(self) -> usize {
        match self {
            Side::Source => 0,
            Side::Target => 1,
        }
    }

    fn other(self) -> Side {
        match self {
            Side::Source => Side::Target,
            Side::Target => Side::Source,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "src",
            Side::Target => "tgt",
        })
    }
}

/// What leaves the pool after an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalMode {
    /// Only the selected sentences.
    #[default]
    SelectedOnly,
    /// The whole draw, selected or not.
    FullDraw,
}

impl FromStr for RemovalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "selected-only" | "selected_only" => Ok(RemovalMode::SelectedOnly),
            "full-draw" | "full_draw" => Ok(RemovalMode::FullDraw),
            _ => Err(format!("unknown removal mode {s:?}")),
        }
    }
}

impl fmt::Display for RemovalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalMode::SelectedOnly => "selected-only",
            RemovalMode::FullDraw => "full-draw",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub target_rate: f64,
    pub top_k: usize,
    /// Sentences to select per side.
    pub sample_size: usize,
    pub seed: u64,
    pub removal: RemovalMode,
    /// Recompute the state from scratch after every iteration and fail on
    /// any disagreement with the incremental bookkeeping.
    pub audit: bool,
}

impl SamplerConfig {
    pub fn new(target_rate: f64, top_k: usize, sample_size: usize, seed: u64) -> Self {
        SamplerConfig {
            target_rate,
            top_k,
            sample_size,
            seed,
            removal: RemovalMode::default(),
            audit: false,
        }
    }

    pub fn removal(mut self, removal: RemovalMode) -> Self {
        self.removal = removal;
        self
    }

    pub fn audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    pub fn draw_size(&self) -> usize {
        DRAW_FACTOR * self.top_k
    }

    fn validate(&self) -> Result<(), SampleError> {
        if !(0.0..=1.0).contains(&self.target_rate) {
            return Err(SampleError::InvalidConfig(format!(
                "target rate {} outside [0, 1]",
                self.target_rate
            )));
        }
        if self.top_k == 0 || self.sample_size == 0 {
            return Err(SampleError::InvalidConfig(
                "k and N must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub side: Side,
    pub draw_size: usize,
    pub selected: usize,
    pub sr_min: f64,
    pub sr_mean: f64,
    pub sr_max: f64,
    /// Mean score of drawn sentences that were not selected.
    pub unselected_sr_mean: Option<f64>,
    /// Achieved rate before this iteration's update.
    pub previous_rate: f64,
    pub current_rate: f64,
    pub pool_source: usize,
    pub pool_target: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplerTrace {
    pub records: Vec<IterationRecord>,
}

impl SamplerTrace {
    pub const TSV_HEADER: &'static str = "iteration\tside\tdraw_size\tselected\tsr_min\tsr_mean\tsr_max\tcurrent_r\tpool_src\tpool_tgt";

    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::TSV_HEADER)?;
        for r in &self.records {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
                r.iteration,
                r.side,
                r.draw_size,
                r.selected,
                r.sr_min,
                r.sr_mean,
                r.sr_max,
                r.current_rate,
                r.pool_source,
                r.pool_target
            )?;
        }
        Ok(())
    }

    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.current_rate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    /// Indices into the source pool, in selection order.
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub final_rate: f64,
    /// Sentences dropped without being selected (full-draw mode).
    pub discarded: [usize; 2],
    /// Sentences still in each pool.
    pub remaining: [usize; 2],
    pub trace: SamplerTrace,
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("{0} pool is empty")]
    EmptyPool(Side),
    #[error("{side} sentence {index} has no tokens")]
    EmptySentence { side: Side, index: usize },
    #[error("{side} pool of {pool} sentences cannot yield {needed} under full-draw removal")]
    Infeasible {
        side: Side,
        pool: usize,
        needed: usize,
    },
    #[error("{side} pool exhausted after selecting {} source and {} target sentences", .partial.source.len(), .partial.target.len())]
    PoolExhausted {
        side: Side,
        partial: Box<SampleOutcome>,
    },
    #[error("audit failed after iteration {0}: incremental state differs from recomputation")]
    AuditMismatch(usize),
}

/// Checks up front whether full-draw removal can reach `needed` selections.
fn full_draw_feasible(pool: usize, needed: usize, k: usize) -> bool {
    let (mut pool, mut needed) = (pool, needed);
    while needed > 0 {
        let draw = pool.min(DRAW_FACTOR * k);
        if draw == 0 {
            return false;
        }
        needed -= k.min(needed).min(draw);
        pool -= draw;
    }
    true
}

struct SideState {
    sentences: Vec<Vec<u32>>,
    pool: Vec<usize>,
    selected: Vec<usize>,
    counts: Vec<u32>,
    distinct: usize,
    discarded: usize,
}

struct State {
    sides: [SideState; 2],
    shared: Vec<bool>,
    shared_count: usize,
}

impl State {
    fn rate(&self) -> f64 {
        let union = self.sides[0].distinct + self.sides[1].distinct - self.shared_count;
        if union == 0 {
            0.0
        } else {
            self.shared_count as f64 / union as f64
        }
    }

    fn score(&self, sentence: &[u32]) -> f64 {
        let hits = sentence.iter().filter(|&&t| self.shared[t as usize]).count();
        hits as f64 / sentence.len() as f64
    }

    fn add(&mut self, side: Side, sentence: usize) {
        let (this, other) = match side {
            Side::Source => {
                let [a, b] = &mut self.sides;
                (a, &*b)
            }
            Side::Target => {
                let [a, b] = &mut self.sides;
                (b, &*a)
            }
        };
        this.selected.push(sentence);
        for &t in &this.sentences[sentence] {
            let c = &mut this.counts[t as usize];
            *c += 1;
            if *c == 1 {
                this.distinct += 1;
                if other.counts[t as usize] > 0 && !self.shared[t as usize] {
                    self.shared[t as usize] = true;
                    self.shared_count += 1;
                }
            }
        }
    }

    fn audit(&self, n_tokens: usize) -> bool {
        let mut counts = [vec![0u32; n_tokens], vec![0u32; n_tokens]];
        for (s, side) in self.sides.iter().enumerate() {
            for &i in &side.selected {
                for &t in &side.sentences[i] {
                    counts[s][t as usize] += 1;
                }
            }
        }
        let distinct = |c: &[u32]| c.iter().filter(|&&n| n > 0).count();
        let shared: Vec<bool> = (0..n_tokens)
            .map(|t| counts[0][t] > 0 && counts[1][t] > 0)
            .collect();
        counts[0] == self.sides[0].counts
            && counts[1] == self.sides[1].counts
            && distinct(&counts[0]) == self.sides[0].distinct
            && distinct(&counts[1]) == self.sides[1].distinct
            && shared == self.shared
            && shared.iter().filter(|&&b| b).count() == self.shared_count
    }
}

fn tokenize<'a, S: AsRef<str>>(
    pool: &'a [S],
    side: Side,
    vocab: &mut HashMap<&'a str, u32>,
) -> Result<Vec<Vec<u32>>, SampleError> {
    if pool.is_empty() {
        return Err(SampleError::EmptyPool(side));
    }
    pool.iter()
        .enumerate()
        .map(|(index, line)| {
            let toks: Vec<u32> = line
                .as_ref()
                .split_whitespace()
                .map(|t| {
                    let next = vocab.len() as u32;
                    *vocab.entry(t).or_insert(next)
                })
                .collect();
            if toks.is_empty() {
                Err(SampleError::EmptySentence { side, index })
            } else {
                Ok(toks)
            }
        })
        .collect()
}

/// Draws `cfg.sample_size` sentences per side, steering the type-level
/// sharing rate of the two samples towards `cfg.target_rate`.
pub fn sample_with_sharing_rate<S: AsRef<str>>(
    source: &[S],
    target: &[S],
    cfg: &SamplerConfig,
) -> Result<SampleOutcome, SampleError> {
    cfg.validate()?;
    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let src = tokenize(source, Side::Source, &mut vocab)?;
    let tgt = tokenize(target, Side::Target, &mut vocab)?;
    let n_tokens = vocab.len();

    if cfg.removal == RemovalMode::FullDraw {
        for (side, pool) in [(Side::Source, src.len()), (Side::Target, tgt.len())] {
            if !full_draw_feasible(pool, cfg.sample_size, cfg.top_k) {
                return Err(SampleError::Infeasible {
                    side,
                    pool,
                    needed: cfg.sample_size,
                });
            }
        }
    }

    let side_state = |sentences: Vec<Vec<u32>>| SideState {
        pool: (0..sentences.len()).collect(),
        sentences,
        selected: Vec::new(),
        counts: vec![0; n_tokens],
        distinct: 0,
        discarded: 0,
    };
    let mut state = State {
        sides: [side_state(src), side_state(tgt)],
        shared: vec![false; n_tokens],
        shared_count: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = SamplerTrace::default();
    let n = cfg.sample_size;
    let full = |state: &State, side: Side| state.sides[side.idx()].selected.len() >= n;

    let outcome = |state: &State, trace: SamplerTrace| SampleOutcome {
        source: state.sides[0].selected.clone(),
        target: state.sides[1].selected.clone(),
        final_rate: state.rate(),
        discarded: [state.sides[0].discarded, state.sides[1].discarded],
        remaining: [state.sides[0].pool.len(), state.sides[1].pool.len()],
        trace,
    };

    let mut iteration = 0;
    while !full(&state, Side::Source) || !full(&state, Side::Target) {
        let preferred = if iteration % 2 == 0 {
            Side::Source
        } else {
            Side::Target
        };
        let side = if full(&state, preferred) {
            preferred.other()
        } else {
            preferred
        };
        let s = side.idx();
        if state.sides[s].pool.is_empty() {
            return Err(SampleError::PoolExhausted {
                side,
                partial: Box::new(outcome(&state, trace)),
            });
        }

        let pool_len = state.sides[s].pool.len();
        let draw = cfg.draw_size().min(pool_len);
        let positions = index::sample(&mut rng, pool_len, draw).into_vec();
        let scores: Vec<f64> = positions
            .iter()
            .map(|&p| {
                let sid = state.sides[s].pool[p];
                state.score(&state.sides[s].sentences[sid])
            })
            .collect();
        let mut order: Vec<usize> = (0..draw).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("scores are finite"));

        let take = cfg.top_k.min(n - state.sides[s].selected.len()).min(draw);
        let previous_rate = state.rate();
        let chosen: &[usize] = if previous_rate < cfg.target_rate {
            &order[..take]
        } else {
            &order[draw - take..]
        };

        let mut picked = vec![false; draw];
        for &o in chosen {
            picked[o] = true;
            let sid = state.sides[s].pool[positions[o]];
            state.add(side, sid);
        }

        let sel_scores: Vec<f64> = chosen.iter().map(|&o| scores[o]).collect();
        let unselected: Vec<f64> = (0..draw).filter(|&o| !picked[o]).map(|o| scores[o]).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

        let mut remove: Vec<usize> = match cfg.removal {
            RemovalMode::SelectedOnly => chosen.iter().map(|&o| positions[o]).collect(),
            RemovalMode::FullDraw => positions.clone(),
        };
        remove.sort_unstable_by(|a, b| b.cmp(a));
        for p in remove {
            state.sides[s].pool.swap_remove(p);
        }
        if cfg.removal == RemovalMode::FullDraw {
            state.sides[s].discarded += draw - take;
        }

        trace.records.push(IterationRecord {
            iteration,
            side,
            draw_size: draw,
            selected: take,
            sr_min: sel_scores.iter().copied().fold(f64::INFINITY, f64::min),
            sr_mean: mean(&sel_scores),
            sr_max: sel_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            unselected_sr_mean: (!unselected.is_empty()).then(|| mean(&unselected)),
            previous_rate,
            current_rate: state.rate(),
            pool_source: state.sides[0].pool.len(),
            pool_target: state.sides[1].pool.len(),
        });

        if cfg.audit && !state.audit(n_tokens) {
            return Err(SampleError::AuditMismatch(iteration));
        }
        iteration += 1;
    }

    Ok(outcome(&state, trace))
}
