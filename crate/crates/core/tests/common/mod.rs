#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One step of the reference simulator, kept for comparison with the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStep {
    pub side: usize,
    pub picked: Vec<usize>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub steps: Vec<SimStep>,
    pub exhausted: bool,
}

fn iou(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Direct transcription of the sampling loop over owned strings, with the
/// vocabularies rebuilt from the selections at every step.
pub fn simulate(
    source: &[&str],
    target: &[&str],
    r: f64,
    k: usize,
    n: usize,
    seed: u64,
    full_draw: bool,
) -> SimResult {
    let corpora = [source, target];
    let mut pools: [Vec<usize>; 2] = [(0..source.len()).collect(), (0..target.len()).collect()];
    let mut samples: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();

    let vocab = |side: usize, samples: &[Vec<usize>; 2]| -> HashSet<String> {
        samples[side]
            .iter()
            .flat_map(|&i| corpora[side][i].split_whitespace().map(str::to_string))
            .collect()
    };

    let mut t = 0;
    loop {
        let done = [samples[0].len() >= n, samples[1].len() >= n];
        if done[0] && done[1] {
            break;
        }
        let mut side = t % 2;
        if done[side] {
            side = 1 - side;
        }
        if pools[side].is_empty() {
            return SimResult {
                source: samples[0].clone(),
                target: samples[1].clone(),
                steps,
                exhausted: true,
            };
        }

        let va = vocab(0, &samples);
        let vb = vocab(1, &samples);
        let shared: HashSet<String> = va.intersection(&vb).cloned().collect();
        let current = iou(&va, &vb);

        let draw_n = (8 * k).min(pools[side].len());
        let positions = index::sample(&mut rng, pools[side].len(), draw_n).into_vec();
        let mut drawn: Vec<(f64, usize, usize)> = positions
            .iter()
            .enumerate()
            .map(|(order, &p)| {
                let sid = pools[side][p];
                let toks: Vec<&str> = corpora[side][sid].split_whitespace().collect();
                let hit = toks.iter().filter(|t| shared.contains(**t)).count();
                (hit as f64 / toks.len() as f64, order, p)
            })
            .collect();
        // Descending by s_r, then by draw order.
        drawn.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

        let take = k.min(n - samples[side].len()).min(draw_n);
        let chosen: Vec<(f64, usize, usize)> = if current < r {
            drawn[..take].to_vec()
        } else {
            drawn[draw_n - take..].to_vec()
        };
        let picked: Vec<usize> = chosen.iter().map(|c| pools[side][c.2]).collect();
        samples[side].extend(&picked);

        let mut gone: Vec<usize> = if full_draw {
            positions.clone()
        } else {
            chosen.iter().map(|c| c.2).collect()
        };
        gone.sort();
        for p in gone.into_iter().rev() {
            let last = pools[side].len() - 1;
            pools[side].swap(p, last);
            pools[side].pop();
        }

        steps.push(SimStep {
            side,
            picked,
            rate: iou(&vocab(0, &samples), &vocab(1, &samples)),
        });
        t += 1;
    }
    SimResult {
        source: samples[0].clone(),
        target: samples[1].clone(),
        steps,
        exhausted: false,
    }
}

/// Pairs of small pools: a few tokens shared across sides, the rest
/// private, and sentence lengths from one to four.
pub fn twelve_sentence_instance(variant: u64) -> (Vec<String>, Vec<String>) {
    small_instance(12, variant)
}

pub fn small_instance(size: usize, variant: u64) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + variant);
    let shared = ["s0", "s1", "s2", "s3"];
    let mut make = |prefix: &str| -> Vec<String> {
        (0..size)
            .map(|_| {
                let len = rng.gen_range(1..=4);
                (0..len)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            shared[rng.gen_range(0..shared.len())].to_string()
                        } else {
                            format!("{prefix}{}", rng.gen_range(0..6))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    };
    let src = make("a");
    let tgt = make("b");
    (src, tgt)
}

pub const CORE_VOCAB: usize = 100;

/// Synthetic pools with tunable cross-side vocabulary overlap.
///
/// Each side draws from a vocabulary of `CORE_VOCAB + common` shared types
/// plus `private` types of its own, so the sharing rate of full coverage
/// is `(CORE_VOCAB + common) / (CORE_VOCAB + common + 2 * private)`.
/// Sentences have `len` tokens; `pure_fraction` of them use shared types
/// only, the rest carry `private_tokens.0..=private_tokens.1` private ones.
/// Half of all shared tokens come from the small core, so sentence scores
/// separate after the first exchange.
/// Private vocabulary size giving full-coverage overlap `overlap` with
/// `common` non-core shared types.
pub fn private_vocab_for(overlap: f64, common: usize) -> usize {
    let shared = (CORE_VOCAB + common) as f64;
    ((shared * (1.0 - overlap) / (2.0 * overlap)).round() as usize).max(1)
}

pub fn steering_corpus(
    sentences: usize,
    len: usize,
    common: usize,
    private: usize,
    pure_fraction: f64,
    private_tokens: (usize, usize),
    seed: u64,
) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut make = |side: &str| -> Vec<String> {
        (0..sentences)
            .map(|_| {
                let n_private = if rng.gen_bool(pure_fraction) {
                    0
                } else {
                    rng.gen_range(private_tokens.0..=private_tokens.1)
                };
                let mut words: Vec<String> = (0..len - n_private)
                    .map(|_| {
                        if common == 0 || rng.gen_bool(0.5) {
                            format!("k{}", rng.gen_range(0..CORE_VOCAB))
                        } else {
                            format!("c{}", rng.gen_range(0..common))
                        }
                    })
                    .collect();
                for _ in 0..n_private {
                    words.push(format!("{side}{}", rng.gen_range(0..private)));
                }
                words.join(" ")
            })
            .collect()
    };
    let src = make("p");
    let tgt = make("q");
    (src, tgt)
}

/// Fraction of iterations, from `skip` on, whose rate does not move away
/// from `r`, counting any rate within `band` of `r` as on target.
pub fn toward_fraction(rates: &[f64], r: f64, band: f64, skip: usize) -> f64 {
    let mut good = 0;
    let mut total = 0;
    for t in skip.max(1)..rates.len() {
        total += 1;
        let (prev, cur) = (rates[t - 1], rates[t]);
        if (cur - r).abs() <= band || (cur - r).abs() <= (prev - r).abs() {
            good += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        good as f64 / total as f64
    }
}

/// Runs the library sampler and the simulator on one small instance and
/// reports the first disagreement. Returns whether the pools ran dry.
pub fn compare_with_simulator(
    size: usize,
    variant: u64,
    r: f64,
    seed: u64,
    mode: textprep::RemovalMode,
) -> Result<bool, String> {
    use textprep::sampler::{sample_with_sharing_rate, RemovalMode, SampleError, SamplerConfig};

    let (src, tgt) = small_instance(size, variant);
    let src: Vec<&str> = src.iter().map(String::as_str).collect();
    let tgt: Vec<&str> = tgt.iter().map(String::as_str).collect();
    let full = mode == RemovalMode::FullDraw;
    let sim = simulate(&src, &tgt, r, 1, 3, seed, full);
    let cfg = SamplerConfig::new(r, 1, 3, seed).removal(mode).audit(true);
    let ctx = format!("size {size} variant {variant} r={r} seed={seed} {mode}");
    let out = match sample_with_sharing_rate(&src, &tgt, &cfg) {
        Ok(out) if !sim.exhausted => out,
        Err(SampleError::PoolExhausted { partial, .. }) if sim.exhausted => *partial,
        Err(SampleError::Infeasible { .. }) if full && sim.exhausted => return Ok(true),
        Ok(_) => return Err(format!("{ctx}: simulator exhausted its pools")),
        Err(e) => return Err(format!("{ctx}: {e}")),
    };
    if out.source != sim.source || out.target != sim.target {
        return Err(format!(
            "{ctx}: selections {:?}/{:?} vs {:?}/{:?}",
            out.source, out.target, sim.source, sim.target
        ));
    }
    let rates: Vec<f64> = out.trace.rates().collect();
    let sim_rates: Vec<f64> = sim.steps.iter().map(|s| s.rate).collect();
    if rates != sim_rates {
        return Err(format!("{ctx}: rates {rates:?} vs {sim_rates:?}"));
    }
    let sides: Vec<usize> = out.trace.records.iter().map(|r| r.side as usize).collect();
    let sim_sides: Vec<usize> = sim.steps.iter().map(|s| s.side).collect();
    if sides != sim_sides {
        return Err(format!("{ctx}: sides differ"));
    }
    Ok(sim.exhausted)
}

/// Corpus BLEU computed from whole-corpus n-gram tallies, for comparison
/// with the library's per-line sufficient statistics.
pub fn naive_bleu(hyp: &[&str], reference: &[&str]) -> f64 {
    use std::collections::HashMap;
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut hl, mut rl) = (0usize, 0usize);
    for (h, r) in hyp.iter().zip(reference) {
        let h: Vec<&str> = h.split_whitespace().collect();
        let r: Vec<&str> = r.split_whitespace().collect();
        hl += h.len();
        rl += r.len();
        for n in 1..=4 {
            let grams = |t: &[&str]| {
                let mut m: HashMap<Vec<String>, usize> = HashMap::new();
                if t.len() >= n {
                    for i in 0..=t.len() - n {
                        let g = t[i..i + n].iter().map(|s| s.to_string()).collect();
                        *m.entry(g).or_default() += 1;
                    }
                }
                m
            };
            let hg = grams(&h);
            let rg = grams(&r);
            totals[n - 1] += hg.values().sum::<usize>();
            matches[n - 1] += hg
                .iter()
                .map(|(g, c)| (*c).min(*rg.get(g).unwrap_or(&0)))
                .sum::<usize>();
        }
    }
    if hl == 0 || matches.contains(&0) {
        return 0.0;
    }
    let log_p: f64 = (0..4)
        .map(|i| (matches[i] as f64 / totals[i] as f64).ln())
        .sum::<f64>()
        / 4.0;
    let bp = if hl >= rl { 1.0 } else { (1.0 - rl as f64 / hl as f64).exp() };
    100.0 * bp * log_p.exp()
}
