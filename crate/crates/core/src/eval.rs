//! Corpus BLEU over whitespace tokens and paired bootstrap significance.
//!
//! Single reference, n-grams up to 4, clipped counts, no smoothing.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("hypothesis has {hyp} lines but reference has {reference}")]
    LengthMismatch { hyp: usize, reference: usize },
    #[error("no lines to score")]
    Empty,
    #[error("at least one resample is required")]
    NoResamples,
}

/// Additive per-line counts from which corpus BLEU is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn for_line(hyp: &str, reference: &str) -> Self {
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let r: Vec<&str> = reference.split_whitespace().collect();
        let mut stats = BleuStats {
            hyp_len: h.len() as u64,
            ref_len: r.len() as u64,
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            if h.len() < n {
                continue;
            }
            let mut ref_counts: HashMap<&[&str], u64> = HashMap::new();
            for g in r.windows(n) {
                *ref_counts.entry(g).or_insert(0) += 1;
            }
            let mut hyp_counts: HashMap<&[&str], u64> = HashMap::new();
            for g in h.windows(n) {
                *hyp_counts.entry(g).or_insert(0) += 1;
            }
            stats.totals[n - 1] = (h.len() + 1 - n) as u64;
            stats.matches[n - 1] = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn add(&mut self, other: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    pub fn report(&self) -> BleuReport {
        let precisions: [f64; MAX_ORDER] = std::array::from_fn(|n| {
            if self.totals[n] > 0 {
                self.matches[n] as f64 / self.totals[n] as f64
            } else {
                0.0
            }
        });
        let brevity_penalty = if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        let bleu = if precisions.contains(&0.0) {
            0.0
        } else {
            let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
            100.0 * brevity_penalty * log_mean.exp()
        };
        BleuReport {
            precisions,
            brevity_penalty,
            bleu,
            hyp_len: self.hyp_len,
            ref_len: self.ref_len,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BleuReport {
    pub precisions: [f64; MAX_ORDER],
    /// In (0, 1]; 0 only for an empty hypothesis corpus.
    pub brevity_penalty: f64,
    pub bleu: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuReport {
    pub const DESCRIPTION: &'static str = "corpus BLEU, whitespace tokens, max order 4, single reference, no smoothing";

    pub fn to_tsv(&self) -> String {
        format!(
            "bleu\t{:.4}\np1\t{:.6}\np2\t{:.6}\np3\t{:.6}\np4\t{:.6}\nbp\t{:.6}\nhyp_len\t{}\nref_len\t{}\n",
            self.bleu,
            self.precisions[0],
            self.precisions[1],
            self.precisions[2],
            self.precisions[3],
            self.brevity_penalty,
            self.hyp_len,
            self.ref_len
        )
    }
}

impl fmt::Display for BleuReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BLEU = {:.2}, {:.1}/{:.1}/{:.1}/{:.1} (BP={:.3}, hyp_len={}, ref_len={})",
            self.bleu,
            100.0 * self.precisions[0],
            100.0 * self.precisions[1],
            100.0 * self.precisions[2],
            100.0 * self.precisions[3],
            self.brevity_penalty,
            self.hyp_len,
            self.ref_len
        )
    }
}

fn line_stats<S: AsRef<str> + Sync>(hyp: &[S], reference: &[S]) -> Result<Vec<BleuStats>, EvalError> {
    if hyp.len() != reference.len() {
        return Err(EvalError::LengthMismatch {
            hyp: hyp.len(),
            reference: reference.len(),
        });
    }
    if hyp.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(hyp
        .par_iter()
        .zip(reference.par_iter())
        .map(|(h, r)| BleuStats::for_line(h.as_ref(), r.as_ref()))
        .collect())
}

pub fn bleu_corpus<S: AsRef<str> + Sync>(hyp: &[S], reference: &[S]) -> Result<BleuReport, EvalError> {
    let mut total = BleuStats::default();
    for s in line_stats(hyp, reference)? {
        total.add(&s);
    }
    Ok(total.report())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceReport {
    pub bleu_a: f64,
    pub bleu_b: f64,
    /// `bleu_a - bleu_b` on the full test set.
    pub delta_bleu: f64,
    pub p_value: f64,
    pub resamples: usize,
    pub seed: u64,
    /// Set when both systems score the same on the full set.
    pub degenerate: bool,
}

/// Line indices of one bootstrap resample.
///
/// Resample `i` draws from its own ChaCha8 stream, so resamples can be
/// computed in any order or in parallel and a longer run extends a shorter
/// one with the same seed.
pub fn resample_indices(n_lines: usize, resample: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(resample as u64);
    (0..n_lines).map(|_| rng.gen_range(0..n_lines)).collect()
}

/// Paired bootstrap resampling. The p-value is the fraction of resamples
/// in which the system that wins on the full set does not win.
pub fn paired_bootstrap<S: AsRef<str> + Sync>(
    hyp_a: &[S],
    hyp_b: &[S],
    reference: &[S],
    resamples: usize,
    seed: u64,
) -> Result<SignificanceReport, EvalError> {
    if resamples == 0 {
        return Err(EvalError::NoResamples);
    }
    let stats_a = line_stats(hyp_a, reference)?;
    let stats_b = line_stats(hyp_b, reference)?;
    let sum = |stats: &[BleuStats], idx: &mut dyn Iterator<Item = usize>| {
        let mut total = BleuStats::default();
        for i in idx {
            total.add(&stats[i]);
        }
        total.report().bleu
    };
    let n = stats_a.len();
    let bleu_a = sum(&stats_a, &mut (0..n));
    let bleu_b = sum(&stats_b, &mut (0..n));
    let delta = bleu_a - bleu_b;
    if delta == 0.0 {
        return Ok(SignificanceReport {
            bleu_a,
            bleu_b,
            delta_bleu: 0.0,
            p_value: 1.0,
            resamples,
            seed,
            degenerate: true,
        });
    }

    let failures: usize = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let idx = resample_indices(n, i, seed);
            let a = sum(&stats_a, &mut idx.iter().copied());
            let b = sum(&stats_b, &mut idx.iter().copied());
            let lost = if delta > 0.0 { a <= b } else { a >= b };
            usize::from(lost)
        })
        .sum();

    Ok(SignificanceReport {
        bleu_a,
        bleu_b,
        delta_bleu: delta,
        p_value: failures as f64 / resamples as f64,
        resamples,
        seed,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_100() {
        let lines = ["a b c d e", "x y z w"];
        assert_eq!(bleu_corpus(&lines, &lines).unwrap().bleu, 100.0);
    }

    #[test]
    fn no_shared_unigram_is_0() {
        assert_eq!(bleu_corpus(&["a b c d"], &["e f g h"]).unwrap().bleu, 0.0);
    }

    #[test]
    fn brevity_penalty_and_clipping() {
        let r = bleu_corpus(&["the the the the"], &["the cat the"]).unwrap();
        assert_eq!(r.precisions[0], 0.5);
        assert_eq!(r.brevity_penalty, 1.0);
        let r = bleu_corpus(&["a b c d f"], &["a b c d e f"]).unwrap();
        assert!((r.brevity_penalty - (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn empty_hypothesis_line_is_not_an_error() {
        let r = bleu_corpus(&["", "a b c d"], &["x y", "a b c d"]).unwrap();
        assert_eq!(r.hyp_len, 4);
        assert!(r.bleu > 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            bleu_corpus(&["a"], &["a", "b"]).unwrap_err(),
            EvalError::LengthMismatch { hyp: 1, reference: 2 }
        );
    }

    #[test]
    fn identical_systems_are_degenerate() {
        let h = ["a b c d", "e f g h"];
        let r = paired_bootstrap(&h, &h, &h, 100, 3).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn perfect_against_disjoint() {
        let reference = ["a b c d", "e f g h", "i j k l"];
        let bad = ["z z z z", "y y y y", "x x x x"];
        for seed in 0..5 {
            let r = paired_bootstrap(&reference, &bad, &reference, 100, seed).unwrap();
            assert_eq!(r.p_value, 0.0);
            let r = paired_bootstrap(&bad, &reference, &reference, 100, seed).unwrap();
            assert_eq!(r.p_value, 0.0);
            assert!(r.delta_bleu < 0.0);
        }
    }

    #[test]
    fn resamples_are_prefix_stable() {
        let a = resample_indices(7, 3, 11);
        assert_eq!(a, resample_indices(7, 3, 11));
        assert_ne!(a, resample_indices(7, 4, 11));
        assert!(a.iter().all(|&i| i < 7));
    }

    #[test]
    fn longer_runs_extend_shorter_ones() {
        // With per-resample streams, the first 100 resamples of a 400 run
        // are the 100 resamples of a 100 run.
        fn pick<'a>(h: &[&'a str], idx: &[usize]) -> Vec<&'a str> {
            idx.iter().map(|&j| h[j]).collect()
        }
        let reference = ["a b c d", "e f g h", "i j k l", "m n o p", "q r s t"];
        let a = ["a b c d", "e f x h", "i j k l", "m y o p", "q r s t"];
        let b = ["a b c d", "e f g h", "z j k l", "m n o p", "q r w t"];
        let deltas = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let idx = resample_indices(reference.len(), i, 9);
                    let r = pick(&reference, &idx);
                    bleu_corpus(&pick(&a, &idx), &r).unwrap().bleu - bleu_corpus(&pick(&b, &idx), &r).unwrap().bleu
                })
                .collect()
        };
        let short = paired_bootstrap(&a, &b, &reference, 100, 9).unwrap();
        let long = paired_bootstrap(&a, &b, &reference, 400, 9).unwrap();
        let (d100, d400) = (deltas(100), deltas(400));
        assert_eq!(d100[..], d400[..100]);
        let sign = short.delta_bleu.signum();
        let losses = |d: &[f64]| d.iter().filter(|&&x| x * sign <= 0.0).count() as f64;
        assert_eq!(short.p_value, losses(&d100) / 100.0);
        assert_eq!(long.p_value, losses(&d400) / 400.0);
    }
}
