//! Token-sharing statistics between two tokenized corpora.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Token types of a corpus together with their occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VocabSet {
    counts: HashMap<String, u64>,
}

impl VocabSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lines<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = VocabSet::new();
        for line in lines {
            v.add_tokens(line.as_ref().split_whitespace());
        }
        v
    }

    pub fn add_tokens<'a, I: IntoIterator<Item = &'a str>>(&mut self, tokens: I) {
        for t in tokens {
            *self.counts.entry(t.to_string()).or_insert(0) += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Token types present in both vocabularies.
    pub fn shared_with(&self, other: &VocabSet) -> HashSet<String> {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .tokens()
            .filter(|t| large.contains(t))
            .map(str::to_string)
            .collect()
    }
}

/// Type-level sharing rate: |A ∩ B| / |A ∪ B|, or 0 when both are empty.
pub fn corpus_sharing_rate(a: &VocabSet, b: &VocabSet) -> f64 {
    let shared = a.tokens().filter(|t| b.contains(t)).count();
    let union = a.len() + b.len() - shared;
    if union == 0 {
        0.0
    } else {
        shared as f64 / union as f64
    }
}

/// Fraction of all token occurrences, over both corpora, whose type is shared.
/// Reported alongside the type-level rate; the sampler does not steer on it.
pub fn occurrence_sharing_rate(a: &VocabSet, b: &VocabSet) -> f64 {
    let total = a.total() + b.total();
    if total == 0 {
        return 0.0;
    }
    let shared: u64 = a
        .counts
        .iter()
        .filter(|(t, _)| b.contains(t))
        .map(|(t, n)| n + b.count(t))
        .sum();
    shared as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sentence sharing rate is undefined for an empty sentence")]
pub struct EmptySentence;

/// Fraction of the sentence's token occurrences that are in `shared`.
pub fn sentence_sharing_rate<S: AsRef<str>>(
    sentence: &[S],
    shared: &HashSet<String>,
) -> Result<f64, EmptySentence> {
    if sentence.is_empty() {
        return Err(EmptySentence);
    }
    let hits = sentence
        .iter()
        .filter(|t| shared.contains(t.as_ref()))
        .count();
    Ok(hits as f64 / sentence.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorpusStats {
    pub sentences: usize,
    pub tokens: usize,
    pub vocab: usize,
    pub codepoints: usize,
    /// Codepoints per token; `None` when the corpus has no tokens.
    pub mean_word_length: Option<f64>,
}

pub fn corpus_stats<I, S>(lines: I) -> CorpusStats
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut stats = CorpusStats::default();
    let mut types: HashSet<String> = HashSet::new();
    for line in lines {
        stats.sentences += 1;
        for w in line.as_ref().split_whitespace() {
            stats.tokens += 1;
            stats.codepoints += w.chars().count();
            if !types.contains(w) {
                types.insert(w.to_string());
            }
        }
    }
    stats.vocab = types.len();
    stats.mean_word_length = (stats.tokens > 0).then(|| stats.codepoints as f64 / stats.tokens as f64);
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(tokens: &str) -> VocabSet {
        VocabSet::from_lines([tokens])
    }

    #[test]
    fn corpus_rate_examples() {
        assert_eq!(corpus_sharing_rate(&vocab("x y z"), &vocab("y z w")), 0.5);
        assert_eq!(corpus_sharing_rate(&vocab("x y"), &vocab("y x")), 1.0);
        assert_eq!(corpus_sharing_rate(&vocab("x y"), &vocab("z w")), 0.0);
        assert_eq!(corpus_sharing_rate(&VocabSet::new(), &VocabSet::new()), 0.0);
    }

    #[test]
    fn occurrence_rate() {
        // x:2 y:1 | y:1 w:1 -> shared occurrences y:1+1 of 5
        let r = occurrence_sharing_rate(&vocab("x x y"), &vocab("y w"));
        assert!((r - 0.4).abs() < 1e-12);
    }

    #[test]
    fn sentence_rate_examples() {
        let shared: HashSet<String> = ["a".to_string()].into_iter().collect();
        assert_eq!(sentence_sharing_rate(&["a", "b", "a", "c"], &shared), Ok(0.5));
        assert_eq!(sentence_sharing_rate(&["a", "a"], &shared), Ok(1.0));
        assert_eq!(sentence_sharing_rate(&["a"], &HashSet::new()), Ok(0.0));
        assert_eq!(sentence_sharing_rate::<&str>(&[], &shared), Err(EmptySentence));
    }

    #[test]
    fn stats_examples() {
        let s = corpus_stats(["ab c"]);
        assert_eq!((s.sentences, s.tokens, s.vocab), (1, 2, 2));
        assert_eq!(s.mean_word_length, Some(1.5));

        let s = corpus_stats(Vec::<&str>::new());
        assert_eq!((s.sentences, s.tokens, s.vocab), (0, 0, 0));
        assert_eq!(s.mean_word_length, None);

        let once = corpus_stats(["ab c", "c d"]);
        let twice = corpus_stats(["ab c", "c d", "ab c", "c d"]);
        assert_eq!(twice.tokens, 2 * once.tokens);
        assert_eq!(twice.vocab, once.vocab);
    }
}
