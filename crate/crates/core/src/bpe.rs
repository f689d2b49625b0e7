//! Byte-pair encoding over codepoints.
//!
//! Learning repeatedly merges the most frequent adjacent symbol pair inside
//! words, ties going to the lexicographically smallest `(left, right)`. It
//! stops once the number of distinct subwords in the training corpus reaches
//! the budget or no pair occurs at least twice. Applied output marks every
//! non-final subword of a word with a trailing `@@`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{AtLine, CorpusLine};

pub const CONTINUATION: &str = "@@";
const CODES_FILE: &str = "codes";
const VOCAB_FILE: &str = "vocab";
const VERSION_PREFIX: &str = "#version";
const MIN_PAIR_FREQ: i64 = 2;

#[derive(Debug, Error)]
pub enum BpeError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary budget {budget} is below the corpus alphabet size {alphabet}")]
    BudgetBelowAlphabet { budget: usize, alphabet: usize },
    #[error("line ends in a continuation token: {0:?}")]
    DanglingContinuation(String),
    #[error("{file} line {line}: {msg}")]
    Format {
        file: &'static str,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub rank: usize,
}

/// Learned merges plus the subword frequencies they produce on the
/// training corpus.
#[derive(Debug, Clone)]
pub struct BpeModel {
    merges: Vec<MergeRule>,
    vocab: Vec<(String, u64)>,
    vocab_budget: usize,
    symbols: HashMap<String, u32>,
    pair_rank: HashMap<(u32, u32), (usize, u32)>,
}

const UNKNOWN: u32 = u32::MAX;

impl BpeModel {
    /// Builds a model from a rank-ordered list of `(left, right)` pairs.
    pub fn from_merges(
        pairs: Vec<(String, String)>,
        vocab: Vec<(String, u64)>,
        vocab_budget: usize,
    ) -> Self {
        let mut symbols: HashMap<String, u32> = HashMap::new();
        let mut intern = |s: &str| -> u32 {
            let next = symbols.len() as u32;
            *symbols.entry(s.to_string()).or_insert(next)
        };
        let mut pair_rank = HashMap::new();
        let mut merges = Vec::with_capacity(pairs.len());
        for (rank, (left, right)) in pairs.into_iter().enumerate() {
            let l = intern(&left);
            let r = intern(&right);
            let m = intern(&format!("{left}{right}"));
            pair_rank.entry((l, r)).or_insert((rank, m));
            merges.push(MergeRule { left, right, rank });
        }
        BpeModel {
            merges,
            vocab,
            vocab_budget,
            symbols,
            pair_rank,
        }
    }

    pub fn empty() -> Self {
        Self::from_merges(Vec::new(), Vec::new(), 0)
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// Subword frequencies on the training corpus, descending by count.
    pub fn vocab(&self) -> &[(String, u64)] {
        &self.vocab
    }

    pub fn vocab_budget(&self) -> usize {
        self.vocab_budget
    }

    /// Segments one word into subwords (without continuation markers).
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        let mut text: Vec<String> = word.chars().map(String::from).collect();
        let mut ids: Vec<u32> = text
            .iter()
            .map(|s| self.symbols.get(s).copied().unwrap_or(UNKNOWN))
            .collect();
        loop {
            let best = ids
                .windows(2)
                .filter_map(|w| self.pair_rank.get(&(w[0], w[1])).map(|&(rank, m)| (rank, w[0], w[1], m)))
                .min();
            let Some((_, a, b, m)) = best else {
                break;
            };
            let mut i = 0;
            while i + 1 < ids.len() {
                if ids[i] == a && ids[i + 1] == b {
                    let right = text.remove(i + 1);
                    text[i].push_str(&right);
                    ids.remove(i + 1);
                    ids[i] = m;
                }
                i += 1;
            }
        }
        text
    }

    /// Applies the model to a line, marking non-final subwords with `@@`.
    pub fn apply_line(&self, line: &CorpusLine) -> CorpusLine {
        let mut out = Vec::with_capacity(line.len() * 2);
        for word in line.words() {
            let mut pieces = self.segment_word(word);
            // A final piece ending in the marker would read as continued.
            if let Some(tail) = pieces.last_mut().filter(|p| p.ends_with(CONTINUATION)) {
                let at = tail.pop().map(String::from).unwrap_or_default();
                pieces.push(at);
            }
            let last = pieces.len() - 1;
            for (i, mut piece) in pieces.into_iter().enumerate() {
                if i != last {
                    piece.push_str(CONTINUATION);
                }
                out.push(piece);
            }
        }
        CorpusLine::from_words(out)
    }

    pub fn write_codes<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{VERSION_PREFIX}: textprep-bpe 1 vocab_budget={}",
            self.vocab_budget
        )?;
        for m in &self.merges {
            writeln!(w, "{} {}", m.left, m.right)?;
        }
        Ok(())
    }

    pub fn write_vocab<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (s, n) in &self.vocab {
            writeln!(w, "{s} {n}")?;
        }
        Ok(())
    }

    /// Reads a merge file and an optional vocabulary file.
    pub fn read<R: BufRead, V: BufRead>(codes: R, vocab: Option<V>) -> Result<Self, BpeError> {
        let mut pairs = Vec::new();
        let mut budget = 0;
        for (idx, line) in codes.lines().enumerate() {
            let line = line?;
            if idx == 0 && line.starts_with(VERSION_PREFIX) {
                budget = line
                    .split_whitespace()
                    .find_map(|f| f.strip_prefix("vocab_budget="))
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0);
                continue;
            }
            let mut fields = line.split(' ');
            match (fields.next(), fields.next(), fields.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    pairs.push((l.to_string(), r.to_string()))
                }
                _ => {
                    return Err(BpeError::Format {
                        file: CODES_FILE,
                        line: idx + 1,
                        msg: "expected \"left right\"".into(),
                    })
                }
            }
        }
        let mut entries = Vec::new();
        if let Some(vocab) = vocab {
            for (idx, line) in vocab.lines().enumerate() {
                let line = line?;
                let parsed = line
                    .rsplit_once(' ')
                    .and_then(|(s, n)| n.parse::<u64>().ok().map(|n| (s.to_string(), n)));
                match parsed {
                    Some(e) => entries.push(e),
                    None => {
                        return Err(BpeError::Format {
                            file: VOCAB_FILE,
                            line: idx + 1,
                            msg: "expected \"subword count\"".into(),
                        })
                    }
                }
            }
        }
        Ok(Self::from_merges(pairs, entries, budget))
    }

    /// Writes `codes` and `vocab` into `dir`, creating it if needed.
    pub fn save_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        self.write_codes(io::BufWriter::new(fs::File::create(dir.join(CODES_FILE))?))?;
        self.write_vocab(io::BufWriter::new(fs::File::create(dir.join(VOCAB_FILE))?))?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self, BpeError> {
        let codes = BufReader::new(fs::File::open(dir.join(CODES_FILE))?);
        let vocab_path = dir.join(VOCAB_FILE);
        let vocab = if vocab_path.exists() {
            Some(BufReader::new(fs::File::open(vocab_path)?))
        } else {
            None
        };
        Self::read(codes, vocab)
    }
}

impl BpeModel {
    /// Segments lines in parallel, keeping their order.
    pub fn apply_corpus(&self, lines: &[CorpusLine]) -> Vec<CorpusLine> {
        lines.par_iter().map(|l| self.apply_line(l)).collect()
    }
}

/// Undoes segmentation line by line in parallel. Errors carry the 1-based
/// line number.
pub fn undo_corpus(lines: &[CorpusLine]) -> Result<Vec<CorpusLine>, AtLine<BpeError>> {
    lines
        .par_iter()
        .enumerate()
        .map(|(i, l)| undo_bpe(l).map_err(|e| AtLine::new(i + 1, e)))
        .collect()
}

/// Joins `@@`-continued subwords back into words.
pub fn undo_bpe(line: &CorpusLine) -> Result<CorpusLine, BpeError> {
    let mut words = Vec::with_capacity(line.len());
    let mut pending = String::new();
    for token in line.words() {
        match token.strip_suffix(CONTINUATION) {
            Some(stem) => pending.push_str(stem),
            None => {
                pending.push_str(token);
                words.push(std::mem::take(&mut pending));
            }
        }
    }
    if !pending.is_empty() || line.words().last().is_some_and(|t| t.ends_with(CONTINUATION)) {
        return Err(BpeError::DanglingContinuation(line.to_string()));
    }
    Ok(CorpusLine::from_words(words))
}

pub fn apply_bpe(line: &CorpusLine, model: &BpeModel) -> CorpusLine {
    model.apply_line(line)
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    count: i64,
    left: Reverse<String>,
    right: Reverse<String>,
    pair: (u32, u32),
}

struct Learner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    words: Vec<(Vec<u32>, i64)>,
    pair_counts: HashMap<(u32, u32), i64>,
    pair_words: HashMap<(u32, u32), Vec<usize>>,
    sym_counts: Vec<i64>,
    distinct: usize,
    heap: BinaryHeap<Candidate>,
}

impl Learner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        self.sym_counts.push(0);
        id
    }

    fn push(&mut self, pair: (u32, u32)) {
        let count = self.pair_counts.get(&pair).copied().unwrap_or(0);
        if count >= MIN_PAIR_FREQ {
            self.heap.push(Candidate {
                count,
                left: Reverse(self.names[pair.0 as usize].clone()),
                right: Reverse(self.names[pair.1 as usize].clone()),
                pair,
            });
        }
    }

    fn pop_best(&mut self) -> Option<(u32, u32)> {
        while let Some(c) = self.heap.pop() {
            if self.pair_counts.get(&c.pair).copied() == Some(c.count) {
                return Some(c.pair);
            }
        }
        None
    }

    fn merge(&mut self, (a, b): (u32, u32)) {
        let merged = format!("{}{}", self.names[a as usize], self.names[b as usize]);
        let m = self.intern(&merged);
        let m_existed = self.sym_counts[m as usize] > 0;
        let mut touched = self.pair_words.remove(&(a, b)).unwrap_or_default();
        touched.sort_unstable();
        touched.dedup();
        let mut changed: HashSet<(u32, u32)> = HashSet::new();

        for &w in &touched {
            let (syms, freq) = &self.words[w];
            let freq = *freq;
            if !syms.windows(2).any(|p| p[0] == a && p[1] == b) {
                continue;
            }
            for p in syms.windows(2) {
                let key = (p[0], p[1]);
                *self.pair_counts.get_mut(&key).expect("counted pair") -= freq;
                changed.insert(key);
            }
            for &s in syms {
                self.sym_counts[s as usize] -= freq;
            }
            let mut next = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == a && syms[i + 1] == b {
                    next.push(m);
                    i += 2;
                } else {
                    next.push(syms[i]);
                    i += 1;
                }
            }
            for p in next.windows(2) {
                let key = (p[0], p[1]);
                *self.pair_counts.entry(key).or_insert(0) += freq;
                self.pair_words.entry(key).or_default().push(w);
                changed.insert(key);
            }
            for &s in &next {
                self.sym_counts[s as usize] += freq;
            }
            self.words[w].0 = next;
        }

        if self.sym_counts[a as usize] == 0 {
            self.distinct -= 1;
        }
        if b != a && self.sym_counts[b as usize] == 0 {
            self.distinct -= 1;
        }
        if !m_existed && self.sym_counts[m as usize] > 0 {
            self.distinct += 1;
        }

        let mut changed: Vec<_> = changed.into_iter().collect();
        changed.sort_unstable();
        for pair in changed {
            if self.pair_counts.get(&pair) == Some(&0) {
                self.pair_counts.remove(&pair);
            } else {
                self.push(pair);
            }
        }
    }
}

/// Learns merges from word-tokenized lines. Passing the lines of two
/// corpora yields a joint model.
pub fn learn_bpe<I, S>(lines: I, vocab_budget: usize) -> Result<BpeModel, BpeError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut word_counts: HashMap<String, i64> = HashMap::new();
    for line in lines {
        for w in line.as_ref().split_whitespace() {
            *word_counts.entry(w.to_string()).or_insert(0) += 1;
        }
    }
    if word_counts.is_empty() {
        return Err(BpeError::EmptyCorpus);
    }
    let mut sorted: Vec<(String, i64)> = word_counts.into_iter().collect();
    sorted.sort_unstable();

    let mut learner = Learner {
        names: Vec::new(),
        ids: HashMap::new(),
        words: Vec::with_capacity(sorted.len()),
        pair_counts: HashMap::new(),
        pair_words: HashMap::new(),
        sym_counts: Vec::new(),
        distinct: 0,
        heap: BinaryHeap::new(),
    };
    for (idx, (word, freq)) in sorted.iter().enumerate() {
        let mut buf = [0u8; 4];
        let syms: Vec<u32> = word
            .chars()
            .map(|c| learner.intern(c.encode_utf8(&mut buf)))
            .collect();
        for &s in &syms {
            learner.sym_counts[s as usize] += freq;
        }
        for p in syms.windows(2) {
            *learner.pair_counts.entry((p[0], p[1])).or_insert(0) += freq;
            learner.pair_words.entry((p[0], p[1])).or_default().push(idx);
        }
        learner.words.push((syms, *freq));
    }
    learner.distinct = learner.sym_counts.iter().filter(|&&n| n > 0).count();
    if vocab_budget < learner.distinct {
        return Err(BpeError::BudgetBelowAlphabet {
            budget: vocab_budget,
            alphabet: learner.distinct,
        });
    }
    let mut initial: Vec<(u32, u32)> = learner.pair_counts.keys().copied().collect();
    initial.sort_unstable();
    for pair in initial {
        learner.push(pair);
    }

    let mut pairs = Vec::new();
    while learner.distinct < vocab_budget {
        let Some(pair) = learner.pop_best() else {
            break;
        };
        pairs.push((
            learner.names[pair.0 as usize].clone(),
            learner.names[pair.1 as usize].clone(),
        ));
        learner.merge(pair);
    }

    let mut vocab: Vec<(String, u64)> = learner
        .sym_counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(id, &n)| (learner.names[id].clone(), n as u64))
        .collect();
    vocab.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));

    Ok(BpeModel::from_merges(pairs, vocab, vocab_budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(model: &BpeModel) -> Vec<(&str, &str)> {
        model
            .merges()
            .iter()
            .map(|m| (m.left.as_str(), m.right.as_str()))
            .collect()
    }

    #[test]
    fn first_merge_is_most_frequent_pair() {
        let model = learn_bpe(["abab", "abc"], 100).unwrap();
        // ab occurs 3 times; afterwards every pair occurs once.
        assert_eq!(pairs(&model), vec![("a", "b")]);
        assert_eq!(
            model.vocab(),
            &[("ab".to_string(), 3), ("c".to_string(), 1)]
        );
    }

    #[test]
    fn single_codepoint_word() {
        let model = learn_bpe(["a"], 10).unwrap();
        assert!(model.merges().is_empty());
    }

    #[test]
    fn doubled_corpus_same_merges() {
        let once = learn_bpe(["abab abab cd", "cd abab"], 100).unwrap();
        let twice = learn_bpe(["abab abab cd", "cd abab", "abab abab cd", "cd abab"], 100).unwrap();
        assert_eq!(pairs(&once), vec![("a", "b"), ("ab", "ab"), ("c", "d")]);
        assert_eq!(once.merges(), twice.merges());
        for ((s1, n1), (s2, n2)) in once.vocab().iter().zip(twice.vocab()) {
            assert_eq!(s1, s2);
            assert_eq!(2 * n1, *n2);
        }
    }

    #[test]
    fn doubling_only_appends_former_hapax_merges() {
        let once = learn_bpe(["abab abc", "bcd bcd abc"], 100).unwrap();
        let twice = learn_bpe(["abab abc", "bcd bcd abc", "abab abc", "bcd bcd abc"], 100).unwrap();
        let n = once.merges().len();
        assert_eq!(once.merges(), &twice.merges()[..n]);
        assert!(twice.merges().len() > n);
    }

    #[test]
    fn ties_break_lexicographically() {
        // ab and cd both occur twice; ab wins.
        let model = learn_bpe(["ab ab cd cd"], 100).unwrap();
        assert_eq!(pairs(&model)[0], ("a", "b"));
        let model = learn_bpe(["cd cd ab ab"], 100).unwrap();
        assert_eq!(pairs(&model)[0], ("a", "b"));
    }

    #[test]
    fn budget_below_alphabet() {
        let err = learn_bpe(["abc"], 2).unwrap_err();
        assert!(matches!(
            err,
            BpeError::BudgetBelowAlphabet {
                budget: 2,
                alphabet: 3
            }
        ));
        assert!(matches!(learn_bpe(Vec::<&str>::new(), 10), Err(BpeError::EmptyCorpus)));
    }

    #[test]
    fn budget_stops_learning() {
        let model = learn_bpe(["abcd abcd abcd"], 4).unwrap();
        // a b c d is already four symbols.
        assert!(model.merges().is_empty());
        let model = learn_bpe(["abcd abcd abcd"], 5).unwrap();
        assert!(model.vocab().len() <= 5);
    }

    #[test]
    fn apply_examples() {
        let m = BpeModel::from_merges(
            vec![("a".into(), "b".into()), ("ab".into(), "ab".into())],
            vec![],
            10,
        );
        assert_eq!(m.apply_line(&"abab".into()).to_string(), "abab");
        let m = BpeModel::from_merges(vec![("a".into(), "b".into())], vec![], 10);
        assert_eq!(m.apply_line(&"abc".into()).to_string(), "ab@@ c");
        assert_eq!(
            BpeModel::empty().apply_line(&"abc d".into()).to_string(),
            "a@@ b@@ c d"
        );
    }

    #[test]
    fn undo_examples() {
        assert_eq!(undo_bpe(&"ab@@ c".into()).unwrap().to_string(), "abc");
        assert_eq!(undo_bpe(&"x y".into()).unwrap().to_string(), "x y");
        assert!(matches!(
            undo_bpe(&"ab@@".into()),
            Err(BpeError::DanglingContinuation(_))
        ));
    }

    #[test]
    fn literal_marker_at_word_end() {
        let model = learn_bpe(["a@@ a@@ b@@", "@@"], 100).unwrap();
        for w in ["a@@", "@@", "x@@@", "@", "@@a"] {
            let line = CorpusLine::from(w);
            assert_eq!(undo_bpe(&apply_bpe(&line, &model)).unwrap(), line, "{w}");
            let bare = apply_bpe(&line, &BpeModel::empty());
            assert_eq!(undo_bpe(&bare).unwrap(), line, "{w}");
        }
    }

    #[test]
    fn codes_round_trip_through_files() {
        let model = learn_bpe(["abab abc", "bcd bcd"], 100).unwrap();
        let mut codes = Vec::new();
        let mut vocab = Vec::new();
        model.write_codes(&mut codes).unwrap();
        model.write_vocab(&mut vocab).unwrap();
        let back = BpeModel::read(&codes[..], Some(&vocab[..])).unwrap();
        assert_eq!(back.merges(), model.merges());
        assert_eq!(back.vocab(), model.vocab());
        assert_eq!(back.vocab_budget(), 100);
    }

    #[test]
    fn codes_may_start_with_hash() {
        let back = BpeModel::read("# x\n".as_bytes(), None::<&[u8]>).unwrap();
        assert_eq!(back.merges()[0].left, "#");
    }

    fn word() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!['a', 'b', 'c', '㇐', '㇑', '女', '⿰', '@']), 1..8)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn undo_inverts_apply(
            train in prop::collection::vec(prop::collection::vec(word(), 1..6), 1..10),
            line in prop::collection::vec(word(), 0..8),
            budget in 7usize..40,
        ) {
            let train: Vec<String> = train.into_iter().map(|l| l.join(" ")).collect();
            if let Ok(model) = learn_bpe(&train, budget) {
                let line = CorpusLine::from_words(line);
                prop_assert_eq!(undo_bpe(&model.apply_line(&line)).unwrap(), line);
            }
        }

        #[test]
        fn line_order_does_not_matter(
            train in prop::collection::vec(prop::collection::vec(word(), 1..6), 1..10),
        ) {
            let lines: Vec<String> = train.into_iter().map(|l| l.join(" ")).collect();
            let mut rev = lines.clone();
            rev.reverse();
            let a = learn_bpe(&lines, 60).unwrap();
            let b = learn_bpe(&rev, 60).unwrap();
            prop_assert_eq!(a.merges(), b.merges());
        }

        #[test]
        fn training_vocab_within_budget(
            train in prop::collection::vec(prop::collection::vec(word(), 1..6), 1..10),
            budget in 7usize..30,
        ) {
            let lines: Vec<String> = train.into_iter().map(|l| l.join(" ")).collect();
            if let Ok(model) = learn_bpe(&lines, budget) {
                let mut seen = HashSet::new();
                for l in &lines {
                    let applied = model.apply_line(&l.as_str().into());
                    for w in applied.words() {
                        seen.insert(w.strip_suffix(CONTINUATION).unwrap_or(w).to_string());
                    }
                }
                // Words ending in a literal marker are split differently.
                if !lines.iter().flat_map(|l| l.split(' ')).any(|w| w.ends_with(CONTINUATION)) {
                    prop_assert!(seen.len() <= budget);
                    prop_assert_eq!(seen.len(), model.vocab().len());
                }
            }
        }
    }
}
