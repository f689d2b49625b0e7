//! Character ⇄ sub-character conversion of word-tokenized text.
//!
//! Each character found in the database is replaced by its flattened form
//! for the chosen configuration; everything else passes through. The forms
//! of the characters in one word are concatenated with no separator.
//!
//! Flattened forms are unique per character (the database appends
//! duplication markers where needed) but a concatenation can still be read
//! more than one way: `女子` is both the word 女子 and the ideograph
//! spelling of 好 once operators are dropped. Composition picks the reading
//! with the fewest units, and decomposition checks that this reading gives
//! back the original word. When it does not, a boundary symbol is placed in
//! front of the unit that would be misread, which makes the round trip exact.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AtLine, CorpusLine};
use crate::db::{DecompositionDb, ReverseIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Character,
    Ideograph,
    Stroke,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Character => "character",
            Granularity::Ideograph => "ideograph",
            Granularity::Stroke => "stroke",
        })
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "character" | "char" => Ok(Granularity::Character),
            "ideograph" => Ok(Granularity::Ideograph),
            "stroke" => Ok(Granularity::Stroke),
            _ => Err(format!("unknown granularity {s:?}")),
        }
    }
}

/// Target representation. `idcs` is ignored at character granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecompConfig {
    pub granularity: Granularity,
    pub idcs: bool,
}

impl DecompConfig {
    pub const IDENTITY: DecompConfig = DecompConfig {
        granularity: Granularity::Character,
        idcs: false,
    };

    /// The four sub-character configurations, in reverse-index slot order.
    pub const SUBCHARACTER: [DecompConfig; 4] = [
        DecompConfig::ideograph(true),
        DecompConfig::ideograph(false),
        DecompConfig::stroke(true),
        DecompConfig::stroke(false),
    ];

    pub const fn new(granularity: Granularity, idcs: bool) -> Self {
        DecompConfig { granularity, idcs }
    }

    pub const fn ideograph(idcs: bool) -> Self {
        Self::new(Granularity::Ideograph, idcs)
    }

    pub const fn stroke(idcs: bool) -> Self {
        Self::new(Granularity::Stroke, idcs)
    }

    pub fn is_identity(&self) -> bool {
        self.granularity == Granularity::Character
    }

    pub(crate) fn slot(&self) -> Option<usize> {
        match (self.granularity, self.idcs) {
            (Granularity::Character, _) => None,
            (Granularity::Ideograph, true) => Some(0),
            (Granularity::Ideograph, false) => Some(1),
            (Granularity::Stroke, true) => Some(2),
            (Granularity::Stroke, false) => Some(3),
        }
    }
}

impl fmt::Display for DecompConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("character");
        }
        let idcs = if self.idcs { "with" } else { "without" };
        write!(f, "{}/{}-idcs", self.granularity, idcs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("word {word:?} offset {offset}: CJK character {ch} is not in the database")]
    UnknownCharacter { word: String, offset: usize, ch: char },
    #[error("word {word:?} offset {offset}: {ch} is a decomposition symbol and cannot pass through")]
    ReservedSymbol { word: String, offset: usize, ch: char },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot compose word {word:?} at offset {offset}")]
pub struct ComposeError {
    pub word: String,
    /// Codepoint offset of the first material that could not be decoded.
    pub offset: usize,
}

/// True for codepoints in the CJK ideograph and radical blocks.
pub fn is_cjk_ideograph(c: char) -> bool {
    matches!(c as u32,
        0x2E80..=0x2FDF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x3134F)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Char(char),
    Pass(char),
}

impl Unit {
    fn surface(self) -> char {
        match self {
            Unit::Char(c) | Unit::Pass(c) => c,
        }
    }
}

/// Converts words and lines for one database and configuration.
#[derive(Debug, Clone, Copy)]
pub struct Decomposer<'a> {
    db: &'a DecompositionDb,
    cfg: DecompConfig,
    index: Option<&'a ReverseIndex>,
    strict: bool,
}

impl<'a> Decomposer<'a> {
    pub fn new(db: &'a DecompositionDb, cfg: DecompConfig) -> Self {
        Decomposer {
            db,
            cfg,
            index: db.index(cfg),
            strict: false,
        }
    }

    /// In strict mode CJK characters missing from the database, and raw
    /// decomposition symbols, are errors instead of passthrough.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn config(&self) -> DecompConfig {
        self.cfg
    }

    fn passthrough_ok(&self, index: &ReverseIndex, c: char) -> bool {
        !self.db.contains(c) && !index.in_alphabet(c)
    }

    pub fn decompose_word(&self, word: &str) -> Result<String, DecomposeError> {
        let Some(index) = self.index else {
            return Ok(word.to_string());
        };
        let chars: Vec<char> = word.chars().collect();
        let mut units: Vec<(&[char], char)> = Vec::with_capacity(chars.len());
        for (offset, c) in chars.iter().enumerate() {
            match index.code(*c) {
                Some(code) => units.push((code, *c)),
                None => {
                    if self.strict {
                        if is_cjk_ideograph(*c) {
                            return Err(DecomposeError::UnknownCharacter {
                                word: word.to_string(),
                                offset,
                                ch: *c,
                            });
                        }
                        if index.in_alphabet(*c) {
                            return Err(DecomposeError::ReservedSymbol {
                                word: word.to_string(),
                                offset,
                                ch: *c,
                            });
                        }
                    }
                    units.push((std::slice::from_ref(c), *c));
                }
            }
        }

        let whole: Vec<char> = units.iter().flat_map(|(code, _)| code.iter().copied()).collect();
        if self.decodes_to(index, &whole, units.iter().map(|u| u.1)) {
            return Ok(whole.into_iter().collect());
        }

        // Greedy segmentation: extend the current segment while it still
        // decodes to its own characters; otherwise start a new one.
        let boundary = self.db.boundary();
        let mut out = String::with_capacity(whole.len() * 4);
        let mut seg: Vec<char> = Vec::new();
        let mut seg_start = 0;
        for (i, (code, _)) in units.iter().enumerate() {
            let mut trial = seg.clone();
            trial.extend_from_slice(code);
            let ok = i == seg_start
                || self.decodes_to(index, &trial, units[seg_start..=i].iter().map(|u| u.1));
            if ok {
                seg = trial;
            } else {
                out.extend(seg.iter());
                out.push(boundary);
                seg = code.to_vec();
                seg_start = i;
            }
        }
        out.extend(seg.iter());
        Ok(out)
    }

    fn decodes_to(
        &self,
        index: &ReverseIndex,
        seg: &[char],
        expected: impl Iterator<Item = char>,
    ) -> bool {
        match self.decode(index, seg) {
            Ok(units) => units.into_iter().map(Unit::surface).eq(expected),
            Err(_) => false,
        }
    }

    /// Minimum-unit reading of a boundary-free segment. On failure returns
    /// the furthest offset that could be reached.
    fn decode(&self, index: &ReverseIndex, seg: &[char]) -> Result<Vec<Unit>, usize> {
        let n = seg.len();
        // best[i] = (unit count, start of last unit, last unit)
        let mut best: Vec<Option<(u32, usize, Unit)>> = vec![None; n + 1];
        let mut reached = 0;
        best[0] = Some((0, 0, Unit::Pass('\0')));
        let max_len = index.max_code_len().max(1);
        for end in 1..=n {
            for len in 1..=max_len.min(end) {
                let start = end - len;
                let Some((cost, _, _)) = best[start] else {
                    continue;
                };
                let unit = match index.lookup(&seg[start..end]) {
                    Some(c) => Unit::Char(c),
                    None if len == 1 && self.passthrough_ok(index, seg[start]) => {
                        Unit::Pass(seg[start])
                    }
                    None => continue,
                };
                let better = match best[end] {
                    None => true,
                    Some((c, _, _)) => cost + 1 < c,
                };
                if better {
                    best[end] = Some((cost + 1, start, unit));
                    reached = end;
                }
            }
        }
        if best[n].is_none() {
            return Err(reached);
        }
        let mut units = Vec::new();
        let mut pos = n;
        while pos > 0 {
            let (_, start, unit) = best[pos].expect("reconstructed path is complete");
            units.push(unit);
            pos = start;
        }
        units.reverse();
        Ok(units)
    }

    pub fn compose_word(&self, word: &str) -> Result<String, ComposeError> {
        let Some(index) = self.index else {
            return Ok(word.to_string());
        };
        let chars: Vec<char> = word.chars().collect();
        let boundary = self.db.boundary();
        let mut out = String::with_capacity(word.len());
        let mut offset = 0;
        for seg in chars.split(|&c| c == boundary) {
            if seg.is_empty() {
                return Err(ComposeError {
                    word: word.to_string(),
                    offset,
                });
            }
            match self.decode(index, seg) {
                Ok(units) => out.extend(units.into_iter().map(Unit::surface)),
                Err(reached) => {
                    return Err(ComposeError {
                        word: word.to_string(),
                        offset: offset + reached,
                    })
                }
            }
            offset += seg.len() + 1;
        }
        Ok(out)
    }

    pub fn decompose_line(&self, line: &CorpusLine) -> Result<CorpusLine, DecomposeError> {
        line.words()
            .iter()
            .map(|w| self.decompose_word(w))
            .collect::<Result<Vec<_>, _>>()
            .map(CorpusLine::from_words)
    }

    pub fn compose_line(&self, line: &CorpusLine) -> Result<CorpusLine, ComposeError> {
        line.words()
            .iter()
            .map(|w| self.compose_word(w))
            .collect::<Result<Vec<_>, _>>()
            .map(CorpusLine::from_words)
    }

    /// Decomposes lines in parallel, keeping their order. Errors carry the
    /// 1-based line number.
    pub fn decompose_corpus(
        &self,
        lines: &[CorpusLine],
    ) -> Result<Vec<CorpusLine>, AtLine<DecomposeError>> {
        lines
            .par_iter()
            .enumerate()
            .map(|(i, l)| self.decompose_line(l).map_err(|e| AtLine::new(i + 1, e)))
            .collect()
    }

    pub fn compose_corpus(&self, lines: &[CorpusLine]) -> Result<Vec<CorpusLine>, AtLine<ComposeError>> {
        lines
            .par_iter()
            .enumerate()
            .map(|(i, l)| self.compose_line(l).map_err(|e| AtLine::new(i + 1, e)))
            .collect()
    }
}

/// Decomposes one word; characters absent from the database pass through.
pub fn decompose_word(word: &str, db: &DecompositionDb, cfg: DecompConfig) -> String {
    Decomposer::new(db, cfg)
        .decompose_word(word)
        .expect("non-strict decomposition is infallible")
}

pub fn decompose_line(line: &CorpusLine, db: &DecompositionDb, cfg: DecompConfig) -> CorpusLine {
    Decomposer::new(db, cfg)
        .decompose_line(line)
        .expect("non-strict decomposition is infallible")
}

/// Inverse of [`decompose_line`] for the same database and configuration.
pub fn compose_line(
    line: &CorpusLine,
    db: &DecompositionDb,
    cfg: DecompConfig,
) -> Result<CorpusLine, ComposeError> {
    Decomposer::new(db, cfg).compose_line(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db::DEFAULT_MARKER;
    use proptest::prelude::*;

    fn small_db() -> DecompositionDb {
        DecompositionDb::load_str(
            "女 女\n子 子\n好 ⿰女子\n口 口\n十 十\n古 ⿱十口\n叶 ⿰口十\n木 木\n林 ⿰木木\n森 ⿱木⿰木木\n",
            "女 ㇛㇐㇒\n子 ㇇㇚㇐\n口 ㇑㇕㇐\n十 ㇐㇑\n木 ㇐㇑㇒㇏\n",
        )
        .unwrap()
    }

    fn collision_db() -> DecompositionDb {
        DecompositionDb::load_str("A A\nB B\nX ⿰AB\nY ⿱AB\n", "A ㇐㇑\nB ㇒㇏\n").unwrap()
    }

    #[test]
    fn ideograph_with_idcs() {
        let db = small_db();
        assert_eq!(decompose_word("好", &db, DecompConfig::ideograph(true)), "⿰女子");
    }

    #[test]
    fn stroke_with_idcs() {
        let db = small_db();
        assert_eq!(
            decompose_word("好", &db, DecompConfig::stroke(true)),
            "⿰㇛㇐㇒㇇㇚㇐"
        );
    }

    #[test]
    fn passthrough() {
        let db = small_db();
        for cfg in DecompConfig::SUBCHARACTER {
            assert_eq!(decompose_word("ABC", &db, cfg), "ABC");
        }
    }

    #[test]
    fn collision_marker_in_output() {
        let db = collision_db();
        let cfg = DecompConfig::ideograph(false);
        assert_eq!(decompose_word("Y", &db, cfg), format!("AB{DEFAULT_MARKER}"));
        assert_eq!(decompose_word("X", &db, cfg), "AB");
    }

    #[test]
    fn line_examples() {
        let db = small_db();
        let cfg = DecompConfig::ideograph(true);
        let line: CorpusLine = "好 ABC".parse().unwrap();
        let dec = decompose_line(&line, &db, cfg);
        assert_eq!(dec.to_string(), "⿰女子 ABC");
        assert_eq!(compose_line(&dec, &db, cfg).unwrap(), line);

        let empty = CorpusLine::default();
        assert_eq!(decompose_line(&empty, &db, cfg), empty);
    }

    #[test]
    fn identity_config() {
        let db = small_db();
        let line: CorpusLine = "好 女子".parse().unwrap();
        assert_eq!(decompose_line(&line, &db, DecompConfig::IDENTITY), line);
        assert_eq!(compose_line(&line, &db, DecompConfig::IDENTITY).unwrap(), line);
    }

    #[test]
    fn missing_operand_fails_to_compose() {
        let db = small_db();
        let err = Decomposer::new(&db, DecompConfig::ideograph(true))
            .compose_word("⿰女")
            .unwrap_err();
        assert_eq!(err.word, "⿰女");
    }

    #[test]
    fn ambiguous_concatenation_gets_boundary() {
        let db = small_db();
        let cfg = DecompConfig::ideograph(false);
        let d = Decomposer::new(&db, cfg);
        // 女子 and 好 both flatten to 女子 without operators.
        assert_eq!(d.decompose_word("好").unwrap(), "女子");
        let word = d.decompose_word("女子").unwrap();
        assert_eq!(word, format!("女{}子", db.boundary()));
        assert_eq!(d.compose_word(&word).unwrap(), "女子");
        assert_eq!(d.compose_word("女子").unwrap(), "好");
    }

    #[test]
    fn round_trip_all_words() {
        let db = small_db();
        let alphabet: Vec<char> = "女子好口十古叶木林森ab。".chars().collect();
        for cfg in DecompConfig::SUBCHARACTER {
            let d = Decomposer::new(&db, cfg);
            for a in &alphabet {
                for b in &alphabet {
                    for c in &alphabet {
                        let w: String = [*a, *b, *c].iter().collect();
                        let dec = d.decompose_word(&w).unwrap();
                        assert_eq!(d.compose_word(&dec).unwrap(), w, "{cfg} {w} {dec}");
                    }
                }
            }
        }
    }

    #[test]
    fn strict_mode_rejects_unknown_cjk() {
        let db = small_db();
        let d = Decomposer::new(&db, DecompConfig::stroke(true)).strict(true);
        assert!(matches!(
            d.decompose_word("好猫"),
            Err(DecomposeError::UnknownCharacter { offset: 1, ch: '猫', .. })
        ));
        assert!(matches!(
            d.decompose_word("a㇐"),
            Err(DecomposeError::ReservedSymbol { offset: 1, .. })
        ));
        assert_eq!(d.decompose_word("aか").unwrap(), "aか");
    }

    proptest! {
        #[test]
        fn random_lines_round_trip(
            words in prop::collection::vec(
                prop::collection::vec(prop::sample::select("女子好口十古叶木林森xyか1".chars().collect::<Vec<_>>()), 1..6),
                0..8),
            slot in 0usize..4,
        ) {
            let db = small_db();
            let cfg = DecompConfig::SUBCHARACTER[slot];
            let line = CorpusLine::from_words(words.into_iter().map(|w| w.into_iter().collect()).collect());
            let dec = decompose_line(&line, &db, cfg);
            prop_assert_eq!(dec.len(), line.len());
            prop_assert_eq!(compose_line(&dec, &db, cfg).unwrap(), line);
        }
    }
}
