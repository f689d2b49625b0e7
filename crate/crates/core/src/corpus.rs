use std::convert::Infallible;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// One sentence as a list of whitespace-free word tokens.
///
/// Parsing collapses any run of whitespace to a single separator, so
/// `to_string` always yields words joined by single spaces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CorpusLine {
    words: Vec<String>,
}

impl CorpusLine {
    pub fn from_words(words: Vec<String>) -> Self {
        debug_assert!(words.iter().all(|w| !w.is_empty() && !w.contains(char::is_whitespace)));
        CorpusLine { words }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl FromStr for CorpusLine {
    type Err = Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(CorpusLine {
            words: s.split_whitespace().map(str::to_string).collect(),
        })
    }
}

impl From<&str> for CorpusLine {
    fn from(s: &str) -> Self {
        s.parse().unwrap_or_else(|e| match e {})
    }
}

impl fmt::Display for CorpusLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for w in &self.words {
            if !first {
                f.write_str(" ")?;
            }
            f.write_str(w)?;
            first = false;
        }
        Ok(())
    }
}

/// An error tied to a 1-based line number of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {source}")]
pub struct AtLine<E: std::error::Error + 'static> {
    pub line: usize,
    #[source]
    pub source: E,
}

impl<E: std::error::Error + 'static> AtLine<E> {
    pub fn new(line: usize, source: E) -> Self {
        AtLine { line, source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_whitespace() {
        let line = CorpusLine::from("  a\tb   c ");
        assert_eq!(line.words(), ["a", "b", "c"]);
        assert_eq!(line.to_string(), "a b c");
    }

    #[test]
    fn empty() {
        let line = CorpusLine::from("   ");
        assert!(line.is_empty());
        assert_eq!(line.to_string(), "");
    }
}
