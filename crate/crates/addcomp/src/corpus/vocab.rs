//! Rank-ordered vocabulary with unigram counts.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Lexicon of retained words, sorted by descending count (ties broken
/// lexicographically), with occurrence counts and derived probabilities.
///
/// Index `i` is the rank; probabilities are relative to the retained total,
/// so they always sum to 1.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    total: u64,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds the vocabulary from tokenized sentences, keeping words with
    /// count ≥ `min_count`. An empty stream yields an empty vocabulary.
    pub fn build<S, T>(sentences: S, min_count: u64) -> Result<Self>
    where
        S: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        if min_count < 1 {
            return Err(Error::Config("min_count must be >= 1".into()));
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for sentence in sentences {
            for tok in sentence.as_ref() {
                if tok.is_empty() {
                    return Err(Error::Data("empty token in corpus".into()));
                }
                *counts.entry(tok.clone()).or_insert(0) += 1;
            }
        }
        let mut pairs: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self::from_ranked(pairs))
    }

    /// Assembles a vocabulary from already rank-sorted (token, count) pairs.
    pub fn from_ranked(pairs: Vec<(String, u64)>) -> Self {
        let mut tokens = Vec::with_capacity(pairs.len());
        let mut counts = Vec::with_capacity(pairs.len());
        let mut index = HashMap::with_capacity(pairs.len());
        let mut total = 0u64;
        for (tok, c) in pairs {
            index.insert(tok.clone(), tokens.len() as u32);
            tokens.push(tok);
            counts.push(c);
            total += c;
        }
        Self {
            tokens,
            counts,
            total,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Total retained occurrences C.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(|s| s.as_str())
    }

    /// Occurrence count of rank `id`.
    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Occurrence count by token, if retained.
    pub fn count_of(&self, token: &str) -> Option<u64> {
        self.id(token).map(|i| self.count(i))
    }

    /// Unigram probability p_i = C_i / C.
    pub fn probability(&self, id: u32) -> f64 {
        self.counts[id as usize] as f64 / self.total as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.tokens
            .iter()
            .map(|s| s.as_str())
            .zip(self.counts.iter().copied())
    }

    /// Writes `token<TAB>count` lines in rank order.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (tok, c) in self.iter() {
            writeln!(w, "{tok}\t{c}")?;
        }
        Ok(())
    }

    /// Reads a vocabulary file produced by [`Vocabulary::write_to`].
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut prev = u64::MAX;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Data(format!("vocabulary line {}: {e}", lineno + 1)))?;
            if line.is_empty() {
                continue;
            }
            let (tok, cnt) = line.split_once('\t').ok_or_else(|| {
                Error::Data(format!("vocabulary line {}: expected token<TAB>count", lineno + 1))
            })?;
            let c: u64 = cnt.parse().map_err(|_| {
                Error::Data(format!("vocabulary line {}: bad count {cnt:?}", lineno + 1))
            })?;
            if c > prev {
                return Err(Error::Data(format!(
                    "vocabulary line {}: counts not sorted non-increasing",
                    lineno + 1
                )));
            }
            prev = c;
            pairs.push((tok.to_string(), c));
        }
        Ok(Self::from_ranked(pairs))
    }

    /// Loads a vocabulary from a file path.
    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::MissingInput {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split(' ').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn counts_rank_and_lookup() {
        let v = Vocabulary::build(sents(&["a a b"]), 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.token(0), Some("a"));
        assert_eq!(v.count(0), 2);
        assert_eq!(v.token(1), Some("b"));
        assert_eq!(v.count(1), 1);
        assert_eq!(v.total(), 3);
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.id("zzz"), None);
    }

    #[test]
    fn empty_stream_is_an_empty_vocabulary() {
        let v = Vocabulary::build(Vec::<Vec<String>>::new(), 1).unwrap();
        assert_eq!(v.len(), 0);
        assert_eq!(v.total(), 0);
    }

    #[test]
    fn min_count_filters_and_probabilities_renormalize() {
        let v = Vocabulary::build(sents(&["a a a b b c"]), 2).unwrap();
        assert_eq!(v.len(), 2); // c dropped
        let psum: f64 = (0..v.len() as u32).map(|i| v.probability(i)).sum();
        assert!((psum - 1.0).abs() < 1e-12);
        assert_eq!(v.total(), 5);
    }

    #[test]
    fn equal_counts_break_lexicographically() {
        let v = Vocabulary::build(sents(&["b a d c"]), 1).unwrap();
        let toks: Vec<&str> = v.iter().map(|(t, _)| t).collect();
        assert_eq!(toks, vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn id_and_token_are_mutually_inverse() {
        let v = Vocabulary::build(sents(&["x y z x y x"]), 1).unwrap();
        for i in 0..v.len() as u32 {
            assert_eq!(v.id(v.token(i).unwrap()), Some(i));
        }
    }

    #[test]
    fn file_roundtrip_preserves_everything() {
        let v = Vocabulary::build(sents(&["a a b c c c"]), 1).unwrap();
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        let v2 = Vocabulary::read_from(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(v.len(), v2.len());
        for i in 0..v.len() as u32 {
            assert_eq!(v.token(i), v2.token(i));
            assert_eq!(v.count(i), v2.count(i));
        }
    }

    #[test]
    fn unsorted_vocabulary_file_is_rejected() {
        let bad = "a\t1\nb\t5\n";
        assert!(Vocabulary::read_from(std::io::Cursor::new(bad)).is_err());
    }
}
