//! The target/context count table and its on-disk format.
//!
//! A table is a map from [`TargetKey`] to context counts over a fixed
//! vocabulary. The text format is line-oriented TSV, deterministic byte for
//! byte:
//!
//! ```text
//! n<TAB>nearfar<TAB>word_window<TAB>phrase_window     (header, integers)
//! key<TAB>total<TAB>id:count,id:count,...<TAB>occurrences
//! ```
//!
//! Rows are sorted by key, context ids ascending within a row. A target
//! with no observed contexts keeps its row with an empty id list, so
//! downstream consumers can distinguish "requested but unseen" from
//! "absent". In Near-far tables context ids are labeled (`2i` = near,
//! `2i+1` = far) and the context dimension is twice the vocabulary size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::corpus::count::ContextConfig;
use crate::corpus::target::TargetKey;
use crate::corpus::vocab::Vocabulary;
use crate::error::{Error, Result};

/// Context counts for one target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TargetCounts {
    /// How many times the target itself occurred (occurrence count, not
    /// context mass). Collocation strengths are ratios of this column.
    pub occurrences: u64,
    /// Total context count, `counts.values().sum()`.
    pub total: u64,
    /// Context id -> count.
    pub counts: BTreeMap<u32, u64>,
}

impl TargetCounts {
    /// Empirical probability of context id `i` under this target.
    /// Zero-total rows have the all-zero distribution.
    pub fn probability(&self, i: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        *self.counts.get(&i).unwrap_or(&0) as f64 / self.total as f64
    }
}

/// A complete co-occurrence table over one vocabulary.
#[derive(Debug, Clone)]
pub struct CoocTable {
    vocab: Vocabulary,
    config: ContextConfig,
    entries: BTreeMap<TargetKey, TargetCounts>,
}

impl CoocTable {
    pub fn new(
        vocab: Vocabulary,
        config: ContextConfig,
        entries: BTreeMap<TargetKey, TargetCounts>,
    ) -> Self {
        debug_assert!(entries
            .values()
            .all(|e| e.total == e.counts.values().sum::<u64>()));
        Self {
            vocab,
            config,
            entries,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &ContextConfig {
        &self.config
    }

    pub fn nearfar(&self) -> bool {
        self.config.nearfar
    }

    /// Dimension of the context space: vocabulary size, doubled when
    /// contexts carry near/far labels.
    pub fn context_dim(&self) -> usize {
        if self.config.nearfar {
            2 * self.vocab.len()
        } else {
            self.vocab.len()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &TargetKey) -> Option<&TargetCounts> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TargetKey, &TargetCounts)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &BTreeMap<TargetKey, TargetCounts> {
        &self.entries
    }

    /// Keys of a given predicate, in table order.
    pub fn keys_where<'a>(
        &'a self,
        mut pred: impl FnMut(&TargetKey) -> bool + 'a,
    ) -> impl Iterator<Item = &'a TargetKey> {
        self.entries.keys().filter(move |k| pred(k))
    }

    /// The two rows partitioning word `t` by adjacency to `s`
    /// (`t\s` and `t&s`). Ordinary tables only; Near-far tables partition
    /// through their phrase rows instead (`s* = s*\t + st`).
    pub fn partition_counts(&self, s: &str, t: &str) -> Result<(&TargetCounts, &TargetCounts)> {
        if self.config.nearfar {
            return Err(Error::Data(
                "adjacency partitions are not stored in near-far tables; \
                 use the exclusion and phrase rows"
                    .into(),
            ));
        }
        let excl = TargetKey::Exclusion {
            word: t.to_string(),
            partner: s.to_string(),
        };
        let adj = TargetKey::Adjacent {
            word: t.to_string(),
            partner: s.to_string(),
        };
        match (self.entries.get(&excl), self.entries.get(&adj)) {
            (Some(e), Some(a)) => Ok((e, a)),
            _ => Err(Error::Data(format!(
                "no partition rows for word `{t}` and partner `{s}`"
            ))),
        }
    }

    /// Serializes the table body (header + rows) to a string.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let nf = u8::from(self.config.nearfar);
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            self.vocab.len(),
            nf,
            self.config.word_window,
            self.config.phrase_window
        )
        .unwrap();
        for (key, row) in &self.entries {
            write!(out, "{key}\t{}\t", row.total).unwrap();
            let mut first = true;
            for (&i, &c) in &row.counts {
                if !first {
                    out.push(',');
                }
                write!(out, "{i}:{c}").unwrap();
                first = false;
            }
            writeln!(out, "\t{}", row.occurrences).unwrap();
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_tsv().as_bytes())
    }

    /// Parses a table serialized by [`CoocTable::to_tsv`]. The vocabulary
    /// must be the one the table was counted against; the header's `n`
    /// guards against mismatches.
    pub fn read_from<R: BufRead>(reader: R, vocab: Vocabulary) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((no, line)) => {
                    let line = line.map_err(|e| Error::Data(format!("read error: {e}")))?;
                    if line.starts_with('#') {
                        continue; // provenance comments
                    }
                    break (no, line);
                }
                None => return Err(Error::Data("empty co-occurrence table".into())),
            }
        };
        let fields: Vec<&str> = header.1.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Data(format!(
                "line {}: header needs 4 fields, got {}",
                header.0 + 1,
                fields.len()
            )));
        }
        let parse_u = |s: &str, what: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::Data(format!("header field {what}: bad integer `{s}`")))
        };
        let n = parse_u(fields[0], "n")? as usize;
        let nearfar = match fields[1] {
            "0" => false,
            "1" => true,
            other => return Err(Error::Data(format!("header nearfar flag `{other}`"))),
        };
        if n != vocab.len() {
            return Err(Error::Data(format!(
                "table counted over {n} words but vocabulary has {}",
                vocab.len()
            )));
        }
        let config = ContextConfig {
            word_window: parse_u(fields[2], "word_window")? as usize,
            phrase_window: parse_u(fields[3], "phrase_window")? as usize,
            nearfar,
            sentence_bounded: true,
        };
        let dim = if nearfar { 2 * n } else { n } as u32;
        let mut entries = BTreeMap::new();
        for (no, line) in lines {
            let line = line.map_err(|e| Error::Data(format!("read error: {e}")))?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = no + 1;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::Data(format!(
                    "line {lineno}: expected 4 fields, got {}",
                    fields.len()
                )));
            }
            let key = TargetKey::parse(fields[0])
                .map_err(|e| Error::Data(format!("line {lineno}: {e}")))?;
            let total: u64 = fields[1]
                .parse()
                .map_err(|_| Error::Data(format!("line {lineno}: bad total `{}`", fields[1])))?;
            let mut counts = BTreeMap::new();
            if !fields[2].is_empty() {
                for item in fields[2].split(',') {
                    let (id, cnt) = item.split_once(':').ok_or_else(|| {
                        Error::Data(format!("line {lineno}: bad count item `{item}`"))
                    })?;
                    let id: u32 = id.parse().map_err(|_| {
                        Error::Data(format!("line {lineno}: bad context id `{id}`"))
                    })?;
                    let cnt: u64 = cnt.parse().map_err(|_| {
                        Error::Data(format!("line {lineno}: bad count `{cnt}`"))
                    })?;
                    if id >= dim {
                        return Err(Error::Data(format!(
                            "line {lineno}: context id {id} out of range (dim {dim})"
                        )));
                    }
                    if counts.insert(id, cnt).is_some() {
                        return Err(Error::Data(format!(
                            "line {lineno}: duplicate context id {id}"
                        )));
                    }
                }
            }
            let sum: u64 = counts.values().sum();
            if sum != total {
                return Err(Error::Data(format!(
                    "line {lineno}: total {total} != sum of counts {sum}"
                )));
            }
            let occurrences: u64 = fields[3].parse().map_err(|_| {
                Error::Data(format!("line {lineno}: bad occurrence count `{}`", fields[3]))
            })?;
            let row = TargetCounts {
                occurrences,
                total,
                counts,
            };
            if entries.insert(key.clone(), row).is_some() {
                return Err(Error::Data(format!("line {lineno}: duplicate key `{key}`")));
            }
        }
        Ok(Self {
            vocab,
            config,
            entries,
        })
    }

    pub fn load(path: &Path, vocab: Vocabulary) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::MissingInput {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(std::io::BufReader::new(file), vocab)
    }
}
