//! Human-judgment evaluation harnesses.
//!
//! Two tasks measure whether a vector space composes the way people
//! judge language to: ranking phrase pairs by similarity
//! ([`phrase_similarity_eval`], scored per category with Spearman's ρ
//! against human ratings) and solving four-word analogies
//! ([`analogy_solve`] / [`analogy_eval`]). Phrase vectors are composed
//! either additively — the average of the word vectors — or by the
//! tensor-product baseline, which multiplies the per-slot word cosines
//! instead of building a phrase vector at all. Datasets arrive in a
//! canonical tab-separated layout; rows whose words are missing from
//! the embedding set are dropped and accounted for, never silently
//! ignored.

use std::collections::{BTreeMap, BTreeSet};

use crate::composition::cosine;
use crate::corpus::TargetKey;
use crate::error::{Error, Result};
use crate::stats::spearman::spearman_rho;

/// How a two-word phrase is scored against another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composer {
    /// Compare the averages ½(v¹+v²) by cosine.
    Additive,
    /// Compare slot-wise: cos(first, first)·cos(second, second). No
    /// phrase vector is formed, so this baseline cannot profit from
    /// additive structure.
    TensorProduct,
}

/// One human-rated pair of two-word phrases.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseSimRow {
    pub category: String,
    pub phrase1: (String, String),
    pub phrase2: (String, String),
    /// Human similarity rating on the 1–7 scale.
    pub score: f64,
}

/// Phrase-similarity dataset: rows grouped per category at evaluation
/// time, scores restricted to the 1–7 rating scale.
#[derive(Debug, Clone, Default)]
pub struct PhraseSimDataset {
    rows: Vec<PhraseSimRow>,
}

impl PhraseSimDataset {
    pub fn new(rows: Vec<PhraseSimRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.category.is_empty() {
                return Err(Error::Data(format!("row {i}: empty category")));
            }
            if !(1.0..=7.0).contains(&row.score) {
                return Err(Error::Data(format!(
                    "row {i}: score {} outside the 1–7 rating scale",
                    row.score
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Parses the canonical layout: one row per line,
    /// `category<TAB>w1<TAB>w2<TAB>w3<TAB>w4<TAB>score`. Blank lines
    /// and `#` comments are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [category, w1, w2, w3, w4, score] = fields[..] else {
                return Err(Error::Data(format!(
                    "line {}: expected 6 tab-separated fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            };
            let score: f64 = score.parse().map_err(|_| {
                Error::Data(format!("line {}: unreadable score {score:?}", lineno + 1))
            })?;
            rows.push(PhraseSimRow {
                category: category.to_string(),
                phrase1: (w1.to_string(), w2.to_string()),
                phrase2: (w3.to_string(), w4.to_string()),
                score,
            });
        }
        Self::new(rows)
    }

    pub fn rows(&self) -> &[PhraseSimRow] {
        &self.rows
    }

    /// Distinct categories in sorted order.
    pub fn categories(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.category.as_str()).collect();
        set.into_iter().collect()
    }
}

/// Four-word analogy dataset: each row asks for the word relating to
/// the third as the second relates to the first.
#[derive(Debug, Clone, Default)]
pub struct AnalogyDataset {
    rows: Vec<[String; 4]>,
}

impl AnalogyDataset {
    pub fn new(rows: Vec<[String; 4]>) -> Self {
        Self { rows }
    }

    /// Parses the canonical layout: `a<TAB>b<TAB>c<TAB>d` per line,
    /// blank lines and `#` comments skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [a, b, c, d] = fields[..] else {
                return Err(Error::Data(format!(
                    "line {}: expected 4 tab-separated fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            };
            rows.push([a.to_string(), b.to_string(), c.to_string(), d.to_string()]);
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[[String; 4]] {
        &self.rows
    }
}

/// Per-category ranking agreement between model similarities and human
/// ratings.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PhraseSimCategoryResult {
    pub category: String,
    /// Spearman's ρ between model similarity and human score.
    pub rho: f64,
    /// Two-sided significance of ρ ≠ 0.
    pub p_value: f64,
    /// Rows scored.
    pub n_used: usize,
    /// Rows dropped because a constituent word had no vector.
    pub n_dropped: usize,
}

/// Analogy accuracy with dropped-row accounting.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AnalogyScore {
    /// Fraction of usable rows solved exactly.
    pub accuracy: f64,
    pub n_used: usize,
    /// Rows dropped because a word had no vector.
    pub n_dropped: usize,
}

/// Keyed read-only view over an embedding list, validated once.
struct VectorIndex<'a> {
    dims: usize,
    map: BTreeMap<&'a TargetKey, &'a [f64]>,
}

impl<'a> VectorIndex<'a> {
    fn new(items: &'a [(TargetKey, Vec<f64>)]) -> Result<Self> {
        let dims = items.first().map_or(0, |(_, v)| v.len());
        if dims == 0 {
            return Err(Error::Data("evaluation without embeddings".into()));
        }
        let mut map = BTreeMap::new();
        for (key, v) in items {
            if v.len() != dims {
                return Err(Error::Data(format!(
                    "embedding for {key} has {} dimensions, expected {dims}",
                    v.len()
                )));
            }
            map.insert(key, v.as_slice());
        }
        Ok(Self { dims, map })
    }

    fn get(&self, key: &TargetKey) -> Option<&'a [f64]> {
        self.map.get(key).copied()
    }
}

/// The two word vectors a phrase (w₁, w₂) is composed from: the plain
/// unigram vectors, or — in near-far mode — the vector of w₁ seen with
/// its far-right context slot and of w₂ seen with its far-left one, the
/// pair that carries positional information about the phrase.
fn phrase_keys(phrase: &(String, String), nearfar: bool) -> (TargetKey, TargetKey) {
    if nearfar {
        (
            TargetKey::NearLeft(phrase.0.clone()),
            TargetKey::NearRight(phrase.1.clone()),
        )
    } else {
        (
            TargetKey::Unigram(phrase.0.clone()),
            TargetKey::Unigram(phrase.1.clone()),
        )
    }
}

/// Model similarity of one rated pair, or `None` when a word vector is
/// missing.
fn row_similarity(
    index: &VectorIndex,
    row: &PhraseSimRow,
    composer: Composer,
    nearfar: bool,
) -> Result<Option<f64>> {
    let (k1, k2) = phrase_keys(&row.phrase1, nearfar);
    let (k3, k4) = phrase_keys(&row.phrase2, nearfar);
    let (Some(v1), Some(v2), Some(v3), Some(v4)) = (
        index.get(&k1),
        index.get(&k2),
        index.get(&k3),
        index.get(&k4),
    ) else {
        return Ok(None);
    };
    let sim = match composer {
        Composer::Additive => {
            let average = |a: &[f64], b: &[f64]| -> Vec<f64> {
                a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
            };
            cosine(&average(v1, v2), &average(v3, v4))?
        }
        Composer::TensorProduct => cosine(v1, v3)? * cosine(v2, v4)?,
    };
    Ok(Some(sim))
}

/// Scores a phrase-similarity dataset: per category, Spearman's ρ
/// between the composed-vector similarities and the human ratings.
///
/// Rows with any missing word vector are dropped and counted. With
/// `nearfar` the constituents are looked up through their
/// position-labeled keys instead of the plain unigrams. Results come
/// back in category-sorted order. A dataset with no usable rows at
/// all, or a category left with fewer rows than a rank correlation
/// needs, is an evaluation error.
pub fn phrase_similarity_eval(
    items: &[(TargetKey, Vec<f64>)],
    dataset: &PhraseSimDataset,
    composer: Composer,
    nearfar: bool,
) -> Result<Vec<PhraseSimCategoryResult>> {
    let index = VectorIndex::new(items)?;
    // category → (model similarities, human scores, dropped count)
    let mut per_category: BTreeMap<&str, (Vec<f64>, Vec<f64>, usize)> = BTreeMap::new();
    for row in dataset.rows() {
        let slot = per_category.entry(row.category.as_str()).or_default();
        match row_similarity(&index, row, composer, nearfar)? {
            Some(sim) => {
                slot.0.push(sim);
                slot.1.push(row.score);
            }
            None => slot.2 += 1,
        }
    }
    if per_category.values().all(|(sims, ..)| sims.is_empty()) {
        return Err(Error::Computation(
            "phrase evaluation has no usable rows (all words missing from the embeddings)".into(),
        ));
    }
    per_category
        .into_iter()
        .map(|(category, (sims, scores, n_dropped))| {
            let correlation = spearman_rho(&sims, &scores).map_err(|e| {
                Error::Computation(format!("category {category:?} cannot be ranked: {e}"))
            })?;
            Ok(PhraseSimCategoryResult {
                category: category.to_string(),
                rho: correlation.rho,
                p_value: correlation.p_value,
                n_used: sims.len(),
                n_dropped,
            })
        })
        .collect()
}

/// Solves "a is to b as c is to ?" by the word whose vector lies
/// closest (by cosine) to `v^b − v^a + v^c`.
///
/// Candidates are the unigram entries of `items`; with
/// `exclude_inputs` (the conventional setting) the three query words
/// are removed from the candidate pool. Ties break toward the
/// lexicographically smaller word, zero-norm candidates are skipped,
/// and a zero query vector — which has no direction to match — is an
/// error.
pub fn analogy_solve(
    items: &[(TargetKey, Vec<f64>)],
    a: &str,
    b: &str,
    c: &str,
    exclude_inputs: bool,
) -> Result<String> {
    let index = VectorIndex::new(items)?;
    solve_with_index(&index, a, b, c, exclude_inputs)
}

fn solve_with_index(index: &VectorIndex, a: &str, b: &str, c: &str, exclude: bool) -> Result<String> {
    let word_vector = |w: &str| -> Result<&[f64]> {
        index
            .get(&TargetKey::Unigram(w.to_string()))
            .ok_or_else(|| Error::Data(format!("analogy word {w:?} has no vector")))
    };
    let (va, vb, vc) = (word_vector(a)?, word_vector(b)?, word_vector(c)?);
    let query: Vec<f64> = (0..index.dims).map(|i| vb[i] - va[i] + vc[i]).collect();
    if query.iter().all(|x| *x == 0.0) {
        return Err(Error::Computation(format!(
            "analogy query {b} − {a} + {c} is the zero vector"
        )));
    }

    let mut best: Option<(f64, &str)> = None;
    for (key, v) in &index.map {
        let TargetKey::Unigram(word) = key else {
            continue;
        };
        if exclude && (word == a || word == b || word == c) {
            continue;
        }
        let Ok(sim) = cosine(v, &query) else {
            continue;
        };
        let better = match best {
            None => true,
            Some((top, top_word)) => sim > top || (sim == top && word.as_str() < top_word),
        };
        if better {
            best = Some((sim, word));
        }
    }
    best.map(|(_, word)| word.to_string()).ok_or_else(|| {
        Error::Computation("analogy query has no candidates to compare against".into())
    })
}

/// Scores an analogy dataset: the fraction of rows whose fourth word
/// is recovered from the first three, with inputs excluded from the
/// candidates. Rows with any out-of-vocabulary word are dropped and
/// counted; a dataset with no usable rows is an evaluation error.
pub fn analogy_eval(
    items: &[(TargetKey, Vec<f64>)],
    dataset: &AnalogyDataset,
) -> Result<AnalogyScore> {
    let index = VectorIndex::new(items)?;
    let in_vocab = |w: &String| index.get(&TargetKey::Unigram(w.clone())).is_some();
    let mut n_used = 0usize;
    let mut n_dropped = 0usize;
    let mut correct = 0usize;
    for [a, b, c, d] in dataset.rows() {
        if ![a, b, c, d].into_iter().all(in_vocab) {
            n_dropped += 1;
            continue;
        }
        n_used += 1;
        if solve_with_index(&index, a, b, c, true)? == *d {
            correct += 1;
        }
    }
    if n_used == 0 {
        return Err(Error::Computation(
            "analogy evaluation has no usable rows (all words missing from the embeddings)".into(),
        ));
    }
    Ok(AnalogyScore {
        accuracy: correct as f64 / n_used as f64,
        n_used,
        n_dropped,
    })
}
