//! Context-window counting.
//!
//! Ordinary mode counts the closest `word_window` words to each side of a
//! word token (`phrase_window` for bigram targets, measured from the block
//! edges, constituents excluded), never crossing sentence boundaries.
//! Windows are *positional*: an out-of-vocabulary token contributes nothing
//! but still occupies its slot.
//!
//! Near-far mode fixes the window shape instead: per side, the nearer two
//! slots are labeled N and the following two F; a word target skips the one
//! slot where its phrase partner would sit (immediately right for `s*`,
//! immediately left for `*t`), while phrase targets label from the block
//! edges without skips. Labeled context ids are `2i` (N) and `2i+1` (F).
//!
//! Alongside every bigram target the counting pass emits its partition
//! targets — `t\s` / `t&s` in ordinary mode (both directions), `s*\t` /
//! `*t\s` in Near-far mode — which satisfy exact integer partition
//! identities against the word rows.

use std::collections::{BTreeMap, HashMap};
use std::thread;

use crate::corpus::table::{CoocTable, TargetCounts};
use crate::corpus::target::TargetKey;
use crate::corpus::vocab::Vocabulary;
use crate::error::{Error, Result};

/// Window configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ContextConfig {
    /// Tokens per side for word targets (ordinary mode).
    pub word_window: usize,
    /// Tokens per side for bigram targets (ordinary mode).
    pub phrase_window: usize,
    /// Near-far labeled counting instead of plain windows.
    pub nearfar: bool,
    /// Windows never cross sentence boundaries (the only supported mode;
    /// kept explicit so configurations are self-describing).
    pub sentence_bounded: bool,
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self {
            word_window: 5,
            phrase_window: 4,
            nearfar: false,
            sentence_bounded: true,
        }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<()> {
        if self.word_window < 1 || self.phrase_window < 1 {
            return Err(Error::Config("context windows must be >= 1".into()));
        }
        if !self.sentence_bounded {
            return Err(Error::Config(
                "windows crossing sentence boundaries are not supported".into(),
            ));
        }
        Ok(())
    }
}

/// Bigram targets admitted for counting, with their occurrence counts.
/// Pairs are vocabulary ids; unordered pairs are canonicalized so that the
/// first token is lexicographically smaller.
#[derive(Debug, Clone, Default)]
pub struct TargetSet {
    pub ordered: BTreeMap<(u32, u32), u64>,
    pub unordered: BTreeMap<(u32, u32), u64>,
}

impl TargetSet {
    /// Canonical unordered id pair (lexicographic on tokens, matching
    /// [`TargetKey::unordered`]).
    pub fn canon(vocab: &Vocabulary, a: u32, b: u32) -> (u32, u32) {
        if vocab.token(a) <= vocab.token(b) {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// Enumerates bigram targets: ordered bigrams are adjacent in-vocabulary
/// token pairs with count ≥ `min_count`; unordered bigrams pool both
/// orders, C({st}) = C(st) + C(ts) for s ≠ t.
pub fn extract_targets(
    sentences: &[Vec<String>],
    vocab: &Vocabulary,
    min_count: u64,
) -> Result<TargetSet> {
    if min_count < 1 {
        return Err(Error::Config("min_count must be >= 1".into()));
    }
    let mut ordered: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for sentence in sentences {
        let ids: Vec<Option<u32>> = sentence.iter().map(|t| vocab.id(t)).collect();
        for w in ids.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                *ordered.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    let mut unordered: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (&(a, b), &c) in &ordered {
        *unordered.entry(TargetSet::canon(vocab, a, b)).or_insert(0) += c;
    }
    ordered.retain(|_, c| *c >= min_count);
    unordered.retain(|_, c| *c >= min_count);
    Ok(TargetSet { ordered, unordered })
}

/// Accumulating counts for one target.
#[derive(Debug, Clone, Default)]
struct Row {
    occurrences: u64,
    counts: BTreeMap<u32, u64>,
}

impl Row {
    fn add(&mut self, ctx: &[u32]) {
        self.occurrences += 1;
        for &i in ctx {
            *self.counts.entry(i).or_insert(0) += 1;
        }
    }
}

/// In-vocabulary context ids within `window` positional slots each side of
/// the block `[lo, hi]`, sentence-bounded.
fn ordinary_context(ids: &[Option<u32>], lo: usize, hi: usize, window: usize, out: &mut Vec<u32>) {
    out.clear();
    let start = lo.saturating_sub(window);
    for j in (start..lo).rev() {
        if let Some(w) = ids[j] {
            out.push(w);
        }
    }
    for j in (hi + 1)..ids.len().min(hi + 1 + window) {
        if let Some(w) = ids[j] {
            out.push(w);
        }
    }
}

/// Near-far labeled ids for one side: starting next to `pos` in direction
/// `dir`, optionally skipping the adjacent slot, then two N slots and two F
/// slots. Labels are positional; OOV tokens consume slots silently.
fn nearfar_side(ids: &[Option<u32>], pos: usize, dir: isize, skip: bool, out: &mut Vec<u32>) {
    let mut j = pos as isize + dir;
    if skip {
        j += dir;
    }
    for slot in 0..4 {
        if j < 0 || j >= ids.len() as isize {
            break;
        }
        if let Some(w) = ids[j as usize] {
            let label = if slot < 2 { 0 } else { 1 };
            out.push(2 * w + label);
        }
        j += dir;
    }
}

/// Labeled context of a Near-far word target at `pos`.
fn nearfar_word_context(ids: &[Option<u32>], pos: usize, skip_right: bool, out: &mut Vec<u32>) {
    out.clear();
    nearfar_side(ids, pos, -1, !skip_right, out);
    nearfar_side(ids, pos, 1, skip_right, out);
}

/// Labeled context of a Near-far phrase occurrence at `(lo, lo+1)`.
fn nearfar_phrase_context(ids: &[Option<u32>], lo: usize, out: &mut Vec<u32>) {
    out.clear();
    nearfar_side(ids, lo, -1, false, out);
    nearfar_side(ids, lo + 1, 1, false, out);
}

/// Per-word partner lists derived from the target set: `exclusion[t]`
/// holds every s such that the pair (s,t) or (t,s) participates in a bigram
/// target (ordinary mode), or such that an ordered target requires a
/// Near-far exclusion row.
struct Partners {
    // ordinary: word -> partners for t\s / t&s rows
    adjacency: HashMap<u32, Vec<u32>>,
    // near-far: s -> t for s*\t rows, t -> s for *t\s rows
    left_excl: HashMap<u32, Vec<u32>>,
    right_excl: HashMap<u32, Vec<u32>>,
}

impl Partners {
    fn build(targets: &TargetSet, nearfar: bool) -> Self {
        let mut adjacency: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut left_excl: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut right_excl: HashMap<u32, Vec<u32>> = HashMap::new();
        let add = |m: &mut HashMap<u32, Vec<u32>>, k: u32, v: u32| {
            let vs = m.entry(k).or_default();
            if !vs.contains(&v) {
                vs.push(v);
            }
        };
        if nearfar {
            for &(s, t) in targets.ordered.keys() {
                add(&mut left_excl, s, t);
                add(&mut right_excl, t, s);
            }
        } else {
            for &(s, t) in targets.ordered.keys().chain(targets.unordered.keys()) {
                add(&mut adjacency, s, t);
                add(&mut adjacency, t, s);
            }
        }
        for m in [&mut adjacency, &mut left_excl, &mut right_excl] {
            for v in m.values_mut() {
                v.sort_unstable();
            }
        }
        Self {
            adjacency,
            left_excl,
            right_excl,
        }
    }
}

/// Skeleton of all rows a counting pass will produce, pre-initialized to
/// zero so that requested-but-unobserved targets (e.g. the reversed order
/// of a Near-far bigram) still receive a row.
fn skeleton(vocab: &Vocabulary, targets: &TargetSet, nearfar: bool) -> BTreeMap<TargetKey, Row> {
    let mut rows: BTreeMap<TargetKey, Row> = BTreeMap::new();
    let tok = |i: u32| vocab.token(i).expect("target id in vocab").to_string();
    if nearfar {
        for i in 0..vocab.len() as u32 {
            rows.insert(TargetKey::NearLeft(tok(i)), Row::default());
            rows.insert(TargetKey::NearRight(tok(i)), Row::default());
        }
        for &(s, t) in targets.ordered.keys() {
            rows.insert(TargetKey::Ordered(tok(s), tok(t)), Row::default());
            // The reversed order gets a row even if it never occurs, so
            // order-sensitivity reports can always compare both phrases.
            rows.insert(TargetKey::Ordered(tok(t), tok(s)), Row::default());
            rows.insert(
                TargetKey::NearLeftExcl {
                    word: tok(s),
                    partner: tok(t),
                },
                Row::default(),
            );
            rows.insert(
                TargetKey::NearRightExcl {
                    word: tok(t),
                    partner: tok(s),
                },
                Row::default(),
            );
        }
    } else {
        for i in 0..vocab.len() as u32 {
            rows.insert(TargetKey::Unigram(tok(i)), Row::default());
        }
        for &(s, t) in targets.ordered.keys() {
            rows.insert(TargetKey::Ordered(tok(s), tok(t)), Row::default());
        }
        for &(s, t) in targets.unordered.keys() {
            rows.insert(TargetKey::Unordered(tok(s), tok(t)), Row::default());
        }
        let mut partition_pair = |w: u32, p: u32| {
            rows.insert(
                TargetKey::Exclusion {
                    word: tok(w),
                    partner: tok(p),
                },
                Row::default(),
            );
            rows.insert(
                TargetKey::Adjacent {
                    word: tok(w),
                    partner: tok(p),
                },
                Row::default(),
            );
        };
        for &(s, t) in targets.ordered.keys().chain(targets.unordered.keys()) {
            partition_pair(t, s);
            partition_pair(s, t);
        }
    }
    rows
}

/// Counts one shard of sentences into `rows` (which must already contain
/// every key the shard can touch).
fn count_shard(
    sentences: &[Vec<String>],
    vocab: &Vocabulary,
    targets: &TargetSet,
    partners: &Partners,
    config: &ContextConfig,
    rows: &mut BTreeMap<TargetKey, Row>,
) {
    let mut ctx: Vec<u32> = Vec::with_capacity(16);
    let tok = |i: u32| vocab.token(i).expect("id in vocab").to_string();
    for sentence in sentences {
        let ids: Vec<Option<u32>> = sentence.iter().map(|t| vocab.id(t)).collect();
        for (p, id) in ids.iter().enumerate() {
            let Some(w) = *id else { continue };
            if config.nearfar {
                nearfar_word_context(&ids, p, true, &mut ctx);
                rows.get_mut(&TargetKey::NearLeft(tok(w))).unwrap().add(&ctx);
                if let Some(ts) = partners.left_excl.get(&w) {
                    let right = ids.get(p + 1).copied().flatten();
                    for &t in ts {
                        if right != Some(t) {
                            let key = TargetKey::NearLeftExcl {
                                word: tok(w),
                                partner: tok(t),
                            };
                            rows.get_mut(&key).unwrap().add(&ctx);
                        }
                    }
                }
                nearfar_word_context(&ids, p, false, &mut ctx);
                rows.get_mut(&TargetKey::NearRight(tok(w))).unwrap().add(&ctx);
                if let Some(ss) = partners.right_excl.get(&w) {
                    let left = if p > 0 { ids[p - 1] } else { None };
                    for &s in ss {
                        if left != Some(s) {
                            let key = TargetKey::NearRightExcl {
                                word: tok(w),
                                partner: tok(s),
                            };
                            rows.get_mut(&key).unwrap().add(&ctx);
                        }
                    }
                }
            } else {
                ordinary_context(&ids, p, p, config.word_window, &mut ctx);
                rows.get_mut(&TargetKey::Unigram(tok(w))).unwrap().add(&ctx);
                if let Some(ps) = partners.adjacency.get(&w) {
                    let left = if p > 0 { ids[p - 1] } else { None };
                    let right = ids.get(p + 1).copied().flatten();
                    for &s in ps {
                        let adjacent = left == Some(s) || right == Some(s);
                        let key = if adjacent {
                            TargetKey::Adjacent {
                                word: tok(w),
                                partner: tok(s),
                            }
                        } else {
                            TargetKey::Exclusion {
                                word: tok(w),
                                partner: tok(s),
                            }
                        };
                        rows.get_mut(&key).unwrap().add(&ctx);
                    }
                }
            }
        }
        // phrase occurrences
        for p in 0..ids.len().saturating_sub(1) {
            let (Some(a), Some(b)) = (ids[p], ids[p + 1]) else {
                continue;
            };
            if config.nearfar {
                if targets.ordered.contains_key(&(a, b)) {
                    nearfar_phrase_context(&ids, p, &mut ctx);
                    rows.get_mut(&TargetKey::Ordered(tok(a), tok(b)))
                        .unwrap()
                        .add(&ctx);
                } else if targets.ordered.contains_key(&(b, a)) {
                    // reversed occurrence of an admitted target
                    nearfar_phrase_context(&ids, p, &mut ctx);
                    rows.get_mut(&TargetKey::Ordered(tok(a), tok(b)))
                        .unwrap()
                        .add(&ctx);
                }
            } else {
                let in_ordered = targets.ordered.contains_key(&(a, b));
                let canon = TargetSet::canon(vocab, a, b);
                let in_unordered = targets.unordered.contains_key(&canon);
                if in_ordered || in_unordered {
                    ordinary_context(&ids, p, p + 1, config.phrase_window, &mut ctx);
                    if in_ordered {
                        rows.get_mut(&TargetKey::Ordered(tok(a), tok(b)))
                            .unwrap()
                            .add(&ctx);
                    }
                    if in_unordered {
                        let key = TargetKey::unordered(&tok(canon.0), &tok(canon.1));
                        rows.get_mut(&key).unwrap().add(&ctx);
                    }
                }
            }
        }
    }
}

/// Counts context co-occurrences for every target over the whole corpus.
///
/// `shards > 1` splits the corpus into contiguous sentence shards counted
/// on separate threads and merged with integer addition, which is
/// bit-identical to a single pass.
pub fn count_contexts(
    sentences: &[Vec<String>],
    vocab: &Vocabulary,
    targets: &TargetSet,
    config: &ContextConfig,
    shards: usize,
) -> Result<CoocTable> {
    config.validate()?;
    let shards = shards.max(1);
    let partners = Partners::build(targets, config.nearfar);
    let mut rows = skeleton(vocab, targets, config.nearfar);
    if shards == 1 || sentences.len() < 2 * shards {
        count_shard(sentences, vocab, targets, &partners, config, &mut rows);
    } else {
        let chunk = sentences.len().div_ceil(shards);
        let parts: Vec<BTreeMap<TargetKey, Row>> = thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .map(|shard| {
                    let skeleton_rows = rows.clone();
                    let partners = &partners;
                    scope.spawn(move || {
                        let mut local = skeleton_rows;
                        count_shard(shard, vocab, targets, partners, config, &mut local);
                        local
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for part in parts {
            for (key, row) in part {
                let dst = rows.get_mut(&key).unwrap();
                dst.occurrences += row.occurrences;
                for (i, c) in row.counts {
                    *dst.counts.entry(i).or_insert(0) += c;
                }
            }
        }
    }

    let entries = rows
        .into_iter()
        .map(|(key, row)| {
            let total: u64 = row.counts.values().sum();
            (
                key,
                TargetCounts {
                    occurrences: row.occurrences,
                    total,
                    counts: row.counts,
                },
            )
        })
        .collect();
    Ok(CoocTable::new(vocab.clone(), *config, entries))
}
