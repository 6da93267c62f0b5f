//! Synthetic co-occurrence tables with planted collocation structure.
//!
//! Rather than emitting token text and re-counting it, the generator
//! plants structure directly at the count level: each phrase target's
//! context distribution is assembled from integer token budgets, so the
//! count-partition identity (a word's contexts split exactly into its
//! phrase-adjacent and exclusive occurrences) holds by construction, and
//! the collocation strengths π are controlled.

use std::collections::BTreeMap;

use rand::Rng;

use super::{CrpState, MhpyParams, MhpyState, PYParams};
use crate::corpus::{ContextConfig, CoocTable, TargetCounts, TargetKey, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::SeedTree;

/// Full knob set of the synthetic generator. The spec-level entry point
/// [`synth_cooc`] fills everything beyond its six arguments from
/// [`Default`], which holds the desk-scale configuration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    /// Base lexicon process; its run defines the shared context
    /// vocabulary and the word distribution everything is mapped onto.
    pub base: PYParams,
    /// Word-level process of each target's topic run: governs how many
    /// distinct context types a target sees.
    pub context_process: PYParams,
    /// Within-word process of each topic run: governs how context mass
    /// concentrates on repeated types.
    pub within_word: PYParams,
    /// Number of targets (phrase units plus plain unigram targets).
    pub n_targets: usize,
    /// Context tokens backing each target's core distribution.
    pub tokens_per_target: u64,
    /// Fraction of targets built as phrase units (rounded to a count).
    pub phrase_fraction: f64,
    /// Steps of the base-lexicon run (also its total count mass).
    pub lexicon_steps: u64,
    /// Probability γ that a context token is copied from the unit's
    /// shared topic rather than minted by the constituent's own run;
    /// this is what makes a phrase and its words overlap.
    pub mixing: f64,
    /// Planted collocation strengths π are drawn uniformly from this
    /// range; must satisfy 0 ≤ lo ≤ hi < 1.
    pub pi_range: (f64, f64),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            base: PYParams {
                alpha: 0.8,
                theta: 10.0,
            },
            context_process: PYParams {
                alpha: 0.95,
                theta: 1.0,
            },
            within_word: PYParams {
                alpha: 0.8,
                theta: 0.5,
            },
            n_targets: 2000,
            tokens_per_target: 1500,
            phrase_fraction: 1.0,
            lexicon_steps: 28_000,
            mixing: 0.6,
            pi_range: (0.55, 0.92),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.context_process.validate()?;
        self.within_word.validate()?;
        if self.n_targets < 2 {
            return Err(Error::Config(format!(
                "need at least 2 targets, got {}",
                self.n_targets
            )));
        }
        if self.tokens_per_target == 0 {
            return Err(Error::Config("tokens_per_target must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.phrase_fraction) {
            return Err(Error::Config(format!(
                "phrase_fraction must lie in [0, 1], got {}",
                self.phrase_fraction
            )));
        }
        if self.lexicon_steps == 0 {
            return Err(Error::Config("lexicon_steps must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.mixing) {
            return Err(Error::Config(format!(
                "mixing weight must lie in [0, 1], got {}",
                self.mixing
            )));
        }
        let (lo, hi) = self.pi_range;
        if !(0.0 <= lo && lo <= hi && hi < 1.0) {
            return Err(Error::Config(format!(
                "pi range must satisfy 0 <= lo <= hi < 1, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// Synthesizes a co-occurrence table: a shared Zipfian context lexicon
/// from `base`, `n_targets` targets whose context distributions come
/// from two-level runs driven by `context_process`, and
/// `phrase_fraction` of the targets built as phrase units with planted
/// collocation strengths. Deterministic given `seed`; remaining knobs
/// take the desk-scale defaults of [`SynthConfig`].
pub fn synth_cooc(
    base: PYParams,
    context_process: PYParams,
    n_targets: usize,
    tokens_per_target: u64,
    phrase_fraction: f64,
    seed: u64,
) -> Result<CoocTable> {
    synth_cooc_with(SynthConfig {
        base,
        context_process,
        n_targets,
        tokens_per_target,
        phrase_fraction,
        seed,
        ..SynthConfig::default()
    })
}

/// [`synth_cooc`] with every knob explicit.
///
/// Construction, per phrase unit `k` (named `s{k}`/`t{k}`):
///
/// 1. draw planted strengths π₁, π₂ from `pi_range`;
/// 2. run a two-level topic process for `tokens_per_target` steps and
///    map its anonymous words i.i.d. onto the base lexicon — the unit's
///    shared topic;
/// 3. build the phrase context vector `vp` (budget `tokens_per_target`)
///    and exclusive context vectors `e1`, `e2` (budgets
///    `round(tokens · π/(1−π))`), each token either copied from the
///    topic (probability `mixing`) or minted by a fresh own run;
/// 4. emit rows so the partition identity holds exactly in integers:
///    the word rows are `vp + e1` and `vp + e2`, the phrase and
///    adjacent rows are `vp`, the exclusion rows are `e1`/`e2`.
///
/// Realized strengths are then `π = budget/(tokens + budget)` up to
/// rounding. Plain units are single mapped runs under names `u{j}`.
/// Every unit consumes its own indexed seed stream, so units are
/// independent and the whole table is reproducible bit for bit.
pub fn synth_cooc_with(cfg: SynthConfig) -> Result<CoocTable> {
    cfg.validate()?;
    let tree = SeedTree::new(cfg.seed);

    // Shared base lexicon: one restaurant run, ranked into a vocabulary.
    let mut rng = tree.stream("synth-base");
    let mut base = CrpState::new(cfg.base, 4096)?;
    for _ in 0..cfg.lexicon_steps {
        base.step(&mut rng);
    }
    let mut base_counts = base.counts().to_vec();
    base_counts.sort_unstable_by(|a, b| b.cmp(a));
    let vocab = Vocabulary::from_ranked(
        base_counts
            .iter()
            .enumerate()
            .map(|(rank, &c)| (format!("w{rank:06}"), c))
            .collect(),
    );
    // Cumulative mass for i.i.d. assignment of anonymous words to ids.
    let total = cfg.lexicon_steps as f64;
    let mut acc = 0u64;
    let base_cum: Vec<f64> = base_counts
        .iter()
        .map(|&c| {
            acc += c;
            acc as f64 / total
        })
        .collect();

    let topic_params = MhpyParams {
        within: cfg.within_word,
        word: cfg.context_process,
    };
    let tokens = cfg.tokens_per_target;
    let n_phrase = (cfg.n_targets as f64 * cfg.phrase_fraction).round() as usize;
    let mut entries: BTreeMap<TargetKey, TargetCounts> = BTreeMap::new();

    for k in 0..n_phrase {
        let mut rng = tree.indexed_stream("synth-unit", k as u64);
        let (lo, hi) = cfg.pi_range;
        let pi1 = lo + rng.random::<f64>() * (hi - lo);
        let pi2 = lo + rng.random::<f64>() * (hi - lo);

        let mut topic_run = MhpyState::new(topic_params, 64)?;
        for _ in 0..tokens {
            topic_run.step(&mut rng);
        }
        let topic = assign(topic_run.word_counts(), &base_cum, &mut rng);
        let topic_prefix = prefix_of(&topic);

        let vp = mix(&topic_prefix, tokens, &cfg, topic_params, &base_cum, &mut rng)?;
        let n1 = side_budget(tokens, pi1);
        let n2 = side_budget(tokens, pi2);
        let e1 = mix(&topic_prefix, n1, &cfg, topic_params, &base_cum, &mut rng)?;
        let e2 = mix(&topic_prefix, n2, &cfg, topic_params, &base_cum, &mut rng)?;
        let wt = merged(&vp, &e1);
        let ws = merged(&vp, &e2);

        let s = format!("s{k:05}");
        let t = format!("t{k:05}");
        entries.insert(TargetKey::Unigram(t.clone()), row(wt, tokens + n1));
        entries.insert(TargetKey::Unigram(s.clone()), row(ws, tokens + n2));
        entries.insert(TargetKey::unordered(&s, &t), row(vp.clone(), tokens));
        entries.insert(
            TargetKey::Exclusion {
                word: t.clone(),
                partner: s.clone(),
            },
            row(e1, n1),
        );
        entries.insert(
            TargetKey::Exclusion {
                word: s.clone(),
                partner: t.clone(),
            },
            row(e2, n2),
        );
        entries.insert(
            TargetKey::Adjacent {
                word: t.clone(),
                partner: s.clone(),
            },
            row(vp.clone(), tokens),
        );
        entries.insert(
            TargetKey::Adjacent {
                word: s,
                partner: t,
            },
            row(vp, tokens),
        );
    }

    for j in 0..cfg.n_targets - n_phrase {
        let mut rng = tree.indexed_stream("synth-plain", j as u64);
        let mut run = MhpyState::new(topic_params, 64)?;
        for _ in 0..tokens {
            run.step(&mut rng);
        }
        let counts = assign(run.word_counts(), &base_cum, &mut rng);
        entries.insert(TargetKey::Unigram(format!("u{j:05}")), row(counts, tokens));
    }

    Ok(CoocTable::new(vocab, ContextConfig::default(), entries))
}

/// Exclusive-occurrence budget that realizes strength π against `tokens`
/// phrase occurrences: π = n/(tokens + n) solved for n, rounded.
fn side_budget(tokens: u64, pi: f64) -> u64 {
    (tokens as f64 * pi / (1.0 - pi)).round() as u64
}

/// Maps anonymous word counts i.i.d. onto base-lexicon ids (one uniform
/// per anonymous word, in creation order; collisions merge).
fn assign(counts: &[u64], base_cum: &[f64], rng: &mut impl Rng) -> BTreeMap<u32, u64> {
    let mut out = BTreeMap::new();
    for &c in counts {
        let u = rng.random::<f64>();
        let id = base_cum.partition_point(|&p| p <= u).min(base_cum.len() - 1);
        *out.entry(id as u32).or_insert(0u64) += c;
    }
    out
}

/// Cumulative (id, mass) pairs of a count map, for sampling from it.
fn prefix_of(counts: &BTreeMap<u32, u64>) -> Vec<(u32, u64)> {
    let mut acc = 0u64;
    counts
        .iter()
        .map(|(&id, &c)| {
            acc += c;
            (id, acc)
        })
        .collect()
}

/// Draws `steps` context tokens: each copies a topic token with
/// probability `mixing`, otherwise it is minted by the constituent's own
/// two-level run (accumulated and mapped onto the base lexicon at the
/// end — token counts, not order, are what the table stores).
fn mix(
    topic_prefix: &[(u32, u64)],
    steps: u64,
    cfg: &SynthConfig,
    params: MhpyParams,
    base_cum: &[f64],
    rng: &mut impl Rng,
) -> Result<BTreeMap<u32, u64>> {
    let mut out = BTreeMap::new();
    let mut own_tokens = 0u64;
    let topic_total = topic_prefix.last().map_or(0, |&(_, c)| c);
    for _ in 0..steps {
        if topic_total > 0 && rng.random::<f64>() < cfg.mixing {
            let x = rng.random::<f64>() * topic_total as f64;
            let idx = topic_prefix
                .partition_point(|&(_, cum)| (cum as f64) <= x)
                .min(topic_prefix.len() - 1);
            *out.entry(topic_prefix[idx].0).or_insert(0) += 1;
        } else {
            own_tokens += 1;
        }
    }
    if own_tokens > 0 {
        let mut own = MhpyState::new(params, 16)?;
        for _ in 0..own_tokens {
            own.step(rng);
        }
        for (id, c) in assign(own.word_counts(), base_cum, rng) {
            *out.entry(id).or_insert(0) += c;
        }
    }
    Ok(out)
}

fn merged(a: &BTreeMap<u32, u64>, b: &BTreeMap<u32, u64>) -> BTreeMap<u32, u64> {
    let mut out = a.clone();
    for (&id, &c) in b {
        *out.entry(id).or_insert(0) += c;
    }
    out
}

fn row(counts: BTreeMap<u32, u64>, occurrences: u64) -> TargetCounts {
    let total = counts.values().sum();
    TargetCounts {
        occurrences,
        total,
        counts,
    }
}
