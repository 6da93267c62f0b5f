//! Minimal token emitter: sentences with planted order-asymmetric
//! bigrams, for exercising the Near-far counting pipeline end to end.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SeedTree;

/// Number of background vocabulary types.
const BACKGROUND_TYPES: usize = 2000;
/// Topic words per sentence side.
const TOPIC_WORDS: usize = 6;
/// Probability that a side token comes from the side's topic rather than
/// the background.
const TOPIC_MASS: f64 = 0.7;
/// Sentence counts: the dominant order appears 100–150 times, the
/// reversed order 30–60 times, so both orders are observed but one wins.
const FORWARD_RANGE: (u64, u64) = (100, 150);
const REVERSED_RANGE: (u64, u64) = (30, 60);

/// A generated corpus: whitespace-tokenized sentences plus the planted
/// pair names, in pair order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedCorpus {
    /// Ten-token sentences, grouped by pair (dominant order first).
    pub sentences: Vec<String>,
    /// `(s, t)` names per pair; `s t` is each pair's dominant order.
    pub pairs: Vec<(String, String)>,
}

/// Emits a corpus of `n_pairs` planted bigrams `s{k} t{k}` surrounded by
/// four topical tokens on each side.
///
/// Each pair draws distinct side topics for its dominant and reversed
/// orders, so the contexts of `s t` and `t s` genuinely differ — a
/// counting scheme that distinguishes near and far neighbors can tell
/// the orders apart, while an order-blind one cannot. Deterministic
/// given `seed`; each pair consumes its own indexed stream.
pub fn planted_nearfar_corpus(n_pairs: usize, seed: u64) -> Result<PlantedCorpus> {
    if n_pairs == 0 {
        return Err(Error::Config("need at least one planted pair".into()));
    }
    // Background lexicon with a gently decaying rank profile.
    let mut acc = 0.0;
    let mut background_cum: Vec<f64> = (0..BACKGROUND_TYPES)
        .map(|i| {
            acc += 1.0 / (i + 10) as f64;
            acc
        })
        .collect();
    let total = acc;
    for c in &mut background_cum {
        *c /= total;
    }
    let background: Vec<String> = (0..BACKGROUND_TYPES).map(|i| format!("v{i:04}")).collect();

    let tree = SeedTree::new(seed);
    let mut sentences = Vec::new();
    let mut pairs = Vec::with_capacity(n_pairs);
    for k in 0..n_pairs {
        let mut rng = tree.indexed_stream("planted-pair", k as u64);
        let s = format!("s{k:03}");
        let t = format!("t{k:03}");
        let n_forward = rng.random_range(FORWARD_RANGE.0..=FORWARD_RANGE.1);
        let n_reversed = rng.random_range(REVERSED_RANGE.0..=REVERSED_RANGE.1);
        let mut topic =
            || -> Vec<usize> { (0..TOPIC_WORDS).map(|_| pick(&background_cum, &mut rng)).collect() };
        let forward_topics = (topic(), topic());
        let reversed_topics = (topic(), topic());

        for (count, topics, first, second) in [
            (n_forward, &forward_topics, &s, &t),
            (n_reversed, &reversed_topics, &t, &s),
        ] {
            for _ in 0..count {
                let mut words: Vec<&str> = Vec::with_capacity(10);
                for _ in 0..4 {
                    words.push(&background[side_token(&topics.0, &background_cum, &mut rng)]);
                }
                words.push(first);
                words.push(second);
                for _ in 0..4 {
                    words.push(&background[side_token(&topics.1, &background_cum, &mut rng)]);
                }
                sentences.push(words.join(" "));
            }
        }
        pairs.push((s, t));
    }
    Ok(PlantedCorpus { sentences, pairs })
}

/// Background id at cumulative coordinate `u`.
fn pick(cum: &[f64], rng: &mut impl Rng) -> usize {
    let u = rng.random::<f64>();
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// One side token: topical with probability [`TOPIC_MASS`], background
/// otherwise.
fn side_token(topic: &[usize], cum: &[f64], rng: &mut impl Rng) -> usize {
    if rng.random::<f64>() < TOPIC_MASS {
        topic[rng.random_range(0..topic.len())]
    } else {
        pick(cum, rng)
    }
}
