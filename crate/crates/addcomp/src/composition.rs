//! Additive composition and its bias against the observed phrase vector.
//!
//! For a bigram (s, t) with phrase vector w^{st} the additive composition
//! is ½(w^s + w^t), and the *bias* is the Euclidean distance
//!
//! ```text
//! B = ‖ w^{st} − ½(w^s + w^t) ‖.
//! ```
//!
//! B is controlled by how exclusively s and t collocate: with
//! π₁, π₂ the probabilities of the words occurring *away* from the phrase
//! (estimated by count ratios), the theoretical ceiling is
//!
//! ```text
//! bound(π₁, π₂) = √(½(π₁² + π₂² + π₁π₂)) ∈ [0, √(3/2)].
//! ```
//!
//! In ordinary mode the phrase is the unordered bigram `{s t}` and the
//! word vectors are plain unigram rows. In Near-far mode the phrase is
//! the ordered bigram `s t` and the word vectors are the order-aware rows
//! `s*` (s as left constituent) and `*t` (t as right constituent); the
//! report then also measures the distance to the reversed phrase `t s`,
//! which should be larger when the corpus prefers one order.
//!
//! Whether a space is ordinary or Near-far is a property of its
//! co-occurrence table, so these functions take no separate mode flag.

use crate::corpus::{CoocTable, TargetKey};
use crate::error::{Error, Result};
use crate::numeric::Accumulator;
use crate::vectors::VectorSpace;

/// One phrase's row in a bound-verification scatter.
#[derive(Debug, Clone)]
pub struct BiasRecord {
    pub phrase: TargetKey,
    /// Probability of t occurring without s (ordinary) / of s occurring
    /// without t to its right (Near-far), from count ratios.
    pub pi1: f64,
    pub pi2: f64,
    /// √(½(π₁² + π₂² + π₁π₂)).
    pub bound: f64,
    /// ‖w^{phrase} − ½(w^s + w^t)‖.
    pub bias: f64,
    /// Near-far only: distance from the same composed vector to the
    /// reversed phrase's vector.
    pub bias_reversed: Option<f64>,
}

/// Scatter plus headline numbers from [`bias_report`].
#[derive(Debug, Clone)]
pub struct BiasReport {
    pub records: Vec<BiasRecord>,
    /// Slack used when counting violations.
    pub epsilon: f64,
    /// Fraction of phrases with bias > bound + epsilon.
    pub violation_fraction: f64,
    pub mean_bias: f64,
    /// Near-far only: mean distance to the reversed phrase vectors.
    pub mean_bias_reversed: Option<f64>,
}

/// The composition keys for a bigram: phrase, left-word row, right-word
/// row — `({s t}, s, t)` in ordinary mode, `(s t, s*, *t)` in Near-far.
fn composition_keys(nearfar: bool, s: &str, t: &str) -> (TargetKey, TargetKey, TargetKey) {
    if nearfar {
        (
            TargetKey::Ordered(s.into(), t.into()),
            TargetKey::NearLeft(s.into()),
            TargetKey::NearRight(t.into()),
        )
    } else {
        (
            TargetKey::unordered(s, t),
            TargetKey::Unigram(s.into()),
            TargetKey::Unigram(t.into()),
        )
    }
}

/// ½(w^s + w^t); commutative in ordinary mode, order-sensitive in
/// Near-far mode because the two constituents use different rows.
pub fn compose_additive(space: &VectorSpace, s: &str, t: &str) -> Result<Vec<f64>> {
    let (_, key_s, key_t) = composition_keys(space.table().nearfar(), s, t);
    let ws = space.natural_vector(&key_s)?;
    let wt = space.natural_vector(&key_t)?;
    Ok(ws
        .into_iter()
        .zip(wt)
        .map(|(a, b)| 0.5 * (a + b))
        .collect())
}

/// Count-ratio estimates of the away-from-phrase probabilities.
///
/// Ordinary mode: π₁ = 1 − C({st})/C(t), π₂ = 1 − C({st})/C(s).
/// Near-far mode: π₁ = 1 − C(st)/C(s), π₂ = 1 − C(st)/C(t).
/// All counts are occurrence counts; a bigram that was never counted as a
/// target contributes C = 0 (the words simply never collocate). Values
/// are clamped to [0, 1].
pub fn collocation_pi(table: &CoocTable, s: &str, t: &str) -> Result<(f64, f64)> {
    let (phrase, key_s, key_t) = composition_keys(table.nearfar(), s, t);
    let occurrences = |key: &TargetKey| -> Result<f64> {
        let row = table
            .get(key)
            .ok_or_else(|| Error::Data(format!("no counts for target `{key}`")))?;
        if row.occurrences == 0 {
            return Err(Error::Data(format!(
                "target `{key}` has occurrence count 0; collocation ratios are undefined"
            )));
        }
        Ok(row.occurrences as f64)
    };
    let c_s = occurrences(&key_s)?;
    let c_t = occurrences(&key_t)?;
    let c_phrase = table.get(&phrase).map_or(0.0, |row| row.occurrences as f64);
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    if table.nearfar() {
        Ok((clamp(1.0 - c_phrase / c_s), clamp(1.0 - c_phrase / c_t)))
    } else {
        Ok((clamp(1.0 - c_phrase / c_t), clamp(1.0 - c_phrase / c_s)))
    }
}

/// √(½(π₁² + π₂² + π₁π₂)) — the ceiling on the composition bias implied
/// by the collocation probabilities. Symmetric and monotone in both
/// arguments; ranges over [0, √(3/2)].
pub fn bias_bound(pi1: f64, pi2: f64) -> Result<f64> {
    for pi in [pi1, pi2] {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::Computation(format!(
                "collocation probability {pi} outside [0, 1]"
            )));
        }
    }
    Ok((0.5 * (pi1 * pi1 + pi2 * pi2 + pi1 * pi2)).sqrt())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Accumulator::new();
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc.add(d * d);
    }
    acc.value().sqrt()
}

/// ‖w^{phrase} − ½(w^s + w^t)‖ for the bigram (s, t).
pub fn bias(space: &VectorSpace, s: &str, t: &str) -> Result<f64> {
    let (phrase, _, _) = composition_keys(space.table().nearfar(), s, t);
    let w_phrase = space.natural_vector(&phrase)?;
    let composed = compose_additive(space, s, t)?;
    Ok(distance(&w_phrase, &composed))
}

/// Splits a phrase key into its constituent words.
fn constituents(phrase: &TargetKey) -> Result<(&str, &str)> {
    match phrase {
        TargetKey::Unordered(s, t) | TargetKey::Ordered(s, t) => Ok((s, t)),
        other => Err(Error::Data(format!("`{other}` is not a bigram target"))),
    }
}

/// Per-phrase (bound, bias) scatter plus the violation fraction at slack
/// `epsilon` and the mean bias. In Near-far mode each record also carries
/// the distance to the reversed phrase, and the report its mean.
pub fn bias_report(
    space: &VectorSpace,
    phrases: &[TargetKey],
    epsilon: f64,
) -> Result<BiasReport> {
    if phrases.is_empty() {
        return Err(Error::Data("bias report over an empty phrase list".into()));
    }
    let nearfar = space.table().nearfar();
    let mut records = Vec::with_capacity(phrases.len());
    let mut violations = 0usize;
    let mut bias_sum = Accumulator::new();
    let mut reversed_sum = Accumulator::new();
    for phrase in phrases {
        let (s, t) = constituents(phrase)?;
        let (pi1, pi2) = collocation_pi(space.table(), s, t)?;
        let bound = bias_bound(pi1, pi2)?;
        let w_phrase = space.natural_vector(phrase)?;
        let composed = compose_additive(space, s, t)?;
        let bias = distance(&w_phrase, &composed);
        let bias_reversed = if nearfar {
            let reversed = TargetKey::Ordered(t.into(), s.into());
            let w_reversed = space.natural_vector(&reversed)?;
            let d = distance(&w_reversed, &composed);
            reversed_sum.add(d);
            Some(d)
        } else {
            None
        };
        if bias > bound + epsilon {
            violations += 1;
        }
        bias_sum.add(bias);
        records.push(BiasRecord {
            phrase: phrase.clone(),
            pi1,
            pi2,
            bound,
            bias,
            bias_reversed,
        });
    }
    let n = records.len() as f64;
    Ok(BiasReport {
        epsilon,
        violation_fraction: violations as f64 / n,
        mean_bias: bias_sum.value() / n,
        mean_bias_reversed: nearfar.then(|| reversed_sum.value() / n),
        records,
    })
}

/// Cosine similarity; errors if either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "cosine of vectors with different dimensions ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let mut dot = Accumulator::new();
    let mut na = Accumulator::new();
    let mut nb = Accumulator::new();
    for (x, y) in a.iter().zip(b) {
        dot.add(x * y);
        na.add(x * x);
        nb.add(y * y);
    }
    let denom = (na.value().sqrt()) * (nb.value().sqrt());
    if denom == 0.0 {
        return Err(Error::Computation("cosine with a zero-norm vector".into()));
    }
    Ok((dot.value() / denom).clamp(-1.0, 1.0))
}

/// Top-k items by cosine similarity to `query`, descending, ties broken
/// by key order. Zero-norm candidates are skipped (degenerate targets
/// from tiny tables carry no direction to compare against).
pub fn nearest_neighbors(
    items: &[(TargetKey, Vec<f64>)],
    query: &[f64],
    k: usize,
) -> Result<Vec<(TargetKey, f64)>> {
    if k == 0 {
        return Err(Error::Config("nearest-neighbor k must be ≥ 1".into()));
    }
    if query.iter().map(|x| x * x).sum::<f64>() == 0.0 {
        return Err(Error::Computation(
            "nearest-neighbor query has zero norm".into(),
        ));
    }
    let mut scored: Vec<(TargetKey, f64)> = items
        .iter()
        .filter_map(|(key, v)| cosine(v, query).ok().map(|c| (key.clone(), c)))
        .collect();
    scored.sort_by(|(ka, ca), (kb, cb)| {
        cb.partial_cmp(ca)
            .expect("cosines are finite")
            .then_with(|| ka.cmp(kb))
    });
    scored.truncate(k);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{count_contexts, extract_targets, ContextConfig, TargetCounts, Vocabulary};
    use crate::vectors::{build_space, AnchorMode};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    /// Same counts as the hand-computed oracle in `vectors`, but the two
    /// word rows are named after the first phrase's constituents so the
    /// bigram ("d", "e") has all three composition rows.
    fn fixture_table() -> CoocTable {
        let vocab = Vocabulary::from_ranked(vec![
            ("ca".into(), 30),
            ("cb".into(), 20),
            ("cc".into(), 10),
        ]);
        let rows: Vec<(TargetKey, [u64; 3])> = vec![
            (TargetKey::unordered("d", "e"), [6, 3, 1]),
            (TargetKey::unordered("e", "f"), [2, 2, 6]),
            (TargetKey::unordered("d", "f"), [1, 7, 2]),
            (TargetKey::Unigram("d".into()), [5, 5, 0]),
            (TargetKey::Unigram("e".into()), [1, 1, 8]),
        ];
        let entries = rows
            .into_iter()
            .map(|(key, cs)| {
                let counts: BTreeMap<u32, u64> = cs
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i as u32, c))
                    .collect();
                let total = counts.values().sum();
                (
                    key,
                    TargetCounts {
                        occurrences: 10,
                        total,
                        counts,
                    },
                )
            })
            .collect();
        CoocTable::new(vocab, ContextConfig::default(), entries)
    }

    fn fixture_phrases() -> Vec<TargetKey> {
        vec![
            TargetKey::unordered("d", "e"),
            TargetKey::unordered("e", "f"),
            TargetKey::unordered("d", "f"),
        ]
    }

    fn sentences(text: &str) -> Vec<Vec<String>> {
        text.split('.')
            .map(|s| s.split_whitespace().map(String::from).collect())
            .filter(|s: &Vec<String>| !s.is_empty())
            .collect()
    }

    fn counted(text: &str, nearfar: bool) -> CoocTable {
        let sents = sentences(text);
        let vocab = Vocabulary::build(&sents, 1).unwrap();
        let targets = extract_targets(&sents, &vocab, 1).unwrap();
        let config = ContextConfig {
            nearfar,
            ..ContextConfig::default()
        };
        count_contexts(&sents, &vocab, &targets, &config, 1).unwrap()
    }

    #[test]
    fn bound_closed_forms_and_domain() {
        assert_eq!(bias_bound(0.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            bias_bound(1.0, 1.0).unwrap(),
            1.224744871391589,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            bias_bound(1.0, 0.0).unwrap(),
            0.7071067811865476,
            max_relative = 1e-15
        );
        assert_eq!(bias_bound(-0.1, 0.5).unwrap_err().exit_code(), 6);
        assert_eq!(bias_bound(0.5, 1.5).unwrap_err().exit_code(), 6);
    }

    proptest! {
        #[test]
        fn bound_is_symmetric_monotone_and_in_range(
            p1 in 0.0f64..=1.0,
            p2 in 0.0f64..=1.0,
            bump in 0.0f64..=0.5
        ) {
            let b = bias_bound(p1, p2).unwrap();
            prop_assert!((0.0..=1.224744871391590).contains(&b));
            prop_assert_eq!(b, bias_bound(p2, p1).unwrap());
            let bumped = bias_bound((p1 + bump).min(1.0), p2).unwrap();
            prop_assert!(bumped >= b);
            if p1 == 0.0 && p2 == 0.0 {
                prop_assert_eq!(b, 0.0);
            } else {
                prop_assert!(b > 0.0);
            }
        }
    }

    #[test]
    fn collocation_ratios_from_hand_counted_corpus() {
        let table = counted("a b . a c . a b", false);
        // C({a b}) = 2, C(b) = 2 → π₁ = 0; C(a) = 3 → π₂ = 1/3
        let (pi1, pi2) = collocation_pi(&table, "a", "b").unwrap();
        assert_relative_eq!(pi1, 0.0, epsilon = 1e-15);
        assert_relative_eq!(pi2, 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn exclusive_collocation_gives_zero_pis() {
        let table = counted("s t . s t", false);
        let (pi1, pi2) = collocation_pi(&table, "s", "t").unwrap();
        assert_eq!((pi1, pi2), (0.0, 0.0));
    }

    #[test]
    fn never_adjacent_gives_unit_pis() {
        // q and z both occur but never next to each other, so the phrase
        // occurrence count is zero and both ratios collapse to 1.
        let table = counted("q a z . q b z", false);
        let (pi1, pi2) = collocation_pi(&table, "q", "z").unwrap();
        assert_eq!((pi1, pi2), (1.0, 1.0));
    }

    #[test]
    fn missing_word_count_is_an_error() {
        let table = counted("a b . a b", false);
        assert_eq!(collocation_pi(&table, "a", "zz").unwrap_err().exit_code(), 5);
    }

    #[test]
    fn composition_is_commutative_in_ordinary_mode() {
        let table = fixture_table();
        let space = build_space(&table, 0.0, &fixture_phrases(), AnchorMode::Computed).unwrap();
        let st = compose_additive(&space, "d", "e").unwrap();
        let ts = compose_additive(&space, "e", "d").unwrap();
        assert_eq!(st, ts);
    }

    #[test]
    fn bias_matches_frozen_vector_oracle() {
        // Distance recomputed with plain arithmetic from the hand-computed
        // vector table for these counts at λ=0.
        let w_phrase = [0.817711471478454, -0.204591306823613, -0.61312016465484];
        let w_d = [0.669311309164364, 0.370141099222409, -1.03945240838677];
        let w_e = [-0.497912428100253, -0.797082638042207, 1.29499506614246];
        let mut expect = 0.0;
        for i in 0..3 {
            let r: f64 = w_phrase[i] - 0.5 * (w_d[i] + w_e[i]);
            expect += r * r;
        }
        let expect = expect.sqrt();

        let table = fixture_table();
        let space = build_space(&table, 0.0, &fixture_phrases(), AnchorMode::Computed).unwrap();
        let got = bias(&space, "d", "e").unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn phrase_equal_to_average_has_zero_bias() {
        // λ=1 keeps vectors affine in the probabilities and every anchor
        // equal, so a phrase whose context distribution is exactly the
        // average of its words' composes with zero residual. All totals
        // are powers of two to keep the probabilities exact.
        let vocab = Vocabulary::from_ranked(vec![
            ("ca".into(), 30),
            ("cb".into(), 20),
            ("cc".into(), 10),
        ]);
        let rows: Vec<(TargetKey, [u64; 3])> = vec![
            (TargetKey::unordered("s", "t"), [2, 1, 1]),
            (TargetKey::unordered("x", "y"), [1, 2, 1]),
            (TargetKey::Unigram("s".into()), [1, 1, 2]),
            (TargetKey::Unigram("t".into()), [3, 1, 0]),
        ];
        let entries = rows
            .into_iter()
            .map(|(key, cs)| {
                let counts: BTreeMap<u32, u64> = cs
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i as u32, c))
                    .collect();
                (
                    key,
                    TargetCounts {
                        occurrences: 4,
                        total: 4,
                        counts,
                    },
                )
            })
            .collect();
        let table = CoocTable::new(vocab, ContextConfig::default(), entries);
        let phrases = vec![TargetKey::unordered("s", "t"), TargetKey::unordered("x", "y")];
        let space = build_space(&table, 1.0, &phrases, AnchorMode::Computed).unwrap();
        assert!(bias(&space, "s", "t").unwrap() < 1e-12);
    }

    #[test]
    fn bias_is_invariant_under_b_shift() {
        let table = fixture_table();
        let space = build_space(&table, 0.0, &fixture_phrases(), AnchorMode::Computed).unwrap();
        let before = bias(&space, "d", "e").unwrap();
        for delta in [-2.5, -0.1, 0.37, 10.0] {
            let shifted = space.offset_b(delta);
            let after = bias(&shifted, "d", "e").unwrap();
            assert_relative_eq!(after, before, epsilon = 1e-9);
        }
    }

    #[test]
    fn bias_respects_triangle_inequality() {
        let table = fixture_table();
        for lambda in [0.0, 0.5, 1.0] {
            let space =
                build_space(&table, lambda, &fixture_phrases(), AnchorMode::Computed).unwrap();
            let norm = |key: &TargetKey| -> f64 {
                space
                    .natural_vector(key)
                    .unwrap()
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
            };
            let b = bias(&space, "d", "e").unwrap();
            let ceiling = norm(&TargetKey::unordered("d", "e"))
                + 0.5 * (norm(&TargetKey::Unigram("d".into())) + norm(&TargetKey::Unigram("e".into())));
            assert!(b <= ceiling + 1e-12, "B={b} > {ceiling} at λ={lambda}");
        }
    }

    #[test]
    fn report_on_counted_corpus_is_consistent() {
        // sentences long enough that every phrase keeps context tokens
        let table = counted(
            "x a b y . x a c y . x a b y . y b c x . x c a y . y a b x",
            false,
        );
        let phrases: Vec<TargetKey> = table
            .keys_where(|k| matches!(k, TargetKey::Unordered(_, _)))
            .cloned()
            .collect();
        let space = build_space(&table, 0.0, &phrases, AnchorMode::Computed).unwrap();
        let report = bias_report(&space, &phrases, 0.0).unwrap();
        assert_eq!(report.records.len(), phrases.len());
        for rec in &report.records {
            assert!(rec.bias >= 0.0);
            assert!((0.0..=1.0).contains(&rec.pi1) && (0.0..=1.0).contains(&rec.pi2));
            assert_relative_eq!(
                rec.bound,
                bias_bound(rec.pi1, rec.pi2).unwrap(),
                epsilon = 1e-15
            );
            assert!(rec.bias_reversed.is_none());
        }
        let mean = report.records.iter().map(|r| r.bias).sum::<f64>()
            / report.records.len() as f64;
        assert_relative_eq!(report.mean_bias, mean, max_relative = 1e-12);
        // a huge slack admits everything
        let lax = bias_report(&space, &phrases, 10.0).unwrap();
        assert_eq!(lax.violation_fraction, 0.0);
        assert!(bias_report(&space, &[], 0.0).is_err());
    }

    #[test]
    fn nearfar_report_carries_reversed_distances() {
        let table = counted(
            "a b c d s t w x y z . a b c d s t w x y z . p q s t u v",
            true,
        );
        let all_phrases = crate::vectors::default_phrase_set(&table);
        let space = build_space(&table, 0.0, &all_phrases, AnchorMode::Computed).unwrap();
        let st_only = vec![TargetKey::Ordered("s".into(), "t".into())];
        let report = bias_report(&space, &st_only, 0.0).unwrap();
        let rec = &report.records[0];
        let reversed = rec.bias_reversed.expect("near-far records carry y'");
        assert!(reversed.is_finite() && rec.bias.is_finite());
        assert!(report.mean_bias_reversed.is_some());
        // order sensitivity: the two compositions use different rows
        let st = compose_additive(&space, "s", "t").unwrap();
        let ts = compose_additive(&space, "t", "s").unwrap();
        assert_ne!(st, ts);
    }

    #[test]
    fn neighbors_match_brute_force_and_break_ties_by_key() {
        let items: Vec<(TargetKey, Vec<f64>)> = vec![
            (TargetKey::Unigram("a".into()), vec![1.0, 0.0, 0.0]),
            (TargetKey::Unigram("b".into()), vec![0.9, 0.1, 0.0]),
            (TargetKey::Unigram("c".into()), vec![0.0, 1.0, 0.0]),
            (TargetKey::Unigram("d".into()), vec![0.0, 0.0, 1.0]),
            (TargetKey::Unigram("e".into()), vec![-1.0, 0.0, 0.0]),
        ];
        let query = vec![1.0, 0.05, 0.0];
        let got = nearest_neighbors(&items, &query, 3).unwrap();
        // brute-force oracle
        let mut expect: Vec<(TargetKey, f64)> = items
            .iter()
            .map(|(k, v)| (k.clone(), cosine(v, &query).unwrap()))
            .collect();
        expect.sort_by(|(ka, ca), (kb, cb)| cb.partial_cmp(ca).unwrap().then_with(|| ka.cmp(kb)));
        expect.truncate(3);
        assert_eq!(got.len(), 3);
        for ((gk, gc), (ek, ec)) in got.iter().zip(&expect) {
            assert_eq!(gk, ek);
            assert_relative_eq!(*gc, *ec, epsilon = 1e-15);
        }
        // identical vector ranks first with cosine 1
        let first = nearest_neighbors(&items, &[0.9, 0.1, 0.0], 1).unwrap();
        assert_eq!(first[0].0, TargetKey::Unigram("b".into()));
        assert_relative_eq!(first[0].1, 1.0, epsilon = 1e-12);
        // zero query rejected; equal cosines resolved lexicographically
        let orth = vec![
            (TargetKey::Unigram("m".into()), vec![1.0, 0.0]),
            (TargetKey::Unigram("k".into()), vec![0.0, 1.0]),
        ];
        assert!(nearest_neighbors(&orth, &[0.0, 0.0], 2).is_err());
        let tied = nearest_neighbors(&orth, &[1.0, 1.0], 2).unwrap();
        assert_eq!(tied[0].0, TargetKey::Unigram("k".into()));
        // zero-norm candidates are skipped
        let with_zero = vec![
            (TargetKey::Unigram("z".into()), vec![0.0, 0.0]),
            (TargetKey::Unigram("a".into()), vec![1.0, 0.0]),
        ];
        let got = nearest_neighbors(&with_zero, &[1.0, 0.0], 5).unwrap();
        assert_eq!(got.len(), 1);
        assert!(nearest_neighbors(&with_zero, &[1.0, 0.0], 0).is_err());
    }
}
