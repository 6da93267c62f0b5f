//! Rank-correlation surveys over a co-occurrence table.
//!
//! The vector-space theory treats the count columns of different context
//! words (and the context distributions of different targets) as roughly
//! independent. These reports sample many pairs of series from a table,
//! compute Spearman's ρ for each, and histogram the results; on tables
//! synthesized under independence the mass concentrates near zero.

use rand::Rng;

use crate::corpus::{CoocTable, TargetCounts, TargetKey};
use crate::error::{Error, Result};
use crate::rng::SeedTree;
use crate::stats::spearman::spearman_rho;

/// Which pairs of series to correlate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Two context columns, as series across word targets.
    Words,
    /// Two context columns, as series across phrase targets.
    Phrases,
    /// The two exclusion distributions of each bigram (`s\t` vs `t\s`),
    /// as series across bigrams at one sampled context.
    Exclusions,
    /// A bigram's exclusion distribution vs its phrase distribution
    /// (`s\t` vs `{s t}`), as series across bigrams at one sampled context.
    ExclusionVsPhrase,
}

impl std::str::FromStr for PairKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "words" => Ok(Self::Words),
            "phrases" => Ok(Self::Phrases),
            "exclusions" => Ok(Self::Exclusions),
            "exclusion-vs-phrase" => Ok(Self::ExclusionVsPhrase),
            other => Err(Error::Config(format!(
                "unknown pair kind `{other}` (expected words, phrases, \
                 exclusions, or exclusion-vs-phrase)"
            ))),
        }
    }
}

/// Width of one histogram bin.
pub const BIN_WIDTH: f64 = 0.05;
const N_BINS: usize = 40;

/// Sampled rank-correlation distribution.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub kind: PairKind,
    /// One ρ per successfully correlated pair.
    pub rhos: Vec<f64>,
    /// (bin_low, bin_high, count) over [−1, 1] in steps of 0.05.
    pub histogram: Vec<(f64, f64, u64)>,
    /// Fraction of pairs with |ρ| ≤ 0.1.
    pub frac_within_tenth: f64,
}

fn histogram(rhos: &[f64]) -> Vec<(f64, f64, u64)> {
    let mut bins = vec![0u64; N_BINS];
    for &rho in rhos {
        let idx = (((rho + 1.0) / BIN_WIDTH) as usize).min(N_BINS - 1);
        bins[idx] += 1;
    }
    bins.into_iter()
        .enumerate()
        .map(|(k, c)| (-1.0 + k as f64 * BIN_WIDTH, -1.0 + (k + 1) as f64 * BIN_WIDTH, c))
        .collect()
}

/// Context ids that are populated in at least two of the given rows
/// (a column observed once can only produce constant series).
fn active_ids(rows: &[&TargetCounts]) -> Vec<u32> {
    let mut seen: std::collections::BTreeMap<u32, u32> = std::collections::BTreeMap::new();
    for row in rows {
        for &i in row.counts.keys() {
            *seen.entry(i).or_insert(0) += 1;
        }
    }
    seen.into_iter().filter(|&(_, c)| c >= 2).map(|(i, _)| i).collect()
}

fn is_word_key(key: &TargetKey) -> bool {
    matches!(
        key,
        TargetKey::Unigram(_) | TargetKey::NearLeft(_) | TargetKey::NearRight(_)
    )
}

fn is_phrase_key(key: &TargetKey) -> bool {
    matches!(key, TargetKey::Unordered(_, _) | TargetKey::Ordered(_, _))
}

/// For every bigram target with both partition rows present and
/// populated, the (exclusion, exclusion) or (exclusion, phrase) row pair.
fn bigram_units<'a>(table: &'a CoocTable, kind: PairKind) -> Vec<(&'a TargetCounts, &'a TargetCounts)> {
    let mut units = Vec::new();
    for (key, phrase_row) in table.iter() {
        let (s, t) = match key {
            TargetKey::Unordered(s, t) if !table.nearfar() => (s, t),
            TargetKey::Ordered(s, t) if table.nearfar() => (s, t),
            _ => continue,
        };
        let first_excl = if table.nearfar() {
            table.get(&TargetKey::NearLeftExcl {
                word: s.clone(),
                partner: t.clone(),
            })
        } else {
            table.get(&TargetKey::Exclusion {
                word: s.clone(),
                partner: t.clone(),
            })
        };
        let second = match kind {
            PairKind::Exclusions => {
                if table.nearfar() {
                    table.get(&TargetKey::NearRightExcl {
                        word: t.clone(),
                        partner: s.clone(),
                    })
                } else {
                    table.get(&TargetKey::Exclusion {
                        word: t.clone(),
                        partner: s.clone(),
                    })
                }
            }
            PairKind::ExclusionVsPhrase => Some(phrase_row),
            _ => unreachable!("bigram_units is only called for bigram kinds"),
        };
        if let (Some(a), Some(b)) = (first_excl, second) {
            if a.total > 0 && b.total > 0 {
                units.push((a, b));
            }
        }
    }
    units
}

/// Samples `n_pairs` rank correlations of the given kind. Pairs whose
/// series are constant (typically all-zero columns) are skipped and
/// resampled, up to a bounded number of attempts.
pub fn independence_report(
    table: &CoocTable,
    kind: PairKind,
    n_pairs: usize,
    seed: u64,
) -> Result<IndependenceReport> {
    if n_pairs == 0 {
        return Err(Error::Config("n_pairs must be positive".into()));
    }
    let mut rng = SeedTree::new(seed).stream("independence-pairs");
    let mut rhos = Vec::with_capacity(n_pairs);
    let max_attempts = n_pairs.saturating_mul(200);

    match kind {
        PairKind::Words | PairKind::Phrases => {
            let pred = if kind == PairKind::Words {
                is_word_key
            } else {
                is_phrase_key
            };
            let rows: Vec<&TargetCounts> = table
                .iter()
                .filter(|(k, v)| pred(k) && v.total > 0)
                .map(|(_, v)| v)
                .collect();
            if rows.len() < 3 {
                return Err(Error::Data(format!(
                    "need at least 3 populated targets for this report, got {}",
                    rows.len()
                )));
            }
            let ids = active_ids(&rows);
            if ids.len() < 2 {
                return Err(Error::Data(
                    "need at least 2 context columns observed in 2+ targets".into(),
                ));
            }
            let mut attempts = 0;
            while rhos.len() < n_pairs && attempts < max_attempts {
                attempts += 1;
                let i = ids[rng.random_range(0..ids.len())];
                let j = ids[rng.random_range(0..ids.len())];
                if i == j {
                    continue;
                }
                let xs: Vec<f64> = rows.iter().map(|r| r.probability(i)).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r.probability(j)).collect();
                if let Ok(r) = spearman_rho(&xs, &ys) {
                    rhos.push(r.rho);
                }
            }
        }
        PairKind::Exclusions | PairKind::ExclusionVsPhrase => {
            let units = bigram_units(table, kind);
            if units.len() < 3 {
                return Err(Error::Data(format!(
                    "need at least 3 bigrams with populated partition rows, got {}",
                    units.len()
                )));
            }
            let first: Vec<&TargetCounts> = units.iter().map(|u| u.0).collect();
            let second: Vec<&TargetCounts> = units.iter().map(|u| u.1).collect();
            let mut ids = active_ids(&first);
            let more = active_ids(&second);
            ids.extend(more);
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() {
                return Err(Error::Data("no populated context columns".into()));
            }
            let mut attempts = 0;
            while rhos.len() < n_pairs && attempts < max_attempts {
                attempts += 1;
                let i = ids[rng.random_range(0..ids.len())];
                let xs: Vec<f64> = units.iter().map(|(a, _)| a.probability(i)).collect();
                let ys: Vec<f64> = units.iter().map(|(_, b)| b.probability(i)).collect();
                if let Ok(r) = spearman_rho(&xs, &ys) {
                    rhos.push(r.rho);
                }
            }
        }
    }

    if rhos.is_empty() {
        return Err(Error::Computation(
            "no correlatable pairs found (all sampled series were constant)".into(),
        ));
    }
    let within = rhos.iter().filter(|r| r.abs() <= 0.1 + 1e-12).count();
    Ok(IndependenceReport {
        kind,
        frac_within_tenth: within as f64 / rhos.len() as f64,
        histogram: histogram(&rhos),
        rhos,
    })
}
