//! Natural vectors: the entry transform F, the three normalization passes,
//! and norm statistics.
//!
//! Every target Υ of a co-occurrence table has an empirical context
//! distribution p^Υ. Its natural vector is
//!
//! ```text
//! w^Υ_i = c · ( F(p^Υ_i + h) − a^Υ − b_i ),      h = 1/dim
//! ```
//!
//! where F is the power family F(x) = x^λ/λ (λ ≠ 0) or ln x (λ = 0), and
//! the constants come from three passes over a designated phrase set Λ:
//!
//! 1. `a^Υ` — the mean of F(p^Υ_i + h) over coordinates, per target, so
//!    every vector's entries average to zero;
//! 2. `b_i` — the mean of F(p^{phrase}_i + h) − a^{phrase} over Λ, so the
//!    phrase vectors are centered as a cloud;
//! 3. `c` — one over the mean unscaled phrase norm, so phrase norms
//!    average to exactly one.
//!
//! The smoothing +h keeps F defined at empty coordinates; a target with no
//! context counts at all (a requested-but-unseen phrase) degenerates to
//! w = −c·b, which is the documented convention for "never occurs".
//!
//! All per-coordinate accumulations are compensated, and vectors are
//! materialized densely one target at a time, never as a full matrix.

use std::collections::BTreeMap;

use crate::corpus::{CoocTable, TargetCounts, TargetKey};
use crate::error::{Error, Result};
use crate::numeric::Accumulator;

/// How per-target offsets `a^Υ` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchorMode {
    /// Per-target mean of F(p+h) (the defining construction; default).
    #[default]
    Computed,
    /// All anchors forced to zero — the large-n simplification, kept as a
    /// diagnostic mode to show how the finite-n values shift without it.
    Zero,
}

/// Entry transform F(x) = x^λ/λ for λ ≠ 0, ln x for λ = 0.
///
/// Strictly increasing on (0, ∞) for every λ; defined only for x > 0.
pub fn f_transform(x: f64, lambda: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Computation(format!(
            "entry transform is undefined at x = {x} (requires x > 0)"
        )));
    }
    Ok(f_unchecked(x, lambda))
}

/// F for arguments known positive (all smoothed probabilities are).
fn f_unchecked(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        x.ln()
    } else if lambda == 1.0 {
        x
    } else if lambda == 0.5 {
        2.0 * x.sqrt()
    } else {
        x.powf(lambda) / lambda
    }
}

/// Mean and spread of vector norms over a set of targets.
#[derive(Debug, Clone)]
pub struct NormStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
    /// (bin_low, bin_high, count), bins of width 0.05 from zero.
    pub histogram: Vec<(f64, f64, u64)>,
}

/// A built vector space over one co-occurrence table.
///
/// Holds only the normalization constants (anchors, b, c); vectors are
/// computed on demand from the sparse counts.
#[derive(Debug, Clone)]
pub struct VectorSpace<'a> {
    table: &'a CoocTable,
    lambda: f64,
    anchor_mode: AnchorMode,
    dim: usize,
    h: f64,
    f_h: f64,
    anchors: BTreeMap<TargetKey, f64>,
    b: Vec<f64>,
    c: f64,
    phrase_set: Vec<TargetKey>,
}

/// The phrase set a table normalizes over by default: its observed
/// unordered bigram targets, or in Near-far mode its observed ordered
/// bigram targets (both orders when both occur; the zero-count rows kept
/// for unseen reversals take no part in normalization).
pub fn default_phrase_set(table: &CoocTable) -> Vec<TargetKey> {
    table
        .iter()
        .filter(|(key, counts)| {
            counts.occurrences > 0
                && if table.nearfar() {
                    matches!(key, TargetKey::Ordered(_, _))
                } else {
                    matches!(key, TargetKey::Unordered(_, _))
                }
        })
        .map(|(key, _)| key.clone())
        .collect()
}

/// Per-target offset: the coordinate mean of F(p + h), computed sparsely
/// as ((dim − nnz)·F(h) + Σ_nonzero F(p_i + h)) / dim.
fn anchor_of(row: &TargetCounts, dim: usize, h: f64, f_h: f64, lambda: f64) -> f64 {
    let mut acc = Accumulator::new();
    for &count in row.counts.values() {
        let p = count as f64 / row.total as f64;
        acc.add(f_unchecked(p + h, lambda));
    }
    let zeros = (dim - row.counts.len()) as f64;
    (zeros * f_h + acc.value()) / dim as f64
}

/// Builds a vector space: given a table, an exponent λ, and the phrase set
/// Λ to normalize against, runs the three passes described in the module
/// docs. Every key of `phrase_set` must exist in the table.
///
/// A phrase set with a single element is degenerate: the centroid of a
/// one-point cloud is the point itself, so pass 2 annihilates the only
/// phrase vector and no scale can give it unit norm. That case (and any
/// other collapse of the phrase cloud) is reported as a computation error.
pub fn build_space<'a>(
    table: &'a CoocTable,
    lambda: f64,
    phrase_set: &[TargetKey],
    anchor_mode: AnchorMode,
) -> Result<VectorSpace<'a>> {
    if phrase_set.is_empty() {
        return Err(Error::Data(
            "cannot normalize a vector space over an empty phrase set".into(),
        ));
    }
    if !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be finite, got {lambda}")));
    }
    for key in phrase_set {
        if table.get(key).is_none() {
            return Err(Error::Data(format!(
                "phrase-set key `{key}` is not in the table"
            )));
        }
    }
    let dim = table.context_dim();
    let h = 1.0 / dim as f64;
    let f_h = f_unchecked(h, lambda);

    // pass 1: per-target anchors
    let mut anchors = BTreeMap::new();
    for (key, row) in table.iter() {
        let a = match anchor_mode {
            AnchorMode::Computed => anchor_of(row, dim, h, f_h, lambda),
            AnchorMode::Zero => 0.0,
        };
        anchors.insert(key.clone(), a);
    }

    // pass 2: per-dimension offsets from the phrase cloud,
    // b_i = F(h) − mean(a) + (1/|Λ|) Σ_{phrases with count at i} (F(p_i+h) − F(h))
    let mut mean_anchor = Accumulator::new();
    for key in phrase_set {
        mean_anchor.add(anchors[key]);
    }
    let mean_anchor = mean_anchor.value() / phrase_set.len() as f64;
    let mut b_dev: Vec<Accumulator> = vec![Accumulator::new(); dim];
    for key in phrase_set {
        let row = table.get(key).expect("validated above");
        for (&i, &count) in &row.counts {
            let p = count as f64 / row.total as f64;
            b_dev[i as usize].add(f_unchecked(p + h, lambda) - f_h);
        }
    }
    let inv_len = 1.0 / phrase_set.len() as f64;
    let b: Vec<f64> = b_dev
        .into_iter()
        .map(|acc| f_h - mean_anchor + acc.value() * inv_len)
        .collect();

    let mut space = VectorSpace {
        table,
        lambda,
        anchor_mode,
        dim,
        h,
        f_h,
        anchors,
        b,
        c: 1.0,
        phrase_set: phrase_set.to_vec(),
    };

    // pass 3: global scale from the mean unscaled phrase norm
    let mut norm_sum = Accumulator::new();
    for key in phrase_set {
        norm_sum.add(space.norm_of(key)?);
    }
    let mean_norm = norm_sum.value() * inv_len;
    if mean_norm <= 0.0 || !mean_norm.is_finite() {
        return Err(Error::Computation(format!(
            "degenerate phrase cloud: mean unscaled norm = {mean_norm}"
        )));
    }
    space.c = 1.0 / mean_norm;
    Ok(space)
}

impl<'a> VectorSpace<'a> {
    pub fn table(&self) -> &'a CoocTable {
        self.table
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn anchor_mode(&self) -> AnchorMode {
        self.anchor_mode
    }

    /// Context dimension (vocabulary size; doubled in Near-far mode).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The smoothing constant h = 1/dim.
    pub fn smoothing(&self) -> f64 {
        self.h
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn phrase_set(&self) -> &[TargetKey] {
        &self.phrase_set
    }

    /// Per-target offset a^Υ.
    pub fn anchor(&self, key: &TargetKey) -> Result<f64> {
        self.anchors
            .get(key)
            .copied()
            .ok_or_else(|| Error::Data(format!("unknown target `{key}`")))
    }

    /// The dense natural vector of one target.
    pub fn natural_vector(&self, key: &TargetKey) -> Result<Vec<f64>> {
        let row = self
            .table
            .get(key)
            .ok_or_else(|| Error::Data(format!("unknown target `{key}`")))?;
        let a = self.anchors[key];
        let base = self.f_h - a;
        let mut w: Vec<f64> = self.b.iter().map(|b_i| self.c * (base - b_i)).collect();
        for (&i, &count) in &row.counts {
            let p = count as f64 / row.total as f64;
            w[i as usize] = self.c * (f_unchecked(p + self.h, self.lambda) - a - self.b[i as usize]);
        }
        Ok(w)
    }

    /// Euclidean norm of a target's vector without materializing through
    /// the public path twice (used by pass 3 and the statistics).
    fn norm_of(&self, key: &TargetKey) -> Result<f64> {
        let w = self.natural_vector(key)?;
        let mut acc = Accumulator::new();
        for x in w {
            acc.add(x * x);
        }
        Ok(acc.value().sqrt())
    }

    /// A copy of the space with every b_i shifted by `delta`.
    ///
    /// The composition bias ‖w^{st} − ½(w^s + w^t)‖ is provably invariant
    /// under this shift (b cancels in the difference), which makes the
    /// method useful for demonstrating that invariance; it deliberately
    /// does not re-run normalization.
    pub fn offset_b(&self, delta: f64) -> VectorSpace<'a> {
        let mut out = self.clone();
        for b_i in &mut out.b {
            *b_i += delta;
        }
        out
    }

    /// Norm statistics over an explicit set of targets.
    pub fn norm_statistics(&self, keys: &[TargetKey]) -> Result<NormStats> {
        if keys.len() < 2 {
            return Err(Error::Data(format!(
                "norm statistics need at least 2 targets, got {}",
                keys.len()
            )));
        }
        let mut norms = Vec::with_capacity(keys.len());
        for key in keys {
            norms.push(self.norm_of(key)?);
        }
        let n = norms.len() as f64;
        let mut sum = Accumulator::new();
        for &x in &norms {
            sum.add(x);
        }
        let mean = sum.value() / n;
        let mut var = Accumulator::new();
        for &x in &norms {
            var.add((x - mean) * (x - mean));
        }
        let std = (var.value() / n).sqrt();

        const BIN: f64 = 0.05;
        let max = norms.iter().cloned().fold(0.0f64, f64::max);
        let n_bins = ((max / BIN).floor() as usize + 1).max(1);
        let mut bins = vec![0u64; n_bins];
        for &x in &norms {
            let idx = ((x / BIN) as usize).min(n_bins - 1);
            bins[idx] += 1;
        }
        let histogram = bins
            .into_iter()
            .enumerate()
            .map(|(k, c)| (k as f64 * BIN, (k + 1) as f64 * BIN, c))
            .collect();
        Ok(NormStats {
            mean,
            std,
            n: norms.len(),
            histogram,
        })
    }
}
