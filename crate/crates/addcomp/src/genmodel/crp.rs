//! Chinese-restaurant construction of a Pitman-Yor process.

use rand::Rng;

use super::PYParams;
use crate::error::{Error, Result};
use crate::numeric::Fenwick;
use crate::rng::SeedTree;

/// Incremental state of a PY(α, θ) Chinese-restaurant sampler.
///
/// After `C` steps the state holds `N` distinct words with integer counts
/// `C(ϖ)` summing to `C`. The next token joins word `ϖ` with weight
/// `C(ϖ) − α` and creates a new word with weight `θ + αN`; one uniform
/// per step decides both.
///
/// The per-word weights live in a [`Fenwick`] tree so a step costs
/// `O(log N)`, while the region boundary `C − αN` is recomputed from the
/// integer totals each step. The gap between that exact boundary and the
/// incrementally-maintained tree total is exposed as
/// [`normalization_drift`](Self::normalization_drift).
#[derive(Debug, Clone)]
pub struct CrpState {
    params: PYParams,
    /// `C(ϖ)` in creation order.
    counts: Vec<u64>,
    /// Slot `ϖ` carries weight `C(ϖ) − α`.
    weights: Fenwick,
    /// Total tokens drawn so far (`C`).
    total: u64,
}

impl CrpState {
    pub fn new(params: PYParams, capacity_hint: usize) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            counts: Vec::with_capacity(capacity_hint),
            weights: Fenwick::with_capacity(capacity_hint),
            total: 0,
        })
    }

    pub fn params(&self) -> PYParams {
        self.params
    }

    /// Counts per word, indexed by creation order.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of distinct words created so far (`N`).
    pub fn n_words(&self) -> usize {
        self.counts.len()
    }

    /// Total tokens drawn so far (`C`).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Absolute gap between the Fenwick total and the exact boundary
    /// `C − αN` it shadows.
    pub fn normalization_drift(&self) -> f64 {
        let exact = self.total as f64 - self.params.alpha * self.counts.len() as f64;
        (self.weights.total() - exact).abs()
    }

    /// Draws one token: a single uniform is scaled to `[0, θ + C)` and
    /// handed to [`step_at`](Self::step_at). Returns the word index.
    pub fn step(&mut self, rng: &mut impl Rng) -> usize {
        let width = self.params.theta + self.total as f64;
        self.step_at(rng.random::<f64>() * width)
    }

    /// Applies the transition for sampling coordinate `x ∈ [0, θ + C)`.
    ///
    /// The region `[0, C − αN)` is divided among existing words in
    /// creation order, each owning a sub-interval of width `C(ϖ) − α`;
    /// anything at or beyond `C − αN` creates a new word. Exposed so
    /// boundary behaviour is testable without inverting the generator.
    pub fn step_at(&mut self, x: f64) -> usize {
        let existing = self.total as f64 - self.params.alpha * self.counts.len() as f64;
        self.total += 1;
        if x < existing {
            let idx = self.weights.search(x);
            self.counts[idx] += 1;
            self.weights.update(idx, 1.0);
            idx
        } else {
            self.counts.push(1);
            self.weights.push(1.0 - self.params.alpha)
        }
    }
}

/// Runs a fresh PY(α, θ) restaurant for `steps` tokens and returns the
/// final state.
///
/// Uniforms come from the `"pitman-yor"` stream of a [`SeedTree`], so the
/// same seed always yields the same state.
pub fn sample_pitman_yor(params: PYParams, steps: u64, seed: u64) -> Result<CrpState> {
    if steps == 0 {
        return Err(Error::Config("sampler needs at least one step".into()));
    }
    let mut rng = SeedTree::new(seed).stream("pitman-yor");
    let mut state = CrpState::new(params, 1024)?;
    for _ in 0..steps {
        state.step(&mut rng);
    }
    Ok(state)
}
