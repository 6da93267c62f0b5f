//! Desk-scale stochastic factorizer: fits a rank-d factor pair to a
//! dense column-per-target matrix under any [`LossSpec`], one cell per
//! update, with a seeded shuffle and a linearly decaying step size.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::{loss_eval, loss_grad, LossSpec};
use super::EmbeddingSet;
use crate::error::{Error, Result};
use crate::numeric::Accumulator;
use crate::rng::SeedTree;

/// Hard ceiling on matrix cells — this factorizer walks every cell of a
/// dense matrix each epoch and is not meant for more.
const MAX_CELLS: usize = 10_000_000;

/// Step size decaying linearly from `start` to `end` over the whole run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LrSchedule {
    pub start: f64,
    pub end: f64,
}

impl LrSchedule {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        let schedule = Self { start, end };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.end.is_finite() || self.end <= 0.0 || self.start < self.end
        {
            return Err(Error::Config(format!(
                "learning rate must decay from a finite start to a positive end, got {} → {}",
                self.start, self.end
            )));
        }
        Ok(())
    }

    /// Step size after completing `done` of `total` updates.
    fn at(&self, done: usize, total: usize) -> f64 {
        let fraction = done as f64 / total as f64;
        self.start + (self.end - self.start) * fraction
    }
}

/// Factor pair with its training history.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// Per-dimension (row-side) factor vectors `u_i`.
    pub context: Vec<Vec<f64>>,
    /// Per-target factor vectors `v^t`, the embeddings.
    pub embeddings: EmbeddingSet,
    /// Mean per-cell loss before training (entry 0) and after each
    /// epoch — the training log.
    pub epoch_loss: Vec<f64>,
}

/// Factorizes `values ≈ context · embeddingsᵀ` by cell-wise stochastic
/// descent.
///
/// Each epoch visits every cell once in a freshly shuffled order (the
/// shuffle for epoch e comes from the seed's `"factorize-order"` stream
/// at index e, so runs are reproducible); both factor rows of a cell
/// step along `loss_grad` at the old values. Initial factors are
/// uniform in `±0.5/√d` from the `"factorize-init"` stream. The mean
/// loss is scored after every epoch; an epoch whose mean exceeds 10×
/// the initial one aborts with a training error carrying the
/// diagnostics.
pub fn sgd_factorize(
    values: &DMatrix<f64>,
    d: usize,
    spec: &LossSpec,
    epochs: usize,
    schedule: LrSchedule,
    seed: u64,
) -> Result<Factorization> {
    let (n, m) = values.shape();
    if d == 0 || d > n.min(m) {
        return Err(Error::Config(format!(
            "factor dimension {d} outside 1..={} for a {n}×{m} matrix",
            n.min(m)
        )));
    }
    if epochs == 0 {
        return Err(Error::Config("training needs at least one epoch".into()));
    }
    if n * m > MAX_CELLS {
        return Err(Error::Config(format!(
            "{n}×{m} matrix exceeds the desk-scale cell budget of {MAX_CELLS}"
        )));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("matrix entries must be finite".into()));
    }
    schedule.validate()?;
    spec.validate(n, m)?;

    let tree = SeedTree::new(seed);
    let mut init = tree.stream("factorize-init");
    let scale = 1.0 / (d as f64).sqrt();
    let mut draw = |len: usize| -> Vec<Vec<f64>> {
        (0..len)
            .map(|_| {
                (0..d)
                    .map(|_| (init.random::<f64>() - 0.5) * scale)
                    .collect()
            })
            .collect()
    };
    let mut context = draw(n);
    let mut targets = draw(m);

    let mut cells: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|i| (0..m as u32).map(move |t| (i, t)))
        .collect();
    let total_updates = cells.len() * epochs;

    let mean_loss = |context: &[Vec<f64>], targets: &[Vec<f64>]| -> Result<f64> {
        let mut acc = Accumulator::new();
        for i in 0..n {
            for t in 0..m {
                let x = dot(&context[i], &targets[t]);
                acc.add(loss_eval(spec, x, values[(i, t)], i, t)?);
            }
        }
        Ok(acc.value() / (n * m) as f64)
    };

    let initial = mean_loss(&context, &targets)?;
    let mut epoch_loss = vec![initial];
    let mut done = 0usize;
    for epoch in 0..epochs {
        let mut order = tree.indexed_stream("factorize-order", epoch as u64);
        cells.shuffle(&mut order);
        for &(i, t) in &cells {
            let (i, t) = (i as usize, t as usize);
            let lr = schedule.at(done, total_updates);
            let x = dot(&context[i], &targets[t]);
            if !x.is_finite() {
                return Err(Error::Computation(format!(
                    "training diverged at epoch {epoch}: non-finite factor product at \
                     cell ({i}, {t}) (schedule {} → {})",
                    schedule.start, schedule.end
                )));
            }
            let g = loss_grad(spec, x, values[(i, t)], i, t)?;
            for k in 0..d {
                let u_old = context[i][k];
                context[i][k] -= lr * g * targets[t][k];
                targets[t][k] -= lr * g * u_old;
            }
            done += 1;
        }
        let loss = mean_loss(&context, &targets)?;
        epoch_loss.push(loss);
        if !loss.is_finite() || (initial > 0.0 && loss > 10.0 * initial) {
            return Err(Error::Computation(format!(
                "training diverged at epoch {epoch}: mean loss {loss} vs initial {initial} \
                 (schedule {} → {})",
                schedule.start, schedule.end
            )));
        }
    }

    Ok(Factorization {
        context,
        embeddings: EmbeddingSet::from_vectors(targets)?,
        epoch_loss,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
