//! Dimension reduction of natural-vector matrices.
//!
//! A space is laid out densely as one column per target. From there:
//! [`truncated_svd`] computes a seeded randomized rank-d factorization,
//! [`embed`] extracts the target-side embeddings (columns of
//! `√Σ_d·Vᵀ`), and [`sgd_factorize`] fits the same kind of factor pair
//! by stochastic descent under one of the three per-cell losses in
//! [`LossSpec`] ([`loss_eval`] / [`loss_grad`]), whose noise-contrastive
//! member approaches the exponential Bregman divergence as the noise
//! multiplier grows ([`sgns_limit_check`]).

use nalgebra::DMatrix;

use crate::corpus::TargetKey;
use crate::error::{Error, Result};
use crate::numeric::Accumulator;
use crate::vectors::VectorSpace;

mod loss;
mod rsvd;
mod sgd;

pub use loss::{loss_eval, loss_grad, sgns_limit_check, LossSpec, GLOVE_EXPONENT, GLOVE_X_MAX};
pub use rsvd::{orthonormality_gap, truncated_svd, SVDResult};
pub use sgd::{sgd_factorize, Factorization, LrSchedule};

/// Sketch padding used when no explicit oversampling is requested.
pub const DEFAULT_OVERSAMPLE: usize = 10;
/// Subspace iterations used by default; two suffice for the slowly
/// decaying spectra these matrices have.
pub const DEFAULT_POWER_ITERS: usize = 2;

/// Per-target reduced vectors, column-aligned with the matrix they were
/// extracted from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dims: usize,
    vectors: Vec<Vec<f64>>,
    normalized: bool,
    skipped: Vec<usize>,
}

impl EmbeddingSet {
    /// Wraps equally-sized finite vectors; one per target.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dims = vectors.first().map_or(0, Vec::len);
        if dims == 0 {
            return Err(Error::Data("embedding set without vectors".into()));
        }
        for (t, v) in vectors.iter().enumerate() {
            if v.len() != dims {
                return Err(Error::Data(format!(
                    "vector {t} has {} dimensions, expected {dims}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!("vector {t} has a non-finite entry")));
            }
        }
        Ok(Self {
            dims,
            vectors,
            normalized: false,
            skipped: Vec::new(),
        })
    }

    /// Rescales every vector to unit Euclidean norm. Zero vectors cannot
    /// be normalized; they are warned about, cleared to exact zeros, and
    /// their indices recorded in [`skipped`](Self::skipped). "Zero" is
    /// judged relative to the largest norm in the set, so vectors that
    /// are pure rounding residue of a zero column do not get inflated
    /// into noise directions.
    pub fn normalize(mut self) -> Self {
        let norms: Vec<f64> = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let cutoff = norms.iter().cloned().fold(0.0, f64::max) * 1e-9;
        let mut skipped = Vec::new();
        for (t, (v, norm)) in self.vectors.iter_mut().zip(&norms).enumerate() {
            if *norm > cutoff {
                for x in v.iter_mut() {
                    *x /= norm;
                }
            } else {
                log::warn!("embedding {t} is zero and cannot be normalized");
                v.fill(0.0);
                skipped.push(t);
            }
        }
        self.normalized = true;
        self.skipped = skipped;
        self
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Indices of zero vectors that normalization had to leave alone.
    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }

    pub fn get(&self, target: usize) -> Option<&[f64]> {
        self.vectors.get(target).map(Vec::as_slice)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

/// Assembles the dense matrix of a vector space: one column per key, in
/// the order given.
pub fn space_matrix(space: &VectorSpace, keys: &[TargetKey]) -> Result<DMatrix<f64>> {
    if keys.is_empty() {
        return Err(Error::Data("matrix assembly over an empty key list".into()));
    }
    let n = space.dim();
    let mut data = Vec::with_capacity(n * keys.len());
    for key in keys {
        data.extend(space.natural_vector(key)?);
    }
    Ok(DMatrix::from_vec(n, keys.len(), data))
}

/// Reduces a column-per-target matrix to d dimensions: target t's
/// embedding is the t-th column of `√Σ_d·Vᵀ`, so that the left factor
/// `U·√Σ_d` reconstructs the original columns. Uses the default
/// oversampling and power iterations of [`truncated_svd`]; with
/// `normalize` every embedding is rescaled to unit norm (zero vectors
/// are skipped and reported by the returned set).
pub fn embed(matrix: &DMatrix<f64>, d: usize, normalize: bool, seed: u64) -> Result<EmbeddingSet> {
    let svd = truncated_svd(matrix, d, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, seed)?;
    let roots: Vec<f64> = svd.sigma.iter().map(|s| s.sqrt()).collect();
    let vectors: Vec<Vec<f64>> = (0..matrix.ncols())
        .map(|t| (0..d).map(|k| roots[k] * svd.v[(t, k)]).collect())
        .collect();
    let set = EmbeddingSet::from_vectors(vectors)?;
    Ok(if normalize { set.normalize() } else { set })
}
