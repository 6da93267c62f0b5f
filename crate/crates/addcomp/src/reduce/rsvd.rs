//! Randomized truncated SVD via Gaussian sketching with subspace
//! (power) iterations and a small dense decomposition of the projected
//! matrix.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::SeedTree;

/// Rank-`d` factorization `A ≈ U·diag(σ)·Vᵀ` with orthonormal-column
/// factors and a non-increasing spectrum.
///
/// Sign convention: in every column of `U` the entry of largest
/// magnitude is non-negative (ties broken by the lowest row index), with
/// the matching column of `V` flipped alongside — so equal inputs
/// produce equal factors rather than factors differing by a column sign.
#[derive(Debug, Clone)]
pub struct SVDResult {
    /// n×d left factor (context-dimension side).
    pub u: DMatrix<f64>,
    /// The d singular values, non-increasing and non-negative.
    pub sigma: Vec<f64>,
    /// m×d right factor (target side).
    pub v: DMatrix<f64>,
}

impl SVDResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// The rank-d approximation `U·diag(σ)·Vᵀ` assembled densely.
    pub fn approximation(&self) -> DMatrix<f64> {
        let d = self.sigma.len();
        let mut scaled = self.u.clone();
        for k in 0..d {
            scaled.column_mut(k).scale_mut(self.sigma[k]);
        }
        scaled * self.v.transpose()
    }

    /// `‖A − U·diag(σ)·Vᵀ‖_F`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        (a - self.approximation()).norm()
    }
}

/// `‖MᵀM − I‖_max` — how far the columns of `M` are from orthonormal.
pub fn orthonormality_gap(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Thin orthonormal basis of the column span, via QR.
fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Rank-`d` truncated SVD of an n×m matrix by Gaussian random
/// projection.
///
/// The sketch has `d + oversample` columns (capped at `min(n, m)`);
/// each power iteration multiplies by `AᵀA` with re-orthonormalization
/// in between, sharpening the captured subspace when the spectrum
/// decays slowly. The projected `(d+oversample)×m` matrix is then
/// decomposed densely. Deterministic for a given `seed`: the Gaussian
/// test matrix is drawn column by column from the seed's `"rsvd"`
/// stream.
pub fn truncated_svd(
    a: &DMatrix<f64>,
    d: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<SVDResult> {
    let (n, m) = a.shape();
    if d == 0 || d > n.min(m) {
        return Err(Error::Config(format!(
            "requested rank {d} outside 1..={} for a {n}×{m} matrix",
            n.min(m)
        )));
    }
    if let Some((i, j)) = first_non_finite(a) {
        return Err(Error::Data(format!(
            "matrix entry ({i}, {j}) is not finite"
        )));
    }

    let sketch = (d + oversample).min(n.min(m)).max(d);
    let mut rng = SeedTree::new(seed).stream("rsvd");
    let mut omega = Vec::with_capacity(m * sketch);
    for _ in 0..m * sketch {
        omega.push(rng.sample::<f64, _>(StandardNormal));
    }
    let omega = DMatrix::from_vec(m, sketch, omega);

    let mut q = orthonormalize(a * omega);
    for _ in 0..power_iters {
        let z = orthonormalize(a.transpose() * &q);
        q = orthonormalize(a * z);
    }

    let projected = q.transpose() * a;
    let mut svd = projected.svd(true, true);
    svd.sort_by_singular_values();
    let u_small = svd.u.expect("left factor requested");
    let v_t = svd.v_t.expect("right factor requested");

    let mut u = (q * u_small).columns(0, d).into_owned();
    let mut v = v_t.rows(0, d).transpose().into_owned();
    let sigma: Vec<f64> = svd.singular_values.iter().take(d).copied().collect();
    fix_column_signs(&mut u, &mut v);

    Ok(SVDResult { u, sigma, v })
}

fn first_non_finite(a: &DMatrix<f64>) -> Option<(usize, usize)> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

fn fix_column_signs(u: &mut DMatrix<f64>, v: &mut DMatrix<f64>) {
    for k in 0..u.ncols() {
        let mut pivot = 0usize;
        let mut magnitude = 0.0f64;
        for i in 0..u.nrows() {
            let x = u[(i, k)].abs();
            if x > magnitude {
                magnitude = x;
                pivot = i;
            }
        }
        if u[(pivot, k)] < 0.0 {
            u.column_mut(k).neg_mut();
            v.column_mut(k).neg_mut();
        }
    }
}
