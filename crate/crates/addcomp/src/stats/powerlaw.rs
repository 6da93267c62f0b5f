//! Power-law tail fitting: maximum-likelihood exponent with a
//! Kolmogorov-Smirnov scan over tail cutoffs.
//!
//! The tail model is the survival law P(X > x | X ≥ m) = (m/x)^α, so the
//! fitted `alpha` is the *index* of the tail — a Zipfian corpus has
//! α ≈ 1 — not the density exponent (which would be α + 1). That is the
//! exponent the KS comparison uses, so the conventions cannot drift apart.

use crate::error::{Error, Result};
use crate::numeric::Accumulator;

/// Fitted tail of a positive sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    /// Tail index estimate (MLE at the chosen cutoff).
    pub alpha: f64,
    /// Lower cutoff: the tail is the sample restricted to x ≥ m.
    pub m: f64,
    /// Both-sided Kolmogorov-Smirnov distance of the tail fit.
    pub ks: f64,
    /// Number of sample points in the tail.
    pub n_tail: usize,
}

/// Maximum candidate cutoffs examined; distinct sample values beyond this
/// are thinned evenly by index.
const MAX_CANDIDATES: usize = 1024;

/// Tail-index MLE at a fixed cutoff: α̂ = n / Σ_{x≥m} ln(x/m).
/// Returns the estimate and the tail size, or `None` when fewer than two
/// points lie at or above `m` or the tail has no spread.
pub fn tail_alpha(sample: &[f64], m: f64) -> Option<(f64, usize)> {
    let mut acc = Accumulator::new();
    let mut n = 0usize;
    for &x in sample {
        if x >= m {
            acc.add((x / m).ln());
            n += 1;
        }
    }
    let s = acc.value();
    if n < 2 || s <= 0.0 {
        return None;
    }
    Some((n as f64 / s, n))
}

/// Both-sided KS distance between the empirical CDF of the (ascending)
/// tail and the model CDF 1 − (m/x)^α.
fn ks_distance(tail: &[f64], ln_tail: &[f64], m: f64, alpha: f64) -> f64 {
    let n = tail.len() as f64;
    let ln_m = m.ln();
    let mut d: f64 = 0.0;
    for (r, &lx) in ln_tail.iter().enumerate() {
        let model = 1.0 - (alpha * (ln_m - lx)).exp();
        let hi = (r + 1) as f64 / n;
        let lo = r as f64 / n;
        d = d.max((model - hi).abs()).max((model - lo).abs());
    }
    d
}

/// Fits a power-law tail: every distinct sample value is a candidate
/// cutoff m (thinned to at most 1024); for each, the tail index is
/// estimated by maximum likelihood and scored by the KS distance between
/// the empirical tail and the fitted survival law; the cutoff with the
/// smallest KS wins (ties: the smallest m, i.e. the longest tail).
pub fn fit_power_law(sample: &[f64]) -> Result<PowerLawFit> {
    if sample.len() < 10 {
        return Err(Error::Data(format!(
            "power-law fit needs at least 10 points, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(Error::Data(
            "power-law fit requires positive finite values".into(),
        ));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ln_xs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    // suffix[i] = Σ_{j ≥ i} ln x_j, accumulated back to front
    let mut suffix = vec![0.0; xs.len() + 1];
    let mut acc = Accumulator::new();
    for i in (0..xs.len()).rev() {
        acc.add(ln_xs[i]);
        suffix[i] = acc.value();
    }
    // candidate cutoffs: first index of each distinct value
    let mut starts: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        if i == 0 || xs[i] != xs[i - 1] {
            starts.push(i);
        }
    }
    if starts.len() > MAX_CANDIDATES {
        let last = starts.len() - 1;
        let mut thinned = Vec::with_capacity(MAX_CANDIDATES);
        for k in 0..MAX_CANDIDATES {
            let idx = (k as f64 * last as f64 / (MAX_CANDIDATES - 1) as f64).round() as usize;
            if thinned.last() != Some(&starts[idx]) {
                thinned.push(starts[idx]);
            }
        }
        starts = thinned;
    }

    let mut best: Option<PowerLawFit> = None;
    for &i in &starts {
        let m = xs[i];
        let n_tail = xs.len() - i;
        if n_tail < 2 {
            continue;
        }
        let spread = suffix[i] - n_tail as f64 * m.ln();
        if spread <= 0.0 {
            continue;
        }
        let alpha = n_tail as f64 / spread;
        let ks = ks_distance(&xs[i..], &ln_xs[i..], m, alpha);
        // strict `<` keeps the smallest m on ties (candidates ascend)
        if best.map_or(true, |b| ks < b.ks) {
            best = Some(PowerLawFit {
                alpha,
                m,
                ks,
                n_tail,
            });
        }
    }
    best.ok_or_else(|| {
        Error::Computation(
            "no admissible power-law tail: every cutoff leaves fewer than \
             two points or zero spread"
                .into(),
        )
    })
}
