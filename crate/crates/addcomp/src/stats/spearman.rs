//! Spearman rank correlation with a two-sided significance test.

use crate::error::{Error, Result};
use crate::stats::special::t_two_sided_p;

/// Rank correlation between two series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CorrelationResult {
    /// Spearman's ρ ∈ [−1, 1].
    pub rho: f64,
    /// Sample size.
    pub n: usize,
    /// t = ρ·√((n−2)/(1−ρ²)); ±∞ for |ρ| = 1.
    pub t_statistic: f64,
    /// Two-sided p-value from Student's t with n−2 degrees of freedom.
    pub p_value: f64,
}

/// Average ranks (1-based); tied values share the mean of the positions
/// they occupy. Inputs must be finite.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite input"));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j+1 share the average rank
        let avg = (i + j + 2) as f64 / 2.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Computation(
            "correlation is undefined for a constant series".into(),
        ));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ with significance: rank both series (average ranks for
/// ties), correlate the ranks, and test ρ ≠ 0 against Student's t with
/// n−2 degrees of freedom.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    if xs.len() != ys.len() {
        return Err(Error::Data(format!(
            "series lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 observations, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Data("series contain non-finite values".into()));
    }
    let rho = pearson(&average_ranks(xs), &average_ranks(ys))?;
    let n = xs.len();
    let t_statistic = if rho.abs() == 1.0 {
        rho.signum() * f64::INFINITY
    } else {
        rho * ((n as f64 - 2.0) / (1.0 - rho * rho)).sqrt()
    };
    let p_value = t_two_sided_p(t_statistic, n as f64 - 2.0)?;
    Ok(CorrelationResult {
        rho,
        n,
        t_statistic,
        p_value,
    })
}
