//! Five-category χ² goodness-of-fit test for an index-1 count tail.
//!
//! Co-occurrence counts of a target are binned into five bands
//! `[X < 16, 16 ≤ X < 32, 32 ≤ X < 64, 64 ≤ X < 128, X ≥ 128]`. An
//! index-1 tail with coefficient m — survival P(x ≤ X) = m/x for
//! x ≥ 16 — predicts the band probabilities
//! `[1 − m/16, m/32, m/64, m/128, m/128]`, which sum to one for every m
//! (the four tail terms telescope to m/16). The statistic is minimized
//! over m ∈ [1/16, 1/2] and referred to χ² with 5 − 1 − 1 = 3 degrees
//! of freedom.

use crate::error::{Error, Result};
use crate::stats::special::chi2_survival;

/// A fit passes when its p-value is at least this.
pub const PASS_THRESHOLD: f64 = 1e-4;

const M_LO: f64 = 1.0 / 16.0;
const M_HI: f64 = 0.5;
const GRID: usize = 1024;

/// Result of the index-1 tail test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChisqResult {
    /// Tail coefficient minimizing the statistic, in [1/16, 1/2].
    pub m_star: f64,
    /// Minimized χ² statistic.
    pub chi2: f64,
    /// Degrees of freedom: 5 categories − 1 − 1 fitted parameter.
    pub dof: u32,
    /// Survival probability of `chi2` under χ²(dof).
    pub p_value: f64,
    /// `p_value >= PASS_THRESHOLD`.
    pub pass: bool,
}

/// Model band probabilities for tail coefficient `m`.
pub fn category_probabilities(m: f64) -> [f64; 5] {
    [
        1.0 - m / 16.0,
        m / 32.0,
        m / 64.0,
        m / 128.0,
        m / 128.0,
    ]
}

fn chi2_at(m: f64, counts: &[u64; 5], total: f64) -> f64 {
    let probs = category_probabilities(m);
    let mut chi2 = 0.0;
    for (&obs, p) in counts.iter().zip(probs) {
        let expected = total * p;
        let d = obs as f64 - expected;
        chi2 += d * d / expected;
    }
    chi2
}

/// Golden-section minimization of a unimodal function on [lo, hi].
fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > 1e-10 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Tests whether five band counts are consistent with an index-1 tail:
/// the χ² statistic is minimized over the tail coefficient (dense grid
/// with golden-section refinement around the best cell) and converted to
/// a p-value with 3 degrees of freedom.
pub fn chisq_index1_test(counts: &[u64; 5]) -> Result<ChisqResult> {
    let total: u64 = counts.iter().sum();
    if total < 50 {
        return Err(Error::Data(format!(
            "χ² test needs a total of at least 50 observations, got {total}"
        )));
    }
    let total = total as f64;
    let step = (M_HI - M_LO) / (GRID - 1) as f64;
    let mut best_k = 0;
    let mut best = f64::INFINITY;
    for k in 0..GRID {
        let chi2 = chi2_at(M_LO + k as f64 * step, counts, total);
        if chi2 < best {
            best = chi2;
            best_k = k;
        }
    }
    let lo = M_LO + best_k.saturating_sub(1) as f64 * step;
    let hi = (M_LO + (best_k + 1) as f64 * step).min(M_HI);
    let m_star = golden_min(lo, hi, |m| chi2_at(m, counts, total));
    let chi2 = chi2_at(m_star, counts, total);
    let p_value = chi2_survival(chi2, 3)?;
    Ok(ChisqResult {
        m_star,
        chi2,
        dof: 3,
        p_value,
        pass: p_value >= PASS_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Band counts and frozen results for five reference targets. m and χ²
    /// come from an independent implementation of the same minimization;
    /// the p-values from the 3-dof closed form erfc(√(x/2)) + √(2x/π)e^{−x/2}
    /// evaluated at the frozen χ².
    const FIXTURES: [([u64; 5], f64, f64, f64, bool); 5] = [
        ([16210, 0, 0, 0, 0], 0.0625, 63.5686275, 1.015048853e-13, false),
        ([16167, 29, 14, 0, 0], 0.0625, 16.2907341, 9.884914604e-4, true),
        ([16173, 29, 6, 2, 0], 0.0625, 18.7060914, 3.144452271e-4, true),
        ([16169, 28, 9, 3, 1], 0.0625, 12.4944118, 5.867898026e-3, true),
        ([15859, 194, 93, 39, 25], 0.351686062, 10.8440115, 1.259997217e-2, true),
    ];

    #[test]
    fn frozen_band_fixtures_reproduce() {
        for (counts, m, chi2, p, pass) in FIXTURES {
            let r = chisq_index1_test(&counts).unwrap();
            assert_relative_eq!(r.m_star, m, epsilon = 1e-6);
            assert_relative_eq!(r.chi2, chi2, max_relative = 1e-7);
            // p tolerance absorbs the truncation of the 9-digit χ² pins
            assert_relative_eq!(r.p_value, p, max_relative = 1e-5);
            assert_eq!(r.pass, pass, "counts {counts:?}");
            assert_eq!(r.dof, 3);
        }
    }

    #[test]
    fn counts_proportional_to_the_model_fit_perfectly() {
        // probabilities at m = 1/4 over a common denominator of 512:
        // [504, 4, 2, 1, 1] / 512
        let counts = [504 * 20, 4 * 20, 2 * 20, 1 * 20, 1 * 20];
        let r = chisq_index1_test(&counts).unwrap();
        assert_relative_eq!(r.m_star, 0.25, epsilon = 1e-7);
        assert!(r.chi2 < 1e-10, "chi2 = {}", r.chi2);
        assert!(r.p_value > 1.0 - 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn tiny_totals_are_rejected() {
        let err = chisq_index1_test(&[30, 10, 5, 3, 1]).unwrap_err();
        assert_eq!(err.exit_code(), 5);
    }

    #[test]
    fn minimizer_stays_in_range() {
        let r = chisq_index1_test(&[100, 100, 100, 100, 100]).unwrap();
        assert!((M_LO..=M_HI).contains(&r.m_star));
        assert!(r.p_value >= 0.0 && r.p_value <= 1.0);
    }

    proptest! {
        #[test]
        fn band_probabilities_sum_to_one(k in 0usize..2048) {
            let m = M_LO + (M_HI - M_LO) * k as f64 / 2047.0;
            let p = category_probabilities(m);
            prop_assert!(p.iter().all(|&x| x > 0.0));
            // the four tail terms telescope exactly to m/16; the head
            // rounds once, so allow one ulp around 1
            let tail = ((p[4] + p[3]) + p[2]) + p[1];
            prop_assert_eq!(tail, m / 16.0);
            let sum = p[0] + tail;
            prop_assert!((sum - 1.0).abs() <= f64::EPSILON);
        }
    }
}
