//! The three loss families scored per matrix cell: plain squared error,
//! count-weighted squared error with a saturating weight, and the
//! noise-contrastive Bregman divergence, together with analytic
//! gradients and the large-noise limit diagnostic.

use nalgebra::DMatrix;

use crate::corpus::{CoocTable, TargetKey};
use crate::error::{Error, Result};

/// Which loss is scored and the per-cell data it needs.
///
/// Shape coherence against a concrete matrix (and the noise vector
/// summing to 1) is checked by [`validate`](LossSpec::validate), which
/// the factorizer calls once up front; [`loss_eval`] itself only
/// validates what it touches, so small hand-built fixtures can probe
/// single cells.
#[derive(Debug, Clone)]
pub enum LossSpec {
    /// `(v − w)²`.
    L2,
    /// `f(C^t_i)·(v − w)²` with the saturating weight
    /// `f(x) = min((x/x_max)^exponent, 1)`.
    Glove {
        /// Count at which the weight saturates to 1.
        x_max: f64,
        /// Weight exponent below the saturation point.
        exponent: f64,
        /// Raw co-occurrence counts, dimension-by-target.
        counts: DMatrix<f64>,
    },
    /// `C(t)·D_φ(v + ln(k·p^n_i), w + ln(k·p^n_i))` where
    /// `φ(x) = (p^t_i + k·p^n_i)·ln(e^x + k·p^n_i)` — the per-cell
    /// objective gap of noise-contrastive training with `k` negatives.
    Sgns {
        /// Noise-sample multiplier; ≥ 1.
        k: f64,
        /// Per-dimension noise probabilities `p^n_i`.
        noise: Vec<f64>,
        /// Per-target totals `C(t)` weighting each cell.
        occurrences: Vec<f64>,
        /// Target-conditional probabilities `p^t_i`, dimension-by-target.
        conditional: DMatrix<f64>,
    },
}

/// Reference weight defaults: saturate at 10 counts with exponent 3/4.
pub const GLOVE_X_MAX: f64 = 10.0;
pub const GLOVE_EXPONENT: f64 = 0.75;

impl LossSpec {
    /// Weighted squared error with the reference saturation defaults.
    pub fn glove_default(counts: DMatrix<f64>) -> Result<Self> {
        Self::glove(counts, GLOVE_X_MAX, GLOVE_EXPONENT)
    }

    pub fn glove(counts: DMatrix<f64>, x_max: f64, exponent: f64) -> Result<Self> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::Config(format!(
                "weight saturation point must be positive and finite, got {x_max}"
            )));
        }
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::Config(format!(
                "weight exponent must be positive and finite, got {exponent}"
            )));
        }
        if counts.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Data("counts must be finite and non-negative".into()));
        }
        Ok(Self::Glove {
            x_max,
            exponent,
            counts,
        })
    }

    pub fn sgns(
        k: f64,
        noise: Vec<f64>,
        occurrences: Vec<f64>,
        conditional: DMatrix<f64>,
    ) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::Config(format!(
                "noise multiplier must be ≥ 1, got {k}"
            )));
        }
        if noise.is_empty() || noise.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::Data(
                "noise probabilities must be positive and finite".into(),
            ));
        }
        if occurrences.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::Data(
                "per-target totals must be positive and finite".into(),
            ));
        }
        if conditional.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Data(
                "conditional probabilities must be finite and non-negative".into(),
            ));
        }
        Ok(Self::Sgns {
            k,
            noise,
            occurrences,
            conditional,
        })
    }

    /// Noise-contrastive spec straight from a table: the noise
    /// distribution is the vocabulary's unigram distribution, and each
    /// key contributes its conditional context distribution and total.
    pub fn sgns_from_table(table: &CoocTable, keys: &[TargetKey], k: f64) -> Result<Self> {
        let dims = table.context_dim();
        let noise: Vec<f64> = (0..dims)
            .map(|i| table.vocab().probability(i as u32))
            .collect();
        let mut occurrences = Vec::with_capacity(keys.len());
        let mut conditional = DMatrix::zeros(dims, keys.len());
        for (t, key) in keys.iter().enumerate() {
            let row = table
                .get(key)
                .ok_or_else(|| Error::Data(format!("unknown target `{key}`")))?;
            occurrences.push(row.total as f64);
            for i in 0..dims {
                conditional[(i, t)] = row.probability(i as u32);
            }
        }
        Self::sgns(k, noise, occurrences, conditional)
    }

    /// Human-readable kind tag for logs and reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::L2 => "l2",
            Self::Glove { .. } => "glove",
            Self::Sgns { .. } => "sgns",
        }
    }

    /// Full coherence check against an n-dimension × m-target matrix:
    /// shapes must match and the noise probabilities must form a
    /// distribution (sum 1 within 1e-9).
    pub fn validate(&self, dims: usize, targets: usize) -> Result<()> {
        match self {
            Self::L2 => Ok(()),
            Self::Glove { counts, .. } => {
                if counts.shape() != (dims, targets) {
                    return Err(Error::Data(format!(
                        "weight counts are {}×{}, expected {dims}×{targets}",
                        counts.nrows(),
                        counts.ncols()
                    )));
                }
                Ok(())
            }
            Self::Sgns {
                noise,
                occurrences,
                conditional,
                ..
            } => {
                if noise.len() != dims || occurrences.len() != targets {
                    return Err(Error::Data(format!(
                        "spec covers {} dimensions and {} targets, expected {dims} and {targets}",
                        noise.len(),
                        occurrences.len()
                    )));
                }
                if conditional.shape() != (dims, targets) {
                    return Err(Error::Data(format!(
                        "conditional probabilities are {}×{}, expected {dims}×{targets}",
                        conditional.nrows(),
                        conditional.ncols()
                    )));
                }
                let sum: f64 = noise.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Data(format!(
                        "noise probabilities sum to {sum}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// `ln(e^x + c)` with `ln_c = ln c`, stable for arguments of any size.
fn log_exp_plus(x: f64, ln_c: f64) -> f64 {
    let m = x.max(ln_c);
    m + ((x - m).exp() + (ln_c - m).exp()).ln()
}

/// `1/(1 + e^{−z})` without overflow on either side.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_finite(v: f64, w: f64) -> Result<()> {
    if !v.is_finite() || !w.is_finite() {
        return Err(Error::Computation(format!(
            "loss arguments must be finite, got ({v}, {w})"
        )));
    }
    Ok(())
}

fn cell<'a>(m: &'a DMatrix<f64>, dim: usize, target: usize, what: &str) -> Result<&'a f64> {
    m.get((dim, target)).ok_or_else(|| {
        Error::Data(format!(
            "{what} has no cell ({dim}, {target}); spec covers {}×{}",
            m.nrows(),
            m.ncols()
        ))
    })
}

/// The saturating weight `min((x/x_max)^exponent, 1)`.
fn glove_weight(x: f64, x_max: f64, exponent: f64) -> f64 {
    (x / x_max).powf(exponent).min(1.0)
}

/// Shift and curvature data of one noise-contrastive cell.
struct SgnsCell {
    /// `C(t)`.
    scale: f64,
    /// `p^t_i + k·p^n_i` — the curvature multiplier.
    mass: f64,
    /// `ln(k·p^n_i)` — the argument shift.
    ln_c: f64,
}

fn sgns_cell(
    k: f64,
    noise: &[f64],
    occurrences: &[f64],
    conditional: &DMatrix<f64>,
    dim: usize,
    target: usize,
) -> Result<SgnsCell> {
    let p_t = *cell(conditional, dim, target, "conditional probabilities")?;
    let p_n = noise.get(dim).ok_or_else(|| {
        Error::Data(format!(
            "no noise probability for dimension {dim} (spec covers {})",
            noise.len()
        ))
    })?;
    let scale = occurrences.get(target).ok_or_else(|| {
        Error::Data(format!(
            "no total for target {target} (spec covers {})",
            occurrences.len()
        ))
    })?;
    Ok(SgnsCell {
        scale: *scale,
        mass: p_t + k * p_n,
        ln_c: (k * p_n).ln(),
    })
}

/// Loss of predicting `v` where the matrix holds `w`, at cell
/// `(dim, target)`.
///
/// Every kind is a Bregman divergence in `v`: non-negative, zero exactly
/// at `v = w` (values within a rounding ulp of the minimum are clamped
/// to zero), and convex. The noise-contrastive kind evaluates
/// `C(t)·[φ(p) − φ(q) − φ′(q)(p − q)]` at the shifted points
/// `p = v + ln(k·p^n_i)`, `q = w + ln(k·p^n_i)`.
pub fn loss_eval(spec: &LossSpec, v: f64, w: f64, dim: usize, target: usize) -> Result<f64> {
    check_finite(v, w)?;
    match spec {
        LossSpec::L2 => Ok((v - w) * (v - w)),
        LossSpec::Glove {
            x_max,
            exponent,
            counts,
        } => {
            let x = cell(counts, dim, target, "weight counts")?;
            Ok(glove_weight(*x, *x_max, *exponent) * (v - w) * (v - w))
        }
        LossSpec::Sgns {
            k,
            noise,
            occurrences,
            conditional,
        } => {
            let c = sgns_cell(*k, noise, occurrences, conditional, dim, target)?;
            let p = v + c.ln_c;
            let q = w + c.ln_c;
            let gap = log_exp_plus(p, c.ln_c) - log_exp_plus(q, c.ln_c)
                - logistic(q - c.ln_c) * (p - q);
            Ok((c.scale * c.mass * gap).max(0.0))
        }
    }
}

/// `∂loss/∂v` at cell `(dim, target)` — what a stochastic factorizer
/// steps along.
pub fn loss_grad(spec: &LossSpec, v: f64, w: f64, dim: usize, target: usize) -> Result<f64> {
    check_finite(v, w)?;
    match spec {
        LossSpec::L2 => Ok(2.0 * (v - w)),
        LossSpec::Glove {
            x_max,
            exponent,
            counts,
        } => {
            let x = cell(counts, dim, target, "weight counts")?;
            Ok(2.0 * glove_weight(*x, *x_max, *exponent) * (v - w))
        }
        LossSpec::Sgns {
            k,
            noise,
            occurrences,
            conditional,
        } => {
            let c = sgns_cell(*k, noise, occurrences, conditional, dim, target)?;
            Ok(c.scale * c.mass * (logistic(v) - logistic(w)))
        }
    }
}

/// How fast the noise-contrastive divergence approaches its
/// infinite-noise limit, the divergence of `φ(x) = eˣ`.
///
/// Evaluated at the spec's first dimension and target: the arguments are
/// shifted once by the *spec's* `k` (`p = v + ln(k·p^n_0)`, likewise
/// `q`), then the divergence is re-scored under each trial multiplier in
/// `k_list`, holding `p` and `q` fixed, and compared with
/// `D_exp(p, q) = e^p − e^q − e^q(p − q)`. Returns one absolute gap per
/// trial multiplier; for an increasing `k_list` the gaps shrink toward
/// zero.
pub fn sgns_limit_check(spec: &LossSpec, v: f64, w: f64, k_list: &[f64]) -> Result<Vec<f64>> {
    check_finite(v, w)?;
    let LossSpec::Sgns {
        k,
        noise,
        conditional,
        ..
    } = spec
    else {
        return Err(Error::Config(format!(
            "limit check requires a noise-contrastive spec, got {}",
            spec.kind()
        )));
    };
    if k_list.is_empty() || k_list.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Config(
            "trial multipliers must be non-empty and strictly increasing".into(),
        ));
    }
    if k_list[0] < 1.0 {
        return Err(Error::Config(format!(
            "trial multipliers must be ≥ 1, got {}",
            k_list[0]
        )));
    }
    let p_t = *cell(conditional, 0, 0, "conditional probabilities")?;
    let p_n = noise[0];
    let p = v + (k * p_n).ln();
    let q = w + (k * p_n).ln();
    let d_exp = p.exp() - q.exp() - q.exp() * (p - q);
    Ok(k_list
        .iter()
        .map(|trial| {
            let c = trial * p_n;
            let ln_c = c.ln();
            let d = (p_t + c)
                * (log_exp_plus(p, ln_c) - log_exp_plus(q, ln_c) - logistic(q - ln_c) * (p - q));
            (d - d_exp).abs()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    /// One-cell noise-contrastive spec for pointwise studies.
    fn sgns_fixture(p_t: f64, p_n: f64, k: f64, c_t: f64) -> LossSpec {
        LossSpec::sgns(
            k,
            vec![p_n],
            vec![c_t],
            DMatrix::from_element(1, 1, p_t),
        )
        .unwrap()
    }

    #[test]
    fn every_kind_vanishes_exactly_at_equal_arguments() {
        let specs = [
            LossSpec::L2,
            LossSpec::glove_default(DMatrix::from_element(1, 1, 3.0)).unwrap(),
            sgns_fixture(0.1, 0.05, 2.0, 7.0),
        ];
        for spec in &specs {
            for w in [-2.0, 0.0, 1.5] {
                assert_eq!(loss_eval(spec, w, w, 0, 0).unwrap(), 0.0);
                assert_eq!(loss_grad(spec, w, w, 0, 0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn plain_squared_error_and_gradient_fixtures() {
        assert_eq!(loss_eval(&LossSpec::L2, 3.0, 1.0, 0, 0).unwrap(), 4.0);
        assert_eq!(loss_grad(&LossSpec::L2, 3.0, 1.0, 0, 0).unwrap(), 4.0);
    }

    #[test]
    fn saturating_weight_matches_the_reference_curve() {
        // (5/10)^{3/4} = 2^{-3/4}.
        assert_relative_eq!(
            glove_weight(5.0, GLOVE_X_MAX, GLOVE_EXPONENT),
            0.594_603_557_501_360_5,
            epsilon = 1e-12
        );
        assert_eq!(glove_weight(10.0, GLOVE_X_MAX, GLOVE_EXPONENT), 1.0);
        assert_eq!(glove_weight(250.0, GLOVE_X_MAX, GLOVE_EXPONENT), 1.0);
        assert_eq!(glove_weight(0.0, GLOVE_X_MAX, GLOVE_EXPONENT), 0.0);
        let spec = LossSpec::glove_default(DMatrix::from_element(1, 1, 5.0)).unwrap();
        assert_relative_eq!(
            loss_eval(&spec, 3.0, 1.0, 0, 0).unwrap(),
            4.0 * 0.594_603_557_501_360_5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn noise_contrastive_fixture_matches_the_objective_difference_oracle() {
        // Oracle route: score the two-term training objective at the
        // optimum w = ln(p_t/(k·p_n)) and at v = w + 1 directly through
        // the logistic objective, and take the difference.
        let (p_t, p_n, k, c_t) = (0.1f64, 0.05, 2.0, 1.0);
        let w = (p_t / (k * p_n)).ln();
        let v = w + 1.0;
        let objective = |x: f64| {
            c_t * (p_t * logistic(x).ln() + k * p_n * (1.0 - logistic(x)).ln())
        };
        let oracle = objective(w) - objective(v);
        assert_relative_eq!(oracle, 0.024_022_901_391_655_5, epsilon = 1e-12);

        let spec = sgns_fixture(p_t, p_n, k, c_t);
        assert_relative_eq!(
            loss_eval(&spec, v, w, 0, 0).unwrap(),
            oracle,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let mut rng = SeedTree::new(17).stream("loss-points");
        let h = 1e-6;
        for trial in 0..100 {
            let p_t: f64 = rng.random::<f64>() * 0.5;
            let p_n: f64 = 0.001 + rng.random::<f64>() * 0.2;
            let k: f64 = 1.0 + rng.random::<f64>() * 19.0;
            let c_t: f64 = 1.0 + rng.random::<f64>() * 999.0;
            let v: f64 = rng.random::<f64>() * 6.0 - 3.0;
            let w: f64 = rng.random::<f64>() * 6.0 - 3.0;
            let specs = [
                LossSpec::L2,
                LossSpec::glove_default(DMatrix::from_element(1, 1, c_t)).unwrap(),
                sgns_fixture(p_t, p_n, k, c_t),
            ];
            for spec in &specs {
                let grad = loss_grad(spec, v, w, 0, 0).unwrap();
                let fd = (loss_eval(spec, v + h, w, 0, 0).unwrap()
                    - loss_eval(spec, v - h, w, 0, 0).unwrap())
                    / (2.0 * h);
                let rel = (grad - fd).abs() / grad.abs().max(1.0);
                assert!(
                    rel <= 1e-4,
                    "trial {trial} ({}): grad {grad} vs fd {fd}",
                    spec.kind()
                );
            }
        }
    }

    #[test]
    fn noise_contrastive_loss_grows_faster_toward_positive_deviations() {
        // The noise-contrastive loss is (p_t + k·p_n) times the Bregman
        // divergence of softplus, so its asymmetry around the target is
        // set by the sign of the target alone: overshooting costs more
        // exactly when the target sits below the noise-odds point
        // (negative shifted association, the common case for real
        // co-occurrence data), the two sides balance at zero, and the
        // direction reverses above it.
        let spec = sgns_fixture(0.1, 0.15, 2.0, 3.0);
        let below = (0.1f64 / 0.3).ln();
        for delta in [0.1, 0.5, 1.0, 2.0] {
            let up = loss_eval(&spec, below + delta, below, 0, 0).unwrap();
            let down = loss_eval(&spec, below - delta, below, 0, 0).unwrap();
            assert!(up > down, "delta {delta}: rise {up} not above fall {down}");
        }

        let up = loss_eval(&spec, 1.0, 0.0, 0, 0).unwrap();
        let down = loss_eval(&spec, -1.0, 0.0, 0, 0).unwrap();
        assert_relative_eq!(up, down, epsilon = 1e-12);

        let above = 0.4;
        let up = loss_eval(&spec, above + 1.0, above, 0, 0).unwrap();
        let down = loss_eval(&spec, above - 1.0, above, 0, 0).unwrap();
        assert!(up < down, "above zero the asymmetry flips: {up} vs {down}");
    }

    #[test]
    fn limit_gaps_shrink_toward_the_exponential_divergence() {
        let spec = sgns_fixture(0.1, 0.05, 2.0, 1.0);
        let w = (0.1f64 / 0.1).ln();
        let gaps = sgns_limit_check(&spec, w + 1.0, w, &[1.0, 10.0, 100.0, 1000.0]).unwrap();
        let frozen = [0.057_320_8, 0.020_728_8, 0.002_831_18, 0.000_293_988];
        for (gap, expect) in gaps.iter().zip(frozen) {
            assert!((gap - expect).abs() < 1e-7, "gap {gap} vs frozen {expect}");
        }
        for pair in gaps.windows(2) {
            assert!(pair[1] < pair[0], "gaps must shrink: {gaps:?}");
        }
        assert!(gaps[3] <= 1e-2);

        let at_minimum = sgns_limit_check(&spec, w, w, &[1.0, 10.0]).unwrap();
        assert_eq!(at_minimum, vec![0.0, 0.0]);
    }

    #[test]
    fn limit_holds_with_zero_target_probability() {
        // With p_t = 0 the divergence degenerates to
        // k·p_n·ln(e^x + k·p_n) and still converges to the exponential
        // divergence.
        let spec = sgns_fixture(0.0, 0.05, 2.0, 1.0);
        let gaps = sgns_limit_check(&spec, 1.0, 0.0, &[1.0, 10.0, 100.0, 1000.0]).unwrap();
        let frozen = [0.066_992_4, 0.029_245_4, 0.004_184_07, 0.000_436_771];
        for (gap, expect) in gaps.iter().zip(frozen) {
            assert!((gap - expect).abs() < 1e-7, "gap {gap} vs frozen {expect}");
        }
        assert!(gaps[3] <= 1e-2);
    }

    #[test]
    fn invalid_specs_and_probes_are_rejected() {
        assert!(matches!(
            LossSpec::glove(DMatrix::from_element(1, 1, 3.0), 0.0, 0.75),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            LossSpec::sgns(0.5, vec![0.1], vec![1.0], DMatrix::zeros(1, 1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            LossSpec::sgns(2.0, vec![0.0], vec![1.0], DMatrix::zeros(1, 1)),
            Err(Error::Data(_))
        ));
        let spec = sgns_fixture(0.1, 0.05, 2.0, 1.0);
        assert!(matches!(
            loss_eval(&spec, 1.0, f64::NAN, 0, 0),
            Err(Error::Computation(_))
        ));
        assert!(matches!(
            loss_eval(&spec, 1.0, 0.0, 3, 0),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            sgns_limit_check(&LossSpec::L2, 1.0, 0.0, &[1.0, 2.0]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            sgns_limit_check(&spec, 1.0, 0.0, &[10.0, 2.0]),
            Err(Error::Config(_))
        ));
        // The full-distribution check rejects a noise vector that does
        // not sum to 1, while pointwise probes accept it.
        assert!(matches!(spec.validate(1, 1), Err(Error::Data(_))));
        let proper = LossSpec::sgns(
            2.0,
            vec![0.4, 0.6],
            vec![5.0],
            DMatrix::from_element(2, 1, 0.5),
        )
        .unwrap();
        proper.validate(2, 1).unwrap();
        assert!(matches!(proper.validate(3, 1), Err(Error::Data(_))));
    }

    proptest! {
        /// Every loss is a Bregman divergence: non-negative everywhere,
        /// and the gradient carries the sign of v − w.
        #[test]
        fn losses_are_nonnegative_with_monotone_gradients(
            v in -5.0f64..5.0,
            w in -5.0f64..5.0,
            p_t in 0.0f64..1.0,
            p_n in 1e-3f64..0.5,
            k in 1.0f64..50.0,
        ) {
            let specs = [
                LossSpec::L2,
                LossSpec::glove_default(DMatrix::from_element(1, 1, 4.0)).unwrap(),
                sgns_fixture(p_t, p_n, k, 2.0),
            ];
            for spec in &specs {
                let loss = loss_eval(spec, v, w, 0, 0).unwrap();
                prop_assert!(loss >= 0.0);
                let grad = loss_grad(spec, v, w, 0, 0).unwrap();
                if v > w {
                    prop_assert!(grad >= 0.0);
                } else if v < w {
                    prop_assert!(grad <= 0.0);
                }
                if (v - w).abs() >= 1e-6 {
                    prop_assert!(loss > 0.0);
                }
            }
        }

        /// Around any target below the noise-odds point, overshooting
        /// costs strictly more than undershooting by the same amount —
        /// for every probability setup, since the divergence factors as
        /// a softplus Bregman divergence whose tilt is set by the sign
        /// of the target.
        #[test]
        fn negative_targets_penalize_overshooting_more(
            w in -5.0f64..-0.05,
            delta in 0.05f64..5.0,
            p_t in 0.0f64..1.0,
            p_n in 1e-3f64..0.5,
            k in 1.0f64..50.0,
        ) {
            let spec = sgns_fixture(p_t, p_n, k, 2.0);
            let up = loss_eval(&spec, w + delta, w, 0, 0).unwrap();
            let down = loss_eval(&spec, w - delta, w, 0, 0).unwrap();
            prop_assert!(up > down, "w {w} delta {delta}: {up} vs {down}");
        }
    }
}
