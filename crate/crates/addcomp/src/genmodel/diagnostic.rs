//! Rank/frequency and growth diagnostics for sampled lexicons.

use super::{CrpState, PYParams};
use crate::error::{Error, Result};
use crate::numeric::loglog_slope;
use crate::rng::SeedTree;

/// Sample points of a scalar statistic indexed by rank or by step,
/// optionally with the log-log regression slope over a designated band.
///
/// All values are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSeries {
    /// `(index, value)` pairs; the index is a rank or a step count.
    pub points: Vec<(f64, f64)>,
    /// Log-log slope of frequency against rank over the requested band,
    /// when the band holds at least two usable points.
    pub slope: Option<f64>,
}

impl DiagnosticSeries {
    fn checked(points: Vec<(f64, f64)>, slope: Option<f64>) -> Result<Self> {
        if let Some(&(i, v)) = points
            .iter()
            .find(|(i, v)| !i.is_finite() || !v.is_finite())
        {
            return Err(Error::Computation(format!(
                "diagnostic series contains a non-finite point ({i}, {v})"
            )));
        }
        Ok(Self { points, slope })
    }
}

/// Rank/frequency diagnostic of a count vector.
///
/// Counts are sorted descending and normalized to probabilities `p_i`;
/// the series holds `p_i · i · ln n` per rank `i` (its limit is 1 for an
/// ideal Zipfian lexicon), and `slope` is the log-log regression of `p_i`
/// against `i` over the rank band (≈ −1 for Zipfian data, 0 for uniform).
///
/// Requires at least 10 types with a positive total count.
pub fn zipf_diagnostic(counts: &[u64], band: (usize, usize)) -> Result<DiagnosticSeries> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Data("rank diagnostic needs a nonzero total".into()));
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let probs: Vec<f64> = sorted.iter().map(|&c| c as f64 / total as f64).collect();
    zipf_diagnostic_from_probs(&probs, band)
}

/// [`zipf_diagnostic`] over an explicit probability vector, assumed
/// sorted in decreasing order. Split out so exact (non-integer) Zipf
/// weights can be diagnosed without rounding through counts.
pub fn zipf_diagnostic_from_probs(probs: &[f64], band: (usize, usize)) -> Result<DiagnosticSeries> {
    let n = probs.len();
    if n < 10 {
        return Err(Error::Data(format!(
            "rank diagnostic needs at least 10 types, got {n}"
        )));
    }
    if band.0 < 1 || band.0 >= band.1 {
        return Err(Error::Config(format!(
            "rank band must satisfy 1 <= lo < hi, got [{}, {}]",
            band.0, band.1
        )));
    }
    let ln_n = (n as f64).ln();
    let points: Vec<(f64, f64)> = probs
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let rank = (idx + 1) as f64;
            (rank, p * rank * ln_n)
        })
        .collect();
    let band_points: Vec<(f64, f64)> = probs
        .iter()
        .enumerate()
        .filter(|(idx, _)| (band.0..=band.1).contains(&(idx + 1)))
        .map(|(idx, &p)| ((idx + 1) as f64, p))
        .collect();
    let slope = loglog_slope(&band_points);
    DiagnosticSeries::checked(points, slope)
}

/// Distinct-word growth diagnostic of a PY(α, θ) restaurant: the series
/// `C / N^{1/α}` recorded at each checkpoint (a step count), whose
/// stabilization reflects the almost-sure convergence of the type/token
/// growth rate.
///
/// Checkpoints must be strictly increasing and start at 1 or later; the
/// run length is the last checkpoint.
pub fn growth_series(params: PYParams, checkpoints: &[u64], seed: u64) -> Result<DiagnosticSeries> {
    if checkpoints.is_empty() || checkpoints[0] == 0 {
        return Err(Error::Config(
            "growth series needs checkpoints starting at step 1 or later".into(),
        ));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "growth-series checkpoints must be strictly increasing".into(),
        ));
    }
    params.validate()?;
    let mut rng = SeedTree::new(seed).stream("pitman-yor");
    let mut state = CrpState::new(params, 1024)?;
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for step in 1..=checkpoints[checkpoints.len() - 1] {
        state.step(&mut rng);
        if step == checkpoints[next] {
            let c = state.total() as f64;
            let n = state.n_words() as f64;
            points.push((step as f64, c / n.powf(1.0 / params.alpha)));
            next += 1;
        }
    }
    DiagnosticSeries::checked(points, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_zipf_weights_give_a_flat_series_at_the_harmonic_ratio() {
        // With p_i = (1/i)/H_n and n = 10^4, every point of the series
        // equals ln n / H_n; the frozen value comes from harmonic-number
        // arithmetic done independently of this code.
        let n = 10_000usize;
        let h_n: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        let probs: Vec<f64> = (1..=n).map(|i| 1.0 / (i as f64 * h_n)).collect();
        let diag = zipf_diagnostic_from_probs(&probs, (10, 1000)).unwrap();
        assert_eq!(diag.points.len(), n);
        for &(_, v) in &diag.points {
            assert!((v - 0.941020749921656).abs() < 1e-12, "point {v}");
        }
        let slope = diag.slope.unwrap();
        assert!((slope - (-1.0)).abs() < 1e-9, "slope {slope}");
    }

    #[test]
    fn uniform_counts_have_zero_slope() {
        let counts = vec![7u64; 50];
        let diag = zipf_diagnostic(&counts, (2, 40)).unwrap();
        assert!(diag.slope.unwrap().abs() < 1e-12);
        // p_i · i · ln n grows linearly in rank for a uniform lexicon —
        // the series itself still flags the shape.
        assert!((diag.points[0].1 - (50f64.ln() / 50.0)).abs() < 1e-12);
    }

    #[test]
    fn counts_version_matches_probs_version_and_sorts_input() {
        let counts = vec![1u64, 8, 2, 16, 4, 32, 3, 64, 5, 128];
        let total: u64 = counts.iter().sum();
        let mut sorted = counts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let probs: Vec<f64> = sorted.iter().map(|&c| c as f64 / total as f64).collect();
        let a = zipf_diagnostic(&counts, (1, 9)).unwrap();
        let b = zipf_diagnostic_from_probs(&probs, (1, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_or_degenerate_inputs_are_rejected() {
        assert!(matches!(
            zipf_diagnostic(&[5; 9], (1, 5)),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            zipf_diagnostic(&[0; 12], (1, 5)),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            zipf_diagnostic(&[5; 12], (0, 5)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            zipf_diagnostic(&[5; 12], (5, 5)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn growth_series_records_checkpoints_in_order() {
        let params = PYParams::new(0.95, 1.0).unwrap();
        let series = growth_series(params, &[10, 100, 1000], 11).unwrap();
        assert_eq!(series.points.len(), 3);
        assert_eq!(series.points[0].0, 10.0);
        assert_eq!(series.points[2].0, 1000.0);
        assert!(series.points.iter().all(|&(_, v)| v > 0.0));
        assert_eq!(series.slope, None);
        // Checkpoint prefix of a longer run matches the shorter run.
        let longer = growth_series(params, &[10, 100, 1000, 2000], 11).unwrap();
        assert_eq!(&longer.points[..3], &series.points[..]);

        assert!(matches!(
            growth_series(params, &[], 1),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            growth_series(params, &[0, 5], 1),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            growth_series(params, &[5, 5], 1),
            Err(Error::Config(_))
        ));
    }
}
