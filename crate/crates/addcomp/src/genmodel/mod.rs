//! Pitman-Yor generative machinery for synthesizing Zipfian data.
//!
//! * [`sample_pitman_yor`] — the plain Chinese-restaurant construction of
//!   PY(α, θ): Zipfian lexicons with power-law tails of index 1/α.
//! * [`sample_mhpy`] — a two-level "reference" process in which word
//!   frequency and conditional (per-context) frequency are coupled; it
//!   reduces to a word-level PY process on distinct references, and to a
//!   reference-level PY process within any single word.
//! * [`synth_cooc`] — assembles per-target MHPY draws over a shared
//!   Zipfian base lexicon into a [`CoocTable`](crate::corpus::CoocTable)
//!   with planted collocation strengths, so that the count-partition
//!   identity holds exactly and composition-bias experiments run without
//!   a licensed corpus.
//! * [`planted_nearfar_corpus`] — a token emitter producing sentences with
//!   order-asymmetric bigrams for Near-far experiments and CLI tests.
//! * [`zipf_diagnostic`] — rank/frequency diagnostics for any count
//!   vector.
//!
//! Every sampler consumes a fixed number of uniforms per step from a
//! named [`SeedTree`](crate::rng::SeedTree) stream, so identical seeds
//! reproduce identical states bit for bit.

mod crp;
mod diagnostic;
mod emit;
mod mhpy;
mod synth;

pub use crp::{sample_pitman_yor, CrpState};
pub use diagnostic::{
    growth_series, zipf_diagnostic, zipf_diagnostic_from_probs, DiagnosticSeries,
};
pub use mhpy::{sample_mhpy, sample_mhpy_traced, MhpyParams, MhpyState, MhpyTrace, StepKind};
pub use synth::{synth_cooc, synth_cooc_with, SynthConfig};
pub use emit::{planted_nearfar_corpus, PlantedCorpus};

use crate::error::{Error, Result};

/// Hyper-parameters of a Pitman-Yor process: discount α ∈ (0, 1) and
/// concentration θ > −α.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PYParams {
    pub alpha: f64,
    pub theta: f64,
}

impl PYParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        let params = Self { alpha, theta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!(
                "Pitman-Yor discount must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.theta > -self.alpha) || !self.theta.is_finite() {
            return Err(Error::Config(format!(
                "Pitman-Yor concentration must exceed -alpha = {}, got {}",
                -self.alpha, self.theta
            )));
        }
        Ok(())
    }
}
