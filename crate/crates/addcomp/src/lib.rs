//! A laboratory for *additive composition* of distributional word vectors.
//!
//! The crate builds sparse co-occurrence statistics from tokenized corpora
//! (ordinary sliding windows, order-sensitive Near-far labeled windows, and
//! exact count-partition targets), turns them into "natural vectors" through
//! a power-family entry transform with three normalization passes, and
//! measures how well a phrase vector is approximated by the average of its
//! word vectors — together with the theoretical bound on that approximation
//! error in terms of collocation probabilities.
//!
//! Around that core sit the verification tools used throughout:
//!
//! * [`genmodel`] — Pitman-Yor / hierarchical Pitman-Yor samplers that
//!   synthesize Zipfian lexicons and co-occurrence tables with planted
//!   collocation structure, plus Zipf diagnostics.
//! * [`stats`] — Spearman correlation with significance, power-law tail
//!   fitting (MLE + Kolmogorov-Smirnov scan), and the five-category χ² test
//!   for an index-1 tail.
//! * [`reduce`] — randomized truncated SVD, embedding extraction, and the
//!   L2 / weighted-L2 / negative-sampling Bregman loss family with a small
//!   SGD factorizer.
//! * [`eval`] — phrase-similarity and word-analogy harnesses.
//!
//! Everything is deterministic: all randomness flows from a single `u64`
//! seed through named substreams (see [`rng`]), and report writers format
//! floats with a fixed width so identical configurations reproduce
//! byte-identical files.

pub mod composition;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod genmodel;
pub mod numeric;
pub mod reduce;
pub mod rng;
pub mod stats;
pub mod vectors;

pub use error::{Error, Result};
