//! Statistical tests and fits used to verify the generative model and the
//! vector spaces built on top of it.
//!
//! * [`special`] — log-gamma, regularized incomplete gamma/beta functions,
//!   and the survival functions built from them.
//! * [`spearman`] — Spearman rank correlation with a two-sided t-test.
//! * [`powerlaw`] — discrete power-law tail fit (survival-form MLE over a
//!   Kolmogorov-Smirnov scan of tail cutoffs).
//! * [`chisq`] — five-category χ² goodness-of-fit test for an index-1 tail.
//! * [`independence`] — pairwise rank-correlation histograms across targets
//!   of a co-occurrence table.

pub mod chisq;
pub mod independence;
pub mod powerlaw;
pub mod spearman;
pub mod special;
