//! Reference-free machine-translation quality evaluation.
//!
//! The core loop: translate a document segment by segment, then measure how
//! often a judge prefers the translation's original segment order over random
//! permutations of it. Scores above 0.5 indicate order-sensitive (and thus
//! hard-to-hallucinate) translations. The crate also ships the
//! reference-based baseline scorer the metric is validated against,
//! correlation/aggregation analytics, a constructed-language corpus
//! generator, and Monte Carlo checks of the observational-learning bounds
//! that motivate the metric.

pub mod analysis;
pub mod backend;
pub mod conlang;
pub mod corpus;
pub mod judge;
pub mod manifest;
pub mod permute;
pub mod scorer;
pub mod theorysim;
pub mod translator;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
