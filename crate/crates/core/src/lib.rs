//! Ordinal pattern statistics of 2x2 windows in grayscale images.
//!
//! Every 2x2 window of an image (optionally with its four pixels `d` steps
//! apart) is replaced by the ranks of its values. The 24 resulting ordinal
//! patterns fall into three types of eight patterns each:
//!
//! * type I: both rows and both columns change in the same direction (smooth),
//! * type II: parallel change along one axis only (edges, curves),
//! * type III: one diagonal dominates the other (saddles, noise).
//!
//! From the type frequencies `q1, q2, q3` we derive smoothness
//! `tau = q1 - 1/3` and curve structure `kappa = q2 - q3`; the full pattern
//! distribution gives permutation entropy and Jensen-Shannon complexity.
//!
//! Modules:
//!
//! * [`pattern`]: tie breaking, ranking, type classification, field extraction
//! * [`stats`]: histograms, `tau`/`kappa`, entropy, complexity, the `analyze` pipeline
//! * [`theory`]: exact white-noise statistics from all 9! orderings of a 3x3 block
//! * [`synth`]: seeded test images (white noise, checkerboard, ramps, fractal surfaces)
//! * [`ingest`]: image and matrix decoding, grayscale conversion, normalization, tiling
//! * [`par`]: parallel / sequential execution switch

pub mod error;
pub mod grid;
pub mod ingest;
pub mod par;
pub mod pattern;
pub mod stats;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use grid::Grid;
pub use par::Execution;
pub use pattern::{
    break_ties, classify_type, extract_fields, pattern_index, rank_window, Delay, PatternField,
    RankQuad, TieBreakMode, TieBreakPolicy, TypeField, TypeLabel,
};
pub use stats::{analyze, FeatureVector, PatternHistogram, TypeHistogram};
