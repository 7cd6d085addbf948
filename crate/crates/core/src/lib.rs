//! A Euclidean picture of symbol detection.
//!
//! Symbols of a finite alphabet and channel observations are both mapped
//! into R^N so that the posterior probability of a symbol decays as
//! `exp(-d²)` in the distance between the two image points. MAP detection
//! becomes nearest-neighbor search, repeated channel uses add up as vector
//! sums, and expected squared distances double as code-design metrics.
//!
//! - [`channel`]: alphabets, priors, and the discrete / Gaussian /
//!   Laplacian channel families with their posteriors and samplers.
//! - [`embedding`]: the maps into the zero-sum hyperplane and the
//!   posterior-from-distance reconstruction.
//! - [`sequence`]: codeword stacking, sequence posteriors, and the
//!   repetition sum.
//! - [`detect`]: MAP decisions, decision regions, and a dual-path error
//!   simulator.
//! - [`code_distance`]: expected squared-distance metrics with exact,
//!   quadrature, and Monte Carlo estimators.
//! - [`figure`]: plane projections and deterministic SVG/CSV export.

#![forbid(unsafe_code)]

pub mod channel;
pub mod code_distance;
pub mod detect;
pub mod embedding;
pub mod error;
pub mod figure;
pub mod numfmt;
pub mod seed;
pub mod sequence;
pub mod tolerance;

pub use channel::{
    Alphabet, AwgnChannel, Channel, ChannelSpec, DiscreteChannel, LaplaceChannel, Observation,
    Posterior, Prior, Violation,
};
pub use embedding::EmbeddedPoint;
pub use error::Error;
pub use seed::SeedStream;
