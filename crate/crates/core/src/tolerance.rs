//! Numeric tolerances, all in one place.
//!
//! Exact algebraic identities get absolute tolerances scaled by magnitude;
//! statistical estimators are gated in units of their own standard error.

/// Probability vectors must sum to one within this bound.
pub const SUM_TO_ONE_ABS: f64 = 1e-12;

/// Transition-matrix rows may drift from one by at most this.
pub const ROW_SUM_ABS: f64 = 1e-9;

/// Coordinate sums of embedded points, scaled by `max(1, |coord|_max)`.
pub const PLANE_SUM_ABS: f64 = 1e-9;

/// Identities that hold to rounding error alone.
pub const EXACT_ABS: f64 = 1e-12;

/// Posterior round-trip through the embedding, per component.
pub const ROUND_TRIP_ABS: f64 = 1e-10;

/// Repetition posterior vs. per-use product, per component.
pub const REPETITION_ABS: f64 = 1e-10;

/// Sequence posterior vs. product form, relative.
pub const SEQUENCE_REL: f64 = 1e-10;

/// Two distances within this relative gap count as a decision tie.
pub const TIE_REL: f64 = 1e-9;

/// Locus segments stop counting as parallel above this residual.
pub const COLLINEAR_REL: f64 = 1e-9;

/// Plane projection must preserve distances and round-trip points to this.
pub const PROJECTION_ABS: f64 = 1e-9;

/// Orthonormality defect allowed in the plane basis.
pub const BASIS_ABS: f64 = 1e-12;

/// A prior counts as uniform when every component is within this of 1/N.
pub const UNIFORM_PRIOR_ABS: f64 = 1e-12;

/// Codeword distance must equal the sum of its per-position terms to this.
pub const DECOMPOSITION_ABS: f64 = 1e-9;

/// Probability mass the truncated quadrature domain may ignore.
pub const TRUNCATION_MASS: f64 = 1e-10;

/// Monte Carlo cross-checks pass within this many standard errors.
pub const MC_SIGMA_GATE: f64 = 4.0;
