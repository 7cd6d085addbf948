//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while building or using a channel
/// representation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet must contain at least two distinct symbols")]
    AlphabetTooSmall,

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("symbol index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("observation `{0}` is not a listed output of this channel")]
    UnknownObservation(String),

    #[error("observation type does not match the channel's observation space")]
    ObservationKind,

    /// The zero-posterior restriction: an observation that rules a symbol
    /// out entirely has no finite image point.
    #[error(
        "posterior component {index} is zero; an observation that rules out \
         a symbol cannot be represented"
    )]
    Erasure { index: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value at component {0}")]
    NonFinite(usize),

    #[error("coordinates sum to {sum:.3e}, not zero; point is outside the zero-sum hyperplane")]
    NotInPlane { sum: f64 },

    #[error("probability component {index} is {value}; must be strictly positive")]
    NonPositiveProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("repetition aggregation requires a uniform prior")]
    NonUniformPrior,

    #[error("codeword enumeration would visit {count} words, above the cap of {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error(
        "truncated integration domain misses an estimated {mass:.3e} of the \
         conditional probability mass"
    )]
    TruncationMass { mass: f64 },

    #[error("at position {position}: {source}")]
    AtPosition {
        position: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid channel spec: {0}")]
    Spec(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// Tags an error with the sequence or codeword position it came from.
    pub(crate) fn at(self, position: usize) -> Error {
        Error::AtPosition {
            position,
            source: Box::new(self),
        }
    }

    /// True when the root cause is the zero-posterior restriction.
    pub fn is_erasure(&self) -> bool {
        match self {
            Error::Erasure { .. } => true,
            Error::AtPosition { source, .. } => source.is_erasure(),
            _ => false,
        }
    }
}
