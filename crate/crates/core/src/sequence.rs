//! Multi-use extensions: codeword stacking, per-use concatenation, and the
//! repetition sum that collapses M uses back into the base plane.

use crate::channel::{Channel, Observation, Posterior, Prior};
use crate::embedding::{self, EmbeddedPoint};
use crate::error::Error;

/// Codeword enumerations above this count are refused outright.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Observations from M uses of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceObservation {
    observations: Vec<Observation>,
}

impl SequenceObservation {
    pub fn new(observations: Vec<Observation>) -> Result<Self, Error> {
        if observations.is_empty() {
            return Err(Error::InvalidArgument(
                "a sequence needs at least one observation".into(),
            ));
        }
        Ok(Self { observations })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// A length-M word of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    indices: Vec<usize>,
}

impl Codeword {
    pub fn new(indices: Vec<usize>, alphabet_size: usize) -> Result<Self, Error> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument(
                "a codeword needs at least one symbol".into(),
            ));
        }
        for &index in &indices {
            if index >= alphabet_size {
                return Err(Error::IndexOutOfRange {
                    index,
                    size: alphabet_size,
                });
            }
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Per-use image blocks, read together as one point of R^(N·M). The
/// squared distance between two stacks is the sum of the per-block squared
/// distances, exactly as for the concatenated coordinates.
#[derive(Debug, Clone)]
pub struct StackedPoint {
    blocks: Vec<EmbeddedPoint>,
}

impl StackedPoint {
    pub fn blocks(&self) -> &[EmbeddedPoint] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Concatenated coordinates, block after block.
    pub fn coords(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.coords().iter().copied())
            .collect()
    }

    pub fn squared_distance_to(&self, other: &StackedPoint) -> Result<f64, Error> {
        if self.block_count() != other.block_count() {
            return Err(Error::DimensionMismatch {
                left: self.block_count(),
                right: other.block_count(),
            });
        }
        let mut total = 0.0;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            total += a.squared_distance_to(b)?;
        }
        Ok(total)
    }

    pub fn distance_to(&self, other: &StackedPoint) -> Result<f64, Error> {
        Ok(self.squared_distance_to(other)?.sqrt())
    }
}

/// Stacks the per-symbol images of a codeword.
pub fn embed_codeword(
    alphabet: &crate::channel::Alphabet,
    codeword: &Codeword,
) -> Result<StackedPoint, Error> {
    let blocks = codeword
        .indices()
        .iter()
        .enumerate()
        .map(|(position, &index)| {
            embedding::embed_symbol(alphabet, index).map_err(|e| e.at(position))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StackedPoint { blocks })
}

/// Stacks the per-use observation images; an erasure is reported together
/// with the position that produced it.
pub fn embed_sequence(
    channel: &Channel,
    prior: &Prior,
    sequence: &SequenceObservation,
) -> Result<StackedPoint, Error> {
    let blocks = sequence
        .observations()
        .iter()
        .enumerate()
        .map(|(position, observation)| {
            channel
                .posterior(prior, observation)
                .and_then(|p| embedding::embed_observation(&p))
                .map_err(|e| e.at(position))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StackedPoint { blocks })
}

/// Posterior probability of one codeword given the received sequence,
/// computed geometrically: a softmax of negative stacked squared distances
/// over every possible codeword of the same length.
///
/// The normalization enumerates all N^M words, capped at
/// [`ENUMERATION_CAP`].
pub fn sequence_posterior(
    channel: &Channel,
    prior: &Prior,
    sequence: &SequenceObservation,
    codeword: &Codeword,
) -> Result<f64, Error> {
    let uses = sequence.len();
    if codeword.len() != uses {
        return Err(Error::DimensionMismatch {
            left: codeword.len(),
            right: uses,
        });
    }
    let n = channel.alphabet().size();
    let count = (n as u128)
        .checked_pow(uses as u32)
        .unwrap_or(u128::MAX);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            count,
            cap: ENUMERATION_CAP,
        });
    }
    let received = embed_sequence(channel, prior, sequence)?;
    let vertices = embedding::symbol_points(channel.alphabet());
    // Squared distance from each received block to each symbol image.
    let block_sq: Vec<Vec<f64>> = received
        .blocks()
        .iter()
        .map(|block| {
            vertices
                .iter()
                .map(|x| block.squared_distance_to(x).expect("equal dimensions"))
                .collect()
        })
        .collect();
    let word_weight = |word: &[usize]| -> f64 {
        -word
            .iter()
            .enumerate()
            .map(|(position, &index)| block_sq[position][index])
            .sum::<f64>()
    };
    let mut weights = Vec::with_capacity(count as usize);
    let mut word = vec![0usize; uses];
    loop {
        weights.push(word_weight(&word));
        // Odometer over the full codebook.
        let mut position = 0;
        while position < uses {
            word[position] += 1;
            if word[position] < n {
                break;
            }
            word[position] = 0;
            position += 1;
        }
        if position == uses {
            break;
        }
    }
    let target = word_weight(codeword.indices());
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = max + weights.iter().map(|w| (w - max).exp()).sum::<f64>().ln();
    Ok((target - log_norm).exp())
}

/// Sum of the per-use images: the repetition representative back in the
/// base plane. Only valid when the transmitted symbol is equally likely,
/// so a non-uniform prior is rejected.
pub fn aggregate_repetition(
    channel: &Channel,
    prior: &Prior,
    sequence: &SequenceObservation,
) -> Result<EmbeddedPoint, Error> {
    if !prior.is_uniform() {
        return Err(Error::NonUniformPrior);
    }
    let stacked = embed_sequence(channel, prior, sequence)?;
    let mut coords = vec![0.0; channel.alphabet().size()];
    for block in stacked.blocks() {
        for (c, b) in coords.iter_mut().zip(block.coords()) {
            *c += b;
        }
    }
    Ok(EmbeddedPoint::from_coords(coords).expect("sum of zero-sum points"))
}

/// Posterior over symbols after M repetitions of one equally likely
/// symbol: a softmax of `-‖Σ_j y_j − x_i‖²`. Equals the normalized
/// product of the per-use posteriors.
pub fn repetition_posterior(
    channel: &Channel,
    sequence: &SequenceObservation,
) -> Result<Posterior, Error> {
    let prior = Prior::uniform(channel.alphabet().size());
    let aggregated = aggregate_repetition(channel, &prior, sequence)?;
    embedding::reconstruct_posterior(&aggregated, channel.alphabet())
}
