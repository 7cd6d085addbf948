//! Expected squared-distance metrics between symbols and codewords.
//!
//! The symbol metric is the expected squared distance from the observation
//! image (conditioned on one transmitted symbol) to another symbol's
//! image; the codeword metric is its sum over positions. Discrete
//! channels admit an exact finite sum; the additive families get a
//! composite quadrature plus a seeded Monte Carlo cross-check.

use rayon::prelude::*;

use crate::channel::{Channel, DiscreteChannel, Observation, Prior};
use crate::embedding;
use crate::error::Error;
use crate::seed::SeedStream;
use crate::sequence::Codeword;
use crate::tolerance;

/// Estimator choice for the distance expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Finite sum over a discrete channel's observations.
    Exact,
    /// Seeded sampling; valid on every channel family.
    MonteCarlo { samples: u64, seed: u64 },
    /// Composite Simpson integration on the additive-noise families.
    Quadrature { points: usize },
}

impl Estimator {
    pub fn method_name(&self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::MonteCarlo { .. } => "monte_carlo",
            Estimator::Quadrature { .. } => "quadrature",
        }
    }
}

/// One estimate with its statistical uncertainty, when the estimator has
/// one.
#[derive(Debug, Clone, Copy)]
pub struct DistanceEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Monte Carlo mean with its standard error and the count of rejected
/// (erasure) draws.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub rejected: u64,
}

/// Quadrature value with a Richardson-style error estimate against the
/// half-resolution rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Expected squared distance from the observation image, given symbol `i`
/// transmitted, to the image of symbol `j`; exact finite sum over the
/// observation labels.
pub fn symbol_distance_exact(
    channel: &DiscreteChannel,
    prior: &Prior,
    i: usize,
    j: usize,
) -> Result<f64, Error> {
    channel.alphabet().check_index(i)?;
    channel.alphabet().check_index(j)?;
    let target = embedding::embed_symbol(channel.alphabet(), j)?;
    let row = channel.transition_row(i).to_vec();
    let labels = channel.observation_labels().to_vec();
    let channel = Channel::Discrete(channel.clone());
    let mut total = 0.0;
    for (label, weight) in labels.iter().zip(row) {
        let posterior = channel.posterior(prior, &Observation::Label(label.clone()))?;
        let point = embedding::embed_observation(&posterior)?;
        total += weight * point.squared_distance_to(&target)?;
    }
    Ok(total)
}

const MC_BATCH: u64 = 8192;

/// The same expectation by seeded sampling. Deterministic per seed and
/// independent of thread count: fixed batches on worker streams
/// `seed ^ batch`, partial sums reduced in batch order.
///
/// Draws whose posterior underflows are rejected and counted; they cannot
/// occur on the supported families with positive densities.
pub fn symbol_distance_mc(
    channel: &Channel,
    prior: &Prior,
    i: usize,
    j: usize,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, Error> {
    if samples < 1_000 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs at least 1000 samples".into(),
        ));
    }
    channel.alphabet().check_index(i)?;
    channel.alphabet().check_index(j)?;
    let target = embedding::embed_symbol(channel.alphabet(), j)?;
    let batches = samples.div_ceil(MC_BATCH);
    let partials: Result<Vec<(f64, f64, u64, u64)>, Error> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let lo = batch * MC_BATCH;
            let hi = ((batch + 1) * MC_BATCH).min(samples);
            let mut rng = SeedStream::worker(seed, batch);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut accepted = 0u64;
            let mut rejected = 0u64;
            for _ in lo..hi {
                let observation = channel.sample(i, &mut rng)?;
                let point = match channel
                    .posterior(prior, &observation)
                    .and_then(|p| embedding::embed_observation(&p))
                {
                    Ok(point) => point,
                    Err(e) if e.is_erasure() => {
                        rejected += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let d2 = point.squared_distance_to(&target)?;
                sum += d2;
                sum_sq += d2 * d2;
                accepted += 1;
            }
            Ok((sum, sum_sq, accepted, rejected))
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    for (s, q, a, r) in partials? {
        sum += s;
        sum_sq += q;
        accepted += a;
        rejected += r;
    }
    if accepted < 2 {
        return Err(Error::InvalidArgument(
            "all Monte Carlo draws were rejected".into(),
        ));
    }
    let n = accepted as f64;
    let mean = sum / n;
    let variance = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        value: mean,
        std_error: (variance / n).sqrt(),
        rejected,
    })
}

/// The same expectation by composite Simpson integration over a truncated
/// domain around the conditioning symbol (8 standard deviations for the
/// Gaussian, 25 scales for the Laplacian), split at every symbol value so
/// each segment is smooth.
pub fn symbol_distance_quadrature(
    channel: &Channel,
    prior: &Prior,
    i: usize,
    j: usize,
    points: usize,
) -> Result<QuadratureEstimate, Error> {
    if points < 64 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least 64 points".into(),
        ));
    }
    channel.alphabet().check_index(i)?;
    channel.alphabet().check_index(j)?;
    let (values, half_width, tail_mass) = match channel {
        Channel::Awgn(c) => {
            let s2 = c.noise_variance();
            if !s2.is_finite() || s2 <= 0.0 {
                return Err(Error::InvalidArgument(
                    "noise variance must be positive; run validate()".into(),
                ));
            }
            let z = 8.0_f64;
            // Two-sided Gaussian tail bound: 2 * phi(z) / z.
            let tail = 2.0 * (-z * z / 2.0).exp()
                / ((2.0 * std::f64::consts::PI).sqrt() * z);
            (c.values(), z * c.noise_variance().sqrt(), tail)
        }
        Channel::Laplace(c) => {
            let scale = c.scale();
            if !scale.is_finite() || scale <= 0.0 {
                return Err(Error::InvalidArgument(
                    "scale must be positive; run validate()".into(),
                ));
            }
            // Mass beyond 25 scales on both sides together is e^-25.
            (c.values(), 25.0 * c.scale(), (-25.0_f64).exp())
        }
        Channel::Discrete(_) => {
            return Err(Error::InvalidArgument(
                "quadrature applies to the additive-noise families; use the exact sum".into(),
            ))
        }
    };
    if tail_mass > tolerance::TRUNCATION_MASS {
        return Err(Error::TruncationMass { mass: tail_mass });
    }
    let center = values[i];
    let lo = center - half_width;
    let hi = center + half_width;
    let mut knots = vec![lo];
    let mut interior: Vec<f64> = values.iter().copied().filter(|v| *v > lo && *v < hi).collect();
    interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
    interior.dedup();
    knots.extend(interior);
    knots.push(hi);

    let target = embedding::embed_symbol(channel.alphabet(), j)?;
    let mut integrand = |y: f64| -> Result<f64, Error> {
        let density = conditional_density(channel, i, y);
        if density == 0.0 {
            return Ok(0.0);
        }
        let posterior = channel.posterior(prior, &Observation::Value(y))?;
        let point = embedding::embed_observation(&posterior)?;
        Ok(density * point.squared_distance_to(&target)?)
    };

    let total_len = hi - lo;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for window in knots.windows(2) {
        let (a, b) = (window[0], window[1]);
        let share = ((points as f64) * (b - a) / total_len).ceil() as usize;
        let n_fine = share.max(4).div_ceil(2) * 2;
        let n_coarse = (n_fine / 2).max(2).div_ceil(2) * 2;
        fine += simpson(&mut integrand, a, b, n_fine)?;
        coarse += simpson(&mut integrand, a, b, n_coarse)?;
    }
    Ok(QuadratureEstimate {
        value: fine,
        // Simpson is fourth order; halving the step scales the error by 16.
        error_estimate: (fine - coarse).abs() / 15.0,
    })
}

fn conditional_density(channel: &Channel, symbol: usize, y: f64) -> f64 {
    match channel {
        Channel::Awgn(c) => {
            let s2 = c.noise_variance();
            let d = y - c.values()[symbol];
            (-d * d / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt()
        }
        Channel::Laplace(c) => {
            let scale = c.scale();
            let d = (y - c.values()[symbol]).abs();
            (-d / scale).exp() / (2.0 * scale)
        }
        Channel::Discrete(_) => unreachable!("density channels only"),
    }
}

fn simpson(
    f: &mut impl FnMut(f64) -> Result<f64, Error>,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64, Error> {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut total = f(a)? + f(b)?;
    for k in 1..n {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        total += weight * f(a + k as f64 * h)?;
    }
    Ok(total * h / 3.0)
}

/// Runs the chosen estimator for one symbol pair.
pub fn symbol_distance(
    channel: &Channel,
    prior: &Prior,
    i: usize,
    j: usize,
    estimator: &Estimator,
) -> Result<DistanceEstimate, Error> {
    match estimator {
        Estimator::Exact => match channel {
            Channel::Discrete(c) => Ok(DistanceEstimate {
                value: symbol_distance_exact(c, prior, i, j)?,
                std_error: None,
            }),
            _ => Err(Error::InvalidArgument(
                "the exact sum needs a discrete channel; use quadrature or Monte Carlo".into(),
            )),
        },
        Estimator::MonteCarlo { samples, seed } => {
            let est = symbol_distance_mc(channel, prior, i, j, *samples, *seed)?;
            Ok(DistanceEstimate {
                value: est.value,
                std_error: Some(est.std_error),
            })
        }
        Estimator::Quadrature { points } => {
            let est = symbol_distance_quadrature(channel, prior, i, j, *points)?;
            Ok(DistanceEstimate {
                value: est.value,
                std_error: None,
            })
        }
    }
}

/// All pairwise symbol distances under one estimator. Monte Carlo entries
/// draw from per-entry streams `seed ^ ((i·N + j) << 32)`; the shift keeps
/// the entry id clear of the low bits that index batches inside the
/// estimator.
#[derive(Debug, Clone)]
pub struct SymbolDistanceTable {
    pub size: usize,
    /// Row-major `d(i, j)`: transmit `i`, measure against `j`.
    pub values: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub estimator: Estimator,
}

impl SymbolDistanceTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }
}

pub fn symbol_distance_table(
    channel: &Channel,
    prior: &Prior,
    estimator: &Estimator,
) -> Result<SymbolDistanceTable, Error> {
    let n = channel.alphabet().size();
    let mut values = vec![0.0; n * n];
    let mut std_errors = vec![0.0; n * n];
    let mut any_error = false;
    for i in 0..n {
        for j in 0..n {
            let entry = match estimator {
                Estimator::MonteCarlo { samples, seed } => Estimator::MonteCarlo {
                    samples: *samples,
                    seed: seed ^ (((i * n + j) as u64) << 32),
                },
                other => *other,
            };
            let est = symbol_distance(channel, prior, i, j, &entry)?;
            values[i * n + j] = est.value;
            if let Some(se) = est.std_error {
                std_errors[i * n + j] = se;
                any_error = true;
            }
        }
    }
    Ok(SymbolDistanceTable {
        size: n,
        values,
        std_errors: any_error.then_some(std_errors),
        estimator: *estimator,
    })
}

/// A codeword distance with its per-position decomposition retained.
#[derive(Debug, Clone)]
pub struct CodewordDistance {
    pub value: f64,
    pub std_error: Option<f64>,
    pub decomposition: Vec<f64>,
}

/// Codeword metric: the sum of per-position symbol distances. Estimator
/// failures carry the offending position; Monte Carlo positions draw from
/// streams `seed ^ (position << 32)`, shifted clear of the batch indices
/// so no two positions ever share a stream.
pub fn codeword_distance(
    channel: &Channel,
    prior: &Prior,
    first: &Codeword,
    second: &Codeword,
    estimator: &Estimator,
) -> Result<CodewordDistance, Error> {
    if first.len() != second.len() {
        return Err(Error::DimensionMismatch {
            left: first.len(),
            right: second.len(),
        });
    }
    let mut decomposition = Vec::with_capacity(first.len());
    let mut variance = 0.0;
    let mut has_error = false;
    for (position, (&i, &j)) in first
        .indices()
        .iter()
        .zip(second.indices())
        .enumerate()
    {
        let entry = match estimator {
            Estimator::MonteCarlo { samples, seed } => Estimator::MonteCarlo {
                samples: *samples,
                seed: seed ^ ((position as u64) << 32),
            },
            other => *other,
        };
        let est =
            symbol_distance(channel, prior, i, j, &entry).map_err(|e| e.at(position))?;
        decomposition.push(est.value);
        if let Some(se) = est.std_error {
            variance += se * se;
            has_error = true;
        }
    }
    Ok(CodewordDistance {
        value: decomposition.iter().sum(),
        std_error: has_error.then(|| variance.sqrt()),
        decomposition,
    })
}

/// Pairwise codeword distances over a codebook, with the closest
/// off-diagonal pair.
#[derive(Debug, Clone)]
pub struct CodebookTable {
    pub size: usize,
    /// Row-major `d(row, col)`: transmit `row`, measure against `col`.
    pub values: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    /// Off-diagonal argmin, lexicographically first on ties.
    pub min_pair: (usize, usize),
    pub estimator: Estimator,
}

impl CodebookTable {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }
}

pub fn codebook_table(
    channel: &Channel,
    prior: &Prior,
    codebook: &[Codeword],
    estimator: &Estimator,
) -> Result<CodebookTable, Error> {
    if codebook.len() < 2 {
        return Err(Error::InvalidArgument(
            "a codebook needs at least two codewords".into(),
        ));
    }
    let length = codebook[0].len();
    if let Some(offender) = codebook.iter().find(|c| c.len() != length) {
        return Err(Error::DimensionMismatch {
            left: offender.len(),
            right: length,
        });
    }
    let size = codebook.len();
    let mut values = vec![0.0; size * size];
    let mut std_errors = vec![0.0; size * size];
    let mut any_error = false;
    for row in 0..size {
        for col in 0..size {
            let entry = match estimator {
                Estimator::MonteCarlo { samples, seed } => Estimator::MonteCarlo {
                    samples: *samples,
                    // Bits 40+ for the cell, clear of the per-position
                    // (bits 32..40) and per-batch (low) derivations.
                    seed: seed ^ (((row * size + col) as u64) << 40),
                },
                other => *other,
            };
            let d = codeword_distance(channel, prior, &codebook[row], &codebook[col], &entry)?;
            values[row * size + col] = d.value;
            if let Some(se) = d.std_error {
                std_errors[row * size + col] = se;
                any_error = true;
            }
        }
    }
    let mut min_pair = (0, 1);
    for row in 0..size {
        for col in 0..size {
            if row != col && values[row * size + col] < values[min_pair.0 * size + min_pair.1] {
                min_pair = (row, col);
            }
        }
    }
    Ok(CodebookTable {
        size,
        values,
        std_errors: any_error.then_some(std_errors),
        min_pair,
        estimator: *estimator,
    })
}
