//! Alphabets, priors, and the supported channel families.
//!
//! A channel exposes log-likelihoods and Bayes posteriors for its
//! observations; everything downstream consumes those two quantities. An
//! observation that assigns zero posterior probability to some symbol has
//! no finite image point, so such observations are rejected wherever they
//! would surface.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::Error;
use crate::seed::SeedStream;
use crate::tolerance;

/// Ordered set of transmittable symbol labels; its size fixes the ambient
/// dimension of every embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    /// At least two distinct labels; a single hypothesis leaves nothing to
    /// detect.
    pub fn new(labels: Vec<String>) -> Result<Self, Error> {
        if labels.len() < 2 {
            return Err(Error::AlphabetTooSmall);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Labels numeric symbol values by their decimal form.
    pub fn from_values(values: &[f64]) -> Result<Self, Error> {
        Self::new(values.iter().map(|v| format!("{v}")).collect())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn check_index(&self, index: usize) -> Result<(), Error> {
        if index < self.size() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.size(),
            })
        }
    }
}

fn check_distribution(p: &[f64], strictly_positive: bool) -> Result<(), Error> {
    for (index, &value) in p.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < 0.0 || (strictly_positive && value == 0.0) {
            return Err(Error::NonPositiveProbability { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tolerance::SUM_TO_ONE_ABS {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// Prior distribution over the alphabet. Strictly positive: a zero prior
/// forces a zero posterior, which the representation excludes.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    probabilities: Vec<f64>,
}

impl Prior {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, Error> {
        check_distribution(&probabilities, true)?;
        Ok(Self { probabilities })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Every component within `UNIFORM_PRIOR_ABS` of 1/N.
    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.probabilities
            .iter()
            .all(|p| (p - u).abs() <= tolerance::UNIFORM_PRIOR_ABS)
    }
}

/// Posterior probabilities of the symbols given one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    probabilities: Vec<f64>,
}

impl Posterior {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, Error> {
        check_distribution(&probabilities, false)?;
        Ok(Self { probabilities })
    }

    /// Normalizes `exp(w_i)` in the log domain with max subtraction.
    ///
    /// A component that underflows to exactly zero is reported as an
    /// erasure: the observation rules a symbol out and cannot be embedded.
    pub fn from_log_weights(weights: &[f64]) -> Result<Self, Error> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.is_nan() || *w == f64::INFINITY {
                return Err(Error::NonFinite(i));
            }
        }
        let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::Erasure { index: 0 });
        }
        let unnormalized: Vec<f64> = weights.iter().map(|w| (w - max).exp()).collect();
        let sum: f64 = unnormalized.iter().sum();
        let probabilities: Vec<f64> = unnormalized.iter().map(|u| u / sum).collect();
        if let Some(index) = probabilities.iter().position(|p| *p == 0.0) {
            return Err(Error::Erasure { index });
        }
        Ok(Self { probabilities })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Index of the largest component; the lowest index wins exact ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probabilities.iter().enumerate().skip(1) {
            if *p > self.probabilities[best] {
                best = i;
            }
        }
        best
    }
}

/// One channel output: a label for discrete channels, a real number for
/// the additive-noise families.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Label(String),
    Value(f64),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Label(l) => write!(f, "{l}"),
            Observation::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Discrete-output channel given by a forward transition matrix.
#[derive(Debug, Clone)]
pub struct DiscreteChannel {
    alphabet: Alphabet,
    observation_labels: Vec<String>,
    observation_index: HashMap<String, usize>,
    /// Row-major, N rows of K entries.
    transition: Vec<f64>,
}

impl DiscreteChannel {
    /// Builds the channel from a row-major N x K transition matrix.
    ///
    /// Only structural problems are rejected here; value-level invariants
    /// (positive entries, unit row sums) are reported by
    /// [`Channel::validate`] so that broken channels can be inspected.
    pub fn new(
        alphabet: Alphabet,
        observation_labels: Vec<String>,
        transition: Vec<f64>,
    ) -> Result<Self, Error> {
        let n = alphabet.size();
        let k = observation_labels.len();
        if k == 0 {
            return Err(Error::InvalidArgument(
                "a discrete channel needs at least one observation label".into(),
            ));
        }
        if transition.len() != n * k {
            return Err(Error::DimensionMismatch {
                left: transition.len(),
                right: n * k,
            });
        }
        if let Some(i) = transition.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut observation_index = HashMap::new();
        for (idx, label) in observation_labels.iter().enumerate() {
            if observation_index.insert(label.clone(), idx).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            alphabet,
            observation_labels,
            observation_index,
            transition,
        })
    }

    /// Completes a forward channel from a posterior table `Pr{X|Y}` under
    /// a uniform observation marginal; the implied prior is returned with
    /// it. Each table column must be a distribution over the symbols.
    pub fn from_posterior_table(
        alphabet: Alphabet,
        observation_labels: Vec<String>,
        posterior_table: Vec<f64>,
    ) -> Result<(Self, Prior), Error> {
        let n = alphabet.size();
        let k = observation_labels.len();
        if posterior_table.len() != n * k {
            return Err(Error::DimensionMismatch {
                left: posterior_table.len(),
                right: n * k,
            });
        }
        for col in 0..k {
            let sum: f64 = (0..n).map(|i| posterior_table[i * k + col]).sum();
            if (sum - 1.0).abs() > tolerance::ROW_SUM_ABS {
                return Err(Error::Spec(format!(
                    "posterior column {col} sums to {sum}, expected 1"
                )));
            }
        }
        // Uniform marginal over the K observations; Pr{X=x_i} follows by
        // total probability and the forward entries by Bayes.
        let prior: Vec<f64> = (0..n)
            .map(|i| posterior_table[i * k..(i + 1) * k].iter().sum::<f64>() / k as f64)
            .collect();
        let mut transition = vec![0.0; n * k];
        for i in 0..n {
            for col in 0..k {
                transition[i * k + col] = posterior_table[i * k + col] / (k as f64 * prior[i]);
            }
        }
        let prior = Prior::new(prior)?;
        let channel = Self::new(alphabet, observation_labels, transition)?;
        Ok((channel, prior))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn observation_labels(&self) -> &[String] {
        &self.observation_labels
    }

    pub fn transition_row(&self, symbol_index: usize) -> &[f64] {
        let k = self.observation_labels.len();
        &self.transition[symbol_index * k..(symbol_index + 1) * k]
    }

    fn observation(&self, label: &str) -> Result<usize, Error> {
        self.observation_index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownObservation(label.to_string()))
    }
}

/// Additive zero-mean Gaussian noise on numeric symbol values.
#[derive(Debug, Clone)]
pub struct AwgnChannel {
    alphabet: Alphabet,
    values: Vec<f64>,
    noise_variance: f64,
}

impl AwgnChannel {
    /// A nonpositive `noise_variance` is accepted here and reported by
    /// [`Channel::validate`].
    pub fn new(values: Vec<f64>, noise_variance: f64) -> Result<Self, Error> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let alphabet = Alphabet::from_values(&values)?;
        Ok(Self {
            alphabet,
            values,
            noise_variance,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// Additive zero-mean Laplacian noise on numeric symbol values.
#[derive(Debug, Clone)]
pub struct LaplaceChannel {
    alphabet: Alphabet,
    values: Vec<f64>,
    scale: f64,
}

impl LaplaceChannel {
    /// A nonpositive `scale` is accepted here and reported by
    /// [`Channel::validate`].
    pub fn new(values: Vec<f64>, scale: f64) -> Result<Self, Error> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let alphabet = Alphabet::from_values(&values)?;
        Ok(Self {
            alphabet,
            values,
            scale,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// A value-level invariant violation found by [`Channel::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSumDrift { row: usize, sum: f64 },
    /// A zero or negative transition entry. The observation would rule the
    /// symbol out, which the representation cannot express.
    ErasureLikeEntry { row: usize, col: usize, value: f64 },
    NonPositiveNoiseVariance { value: f64 },
    NonPositiveScale { value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSumDrift { row, sum } => {
                write!(f, "transition row {row} sums to {sum}, expected 1")
            }
            Violation::ErasureLikeEntry { row, col, value } => write!(
                f,
                "erasure-like entry at ({row},{col}): probability {value} rules the symbol out \
                 and has no finite representation"
            ),
            Violation::NonPositiveNoiseVariance { value } => {
                write!(f, "noise variance must be positive, got {value}")
            }
            Violation::NonPositiveScale { value } => {
                write!(f, "scale must be positive, got {value}")
            }
        }
    }
}

/// Any of the supported channel families.
#[derive(Debug, Clone)]
pub enum Channel {
    Discrete(DiscreteChannel),
    Awgn(AwgnChannel),
    Laplace(LaplaceChannel),
}

impl Channel {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Channel::Discrete(c) => c.alphabet(),
            Channel::Awgn(c) => c.alphabet(),
            Channel::Laplace(c) => c.alphabet(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Channel::Discrete(_) => "discrete",
            Channel::Awgn(_) => "awgn",
            Channel::Laplace(_) => "laplace",
        }
    }

    /// The noise parameter of the additive families, if any.
    pub fn noise_parameter(&self) -> Option<f64> {
        match self {
            Channel::Discrete(_) => None,
            Channel::Awgn(c) => Some(c.noise_variance),
            Channel::Laplace(c) => Some(c.scale),
        }
    }

    /// `log Pr{Y = y | X = x_i}` for every symbol, up to one common
    /// additive constant. The additive families return log densities;
    /// downstream use is ratio-only, so the constant never matters.
    pub fn log_likelihoods(&self, observation: &Observation) -> Result<Vec<f64>, Error> {
        match (self, observation) {
            (Channel::Discrete(c), Observation::Label(label)) => {
                let col = c.observation(label)?;
                let k = c.observation_labels.len();
                Ok((0..c.alphabet.size())
                    .map(|i| c.transition[i * k + col].ln())
                    .collect())
            }
            (Channel::Awgn(c), Observation::Value(y)) => {
                if !y.is_finite() {
                    return Err(Error::NonFinite(0));
                }
                let s2 = c.noise_variance;
                let norm = -0.5 * (2.0 * std::f64::consts::PI * s2).ln();
                Ok(c.values
                    .iter()
                    .map(|v| norm - (y - v) * (y - v) / (2.0 * s2))
                    .collect())
            }
            (Channel::Laplace(c), Observation::Value(y)) => {
                if !y.is_finite() {
                    return Err(Error::NonFinite(0));
                }
                let norm = -(2.0 * c.scale).ln();
                Ok(c.values
                    .iter()
                    .map(|v| norm - (y - v).abs() / c.scale)
                    .collect())
            }
            _ => Err(Error::ObservationKind),
        }
    }

    /// Bayes posterior of the symbols given `observation`, computed in the
    /// log domain with max subtraction.
    pub fn posterior(&self, prior: &Prior, observation: &Observation) -> Result<Posterior, Error> {
        let n = self.alphabet().size();
        if prior.len() != n {
            return Err(Error::DimensionMismatch {
                left: prior.len(),
                right: n,
            });
        }
        let log_likelihoods = self.log_likelihoods(observation)?;
        let weights: Vec<f64> = log_likelihoods
            .iter()
            .zip(prior.probabilities())
            .map(|(l, p)| l + p.ln())
            .collect();
        Posterior::from_log_weights(&weights)
    }

    /// Draws one observation given the transmitted symbol. Deterministic
    /// for a given stream state.
    ///
    /// # Panics
    ///
    /// Panics on a channel that fails [`Channel::validate`]; validate
    /// before sampling.
    pub fn sample(&self, symbol_index: usize, rng: &mut SeedStream) -> Result<Observation, Error> {
        self.alphabet().check_index(symbol_index)?;
        Ok(match self {
            Channel::Discrete(c) => {
                let row = c.transition_row(symbol_index);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = row.len() - 1;
                for (k, p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        chosen = k;
                        break;
                    }
                }
                Observation::Label(c.observation_labels[chosen].clone())
            }
            Channel::Awgn(c) => {
                assert!(
                    c.noise_variance > 0.0,
                    "invalid channel: nonpositive noise variance; run validate()"
                );
                let z: f64 = StandardNormal.sample(rng);
                Observation::Value(c.values[symbol_index] + c.noise_variance.sqrt() * z)
            }
            Channel::Laplace(c) => {
                assert!(
                    c.scale > 0.0,
                    "invalid channel: nonpositive scale; run validate()"
                );
                // Inverse CDF of the double exponential; u clamped away
                // from 0 and 1 so the log stays finite.
                let u: f64 = rng
                    .random::<f64>()
                    .clamp(f64::EPSILON, 1.0 - f64::EPSILON);
                let centered = u - 0.5;
                let noise = -c.scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln();
                Observation::Value(c.values[symbol_index] + noise)
            }
        })
    }

    /// Checks every value-level invariant and returns the violations
    /// instead of failing, so callers can report all of them at once.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        match self {
            Channel::Discrete(c) => {
                for i in 0..c.alphabet.size() {
                    let row = c.transition_row(i);
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > tolerance::ROW_SUM_ABS {
                        violations.push(Violation::RowSumDrift { row: i, sum });
                    }
                    for (col, &value) in row.iter().enumerate() {
                        if value <= 0.0 {
                            violations.push(Violation::ErasureLikeEntry {
                                row: i,
                                col,
                                value,
                            });
                        }
                    }
                }
            }
            Channel::Awgn(c) => {
                if !(c.noise_variance > 0.0 && c.noise_variance.is_finite()) {
                    violations.push(Violation::NonPositiveNoiseVariance {
                        value: c.noise_variance,
                    });
                }
            }
            Channel::Laplace(c) => {
                if !(c.scale > 0.0 && c.scale.is_finite()) {
                    violations.push(Violation::NonPositiveScale { value: c.scale });
                }
            }
        }
        violations
    }
}

/// A channel plus prior parsed from the JSON spec format.
#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub channel: Channel,
    pub prior: Prior,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum SpecFile {
    Discrete {
        symbols: Vec<String>,
        observations: Vec<String>,
        /// Row-major N x K.
        transition: Vec<f64>,
        #[serde(default)]
        prior: Option<Vec<f64>>,
    },
    Awgn {
        symbols: Vec<f64>,
        sigma2: f64,
        #[serde(default)]
        prior: Option<Vec<f64>>,
    },
    Laplace {
        symbols: Vec<f64>,
        lambda: f64,
        #[serde(default)]
        prior: Option<Vec<f64>>,
    },
}

impl ChannelSpec {
    /// Parses the JSON channel-spec format: `"type"` is `"discrete"`,
    /// `"awgn"`, or `"laplace"`; `"transition"` is row-major; `"prior"`
    /// defaults to uniform.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        let (channel, prior) = match file {
            SpecFile::Discrete {
                symbols,
                observations,
                transition,
                prior,
            } => {
                let alphabet = Alphabet::new(symbols)?;
                let channel = DiscreteChannel::new(alphabet, observations, transition)?;
                (Channel::Discrete(channel), prior)
            }
            SpecFile::Awgn {
                symbols,
                sigma2,
                prior,
            } => (Channel::Awgn(AwgnChannel::new(symbols, sigma2)?), prior),
            SpecFile::Laplace {
                symbols,
                lambda,
                prior,
            } => (
                Channel::Laplace(LaplaceChannel::new(symbols, lambda)?),
                prior,
            ),
        };
        let n = channel.alphabet().size();
        let prior = match prior {
            Some(p) => {
                if p.len() != n {
                    return Err(Error::DimensionMismatch {
                        left: p.len(),
                        right: n,
                    });
                }
                Prior::new(p)?
            }
            None => Prior::uniform(n),
        };
        Ok(Self { channel, prior })
    }
}
