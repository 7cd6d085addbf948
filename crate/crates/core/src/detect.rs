//! Decision rules: nearest-symbol detection in the plane, sequence and
//! repetition variants, decision regions for discrete channels, and a
//! dual-path simulation harness.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::channel::{Channel, DiscreteChannel, Observation, Posterior, Prior};
use crate::embedding::{self, EmbeddedPoint};
use crate::error::Error;
use crate::seed::SeedStream;
use crate::sequence::{self, Codeword, SequenceObservation};
use crate::tolerance;

/// Outcome of a single-symbol decision.
#[derive(Debug, Clone)]
pub struct Decision {
    /// Winning symbol; the lowest index on a tie.
    pub chosen_index: usize,
    pub posterior: Posterior,
    /// Distance gap to the runner-up symbol; zero exactly when tied.
    pub margin: f64,
    pub tie: bool,
    /// Distances from the observation image to every symbol image.
    pub distances: Vec<f64>,
}

impl Decision {
    /// Indices whose distances tie the winner within the tie tolerance.
    pub fn tied_indices(&self) -> Vec<usize> {
        let best = self.distances[self.chosen_index];
        self.distances
            .iter()
            .enumerate()
            .filter(|(_, &d)| is_tied(best, d))
            .map(|(i, _)| i)
            .collect()
    }
}

fn is_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= tolerance::TIE_REL * a.max(b).max(f64::MIN_POSITIVE)
}

fn decision_from_point(point: &EmbeddedPoint, channel: &Channel, posterior: Posterior) -> Decision {
    let distances: Vec<f64> = embedding::symbol_points(channel.alphabet())
        .iter()
        .map(|x| point.distance_to(x).expect("equal dimensions"))
        .collect();
    let mut chosen = 0;
    for (i, d) in distances.iter().enumerate().skip(1) {
        if *d < distances[chosen] {
            chosen = i;
        }
    }
    let runner_up = distances
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != chosen)
        .map(|(_, d)| *d)
        .fold(f64::INFINITY, f64::min);
    let tie = is_tied(distances[chosen], runner_up);
    let margin = if tie { 0.0 } else { runner_up - distances[chosen] };
    Decision {
        chosen_index: chosen,
        posterior,
        margin,
        tie,
        distances,
    }
}

/// Nearest-symbol decision for one observation. Coincides with the Bayes
/// argmax; ties go to the lowest index with the flag set.
pub fn decide(
    channel: &Channel,
    prior: &Prior,
    observation: &Observation,
) -> Result<Decision, Error> {
    let posterior = channel.posterior(prior, observation)?;
    let point = embedding::embed_observation(&posterior)?;
    Ok(decision_from_point(&point, channel, posterior))
}

/// Joint decision over a whole received sequence.
#[derive(Debug, Clone)]
pub struct SequenceDecision {
    pub codeword: Codeword,
    /// Posterior probability of the chosen codeword.
    pub posterior: f64,
    /// Stacked-distance gap to the runner-up codeword; zero when tied.
    pub margin: f64,
    pub tie: bool,
}

/// MAP codeword for a sequence. The stacked squared distance decomposes
/// per use, so the winner is the position-wise nearest symbol; the
/// runner-up differs in the position with the smallest squared-distance
/// step.
pub fn decide_sequence(
    channel: &Channel,
    prior: &Prior,
    sequence: &SequenceObservation,
) -> Result<SequenceDecision, Error> {
    let per_use: Vec<Decision> = sequence
        .observations()
        .iter()
        .enumerate()
        .map(|(position, obs)| decide(channel, prior, obs).map_err(|e| e.at(position)))
        .collect::<Result<_, _>>()?;
    let indices: Vec<usize> = per_use.iter().map(|d| d.chosen_index).collect();
    let codeword = Codeword::new(indices, channel.alphabet().size())?;
    let tie = per_use.iter().any(|d| d.tie);
    let best_sq: f64 = per_use
        .iter()
        .map(|d| d.distances[d.chosen_index] * d.distances[d.chosen_index])
        .sum();
    let min_step = per_use
        .iter()
        .map(|d| {
            let best = d.distances[d.chosen_index];
            let runner = d
                .distances
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != d.chosen_index)
                .map(|(_, v)| *v)
                .fold(f64::INFINITY, f64::min);
            runner * runner - best * best
        })
        .fold(f64::INFINITY, f64::min);
    let margin = if tie {
        0.0
    } else {
        (best_sq + min_step).sqrt() - best_sq.sqrt()
    };
    let posterior = sequence::sequence_posterior(channel, prior, sequence, &codeword)?;
    Ok(SequenceDecision {
        codeword,
        posterior,
        margin,
        tie,
    })
}

/// Repetition decision under a uniform prior: nearest symbol to the
/// summed observation image.
pub fn decide_repetition(
    channel: &Channel,
    sequence: &SequenceObservation,
) -> Result<Decision, Error> {
    let prior = Prior::uniform(channel.alphabet().size());
    let aggregated = sequence::aggregate_repetition(channel, &prior, sequence)?;
    let posterior = embedding::reconstruct_posterior(&aggregated, channel.alphabet())?;
    Ok(decision_from_point(&aggregated, channel, posterior))
}

/// One decision per observation label of a discrete channel.
pub fn decision_regions(
    channel: &DiscreteChannel,
    prior: &Prior,
) -> Result<BTreeMap<String, Decision>, Error> {
    let labels = channel.observation_labels().to_vec();
    let channel = Channel::Discrete(channel.clone());
    labels
        .into_iter()
        .map(|label| {
            decide(&channel, prior, &Observation::Label(label.clone())).map(|d| (label, d))
        })
        .collect()
}

/// Per-symbol tallies from [`simulate_error_rate`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SymbolTally {
    pub trials: u64,
    pub errors: u64,
    pub erasures: u64,
    pub agreement: u64,
}

/// Aggregate result of a dual-path decoding simulation.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub per_symbol: Vec<SymbolTally>,
    pub trials: u64,
    pub repetitions: usize,
    pub seed: u64,
    /// Trials on which the geometric and the direct product decoders chose
    /// the same symbol (tie sets compared when distances tie).
    pub agreement: u64,
    pub erasures: u64,
    pub errors: u64,
}

impl SimulationReport {
    /// Errors as a fraction of the trials that decoded at all.
    pub fn error_rate(&self) -> f64 {
        let decoded = self.trials - self.erasures;
        if decoded == 0 {
            0.0
        } else {
            self.errors as f64 / decoded as f64
        }
    }

    /// Trials on which the two decoders disagreed outright.
    pub fn disagreements(&self) -> u64 {
        self.trials - self.erasures - self.agreement
    }
}

const SIM_BATCH: u64 = 4096;

/// Draws `trials` transmissions of `repetitions` uses each and decodes
/// every trial twice: once over the summed observation image (nearest
/// symbol) and once by a direct argmax over summed log-likelihoods plus
/// log prior. The two decoders are equivalent by construction, so
/// `agreement` should equal the number of decoded trials; any gap is a
/// bug worth surfacing.
///
/// Trials are split into fixed batches; batch `k` draws from the worker
/// stream `seed ^ k`, so the tallies are independent of thread count.
/// With more than one repetition the prior must be uniform.
pub fn simulate_error_rate(
    channel: &Channel,
    prior: &Prior,
    repetitions: usize,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, Error> {
    let n = channel.alphabet().size();
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    if prior.len() != n {
        return Err(Error::DimensionMismatch {
            left: prior.len(),
            right: n,
        });
    }
    if repetitions > 1 && !prior.is_uniform() {
        return Err(Error::NonUniformPrior);
    }
    let batches = trials.div_ceil(SIM_BATCH);
    let partials: Result<Vec<Vec<SymbolTally>>, Error> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let lo = batch * SIM_BATCH;
            let hi = ((batch + 1) * SIM_BATCH).min(trials);
            run_batch(
                channel,
                prior,
                repetitions,
                hi - lo,
                SeedStream::worker(seed, batch),
            )
        })
        .collect();
    let mut per_symbol = vec![SymbolTally::default(); n];
    for batch in partials? {
        for (total, part) in per_symbol.iter_mut().zip(batch) {
            total.trials += part.trials;
            total.errors += part.errors;
            total.erasures += part.erasures;
            total.agreement += part.agreement;
        }
    }
    Ok(SimulationReport {
        trials,
        repetitions,
        seed,
        agreement: per_symbol.iter().map(|t| t.agreement).sum(),
        erasures: per_symbol.iter().map(|t| t.erasures).sum(),
        errors: per_symbol.iter().map(|t| t.errors).sum(),
        per_symbol,
    })
}

fn run_batch(
    channel: &Channel,
    prior: &Prior,
    repetitions: usize,
    count: u64,
    mut rng: SeedStream,
) -> Result<Vec<SymbolTally>, Error> {
    use rand::Rng;
    let n = channel.alphabet().size();
    let vertices = embedding::symbol_points(channel.alphabet());
    let mut tallies = vec![SymbolTally::default(); n];
    for _ in 0..count {
        // Transmitted symbol from the prior.
        let u: f64 = rng.random();
        let mut sent = n - 1;
        let mut acc = 0.0;
        for (i, p) in prior.probabilities().iter().enumerate() {
            acc += p;
            if u < acc {
                sent = i;
                break;
            }
        }
        tallies[sent].trials += 1;

        let mut sum_coords = vec![0.0_f64; n];
        let mut loglik_sums = vec![0.0_f64; n];
        let mut erased = false;
        for _ in 0..repetitions {
            let observation = channel.sample(sent, &mut rng)?;
            let loglik = channel.log_likelihoods(&observation)?;
            for (acc, l) in loglik_sums.iter_mut().zip(&loglik) {
                *acc += l;
            }
            match channel
                .posterior(prior, &observation)
                .and_then(|p| embedding::embed_observation(&p))
            {
                Ok(point) => {
                    for (acc, c) in sum_coords.iter_mut().zip(point.coords()) {
                        *acc += c;
                    }
                }
                Err(e) if e.is_erasure() => {
                    erased = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if erased {
            tallies[sent].erasures += 1;
            continue;
        }

        // Geometric path: nearest vertex to the summed image.
        let point = EmbeddedPoint::from_coords(sum_coords).expect("sum of zero-sum points");
        let distances: Vec<f64> = vertices
            .iter()
            .map(|x| point.distance_to(x).expect("equal dimensions"))
            .collect();
        let mut geometric = 0;
        for (i, d) in distances.iter().enumerate().skip(1) {
            if *d < distances[geometric] {
                geometric = i;
            }
        }

        // Direct path: argmax of log prior + summed log-likelihoods.
        let mut direct = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, (l, p)) in loglik_sums.iter().zip(prior.probabilities()).enumerate() {
            let w = l + p.ln();
            if w > best {
                best = w;
                direct = i;
            }
        }

        let agreed = geometric == direct || is_tied(distances[geometric], distances[direct]);
        if agreed {
            tallies[sent].agreement += 1;
        }
        if geometric != sent {
            tallies[sent].errors += 1;
        }
    }
    Ok(tallies)
}
