//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantity (visible with `--nocapture`).

use detgeo::channel::{
    Alphabet, AwgnChannel, Channel, DiscreteChannel, LaplaceChannel, Observation, Posterior, Prior,
};
use detgeo::code_distance::{codeword_distance, Estimator};
use detgeo::detect::{decide, decision_regions, simulate_error_rate};
use detgeo::embedding::{
    distance, embed_observation, embed_observation_from_likelihoods, embed_symbol,
    reconstruct_posterior, symbol_points,
};
use detgeo::figure::{figure_locus, FigureSummary};
use detgeo::seed::SeedStream;
use detgeo::sequence::{
    aggregate_repetition, embed_codeword, embed_sequence, repetition_posterior, sequence_posterior,
    Codeword, SequenceObservation,
};
use detgeo::tolerance;
use rand::Rng;

fn alphabet(n: usize) -> Alphabet {
    Alphabet::new((1..=n).map(|i| format!("s{i}")).collect()).unwrap()
}

fn table_fixture() -> (DiscreteChannel, Prior) {
    let alphabet = Alphabet::new(vec!["x1".into(), "x2".into(), "x3".into()]).unwrap();
    let observations: Vec<String> = ["a", "b", "c", "d", "e", "f"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    #[rustfmt::skip]
    let table = vec![
        0.34, 0.33, 0.33, 0.335, 0.335, 0.33,
        0.33, 0.34, 0.33, 0.335, 0.33,  0.335,
        0.33, 0.33, 0.34, 0.33,  0.335, 0.335,
    ];
    DiscreteChannel::from_posterior_table(alphabet, observations, table).unwrap()
}

fn awgn(sigma2: f64) -> Channel {
    Channel::Awgn(AwgnChannel::new(vec![0.0, 1.0, -1.0], sigma2).unwrap())
}

fn laplace(scale: f64) -> Channel {
    Channel::Laplace(LaplaceChannel::new(vec![0.0, 1.0, -1.0], scale).unwrap())
}

fn families() -> Vec<Channel> {
    vec![Channel::Discrete(table_fixture().0), awgn(1.0), laplace(1.0)]
}

/// Strictly positive random posterior (flat Dirichlet via normalized
/// exponentials).
fn random_posterior(n: usize, rng: &mut SeedStream) -> Posterior {
    let draws: Vec<f64> = (0..n)
        .map(|_| -(rng.random::<f64>().max(1e-16)).ln())
        .collect();
    let total: f64 = draws.iter().sum();
    Posterior::new(draws.iter().map(|d| d / total).collect()).unwrap()
}

fn random_symbol(n: usize, rng: &mut SeedStream) -> usize {
    (rng.random::<f64>() * n as f64) as usize % n
}

#[test]
fn criterion_01_posterior_round_trip() {
    let mut rng = SeedStream::new(0xC1);
    let mut worst = 0.0_f64;
    for n in [2usize, 3, 4, 8, 16] {
        let a = alphabet(n);
        for _ in 0..1000 {
            let p = random_posterior(n, &mut rng);
            let q = reconstruct_posterior(&embed_observation(&p).unwrap(), &a).unwrap();
            for (got, want) in q.probabilities().iter().zip(p.probabilities()) {
                let gap = (got - want).abs();
                worst = worst.max(gap);
                assert!(
                    gap <= tolerance::ROUND_TRIP_ABS,
                    "round trip off by {gap} at N={n}"
                );
            }
        }
    }
    println!("criterion 1 (posterior round-trip, N in {{2,3,4,8,16}}): PASS, worst gap {worst:.3e}");
}

#[test]
fn criterion_02_simplex_geometry() {
    let mut worst_norm = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    for n in 2..=16usize {
        let a = alphabet(n);
        let nf = n as f64;
        let expected_norm = (1.0 / (2.0 * nf)) * ((nf - 1.0) / nf).sqrt();
        let expected_gap = 2.0_f64.sqrt() / (2.0 * nf);
        let points = symbol_points(&a);
        for p in &points {
            let err = (p.norm() - expected_norm).abs();
            worst_norm = worst_norm.max(err);
            assert!(err <= tolerance::EXACT_ABS, "norm off by {err} at N={n}");
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let err = (distance(&points[i], &points[j]).unwrap() - expected_gap).abs();
                worst_gap = worst_gap.max(err);
                assert!(err <= tolerance::EXACT_ABS, "gap off by {err} at N={n}");
            }
        }
    }
    // The pairwise value sqrt(2)/(2N) is the brute-force norm of the
    // vertex difference (1/2N)(e_i - e_j); checked against an elementwise
    // recomputation in the embedding unit tests.
    println!(
        "criterion 2 (simplex geometry, N in 2..=16): PASS, norm err {worst_norm:.3e}, \
         pairwise err {worst_gap:.3e} against sqrt(2)/(2N)"
    );
}

#[test]
fn criterion_03_hyperplane_membership() {
    fn check(coords: &[f64]) -> f64 {
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        let normalized = sum.abs() / scale;
        assert!(
            normalized <= tolerance::PLANE_SUM_ABS,
            "sum {sum} at scale {scale}"
        );
        normalized
    }

    let mut rng = SeedStream::new(0xC3);
    let mut worst = 0.0_f64;
    let mut checked = 0usize;
    // Symbol images across sizes, plus random posterior images.
    for n in 2..=16usize {
        let a = alphabet(n);
        for i in 0..n {
            worst = worst.max(check(embed_symbol(&a, i).unwrap().coords()));
            checked += 1;
        }
        for _ in 0..50 {
            let post = random_posterior(n, &mut rng);
            worst = worst.max(check(embed_observation(&post).unwrap().coords()));
            checked += 1;
        }
    }
    // Observation images, sequence stacks, and aggregates on every family.
    let prior = Prior::uniform(3);
    for channel in families() {
        for _ in 0..200 {
            let sym = random_symbol(3, &mut rng);
            let obs = channel.sample(sym, &mut rng).unwrap();
            let ll = channel.log_likelihoods(&obs).unwrap();
            worst = worst.max(check(
                embed_observation_from_likelihoods(&ll).unwrap().coords(),
            ));
            checked += 1;
        }
        for _ in 0..50 {
            let m = 1 + random_symbol(5, &mut rng);
            let seq = SequenceObservation::new(
                (0..m)
                    .map(|_| channel.sample(random_symbol(3, &mut rng), &mut rng).unwrap())
                    .collect(),
            )
            .unwrap();
            let stacked = embed_sequence(&channel, &prior, &seq).unwrap();
            for block in stacked.blocks() {
                worst = worst.max(check(block.coords()));
                checked += 1;
            }
            let agg = aggregate_repetition(&channel, &prior, &seq).unwrap();
            worst = worst.max(check(agg.coords()));
            checked += 1;
        }
    }
    println!(
        "criterion 3 (hyperplane membership): PASS, {checked} embeddings, worst residual {worst:.3e}"
    );
}

#[test]
fn criterion_04_repetition_equivalence() {
    let mut rng = SeedStream::new(0xC4);
    let prior = Prior::uniform(3);
    let mut worst = 0.0_f64;
    for channel in families() {
        for trial in 0..500 {
            let m = 1 + trial % 8;
            let sym = random_symbol(3, &mut rng);
            let seq = SequenceObservation::new(
                (0..m).map(|_| channel.sample(sym, &mut rng).unwrap()).collect(),
            )
            .unwrap();
            let geometric = repetition_posterior(&channel, &seq).unwrap();
            // Product of per-use posteriors, normalized in the log domain.
            let mut logs = [0.0_f64; 3];
            for obs in seq.observations() {
                let p = channel.posterior(&prior, obs).unwrap();
                for (acc, v) in logs.iter_mut().zip(p.probabilities()) {
                    *acc += v.ln();
                }
            }
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
            let total: f64 = unnorm.iter().sum();
            for (got, want) in geometric.probabilities().iter().zip(&unnorm) {
                let gap = (got - want / total).abs();
                worst = worst.max(gap);
                assert!(
                    gap <= tolerance::REPETITION_ABS,
                    "{} M={m}: gap {gap}",
                    channel.kind_name()
                );
            }
        }
    }
    // Worked fixture: two Gaussian uses at +-0.5.
    let seq = SequenceObservation::new(vec![Observation::Value(0.5), Observation::Value(-0.5)])
        .unwrap();
    let p = repetition_posterior(&awgn(1.0), &seq).unwrap();
    assert!((p.probabilities()[0] - 0.57611).abs() <= 1e-5);
    println!(
        "criterion 4 (repetition equivalence, 500 seqs x 3 families, M in 1..=8): PASS, \
         worst gap {worst:.3e}, fixture p0 {:.5}",
        p.probabilities()[0]
    );
}

#[test]
fn criterion_05_sequence_equivalence() {
    let mut rng = SeedStream::new(0xC5);
    let mut worst = 0.0_f64;
    for channel in families() {
        let prior = Prior::uniform(3);
        for trial in 0..200 {
            let m = 1 + trial % 5;
            let seq = SequenceObservation::new(
                (0..m)
                    .map(|_| channel.sample(random_symbol(3, &mut rng), &mut rng).unwrap())
                    .collect(),
            )
            .unwrap();
            let word = Codeword::new(
                (0..m).map(|_| random_symbol(3, &mut rng)).collect(),
                3,
            )
            .unwrap();
            let geometric = sequence_posterior(&channel, &prior, &seq, &word).unwrap();
            // Product form: per-use posteriors multiply; normalization over
            // all words is exactly one.
            let product: f64 = seq
                .observations()
                .iter()
                .zip(word.indices())
                .map(|(obs, &i)| channel.posterior(&prior, obs).unwrap().probabilities()[i])
                .product();
            let rel = (geometric - product).abs() / product.max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            assert!(
                rel <= tolerance::SEQUENCE_REL,
                "{} M={m}: rel {rel}",
                channel.kind_name()
            );
        }
    }
    println!(
        "criterion 5 (sequence posterior vs product form, 200 pairs x 3 families, M <= 5): \
         PASS, worst rel {worst:.3e}"
    );
}

#[test]
fn criterion_06_map_coherence() {
    let mut rng = SeedStream::new(0xC6);
    let prior = Prior::uniform(3);
    let mut mismatches = 0usize;
    for channel in families() {
        for _ in 0..10_000 {
            let obs = channel.sample(random_symbol(3, &mut rng), &mut rng).unwrap();
            let d = decide(&channel, &prior, &obs).unwrap();
            let bayes = channel.posterior(&prior, &obs).unwrap();
            let coherent = if d.tie {
                let best = bayes.probabilities()[bayes.argmax()];
                (bayes.probabilities()[d.chosen_index] - best).abs()
                    <= tolerance::TIE_REL * best
            } else {
                d.chosen_index == bayes.argmax()
            };
            if !coherent {
                mismatches += 1;
            }
        }
    }
    assert_eq!(mismatches, 0, "distance argmin disagreed with Bayes argmax");

    // Fixture: per-label decisions and the three ties.
    let (channel, prior) = table_fixture();
    let regions = decision_regions(&channel, &prior).unwrap();
    assert_eq!(regions["a"].chosen_index, 0);
    assert_eq!(regions["b"].chosen_index, 1);
    assert_eq!(regions["c"].chosen_index, 2);
    for label in ["d", "e", "f"] {
        assert!(regions[label].tie, "{label} should tie");
    }
    println!("criterion 6 (MAP coherence, 10^4 obs x 3 families): PASS, 0 mismatches");
}

#[test]
fn criterion_07_gaussian_closed_form() {
    let mut rng = SeedStream::new(0xC7);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let y = (rng.random::<f64>() - 0.5) * 10.0;
        let s2 = 0.05 + rng.random::<f64>() * 4.0;
        let channel = awgn(s2);
        let ll = channel.log_likelihoods(&Observation::Value(y)).unwrap();
        let point = embed_observation_from_likelihoods(&ll).unwrap();
        let expected = [
            2.0 / (2.0 * s2),
            (6.0 * y - 1.0) / (2.0 * s2),
            (-6.0 * y - 1.0) / (2.0 * s2),
        ];
        let scale = expected.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        for (got, want) in point.coords().iter().zip(expected) {
            let rel = (got - want).abs() / scale;
            worst = worst.max(rel);
            assert!(rel <= 1e-12, "y={y} s2={s2}: rel {rel}");
        }
    }
    println!(
        "criterion 7 (Gaussian closed-form locus, 100 random (y, sigma^2)): PASS, \
         worst rel {worst:.3e}"
    );
}

#[test]
fn criterion_08_laplace_structure() {
    let prior = Prior::uniform(3);
    let grid: Vec<f64> = (0..201).map(|i| -5.0 + 10.0 * i as f64 / 200.0).collect();
    for lambda in [0.5, 1.0, 2.0] {
        let channel = laplace(lambda);
        let figure = figure_locus(&channel, &prior, &grid).unwrap();
        match figure.summary {
            FigureSummary::LaplaceLocus {
                pieces,
                saturation_points,
            } => {
                assert_eq!(pieces, 4, "lambda {lambda}: {pieces} pieces");
                assert_eq!(saturation_points, 2, "lambda {lambda}");
            }
            ref other => panic!("unexpected summary {other:?}"),
        }
        // Every y beyond the outermost symbol maps to one fixed point.
        let expected = [0.0, 3.0 / lambda, -3.0 / lambda];
        let scale = 3.0 / lambda;
        for y in [1.001, 1.5, 2.5, 5.0] {
            let ll = channel.log_likelihoods(&Observation::Value(y)).unwrap();
            let point = embed_observation_from_likelihoods(&ll).unwrap();
            for (got, want) in point.coords().iter().zip(expected) {
                assert!(
                    (got - want).abs() <= 1e-12 * scale,
                    "lambda {lambda} y {y}: {got} vs {want}"
                );
            }
        }
        for y in [-1.001, -2.0, -5.0] {
            let ll = channel.log_likelihoods(&Observation::Value(y)).unwrap();
            let point = embed_observation_from_likelihoods(&ll).unwrap();
            for (got, want) in point.coords().iter().zip([0.0, -3.0 / lambda, 3.0 / lambda]) {
                assert!((got - want).abs() <= 1e-12 * scale);
            }
        }
    }
    println!(
        "criterion 8 (Laplace four-piece locus with saturation, lambda in {{0.5, 1, 2}}): PASS"
    );
}

#[test]
fn criterion_09_codeword_distance_decomposition() {
    let mut rng = SeedStream::new(0xC9);

    // Discrete: joint sequence-level Monte Carlo against the exact
    // per-position sum.
    let (channel, prior) = table_fixture();
    let wrapped = Channel::Discrete(channel);
    let mut worst_sigma = 0.0_f64;
    for _ in 0..50 {
        let m = 1 + random_symbol(6, &mut rng);
        let c1 = Codeword::new((0..m).map(|_| random_symbol(3, &mut rng)).collect(), 3).unwrap();
        let c2 = Codeword::new((0..m).map(|_| random_symbol(3, &mut rng)).collect(), 3).unwrap();
        let exact = codeword_distance(&wrapped, &prior, &c1, &c2, &Estimator::Exact).unwrap();

        let target = embed_codeword(wrapped.alphabet(), &c2).unwrap();
        let draws = 100_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let mut total = 0.0;
            for (pos, &sym) in c1.indices().iter().enumerate() {
                let obs = wrapped.sample(sym, &mut rng).unwrap();
                let p = wrapped.posterior(&prior, &obs).unwrap();
                let point = embed_observation(&p).unwrap();
                total += point
                    .squared_distance_to(&target.blocks()[pos])
                    .unwrap();
            }
            sum += total;
            sum_sq += total * total;
        }
        let n = draws as f64;
        let mean = sum / n;
        let se = (((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0) / n).sqrt();
        let sigmas = (mean - exact.value).abs() / se;
        worst_sigma = worst_sigma.max(sigmas);
        assert!(
            sigmas <= tolerance::MC_SIGMA_GATE,
            "joint MC {mean} vs exact {} is {sigmas:.2} sigma",
            exact.value
        );
    }

    // Gaussian: quadrature route against the Monte Carlo route.
    let channel = awgn(1.0);
    let prior = Prior::uniform(3);
    let mut worst_awgn = 0.0_f64;
    for trial in 0..50 {
        let m = 1 + trial % 6;
        let c1 = Codeword::new((0..m).map(|_| random_symbol(3, &mut rng)).collect(), 3).unwrap();
        let c2 = Codeword::new((0..m).map(|_| random_symbol(3, &mut rng)).collect(), 3).unwrap();
        let quad = codeword_distance(
            &channel,
            &prior,
            &c1,
            &c2,
            &Estimator::Quadrature { points: 1024 },
        )
        .unwrap();
        let mc = codeword_distance(
            &channel,
            &prior,
            &c1,
            &c2,
            &Estimator::MonteCarlo {
                samples: 100_000,
                seed: rng.random(),
            },
        )
        .unwrap();
        let se = mc.std_error.unwrap();
        let sigmas = (quad.value - mc.value).abs() / se;
        worst_awgn = worst_awgn.max(sigmas);
        assert!(
            sigmas <= tolerance::MC_SIGMA_GATE,
            "quadrature {} vs MC {} is {sigmas:.2} sigma",
            quad.value,
            mc.value
        );
    }
    println!(
        "criterion 9 (codeword metric decomposes, 50 pairs each): PASS, \
         discrete worst {worst_sigma:.2} sigma, awgn worst {worst_awgn:.2} sigma"
    );
}

#[test]
fn criterion_10_simulator_agreement() {
    let prior = Prior::uniform(3);
    for channel in families() {
        for m in [1usize, 3, 5] {
            let start = std::time::Instant::now();
            let report = simulate_error_rate(&channel, &prior, m, 100_000, 0x5EED).unwrap();
            let elapsed = start.elapsed();
            assert_eq!(
                report.agreement, report.trials,
                "{} M={m}: disagreement or erasure",
                channel.kind_name()
            );
            assert_eq!(report.erasures, 0);
            assert!(
                elapsed.as_secs() < 60,
                "{} M={m} took {elapsed:?}",
                channel.kind_name()
            );
        }
    }
    println!(
        "criterion 10 (dual decoders agree on 10^5 trials, M in {{1,3,5}}, 3 families): PASS"
    );
}
