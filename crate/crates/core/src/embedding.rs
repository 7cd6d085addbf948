//! Maps from symbols and observations into the zero-sum hyperplane, and
//! the posterior-from-distance reconstruction.
//!
//! The alphabet lands on the vertices of a regular simplex centered at the
//! origin; an observation lands at a scaled log-ratio point whose squared
//! distances to the vertices recover the posterior through a softmax of
//! `-d^2`. Both images have zero coordinate sum, so the whole problem
//! lives in an (N-1)-dimensional plane inside R^N.

use crate::channel::{Alphabet, Posterior};
use crate::error::Error;
use crate::tolerance;

/// A point of the zero-sum hyperplane in R^N.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoint {
    coords: Vec<f64>,
}

impl EmbeddedPoint {
    /// Accepts coordinates whose sum is zero within
    /// `PLANE_SUM_ABS * max(1, |coord|_max)`.
    pub fn from_coords(coords: Vec<f64>) -> Result<Self, Error> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        if sum.abs() > tolerance::PLANE_SUM_ABS * scale {
            return Err(Error::NotInPlane { sum });
        }
        Ok(Self { coords })
    }

    /// For coordinates that are zero-sum by construction.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(
            {
                let sum: f64 = coords.iter().sum();
                let scale = coords.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
                sum.abs() <= tolerance::PLANE_SUM_ABS * scale
            },
            "constructed point left the zero-sum hyperplane"
        );
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coordinate_sum(&self) -> f64 {
        self.coords.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn squared_distance_to(&self, other: &EmbeddedPoint) -> Result<f64, Error> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    pub fn distance_to(&self, other: &EmbeddedPoint) -> Result<f64, Error> {
        Ok(self.squared_distance_to(other)?.sqrt())
    }

    /// Component-wise sum; the plane is closed under addition.
    pub fn add(&self, other: &EmbeddedPoint) -> Result<EmbeddedPoint, Error> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(EmbeddedPoint::new_unchecked(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }
}

/// Euclidean distance between two embedded points.
pub fn distance(a: &EmbeddedPoint, b: &EmbeddedPoint) -> Result<f64, Error> {
    a.distance_to(b)
}

/// The fixed reconstruction kernel: posterior weight as a function of
/// embedding distance. Monotone decreasing, and multiplicative across
/// independent uses: `kernel(sqrt(a² + b²)) = kernel(a) · kernel(b)`.
pub fn distance_kernel(d: f64) -> f64 {
    (-d * d).exp()
}

/// Image of symbol `index`: the simplex vertex with `(N-1)/(2N²)` at the
/// symbol's own coordinate and `-1/(2N²)` everywhere else.
///
/// All vertices share the norm `(1/2N)·sqrt((N-1)/N)` and all pairwise
/// distances equal `sqrt(2)/(2N)`.
pub fn embed_symbol(alphabet: &Alphabet, index: usize) -> Result<EmbeddedPoint, Error> {
    alphabet.check_index(index)?;
    let n = alphabet.size() as f64;
    let off = -1.0 / (2.0 * n * n);
    let mut coords = vec![off; alphabet.size()];
    coords[index] = (n - 1.0) / (2.0 * n * n);
    Ok(EmbeddedPoint::new_unchecked(coords))
}

/// All symbol images, in alphabet order.
pub fn symbol_points(alphabet: &Alphabet) -> Vec<EmbeddedPoint> {
    (0..alphabet.size())
        .map(|i| embed_symbol(alphabet, i).expect("index in range"))
        .collect()
}

/// Image of an observation with the given posterior: component `i` is
/// `N·(log p_i − mean_j log p_j)`, a scaled log-ratio vector.
pub fn embed_observation(posterior: &Posterior) -> Result<EmbeddedPoint, Error> {
    let p = posterior.probabilities();
    if let Some(index) = p.iter().position(|v| *v <= 0.0) {
        return Err(Error::Erasure { index });
    }
    let logs: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    Ok(embed_from_logs(&logs))
}

/// The same map expressed on raw log-likelihoods; any additive constant in
/// the input cancels. Under equal priors this equals
/// `embed_observation` of the normalized likelihoods.
pub fn embed_observation_from_likelihoods(log_likelihoods: &[f64]) -> Result<EmbeddedPoint, Error> {
    if let Some(i) = log_likelihoods.iter().position(|l| !l.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if log_likelihoods.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two hypotheses to form a ratio".into(),
        ));
    }
    Ok(embed_from_logs(log_likelihoods))
}

// Centering before scaling keeps any large common offset out of the
// subtraction.
fn embed_from_logs(logs: &[f64]) -> EmbeddedPoint {
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let centered: Vec<f64> = logs.iter().map(|l| l - mean).collect();
    let residue: f64 = centered.iter().sum();
    EmbeddedPoint::new_unchecked(centered.iter().map(|c| n * c - residue).collect())
}

/// Posterior recovered from distances alone: a softmax over symbols of
/// `-‖y - x_i‖²`, with max subtraction. Inverts [`embed_observation`] on
/// strictly positive posteriors.
pub fn reconstruct_posterior(
    point: &EmbeddedPoint,
    alphabet: &Alphabet,
) -> Result<Posterior, Error> {
    if point.dim() != alphabet.size() {
        return Err(Error::DimensionMismatch {
            left: point.dim(),
            right: alphabet.size(),
        });
    }
    let weights: Vec<f64> = symbol_points(alphabet)
        .iter()
        .map(|x| -point.squared_distance_to(x).expect("equal dimensions"))
        .collect();
    Posterior::from_log_weights(&weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{AwgnChannel, Channel, LaplaceChannel, Observation, Prior};
    use crate::seed::SeedStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn alphabet(n: usize) -> Alphabet {
        Alphabet::new((1..=n).map(|i| format!("s{i}")).collect()).unwrap()
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

    #[test]
    fn symbol_image_matches_hand_evaluation_for_three_symbols() {
        let point = embed_symbol(&alphabet(3), 0).unwrap();
        let expected = [1.0 / 9.0, -1.0 / 18.0, -1.0 / 18.0];
        for (got, want) in point.coords().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn symbol_norms_and_pairwise_distances_across_sizes() {
        for n in 2..=16usize {
            let a = alphabet(n);
            let nf = n as f64;
            let expected_norm = (1.0 / (2.0 * nf)) * ((nf - 1.0) / nf).sqrt();
            let expected_gap = 2.0_f64.sqrt() / (2.0 * nf);
            let points = symbol_points(&a);
            for p in &points {
                assert_abs_diff_eq!(p.norm(), expected_norm, epsilon = 1e-12);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = distance(&points[i], &points[j]).unwrap();
                    assert_abs_diff_eq!(d, expected_gap, epsilon = 1e-12);
                    // Brute-force check of the same difference vector.
                    let brute: f64 = points[i]
                        .coords()
                        .iter()
                        .zip(points[j].coords())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    assert_abs_diff_eq!(d, brute, epsilon = 0.0);
                }
            }
        }
    }

    #[test]
    fn symbol_index_out_of_range() {
        assert!(matches!(
            embed_symbol(&alphabet(3), 3),
            Err(Error::IndexOutOfRange { index: 3, size: 3 })
        ));
    }

    #[test]
    fn uniform_posterior_maps_to_origin() {
        let p = Posterior::new(vec![0.25; 4]).unwrap();
        let point = embed_observation(&p).unwrap();
        for c in point.coords() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn table_posterior_observation_image() {
        let p = Posterior::new(vec![0.34, 0.33, 0.33]).unwrap();
        let point = embed_observation(&p).unwrap();
        // 3 log p_i - sum_j log p_j, evaluated independently.
        let logs = [0.34_f64.ln(), 0.33_f64.ln(), 0.33_f64.ln()];
        let total: f64 = logs.iter().sum();
        for (got, l) in point.coords().iter().zip(logs) {
            assert_abs_diff_eq!(*got, 3.0 * l - total, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(point.coords()[0], 0.059706, epsilon = 1e-6);
        assert_abs_diff_eq!(point.coords()[1], -0.029853, epsilon = 1e-6);
    }

    #[test]
    fn two_symbol_image_is_the_log_ratio_pair() {
        let p = Posterior::new(vec![0.8, 0.2]).unwrap();
        let point = embed_observation(&p).unwrap();
        assert_abs_diff_eq!(point.coords()[0], (0.8_f64 / 0.2).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(point.coords()[1], (0.2_f64 / 0.8).ln(), epsilon = 1e-12);
    }

    #[test]
    fn zero_posterior_component_is_an_erasure() {
        let p = Posterior::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(
            embed_observation(&p),
            Err(Error::Erasure { index: 2 })
        ));
    }

    #[test]
    fn likelihood_image_rejects_non_finite_input() {
        assert!(matches!(
            embed_observation_from_likelihoods(&[0.0, f64::NEG_INFINITY, 1.0]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn awgn_closed_form_locus() {
        // (1/2σ²)·(2, 6y−1, −6y−1) for the constellation (0, 1, −1),
        // derived from raw log densities.
        let mut rng = SeedStream::new(3);
        for _ in 0..100 {
            let y = (rng.random::<f64>() - 0.5) * 10.0;
            let s2 = 0.05 + rng.random::<f64>() * 4.0;
            let channel = Channel::Awgn(AwgnChannel::new(vec![0.0, 1.0, -1.0], s2).unwrap());
            let ll = channel.log_likelihoods(&Observation::Value(y)).unwrap();
            let point = embed_observation_from_likelihoods(&ll).unwrap();
            let expected = [
                2.0 / (2.0 * s2),
                (6.0 * y - 1.0) / (2.0 * s2),
                (-6.0 * y - 1.0) / (2.0 * s2),
            ];
            let scale = expected.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
            for (got, want) in point.coords().iter().zip(expected) {
                assert!(
                    (got - want).abs() <= 1e-12 * scale,
                    "y={y} s2={s2}: {got} vs {want}"
                );
            }
        }
        // Worked value at y = 0.5, σ² = 1.
        let channel = Channel::Awgn(AwgnChannel::new(vec![0.0, 1.0, -1.0], 1.0).unwrap());
        let ll = channel.log_likelihoods(&Observation::Value(0.5)).unwrap();
        let point = embed_observation_from_likelihoods(&ll).unwrap();
        let expected = [1.0, 1.0, -2.0];
        for (got, want) in point.coords().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn laplace_saturates_past_the_outermost_symbol() {
        let channel = Channel::Laplace(LaplaceChannel::new(vec![0.0, 1.0, -1.0], 1.0).unwrap());
        for y in [1.5, 2.0, 3.7, 5.0] {
            let ll = channel.log_likelihoods(&Observation::Value(y)).unwrap();
            let point = embed_observation_from_likelihoods(&ll).unwrap();
            let expected = [0.0, 3.0, -3.0];
            for (got, want) in point.coords().iter().zip(expected) {
                assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reconstruct_at_origin_is_uniform() {
        let a = alphabet(5);
        let origin = EmbeddedPoint::from_coords(vec![0.0; 5]).unwrap();
        let p = reconstruct_posterior(&origin, &a).unwrap();
        for v in p.probabilities() {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn round_trip_identity_on_random_posteriors() {
        let mut rng = SeedStream::new(8);
        for n in [2usize, 3, 4, 8, 16] {
            let a = alphabet(n);
            for _ in 0..200 {
                let p = random_posterior(n, &mut rng);
                let q = reconstruct_posterior(&embed_observation(&p).unwrap(), &a).unwrap();
                for (got, want) in q.probabilities().iter().zip(p.probabilities()) {
                    assert_abs_diff_eq!(*got, *want, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn reconstruct_matches_bayes_posterior_for_awgn() {
        let channel = Channel::Awgn(AwgnChannel::new(vec![0.0, 1.0, -1.0], 1.0).unwrap());
        let prior = Prior::uniform(3);
        let bayes = channel.posterior(&prior, &Observation::Value(0.5)).unwrap();
        let point = EmbeddedPoint::from_coords(vec![1.0, 1.0, -2.0]).unwrap();
        let geo = reconstruct_posterior(&point, channel.alphabet()).unwrap();
        for (g, b) in geo.probabilities().iter().zip(bayes.probabilities()) {
            assert_abs_diff_eq!(*g, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn distance_basics() {
        let a = EmbeddedPoint::from_coords(vec![1.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(distance(&a, &a).unwrap(), 0.0, epsilon = 0.0);
        let b = EmbeddedPoint::from_coords(vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(b, Error::NotInPlane { .. }));
        let c = EmbeddedPoint::from_coords(vec![0.5, -0.5]).unwrap();
        assert!(matches!(
            distance(&a, &c),
            Err(Error::DimensionMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn awgn_locus_is_collinear() {
        let channel = Channel::Awgn(AwgnChannel::new(vec![0.0, 1.0, -1.0], 0.7).unwrap());
        let points: Vec<EmbeddedPoint> = (0..10)
            .map(|i| {
                let y = -2.0 + i as f64 * 0.45;
                let ll = channel.log_likelihoods(&Observation::Value(y)).unwrap();
                embed_observation_from_likelihoods(&ll).unwrap()
            })
            .collect();
        let base: Vec<f64> = points[1]
            .coords()
            .iter()
            .zip(points[0].coords())
            .map(|(a, b)| a - b)
            .collect();
        let base_norm: f64 = base.iter().map(|c| c * c).sum::<f64>().sqrt();
        for w in points.windows(2).skip(1) {
            let diff: Vec<f64> = w[1]
                .coords()
                .iter()
                .zip(w[0].coords())
                .map(|(a, b)| a - b)
                .collect();
            let norm: f64 = diff.iter().map(|c| c * c).sum::<f64>().sqrt();
            // Gram residual: |u·u||v·v| - (u·v)^2 vanishes iff parallel.
            let dot: f64 = base.iter().zip(&diff).map(|(a, b)| a * b).sum();
            let residual = (base_norm * base_norm * norm * norm - dot * dot).abs()
                / (base_norm * base_norm * norm * norm);
            assert!(residual < 1e-9, "residual {residual}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn likelihood_shift_invariance(
            raw in proptest::collection::vec(-50.0f64..50.0, 2..10),
            shift in -1e6f64..1e6,
        ) {
            let a = embed_observation_from_likelihoods(&raw).unwrap();
            let shifted: Vec<f64> = raw.iter().map(|l| l + shift).collect();
            let b = embed_observation_from_likelihoods(&shifted).unwrap();
            let scale = a.coords().iter().fold(1.0_f64, |m, c| m.max(c.abs()));
            for (x, y) in a.coords().iter().zip(b.coords()) {
                prop_assert!((x - y).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn kernel_product_law(
            ds in proptest::collection::vec(0.0f64..3.0, 1..8),
        ) {
            let joint = distance_kernel(ds.iter().map(|d| d * d).sum::<f64>().sqrt());
            let product: f64 = ds.iter().map(|d| distance_kernel(*d)).product();
            prop_assert!((joint - product).abs() <= 1e-12 * joint.max(product));
        }

        #[test]
        fn kernel_is_monotone_decreasing(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(distance_kernel(lo) >= distance_kernel(hi));
        }

        #[test]
        fn triangle_inequality(
            raw in proptest::collection::vec(-10.0f64..10.0, 9),
        ) {
            let center = |chunk: &[f64]| {
                let m = chunk.iter().sum::<f64>() / chunk.len() as f64;
                EmbeddedPoint::from_coords(chunk.iter().map(|c| {
                    c - m
                }).collect::<Vec<_>>()).unwrap()
            };
            let a = center(&raw[0..3]);
            let b = center(&raw[3..6]);
            let c = center(&raw[6..9]);
            let ab = distance(&a, &b).unwrap();
            let bc = distance(&b, &c).unwrap();
            let ac = distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}
