//! Synthetic structured networks: affiliation graph, signed incidence,
//! diagonally dominant precision matrix normalized to unit diagonal, and
//! Gaussian sampling from its inverse.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::EdgeSet;
use crate::mat::SymmetricMatrix;
use crate::rng::{stream, StreamRole};

/// Edge-weight magnitude before the dominance-and-rescale step. The rescale
/// normalizes overall scale anyway; only the dominance margin matters.
const EDGE_WEIGHT: f64 = 1.0;
/// Strict diagonal-dominance margin added before rescaling.
const DOMINANCE_MARGIN: f64 = 0.1;

/// Affiliation-model specification.
#[derive(Debug, Clone)]
pub struct AffiliationSpec {
    pub p: usize,
    pub q: usize,
    pub alpha: Vec<f64>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl AffiliationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.q == 0 {
            return Err(Error::data("need p >= 2 nodes and Q >= 1 clusters".to_string()));
        }
        if self.alpha.len() != self.q {
            return Err(Error::dim(format!(
                "alpha has {} entries for Q = {}",
                self.alpha.len(),
                self.q
            )));
        }
        let sum: f64 = self.alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-10 || self.alpha.iter().any(|&a| a < 0.0) {
            return Err(Error::data("alpha must be a probability vector".to_string()));
        }
        for (name, v) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::data(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A sampled ground-truth network.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Hard cluster labels.
    pub z: Vec<usize>,
    /// True precision matrix, positive definite with unit diagonal.
    pub k_true: SymmetricMatrix,
    /// Its inverse, the sampling covariance.
    pub sigma_true: SymmetricMatrix,
    /// Support of the off-diagonal entries of `k_true`.
    pub edges: EdgeSet,
}

/// Draws labels, an affiliation edge set with random sign flips, and the
/// normalized precision matrix. Deterministic under `spec.seed`; each stage
/// consumes its own substream so later stages never perturb earlier ones.
pub fn sample_structure(spec: &AffiliationSpec) -> Result<GroundTruth> {
    spec.validate()?;
    let p = spec.p;

    let mut label_rng = stream(spec.seed, StreamRole::Labels, 0);
    let z: Vec<usize> = (0..p)
        .map(|_| categorical(&spec.alpha, &mut label_rng))
        .collect();

    let mut edge_rng = stream(spec.seed, StreamRole::Edges, 0);
    let mut edges = EdgeSet::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let prob = if z[i] == z[j] { spec.p_in } else { spec.p_out };
            if prob > 0.0 && edge_rng.gen::<f64>() < prob {
                edges.insert(i, j);
            }
        }
    }

    let mut sign_rng = stream(spec.seed, StreamRole::Signs, 0);
    let mut weights = SymmetricMatrix::zeros(p);
    for (i, j) in edges.upper_pairs() {
        let sign = if sign_rng.gen::<bool>() { 1.0 } else { -1.0 };
        weights.set_sym(i, j, sign * EDGE_WEIGHT);
    }

    // Strict diagonal dominance, then symmetric rescale to unit diagonal.
    let diag: Vec<f64> = (0..p)
        .map(|i| {
            (0..p)
                .filter(|&j| j != i)
                .map(|j| weights.get(i, j).abs())
                .sum::<f64>()
                + DOMINANCE_MARGIN
        })
        .collect();
    let k_true = SymmetricMatrix::from_fn(p, |i, j| {
        if i == j {
            1.0
        } else {
            weights.get(i, j) / (diag[i] * diag[j]).sqrt()
        }
    })?;
    assert!(
        k_true.is_positive_definite(),
        "dominance construction must yield a PD matrix"
    );
    let sigma_true = k_true.invert_pd()?;
    Ok(GroundTruth { z, k_true, sigma_true, edges })
}

fn categorical(alpha: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &a) in alpha.iter().enumerate() {
        acc += a;
        if u < acc {
            return k;
        }
    }
    alpha.len() - 1
}

/// n i.i.d. zero-mean Gaussian samples with covariance `gt.sigma_true`,
/// deterministic under `seed`.
pub fn sample_data(gt: &GroundTruth, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::data("need n >= 2 samples".to_string()));
    }
    let p = gt.sigma_true.dim();
    let chol = gt.sigma_true.cholesky()?;
    let mut rng = stream(seed, StreamRole::Gaussians, 0);
    let mut values = Vec::with_capacity(n * p);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        for zi in &mut z {
            *zi = rng.sample(StandardNormal);
        }
        values.extend(chol.lower_matvec(&z));
    }
    Dataset::new(n, p, values, None)
}

/// Exact expected edge count of a spec, conditional on nothing (labels
/// integrated out): pairs are intra with probability sum_q alpha_q^2.
pub fn expected_edges(spec: &AffiliationSpec) -> f64 {
    let pairs = (spec.p * (spec.p - 1) / 2) as f64;
    let same: f64 = spec.alpha.iter().map(|a| a * a).sum();
    pairs * (same * spec.p_in + (1.0 - same) * spec.p_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::empirical_covariance;

    fn spec(p: usize, q: usize, p_in: f64, p_out: f64, seed: u64) -> AffiliationSpec {
        AffiliationSpec {
            p,
            q,
            alpha: vec![1.0 / q as f64; q],
            p_in,
            p_out,
            seed,
        }
    }

    #[test]
    fn complete_graph_for_pin_one() {
        let gt = sample_structure(&spec(4, 1, 1.0, 0.0, 7)).unwrap();
        assert_eq!(gt.edges.len(), 6);
    }

    #[test]
    fn empty_graph_gives_identity_precision() {
        let gt = sample_structure(&spec(5, 2, 0.0, 0.0, 3)).unwrap();
        assert!(gt.edges.is_empty());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(gt.k_true.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn unit_diagonal_and_pd_across_seeds() {
        for seed in 0..50u64 {
            let gt = sample_structure(&spec(20, 3, 0.3, 0.02, seed)).unwrap();
            for i in 0..20 {
                assert!((gt.k_true.get(i, i) - 1.0).abs() < 1e-12);
            }
            assert!(gt.k_true.is_positive_definite());
        }
    }

    #[test]
    fn sign_flips_do_not_change_the_mask() {
        let gt = sample_structure(&spec(15, 2, 0.4, 0.05, 11)).unwrap();
        let from_k = EdgeSet::from_weights(&gt.k_true, 0.0);
        assert_eq!(from_k, gt.edges);
    }

    #[test]
    fn label_marginals_match_alpha() {
        let alpha = [0.2, 0.8];
        let mut counts = [0usize; 2];
        let reps = 200u64;
        let p = 10;
        for seed in 0..reps {
            let gt = sample_structure(&AffiliationSpec {
                p,
                q: 2,
                alpha: alpha.to_vec(),
                p_in: 0.1,
                p_out: 0.0,
                seed,
            })
            .unwrap();
            for &l in &gt.z {
                counts[l] += 1;
            }
        }
        let total = (reps as usize * p) as f64;
        for k in 0..2 {
            let freq = counts[k] as f64 / total;
            let sd = (alpha[k] * (1.0 - alpha[k]) / total).sqrt();
            assert!(
                (freq - alpha[k]).abs() <= 3.0 * sd,
                "class {k}: frequency {freq} vs alpha {}",
                alpha[k]
            );
        }
    }

    #[test]
    fn sampling_is_deterministic_and_concentrates() {
        let gt = sample_structure(&spec(6, 2, 0.0, 0.0, 5)).unwrap(); // identity cov
        let a = sample_data(&gt, 50, 9).unwrap();
        let b = sample_data(&gt, 50, 9).unwrap();
        assert_eq!(a, b);

        // Frobenius/p distance of S from identity is O(n^{-1/2}).
        let n = 4000;
        let mut worst = 0.0f64;
        for seed in 0..10u64 {
            let d = sample_data(&gt, n, seed).unwrap();
            let s = empirical_covariance(&d).unwrap();
            let mut fro = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    let t = s.get(i, j) - if i == j { 1.0 } else { 0.0 };
                    fro += t * t;
                }
            }
            worst = worst.max(fro.sqrt() / 6.0);
        }
        assert!(worst <= 3.0 / (n as f64).sqrt(), "worst deviation {worst}");
    }

    #[test]
    fn tiny_shapes_are_fine() {
        let gt = sample_structure(&spec(2, 1, 0.5, 0.0, 1)).unwrap();
        let d = sample_data(&gt, 2, 0).unwrap();
        assert_eq!((d.n_samples(), d.n_vars()), (2, 2));
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut s = spec(5, 2, 0.5, 0.1, 0);
        s.p_in = 1.5;
        assert!(sample_structure(&s).is_err());
    }

    #[test]
    fn expected_edges_formula() {
        // p = 4, Q = 1, p_in = 1: all 6 pairs.
        assert!((expected_edges(&spec(4, 1, 1.0, 0.0, 0)) - 6.0).abs() < 1e-12);
        // Uniform alpha over 3 classes: same-class probability 1/3.
        let s = spec(200, 3, 0.125, 0.0025, 0);
        let e = expected_edges(&s);
        assert!((e - 862.0).abs() < 2.0, "expected edge count {e}");
    }
}
