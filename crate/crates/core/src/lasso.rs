//! Weighted-l1 lasso by pathwise coordinate optimization.
//!
//! This is the inner kernel of the penalized covariance solver. The problem is
//!
//! ```text
//! minimize  (1/4) b' G b  -  c' b  +  sum_j w_j |b_j|
//! ```
//!
//! over b, with G positive definite (the Sigma_11 block of the current
//! covariance iterate), c the corresponding empirical covariance column and w
//! the per-coordinate penalty weights. Coordinates are swept in a fixed cyclic
//! order; each update is the exact one-dimensional minimizer
//!
//! ```text
//! b_j  <-  2 S( c_j - (1/2) sum_{k != j} G_jk b_k ; w_j ) / G_jj
//! ```
//!
//! where S is the soft-thresholding operator.

use crate::error::{Error, Result};
use crate::mat::{dot, SymmetricMatrix};

/// Default sweep convergence tolerance (max coordinate change per sweep).
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default sweep budget, generous for desk-scale problems.
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

/// Soft-thresholding S(x; rho) = sgn(x) (|x| - rho)_+.
#[inline]
pub fn soft_threshold(x: f64, rho: f64) -> f64 {
    debug_assert!(rho >= 0.0);
    if x > rho {
        x - rho
    } else if x < -rho {
        x + rho
    } else {
        0.0
    }
}

/// A weighted lasso instance: Gram block, linear term, nonnegative weights.
#[derive(Debug, Clone)]
pub struct WeightedLassoProblem<'a> {
    pub gram: &'a SymmetricMatrix,
    pub linear: &'a [f64],
    pub weights: &'a [f64],
}

impl<'a> WeightedLassoProblem<'a> {
    pub fn new(gram: &'a SymmetricMatrix, linear: &'a [f64], weights: &'a [f64]) -> Result<Self> {
        let d = gram.dim();
        if linear.len() != d || weights.len() != d {
            return Err(Error::dim(format!(
                "lasso dimensions disagree: gram {d}, linear {}, weights {}",
                linear.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::data("lasso weights must be finite and >= 0".to_string()));
        }
        Ok(Self { gram, linear, weights })
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    /// Objective value at `beta` given `gv = G beta`.
    fn objective(&self, beta: &[f64], gv: &[f64]) -> f64 {
        0.25 * dot(beta, gv) - dot(self.linear, beta)
            + beta
                .iter()
                .zip(self.weights)
                .map(|(b, w)| w * b.abs())
                .sum::<f64>()
    }

    /// Max violation of the subgradient optimality conditions at `beta`.
    fn kkt_violation(&self, beta: &[f64], gv: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..beta.len() {
            let g = 0.5 * gv[j] - self.linear[j];
            let v = if beta[j] > 0.0 {
                (g + self.weights[j]).abs()
            } else if beta[j] < 0.0 {
                (g - self.weights[j]).abs()
            } else {
                (g.abs() - self.weights[j]).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }
}

/// Converged solution with its final KKT audit.
#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub max_kkt_violation: f64,
}

/// Solves the weighted lasso by cyclic coordinate descent.
///
/// `init` warm-starts the solve (zero vector otherwise). Convergence requires
/// both the per-sweep max coordinate change and the final subgradient audit to
/// fall below `tol`; exhausting `max_sweeps` is an error carrying the residual.
pub fn solve_weighted_lasso(
    problem: &WeightedLassoProblem,
    init: Option<&[f64]>,
    tol: f64,
    max_sweeps: usize,
) -> Result<LassoSolution> {
    if tol <= 0.0 {
        return Err(Error::data("lasso tol must be positive".to_string()));
    }
    let d = problem.dim();
    let mut beta = match init {
        Some(b) if b.len() == d => b.to_vec(),
        Some(b) => {
            return Err(Error::dim(format!(
                "warm start has length {}, expected {d}",
                b.len()
            )))
        }
        None => vec![0.0; d],
    };
    let mut gv = problem.gram.matvec(&beta);
    #[cfg(debug_assertions)]
    let mut prev_obj = problem.objective(&beta, &gv);

    let mut residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..d {
            let gjj = problem.gram.get(j, j);
            let partial = problem.linear[j] - 0.5 * (gv[j] - gjj * beta[j]);
            let new = 2.0 * soft_threshold(partial, problem.weights[j]) / gjj;
            let delta = new - beta[j];
            if delta != 0.0 {
                let grow = problem.gram.row(j);
                for (gvk, gk) in gv.iter_mut().zip(grow) {
                    *gvk += delta * gk;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        #[cfg(debug_assertions)]
        {
            let obj = problem.objective(&beta, &gv);
            debug_assert!(
                obj <= prev_obj + 1e-12 * (1.0 + prev_obj.abs()),
                "lasso objective increased within a sweep: {prev_obj} -> {obj}"
            );
            prev_obj = obj;
        }
        if max_change < tol {
            // Refresh G beta before auditing; incremental updates drift.
            gv = problem.gram.matvec(&beta);
            let kkt = problem.kkt_violation(&beta, &gv);
            if kkt <= tol {
                return Ok(LassoSolution {
                    beta,
                    iterations: sweep,
                    max_kkt_violation: kkt,
                });
            }
            residual = kkt;
        } else {
            residual = max_change;
        }
    }
    Err(Error::NonConvergence {
        what: "coordinate-descent lasso",
        iterations: max_sweeps,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ggm_oracles::{lasso_enumerate, lasso_subgradient_polished};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_pd_matrix(p: usize, rng: &mut impl Rng) -> SymmetricMatrix {
        SymmetricMatrix::new(p, ggm_oracles::random_pd(p, rng)).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    }

    #[test]
    fn one_dimensional_update() {
        let gram = SymmetricMatrix::new(1, vec![2.0]).unwrap();
        let problem = WeightedLassoProblem::new(&gram, &[1.0], &[0.5]).unwrap();
        let sol = solve_weighted_lasso(&problem, None, 1e-10, 100).unwrap();
        assert_abs_diff_eq!(sol.beta[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn large_weights_kill_everything() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let gram = random_pd_matrix(4, &mut rng);
        let linear = [0.4, -0.2, 0.7, 0.1];
        let weights = [0.8; 4]; // >= |linear_j| everywhere
        let problem = WeightedLassoProblem::new(&gram, &linear, &weights).unwrap();
        let sol = solve_weighted_lasso(&problem, None, 1e-10, 100).unwrap();
        assert!(sol.beta.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn matches_enumeration_and_subgradient_oracles() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for trial in 0..10 {
            let gram = random_pd_matrix(4, &mut rng);
            let linear: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let weights = vec![0.3; 4];
            let problem = WeightedLassoProblem::new(&gram, &linear, &weights).unwrap();
            let sol = solve_weighted_lasso(&problem, None, 1e-10, 10_000).unwrap();

            let exact = lasso_enumerate(gram.as_slice(), 4, &linear, &weights)
                .expect("enumeration found optimum");
            let sub =
                lasso_subgradient_polished(gram.as_slice(), 4, &linear, &weights, 2_000_000, 1e-8);
            let objective = |beta: &[f64]| {
                let gv = gram.matvec(beta);
                0.25 * dot(beta, &gv) - dot(&linear, beta)
                    + beta.iter().zip(&weights).map(|(b, w)| w * b.abs()).sum::<f64>()
            };
            // The brute-force enumeration is the exact anchor; the subgradient
            // path cross-checks it at a coarser coordinate tolerance (it can
            // sit on the other side of a near-degenerate threshold).
            assert!(objective(&sub) - objective(&sol.beta) > -1e-9, "trial {trial}");
            for j in 0..4 {
                assert_abs_diff_eq!(sol.beta[j], exact[j], epsilon = 1e-5);
                assert!(
                    (sol.beta[j] - sub[j]).abs() < 1e-4,
                    "trial {trial}: subgradient oracle disagrees at {j}: {} vs {}",
                    sol.beta[j],
                    sub[j]
                );
            }
        }
    }

    #[test]
    fn warm_start_reaches_same_solution() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let gram = random_pd_matrix(5, &mut rng);
        let linear: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let weights = vec![0.2; 5];
        let problem = WeightedLassoProblem::new(&gram, &linear, &weights).unwrap();
        let tol = 1e-9;
        let cold = solve_weighted_lasso(&problem, None, tol, 10_000).unwrap();
        let start: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let warm = solve_weighted_lasso(&problem, Some(&start), tol, 10_000).unwrap();
        for j in 0..5 {
            assert!((cold.beta[j] - warm.beta[j]).abs() <= 10.0 * tol);
        }
    }

    #[test]
    fn joint_scaling_scales_solution() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let gram = random_pd_matrix(4, &mut rng);
        let linear: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let weights = vec![0.15; 4];
        let base = WeightedLassoProblem::new(&gram, &linear, &weights).unwrap();
        let sol = solve_weighted_lasso(&base, None, 1e-11, 10_000).unwrap();
        let c = 3.5;
        let linear2: Vec<f64> = linear.iter().map(|v| c * v).collect();
        let weights2: Vec<f64> = weights.iter().map(|v| c * v).collect();
        let scaled = WeightedLassoProblem::new(&gram, &linear2, &weights2).unwrap();
        let sol2 = solve_weighted_lasso(&scaled, None, 1e-11, 10_000).unwrap();
        for j in 0..4 {
            assert_abs_diff_eq!(sol2.beta[j], c * sol.beta[j], epsilon = 1e-7);
        }
    }

    #[test]
    fn zero_weights_recover_normal_equations() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let gram = random_pd_matrix(5, &mut rng);
        let linear: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let weights = vec![0.0; 5];
        let problem = WeightedLassoProblem::new(&gram, &linear, &weights).unwrap();
        let sol = solve_weighted_lasso(&problem, None, 1e-12, 50_000).unwrap();
        // beta = 2 G^{-1} c
        let direct = gram.cholesky().unwrap().solve(&linear);
        for j in 0..5 {
            assert_abs_diff_eq!(sol.beta[j], 2.0 * direct[j], epsilon = 1e-8);
        }
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let gram = random_pd_matrix(6, &mut rng);
        let linear: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let weights = vec![0.05; 6];
        let problem = WeightedLassoProblem::new(&gram, &linear, &weights).unwrap();
        match solve_weighted_lasso(&problem, None, 1e-14, 1) {
            Err(Error::NonConvergence { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
