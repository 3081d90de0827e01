//! Neighborhood selection: one weighted lasso regression per node, AND/OR
//! symmetrization, and the penalized pseudo-log-likelihood the zero patterns
//! are equivalent to.
//!
//! The regression for node i uses the matrix penalty 2P/n, cast onto the
//! shared lasso kernel as gram = 2 S_11, linear = s_12, weights = (2/n) P_i.
//! Diagonals are never penalized here: the l1 norm of this formulation is
//! restricted to off-diagonal entries.

use crate::dataset::{empirical_covariance, Dataset};
use crate::error::{Error, Result};
use crate::eval::EdgeSet;
use crate::glasso::PenaltyMatrix;
use crate::lasso::{solve_weighted_lasso, WeightedLassoProblem};
use crate::mat::SymmetricMatrix;

/// Relative floor under which a regression coefficient counts as zero.
pub const COEF_FLOOR_REL: f64 = 1e-9;

/// Per-node regression coefficients and their AND/OR symmetrizations.
#[derive(Debug, Clone)]
pub struct NeighborhoodResult {
    /// Row i holds the regression coefficients of X_i on the other variables;
    /// the diagonal is zero. Row-major p x p.
    pub coef: Vec<f64>,
    pub p: usize,
    pub adjacency_and: EdgeSet,
    pub adjacency_or: EdgeSet,
}

impl NeighborhoodResult {
    pub fn coef_at(&self, i: usize, j: usize) -> f64 {
        self.coef[i * self.p + j]
    }

    /// Edge list with a rule column: "and" edges survive both directions,
    /// "or" edges only one.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("i,j,rule\n");
        for (i, j) in self.adjacency_or.upper_pairs() {
            let rule = if self.adjacency_and.contains(i, j) { "and" } else { "or" };
            out.push_str(&format!("{i},{j},{rule}\n"));
        }
        out
    }
}

/// Runs the p weighted lasso regressions and symmetrizes the supports.
pub fn mb_select(data: &Dataset, penalty: &PenaltyMatrix) -> Result<NeighborhoodResult> {
    let p = data.n_vars();
    let n = data.n_samples();
    if penalty.dim() != p {
        return Err(Error::dim(format!(
            "penalty is {}x{} but the data has p = {p}",
            penalty.dim(),
            penalty.dim()
        )));
    }
    let s = empirical_covariance(&data.centered())?;
    let two_over_n = 2.0 / n as f64;

    let mut coef = vec![0.0; p * p];
    for i in 0..p {
        let view = s.block_view(i)?;
        let gram = SymmetricMatrix::from_fn(p - 1, |a, b| 2.0 * view.sub11.get(a, b))?;
        let weights: Vec<f64> = (0..p)
            .filter(|&j| j != i)
            .map(|j| two_over_n * penalty.get(i, j))
            .collect();
        let problem = WeightedLassoProblem::new(&gram, &view.vec12, &weights)?;
        let sol = solve_weighted_lasso(&problem, None, 1e-9, 10_000)?;
        let mut idx = 0;
        for j in 0..p {
            if j != i {
                coef[i * p + j] = sol.beta[idx];
                idx += 1;
            }
        }
    }

    let max_abs = coef.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = COEF_FLOOR_REL * max_abs;
    let mut and = EdgeSet::empty(p);
    let mut or = EdgeSet::empty(p);
    for i in 0..p {
        for j in (i + 1)..p {
            let ij = coef[i * p + j].abs() > floor;
            let ji = coef[j * p + i].abs() > floor;
            if ij && ji {
                and.insert(i, j);
            }
            if ij || ji {
                or.insert(i, j);
            }
        }
    }
    Ok(NeighborhoodResult { coef, p, adjacency_and: and, adjacency_or: or })
}

/// Penalized-free pseudo-log-likelihood of a (possibly asymmetric) precision
/// candidate `k` (row-major p x p):
///
///     (n/2) sum_i ( log K_ii - K_ii S_ii - 2 S_{i,-i} K_{i,-i}
///                   - (1/K_ii) K_{i,-i} S_{-i,-i} K_{i,-i}' )  -  (np/2) log 2 pi.
pub fn pseudo_log_likelihood(s: &SymmetricMatrix, k: &[f64], n: usize) -> Result<f64> {
    let p = s.dim();
    if k.len() != p * p {
        return Err(Error::dim(format!(
            "k must be {p}x{p} row-major, got {} entries",
            k.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..p {
        let kii = k[i * p + i];
        if !(kii > 0.0) {
            return Err(Error::Domain(format!(
                "pseudo-likelihood needs K_{i}{i} > 0, got {kii}"
            )));
        }
        let mut cross = 0.0; // S_{i,-i} K_{i,-i}
        let mut quad = 0.0; // K_{i,-i} S_{-i,-i} K_{i,-i}'
        for j in 0..p {
            if j == i {
                continue;
            }
            cross += s.get(i, j) * k[i * p + j];
            for l in 0..p {
                if l == i {
                    continue;
                }
                quad += k[i * p + j] * s.get(j, l) * k[i * p + l];
            }
        }
        total += kii.ln() - kii * s.get(i, i) - 2.0 * cross - quad / kii;
    }
    let nf = n as f64;
    let pf = p as f64;
    Ok(0.5 * nf * total - 0.5 * nf * pf * (2.0 * std::f64::consts::PI).ln())
}

/// Off-diagonal zero-pattern comparison of two square matrices at a floor.
#[derive(Debug, Clone)]
pub struct PatternReport {
    pub agreements: usize,
    pub disagreements: Vec<(usize, usize)>,
}

impl PatternReport {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

pub fn zero_pattern_compare(a: &[f64], b: &[f64], p: usize, floor: f64) -> Result<PatternReport> {
    if a.len() != p * p || b.len() != p * p {
        return Err(Error::dim("pattern compare: shapes differ".to_string()));
    }
    let mut agreements = 0;
    let mut disagreements = Vec::new();
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            if (a[i * p + j].abs() > floor) == (b[i * p + j].abs() > floor) {
                agreements += 1;
            } else {
                disagreements.push((i, j));
            }
        }
    }
    Ok(PatternReport { agreements, disagreements })
}
