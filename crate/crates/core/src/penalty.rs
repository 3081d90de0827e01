//! Penalty calibration bounding the probability of spurious joins between
//! connectivity components, built on a self-contained Student-t survival
//! function and quantile.
//!
//! For an error budget eps, any Laplace scale at or above
//!
//!     (2/n) sqrt(n - 2 + t^2) / ( sqrt(max_{i!=j} S_ii S_jj) * t ),
//!     t = upper quantile of Student-t(n-2) at eps / (2 p^2),
//!
//! guarantees that the probability of any estimated component escaping its
//! true component is at most eps. These floors produce very sparse graphs and
//! should be treated as starting values; callers expose a multiplier.

use crate::error::{Error, Result};
use crate::mat::SymmetricMatrix;

/// Calibration inputs: target error, sample count, variable count.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBudget {
    pub epsilon: f64,
    pub n: usize,
    pub p: usize,
}

impl ErrorBudget {
    pub fn new(epsilon: f64, n: usize, p: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Calibration(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if n <= 2 {
            return Err(Error::Calibration(format!("need n > 2 samples, got {n}")));
        }
        Ok(Self { epsilon, n, p })
    }
}

/// Survival function P(T > x) of Student's t with `df` degrees of freedom.
pub fn student_t_survival(x: f64, df: usize) -> f64 {
    assert!(df >= 1);
    if x == 0.0 {
        return 0.5;
    }
    let nu = df as f64;
    let z = nu / (nu + x * x);
    let tail = 0.5 * inc_beta(0.5 * nu, 0.5, z);
    if x > 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Upper quantile: the t with `student_t_survival(t, df) == u`, by bisection
/// with a Newton polish.
pub fn student_t_upper_quantile(u: f64, df: usize) -> f64 {
    assert!(u > 0.0 && u < 1.0);
    if (u - 0.5).abs() < 1e-300 {
        return 0.0;
    }
    if u > 0.5 {
        return -student_t_upper_quantile(1.0 - u, df);
    }
    // Bracket [lo, hi] with survival(hi) <= u <= survival(lo).
    let mut lo = 0.0;
    let mut hi = 1.0;
    while student_t_survival(hi, df) > u {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if student_t_survival(mid, df) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..4 {
        let f = student_t_survival(t, df) - u;
        let d = t_density(t, df);
        if d <= 0.0 {
            break;
        }
        let step = f / d; // survival' = -density
        let next = t + step;
        if !next.is_finite() {
            break;
        }
        t = next;
    }
    t
}

fn t_density(x: f64, df: usize) -> f64 {
    let nu = df as f64;
    (ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * (nu + 1.0) * (1.0 + x * x / nu).ln())
    .exp()
}

/// Uniform scale floor from the component-containment bound.
pub fn lambda_floor(budget: &ErrorBudget, s: &SymmetricMatrix) -> Result<f64> {
    if budget.p != s.dim() {
        return Err(Error::dim(format!(
            "budget says p = {} but S is {}x{}",
            budget.p,
            s.dim(),
            s.dim()
        )));
    }
    let p = s.dim();
    if p < 2 {
        return Err(Error::Calibration("need at least two variables".to_string()));
    }
    let mut max_prod = f64::NEG_INFINITY;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                max_prod = max_prod.max(s.get(i, i) * s.get(j, j));
            }
        }
    }
    floor_from_max_product(budget, max_prod)
}

fn floor_from_max_product(budget: &ErrorBudget, max_prod: f64) -> Result<f64> {
    if !(max_prod > 0.0) {
        return Err(Error::Calibration(
            "degenerate covariance diagonal: max S_ii S_jj must be positive".to_string(),
        ));
    }
    let n = budget.n as f64;
    let df = budget.n - 2;
    let u = budget.epsilon / (2.0 * (budget.p as f64).powi(2));
    let t = student_t_upper_quantile(u, df);
    Ok((2.0 / n) * (n - 2.0 + t * t).sqrt() / (max_prod.sqrt() * t))
}

/// Class-conditional floors: the max over S_ii S_jj is restricted to pairs
/// with the given hard labels; label pairs with no eligible (i, j) fall back
/// to the global floor.
pub fn lambda_floor_classwise(
    budget: &ErrorBudget,
    s: &SymmetricMatrix,
    hard_z: &[usize],
) -> Result<SymmetricMatrix> {
    let p = s.dim();
    if hard_z.len() != p {
        return Err(Error::dim("one label per variable required".to_string()));
    }
    let q = hard_z.iter().max().map_or(0, |m| m + 1);
    let global = lambda_floor(budget, s)?;
    let mut max_prod = vec![f64::NEG_INFINITY; q * q];
    for i in 0..p {
        for j in 0..p {
            if i != j {
                let slot = hard_z[i] * q + hard_z[j];
                max_prod[slot] = max_prod[slot].max(s.get(i, i) * s.get(j, j));
            }
        }
    }
    SymmetricMatrix::from_fn(q, |a, b| {
        let m = max_prod[a * q + b].max(max_prod[b * q + a]);
        if m > 0.0 {
            floor_from_max_product(budget, m).unwrap_or(global)
        } else {
            global
        }
    })
}

/// ln Gamma by the Lanczos approximation (g = 7, 9 coefficients), accurate to
/// about 1e-13 over the positive axis.
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    let x = x - 1.0;
    let mut acc = G[0];
    for (i, &c) in G.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_z(a, b) by Lentz's continued fraction.
fn inc_beta(a: f64, b: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * z.ln() + b * (1.0 - z).ln()).exp();
    // The continued fraction converges fast on the side of the symmetry point.
    if z < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, z) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - z) / b
    }
}

fn beta_cf(a: f64, b: f64, z: f64) -> f64 {
    const EPS: f64 = 1e-14;
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * z / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..400 {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * z / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * z / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
