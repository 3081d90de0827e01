//! Brute-force reference implementations used as independent oracles in tests.
//!
//! Everything works on plain row-major `&[f64]` slices and shares no code with
//! the production crate: the lasso oracles use sign-pattern enumeration and
//! subgradient descent, the penalized log-det oracle is proximal gradient, the
//! Student-t oracle integrates the density with exact half-integer gamma
//! normalization, and connectivity is checked by dense transitive closure.
//! Deliberately slow and simple.

use rand::Rng;

/// Random positive definite matrix M'M/p + 0.5 I, row-major.
pub fn random_pd(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    let m: Vec<f64> = (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in 0..p {
                s += m[k * p + i] * m[k * p + j];
            }
            out[i * p + j] = s / p as f64 + if i == j { 0.5 } else { 0.0 };
        }
    }
    out
}

/// Lower-triangular Cholesky factor; None when the matrix is not PD.
fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i * p + j];
            for k in 0..j {
                sum -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * p + i] = sum.sqrt();
            } else {
                l[i * p + j] = sum / l[j * p + j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            y[i] -= l[i * p + k] * y[k];
        }
        y[i] /= l[i * p + i];
    }
    for i in (0..p).rev() {
        for k in (i + 1)..p {
            y[i] -= l[k * p + i] * y[k];
        }
        y[i] /= l[i * p + i];
    }
    y
}

fn inverse_pd(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, p)?;
    let mut inv = vec![0.0; p * p];
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        let x = chol_solve(&l, p, &e);
        for r in 0..p {
            inv[r * p + col] = x[r];
        }
    }
    Some(inv)
}

fn matvec(a: &[f64], p: usize, x: &[f64]) -> Vec<f64> {
    (0..p)
        .map(|i| (0..p).map(|j| a[i * p + j] * x[j]).sum())
        .collect()
}

fn lasso_objective(gram: &[f64], d: usize, linear: &[f64], weights: &[f64], beta: &[f64]) -> f64 {
    let gv = matvec(gram, d, beta);
    let quad: f64 = beta.iter().zip(&gv).map(|(b, g)| b * g).sum();
    let lin: f64 = beta.iter().zip(linear).map(|(b, c)| b * c).sum();
    let pen: f64 = beta.iter().zip(weights).map(|(b, w)| w * b.abs()).sum();
    0.25 * quad - lin + pen
}

/// Exact minimizer of (1/4) b'Gb - c'b + ||w * b||_1 by enumerating all 3^d
/// sign patterns and solving the stationarity system on each support. Only
/// sensible for d <= ~8.
pub fn lasso_enumerate(gram: &[f64], d: usize, linear: &[f64], weights: &[f64]) -> Option<Vec<f64>> {
    assert!(d <= 12, "enumeration oracle is for tiny problems");
    let total = 3usize.pow(d as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pattern = vec![0i8; d];
    for code in 0..total {
        let mut c = code;
        for slot in pattern.iter_mut() {
            *slot = match c % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            c /= 3;
        }
        if let Some(beta) = try_pattern(gram, d, linear, weights, &pattern) {
            let obj = lasso_objective(gram, d, linear, weights, &beta);
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, beta));
            }
        }
    }
    best.map(|(_, b)| b)
}

fn try_pattern(
    gram: &[f64],
    d: usize,
    linear: &[f64],
    weights: &[f64],
    pattern: &[i8],
) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..d).filter(|&j| pattern[j] != 0).collect();
    let s = support.len();
    let mut beta = vec![0.0; d];
    if s > 0 {
        // Stationarity on the support: (1/2) G_ss b_s = c_s - w_s sign_s.
        let mut gss = vec![0.0; s * s];
        for a in 0..s {
            for b in 0..s {
                gss[a * s + b] = 0.5 * gram[support[a] * d + support[b]];
            }
        }
        let rhs: Vec<f64> = support
            .iter()
            .map(|&j| linear[j] - weights[j] * pattern[j] as f64)
            .collect();
        let l = cholesky(&gss, s)?;
        let sol = chol_solve(&l, s, &rhs);
        for (idx, &j) in support.iter().enumerate() {
            if sol[idx] * pattern[j] as f64 <= 0.0 {
                return None; // sign inconsistent with the pattern
            }
            beta[j] = sol[idx];
        }
    }
    // Off-support subgradient bound.
    let gv = matvec(gram, d, &beta);
    for j in 0..d {
        if pattern[j] == 0 && (0.5 * gv[j] - linear[j]).abs() > weights[j] + 1e-10 {
            return None;
        }
    }
    Some(beta)
}

/// Subgradient descent with diminishing steps on the same objective, run until
/// the best objective stalls (checked over windows of 1000 iterations) or
/// `max_iters`.
pub fn lasso_subgradient_descent(
    gram: &[f64],
    d: usize,
    linear: &[f64],
    weights: &[f64],
    max_iters: usize,
    stall_tol: f64,
) -> Vec<f64> {
    let lipschitz = (0..d)
        .map(|i| (0..d).map(|j| gram[i * d + j].abs()).sum::<f64>())
        .fold(1.0, f64::max);
    let mut beta = vec![0.0; d];
    let mut best = beta.clone();
    let mut best_obj = lasso_objective(gram, d, linear, weights, &beta);
    let mut window_best = best_obj;
    for t in 1..=max_iters {
        let gv = matvec(gram, d, &beta);
        let step = 1.0 / (lipschitz * (t as f64).sqrt());
        for j in 0..d {
            let sub = 0.5 * gv[j] - linear[j] + weights[j] * sgn(beta[j]);
            beta[j] -= step * sub;
        }
        let obj = lasso_objective(gram, d, linear, weights, &beta);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&beta);
        }
        if t % 1000 == 0 {
            if window_best - best_obj < stall_tol * (1.0 + best_obj.abs()) {
                break;
            }
            window_best = best_obj;
        }
    }
    best
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient descent followed by an exact solve on the sign pattern it
/// identified. Coordinates the descent leaves near zero are ambiguous (they
/// may sit exactly on the soft threshold), so both options are tried for
/// them and the best valid stationary point wins. Falls back to the raw
/// iterate if no pattern checks out.
pub fn lasso_subgradient_polished(
    gram: &[f64],
    d: usize,
    linear: &[f64],
    weights: &[f64],
    max_iters: usize,
    stall_tol: f64,
) -> Vec<f64> {
    let rough = lasso_subgradient_descent(gram, d, linear, weights, max_iters, stall_tol);
    let scale = rough.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let uncertain: Vec<usize> = (0..d).filter(|&j| rough[j].abs() <= 1e-2 * scale).collect();
    let base: Vec<i8> = rough.iter().map(|&b| sgn(b) as i8).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << uncertain.len()) {
        let mut pattern = base.clone();
        for (bit, &j) in uncertain.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                pattern[j] = 0;
            }
        }
        if let Some(candidate) = try_pattern(gram, d, linear, weights, &pattern) {
            let obj = lasso_objective(gram, d, linear, weights, &candidate);
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, candidate));
            }
        }
    }
    best.map(|(_, b)| b).unwrap_or(rough)
}

/// Proximal-gradient (ISTA with backtracking) maximizer of
///
///     log det K - tr(SK) - sum_ij P_ij |K_ij|
///
/// over positive definite K, with an entrywise penalty matrix. Returns K
/// row-major. Reference for the uniform-penalty covariance-selection check.
pub fn glasso_proximal_gradient(
    s: &[f64],
    p: usize,
    penalty: &[f64],
    tol: f64,
    max_iters: usize,
) -> Vec<f64> {
    // Smooth part of the negated objective: f(K) = -log det K + tr(SK).
    let smooth = |k: &[f64]| -> Option<f64> {
        let l = cholesky(k, p)?;
        let log_det: f64 = (0..p).map(|i| l[i * p + i].ln()).sum::<f64>() * 2.0;
        let tr: f64 = k.iter().zip(s).map(|(a, b)| a * b).sum();
        Some(-log_det + tr)
    };
    let trace: f64 = (0..p).map(|i| s[i * p + i]).sum();
    let shift = 0.1 * trace.max(1.0) / p as f64;
    let shifted: Vec<f64> = (0..p * p)
        .map(|idx| s[idx] + if idx / p == idx % p { shift } else { 0.0 })
        .collect();
    let mut k = inverse_pd(&shifted, p).expect("shifted covariance is PD");
    let mut f_k = smooth(&k).expect("start is PD");
    let mut step = 1.0;
    for _ in 0..max_iters {
        let k_inv = inverse_pd(&k, p).expect("iterate stays PD");
        let grad: Vec<f64> = (0..p * p).map(|idx| s[idx] - k_inv[idx]).collect();
        // Backtrack until the candidate is PD and satisfies the quadratic
        // upper bound f(K+) <= f(K) + <grad, K+-K> + ||K+-K||^2 / (2 step).
        let mut cand;
        let mut f_cand;
        loop {
            let mut raw = vec![0.0; p * p];
            for idx in 0..p * p {
                raw[idx] = soft(k[idx] - step * grad[idx], step * penalty[idx]);
            }
            for i in 0..p {
                for j in (i + 1)..p {
                    let m = 0.5 * (raw[i * p + j] + raw[j * p + i]);
                    raw[i * p + j] = m;
                    raw[j * p + i] = m;
                }
            }
            let diff: Vec<f64> = raw.iter().zip(&k).map(|(a, b)| a - b).collect();
            let lin: f64 = diff.iter().zip(&grad).map(|(d, g)| d * g).sum();
            let quad: f64 = diff.iter().map(|d| d * d).sum();
            match smooth(&raw) {
                Some(f) if f <= f_k + lin + quad / (2.0 * step) + 1e-14 => {
                    cand = raw;
                    f_cand = f;
                    break;
                }
                _ => {
                    step *= 0.5;
                    if step < 1e-14 {
                        return k;
                    }
                }
            }
        }
        // Gradient-map stopping criterion.
        let delta = cand
            .iter()
            .zip(&k)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        k = cand;
        f_k = f_cand;
        if delta / step < tol {
            break;
        }
        step = (step * 1.2).min(1.0);
    }
    k
}

fn soft(x: f64, rho: f64) -> f64 {
    if x > rho {
        x - rho
    } else if x < -rho {
        x + rho
    } else {
        0.0
    }
}

/// Student-t survival P(T > x) by Simpson integration of the density. The
/// normalizing constant comes from exact half-integer gamma values, so this
/// path shares nothing with an incomplete-beta implementation.
pub fn t_survival_by_integration(x: f64, df: usize) -> f64 {
    let half = 0.5 - integrate_t_density(0.0, x.abs(), df);
    if x >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// Upper quantile by bisection over the integration-based survival function.
pub fn t_quantile_by_integration(u: f64, df: usize) -> f64 {
    assert!(u > 0.0 && u < 0.5);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_survival_by_integration(hi, df) > u {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if t_survival_by_integration(mid, df) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn integrate_t_density(a: f64, b: f64, df: usize) -> f64 {
    let steps = 40_000; // even
    let h = (b - a) / steps as f64;
    if h == 0.0 {
        return 0.0;
    }
    let f = |t: f64| t_density(t, df);
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let t = a + h * i as f64;
        acc += f(t) * if i % 2 == 0 { 2.0 } else { 4.0 };
    }
    acc * h / 3.0
}

fn t_density(t: f64, df: usize) -> f64 {
    let nu = df as f64;
    let c = gamma_half_ratio(df) / (nu * std::f64::consts::PI).sqrt();
    c * (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0)
}

/// Gamma((nu+1)/2) / Gamma(nu/2) for integer nu via the recurrence
/// Gamma(z+1) = z Gamma(z) down to Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
fn gamma_half_ratio(df: usize) -> f64 {
    (ln_gamma_half_integer(df + 1) - ln_gamma_half_integer(df)).exp()
}

/// ln Gamma(k/2) for integer k >= 1, reduced down to Gamma(1) or Gamma(1/2).
fn ln_gamma_half_integer(k: usize) -> f64 {
    let mut z = k as f64 / 2.0;
    let mut acc = 0.0;
    while z > 1.25 {
        z -= 1.0;
        acc += z.ln();
    }
    if (z - 1.0).abs() < 1e-12 {
        acc // Gamma(1) = 1
    } else {
        acc + std::f64::consts::PI.sqrt().ln() // Gamma(1/2)
    }
}

/// Dense all-pairs reachability over an undirected edge predicate.
pub fn reachability_closure(p: usize, has_edge: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; p]; p];
    for i in 0..p {
        reach[i][i] = true;
        for j in 0..p {
            if i != j && has_edge(i, j) {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..p {
        for i in 0..p {
            if reach[i][k] {
                for j in 0..p {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_gamma_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma_half_integer(1).exp() - sqrt_pi).abs() < 1e-12);
        assert!((ln_gamma_half_integer(2).exp() - 1.0).abs() < 1e-12);
        assert!((ln_gamma_half_integer(3).exp() - sqrt_pi / 2.0).abs() < 1e-12);
        assert!((ln_gamma_half_integer(4).exp() - 1.0).abs() < 1e-12);
        assert!((ln_gamma_half_integer(6).exp() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_survival_closed_form() {
        for &x in &[0.0f64, 0.5, 1.0, 2.0] {
            let expected = 0.5 - x.atan() / std::f64::consts::PI;
            assert!((t_survival_by_integration(x, 1) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_agrees_with_subgradient_descent() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let d = 3;
        let gram = random_pd(d, &mut rng);
        let linear: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let weights = vec![0.2; d];
        let exact = lasso_enumerate(&gram, d, &linear, &weights).unwrap();
        let approx = lasso_subgradient_descent(&gram, d, &linear, &weights, 500_000, 1e-8);
        for j in 0..d {
            assert!((exact[j] - approx[j]).abs() < 1e-3);
        }
    }

    #[test]
    fn closure_of_a_path_graph() {
        let reach = reachability_closure(4, &|i, j| (i as i64 - j as i64).abs() == 1);
        assert!(reach[0][3]);
        let reach2 = reachability_closure(4, &|i, j| (i, j) == (0, 1) || (i, j) == (1, 0));
        assert!(!reach2[0][2]);
    }
}

#[cfg(test)]
mod debug_enum {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reproduce_none() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for trial in 0..200 {
            let gram = random_pd(4, &mut rng);
            let linear: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let weights = vec![0.3; 4];
            match lasso_enumerate(&gram, 4, &linear, &weights) {
                Some(_) => {}
                None => {
                    let sub = lasso_subgradient_descent(&gram, 4, &linear, &weights, 200_000, 1e-9);
                    panic!("trial {trial}: NONE\n gram={gram:?}\n linear={linear:?}\n subgradient best={sub:?}");
                }
            }
        }
    }
}
