//! Variational E-step and the alternating EM orchestration.
//!
//! The latent structure is a multinomial clustering of the variables; its
//! posterior is approximated by a fully factorized distribution with
//! parameters tau (p x Q, row stochastic). The E-step iterates the fixed
//! point
//!
//!     tau_iq  ~  alpha_q  prod_{j != i, l} ( exp(-|K_ij|/lambda_ql) / (2 lambda_ql) )^{tau_jl}
//!
//! in log space. The M-step is the penalized covariance solver with the
//! penalty matrix built from the current tau. Iterations stop when the
//! surrogate objective Q_hat stabilizes.

pub mod spectral;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::glasso::{self, PrecisionEstimate, SolveOptions};
use crate::mat::SymmetricMatrix;
use crate::{dataset, Dataset};

/// Entry floor applied before logarithms and ratio distances; hard initial
/// assignments contain exact zeros.
pub const TAU_CLAMP: f64 = 1e-12;
/// Lower clamp for estimated Laplace scales.
pub const LAMBDA_FLOOR: f64 = 1e-6;

/// Row-stochastic p x Q matrix of cluster membership probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPosterior {
    p: usize,
    q: usize,
    tau: Vec<f64>,
}

impl LatentPosterior {
    pub fn new(p: usize, q: usize, tau: Vec<f64>) -> Result<Self> {
        if tau.len() != p * q || q == 0 || p == 0 {
            return Err(Error::dim(format!(
                "tau must be {p}x{q} with both positive, got {} entries",
                tau.len()
            )));
        }
        for (i, row) in tau.chunks_exact(q).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(Error::data(format!("tau row {i} sums to {sum}, expected 1")));
            }
            if row.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
                return Err(Error::data(format!("tau row {i} has entries outside [0, 1]")));
            }
        }
        Ok(Self { p, q, tau })
    }

    /// One-hot posterior from hard labels in 0..q.
    pub fn hard(labels: &[usize], q: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= q) {
            return Err(Error::dim(format!("label {bad} out of range for Q = {q}")));
        }
        let p = labels.len();
        let mut tau = vec![0.0; p * q];
        for (i, &l) in labels.iter().enumerate() {
            tau[i * q + l] = 1.0;
        }
        Self::new(p, q, tau)
    }

    pub fn uniform(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            tau: vec![1.0 / q as f64; p * q],
        }
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn n_clusters(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, i: usize, q: usize) -> f64 {
        self.tau[i * self.q + q]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.tau[i * self.q..(i + 1) * self.q]
    }

    /// argmax class per node (ties to the lowest index).
    pub fn hard_labels(&self) -> Vec<usize> {
        (0..self.p)
            .map(|i| {
                let row = self.row(i);
                let mut best = 0;
                for q in 1..self.q {
                    if row[q] > row[best] {
                        best = q;
                    }
                }
                best
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.p {
            let cells: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Mixture parameters: proportions, Laplace scales, diagonal scale.
#[derive(Debug, Clone)]
pub struct MixtureParams {
    pub alpha: Vec<f64>,
    /// Q x Q symmetric positive matrix of Laplace scales.
    pub lambda: SymmetricMatrix,
    /// Diagonal scale; +inf means no diagonal penalty. Never estimated.
    pub lambda0: f64,
}

impl MixtureParams {
    pub fn new(alpha: Vec<f64>, lambda: SymmetricMatrix, lambda0: f64) -> Result<Self> {
        let q = alpha.len();
        if lambda.dim() != q {
            return Err(Error::dim(format!(
                "alpha has {q} entries but lambda is {}x{}",
                lambda.dim(),
                lambda.dim()
            )));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-10 || alpha.iter().any(|&a| a < 0.0) {
            return Err(Error::data("alpha must be a probability vector".to_string()));
        }
        if lambda.as_slice().iter().any(|&l| !(l > 0.0)) {
            return Err(Error::data("lambda entries must be positive".to_string()));
        }
        if !(lambda0 > 0.0) {
            return Err(Error::data("lambda0 must be positive (may be +inf)".to_string()));
        }
        Ok(Self { alpha, lambda, lambda0 })
    }

    /// Uniform proportions with the given scales.
    pub fn uniform(q: usize, lambda: SymmetricMatrix, lambda0: f64) -> Result<Self> {
        Self::new(vec![1.0 / q as f64; q], lambda, lambda0)
    }
}

/// Q x Q scale matrix with lambda_in on the diagonal, lambda_out off it.
pub fn affiliation_lambda(q: usize, lambda_in: f64, lambda_out: f64) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(q, |a, b| if a == b { lambda_in } else { lambda_out })
        .expect("affiliation scales are finite")
}

/// EM configuration.
#[derive(Debug, Clone, Serialize)]
pub struct EmConfig {
    pub q: usize,
    /// Restrict the scale matrix to two values (intra/inter cluster).
    pub affiliation: bool,
    /// lambda_in / lambda_out when the scales are fixed in affiliation form.
    pub lambda_ratio: f64,
    /// Level of the fixed scales (affiliation lambda_in); when absent and no
    /// override is given, a default level of 2 / max_penalty is used.
    pub lambda_in: Option<f64>,
    /// Re-estimate alpha and lambda from (tau, K) after each E-step.
    pub estimate_lambda: bool,
    pub em_tol: f64,
    pub fixedpoint_tol: f64,
    pub em_max_iter: usize,
    pub fixedpoint_max_iter: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            q: 2,
            affiliation: true,
            lambda_ratio: 1.2,
            lambda_in: None,
            estimate_lambda: false,
            em_tol: 1e-4,
            fixedpoint_tol: 1e-9,
            em_max_iter: 50,
            fixedpoint_max_iter: 1000,
            seed: 0,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::data("Q must be at least 1".to_string()));
        }
        if !(self.em_tol > 0.0) || !(self.fixedpoint_tol > 0.0) {
            return Err(Error::data("tolerances must be positive".to_string()));
        }
        if self.affiliation && !(self.lambda_ratio > 0.0) {
            return Err(Error::data("lambda_ratio must be positive".to_string()));
        }
        Ok(())
    }
}

/// Output of a full EM run.
#[derive(Debug, Clone)]
pub struct EmResult {
    pub estimate: PrecisionEstimate,
    pub tau: LatentPosterior,
    pub params: MixtureParams,
    /// Q_hat after each M-step. Monotonicity is monitored, not asserted: the
    /// variational approximation does not guarantee it.
    pub qhat_trace: Vec<f64>,
    pub iterations: usize,
    pub fixedpoint_fallbacks: usize,
}

/// One application of the fixed-point map g, computed in log space with
/// per-row max subtraction, rows renormalized to sum 1.
pub fn fixed_point_pass(
    k: &SymmetricMatrix,
    params: &MixtureParams,
    tau: &LatentPosterior,
) -> LatentPosterior {
    let p = tau.n_nodes();
    let nq = tau.n_clusters();
    let mut log2l = vec![0.0; nq * nq];
    for a in 0..nq {
        for b in 0..nq {
            log2l[a * nq + b] = (2.0 * params.lambda.get(a, b)).ln();
        }
    }
    let mut out = vec![0.0; p * nq];
    let mut logu = vec![0.0; nq];
    for i in 0..p {
        for (a, lu) in logu.iter_mut().enumerate() {
            let mut acc = params.alpha[a].max(TAU_CLAMP).ln();
            for j in 0..p {
                if j == i {
                    continue;
                }
                let kij = k.get(i, j).abs();
                for b in 0..nq {
                    let tjb = tau.get(j, b);
                    if tjb > 0.0 {
                        acc -= tjb * (kij / params.lambda.get(a, b) + log2l[a * nq + b]);
                    }
                }
            }
            *lu = acc;
        }
        let max = logu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for a in 0..nq {
            let v = (logu[a] - max).exp();
            out[i * nq + a] = v;
            sum += v;
        }
        for a in 0..nq {
            out[i * nq + a] /= sum;
        }
    }
    LatentPosterior { p, q: nq, tau: out }
}

/// Iterates the fixed point from `tau0`. If the iteration budget runs out the
/// initial value is returned unchanged (fallback, not failure) and the flag is
/// set.
pub fn estep_fixed_point(
    k: &SymmetricMatrix,
    params: &MixtureParams,
    tau0: &LatentPosterior,
    cfg: &EmConfig,
) -> (LatentPosterior, bool) {
    let mut tau = tau0.clone();
    for _ in 0..cfg.fixedpoint_max_iter {
        let next = fixed_point_pass(k, params, &tau);
        let delta = tau
            .tau
            .iter()
            .zip(&next.tau)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        tau = next;
        if delta < cfg.fixedpoint_tol {
            return (tau, false);
        }
    }
    (tau0.clone(), true)
}

/// Cluster proportions: column means of tau.
pub fn update_alpha(tau: &LatentPosterior) -> Vec<f64> {
    let p = tau.n_nodes();
    let q = tau.n_clusters();
    let mut alpha = vec![0.0; q];
    for i in 0..p {
        for (a, item) in alpha.iter_mut().enumerate() {
            *item += tau.get(i, a);
        }
    }
    for a in &mut alpha {
        *a /= p as f64;
    }
    alpha
}

/// Laplace scales: tau-weighted mean absolute off-diagonal precision entries.
///
/// Pairs (q, l) with zero total weight get the global mean |K_ij|; everything
/// is floored at [`LAMBDA_FLOOR`].
pub fn update_lambda(tau: &LatentPosterior, k: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let p = tau.n_nodes();
    let q = tau.n_clusters();
    if k.dim() != p {
        return Err(Error::dim("update_lambda: K and tau disagree on p".to_string()));
    }
    if p < 2 {
        return Err(Error::data("update_lambda needs p >= 2".to_string()));
    }
    let mut num = vec![0.0; q * q];
    let mut den = vec![0.0; q * q];
    let mut global_num = 0.0;
    let mut global_den = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let kij = k.get(i, j).abs();
            global_num += kij;
            global_den += 1.0;
            for a in 0..q {
                let tia = tau.get(i, a);
                if tia == 0.0 {
                    continue;
                }
                for b in 0..q {
                    let w = tia * tau.get(j, b);
                    num[a * q + b] += w * kij;
                    den[a * q + b] += w;
                }
            }
        }
    }
    let global_mean = global_num / global_den;
    SymmetricMatrix::from_fn(q, |a, b| {
        let d = 0.5 * (den[a * q + b] + den[b * q + a]);
        let m = 0.5 * (num[a * q + b] + num[b * q + a]);
        let raw = if d > 0.0 { m / d } else { global_mean };
        raw.max(LAMBDA_FLOOR)
    })
}

/// Affiliation collapse of the Prop-4 update: intra and inter scales are the
/// weight-averaged diagonal and off-diagonal ratios.
pub fn update_lambda_affiliation(
    tau: &LatentPosterior,
    k: &SymmetricMatrix,
) -> Result<(f64, f64)> {
    let p = tau.n_nodes();
    let q = tau.n_clusters();
    if k.dim() != p {
        return Err(Error::dim("update_lambda: K and tau disagree on p".to_string()));
    }
    let mut num = [0.0f64; 2]; // [intra, inter]
    let mut den = [0.0f64; 2];
    let mut global_num = 0.0f64;
    let mut global_den = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let kij = k.get(i, j).abs();
            global_num += kij;
            global_den += 1.0;
            for a in 0..q {
                let tia = tau.get(i, a);
                if tia == 0.0 {
                    continue;
                }
                for b in 0..q {
                    let w = tia * tau.get(j, b);
                    let slot = usize::from(a != b);
                    num[slot] += w * kij;
                    den[slot] += w;
                }
            }
        }
    }
    let global_mean = global_num / global_den.max(1.0);
    let pick = |slot: usize| {
        let raw = if den[slot] > 0.0 { num[slot] / den[slot] } else { global_mean };
        raw.max(LAMBDA_FLOOR)
    };
    Ok((pick(0), pick(1)))
}

/// Variational lower bound J of the joint log-likelihood, with the additive
/// constant fixed to the exact Gaussian normalization -(np/2) log(2 pi).
pub fn lower_bound(
    tau: &LatentPosterior,
    k: &SymmetricMatrix,
    params: &MixtureParams,
    s: &SymmetricMatrix,
    n: usize,
) -> Result<f64> {
    Ok(qhat(tau, k, params, s, n)? + entropy(tau))
}

/// Q_hat: the variational surrogate of the complete log-likelihood (J minus
/// the entropy of the factorized posterior). This is the EM stopping monitor.
pub fn qhat(
    tau: &LatentPosterior,
    k: &SymmetricMatrix,
    params: &MixtureParams,
    s: &SymmetricMatrix,
    n: usize,
) -> Result<f64> {
    let p = tau.n_nodes();
    let q = tau.n_clusters();
    if k.dim() != p || s.dim() != p {
        return Err(Error::dim("qhat: dimensions disagree".to_string()));
    }
    let log_det = k
        .cholesky()
        .map_err(|_| Error::Definiteness {
            pivot: None,
            msg: "K must be positive definite to evaluate the bound".to_string(),
        })?
        .log_det();
    let mut tr = 0.0;
    for i in 0..p {
        for j in 0..p {
            tr += s.get(i, j) * k.get(i, j);
        }
    }
    let nf = n as f64;
    let pf = p as f64;
    let mut value = 0.5 * nf * (log_det - tr) - 0.5 * nf * pf * (2.0 * std::f64::consts::PI).ln();

    // Prior on cluster labels.
    for i in 0..p {
        for (a, &alpha) in params.alpha.iter().enumerate() {
            let t = tau.get(i, a);
            if t > 0.0 {
                value += t * alpha.max(TAU_CLAMP).ln();
            }
        }
    }

    // Off-diagonal Laplace prior: weighted |K| plus normalization.
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let kij = k.get(i, j).abs();
            for a in 0..q {
                let tia = tau.get(i, a);
                if tia == 0.0 {
                    continue;
                }
                for b in 0..q {
                    let w = tia * tau.get(j, b);
                    let l = params.lambda.get(a, b);
                    value -= w * (kij / l + (2.0 * l).ln());
                }
            }
        }
    }

    // Diagonal prior only when lambda0 is finite.
    if params.lambda0.is_finite() {
        for i in 0..p {
            value -= k.get(i, i).abs() / params.lambda0;
        }
        value -= pf * (2.0 * params.lambda0).ln();
    }
    Ok(value)
}

fn entropy(tau: &LatentPosterior) -> f64 {
    let mut h = 0.0;
    for &t in &tau.tau {
        if t > 0.0 {
            h -= t * t.ln();
        }
    }
    h
}

/// Input to the EM loop: raw observations or a precomputed covariance.
#[derive(Debug, Clone, Copy)]
pub enum EmInput<'a> {
    Data(&'a Dataset),
    Covariance { s: &'a SymmetricMatrix, n: usize },
}

/// Runs the alternating algorithm.
///
/// `lambda_override`, when given, supplies the Laplace scales used to build
/// the M-step penalty while the E-step keeps its own (estimated or initial)
/// scales. `fixed_tau` switches to "perfect" mode: the E-step is skipped and
/// the supplied posterior (typically hard ground-truth labels) is used as is.
pub fn run_em(
    input: EmInput,
    cfg: &EmConfig,
    lambda_override: Option<&SymmetricMatrix>,
    fixed_tau: Option<&LatentPosterior>,
) -> Result<EmResult> {
    cfg.validate()?;
    let owned_s;
    let (s, n) = match input {
        EmInput::Covariance { s, n } => (s, n),
        EmInput::Data(d) => {
            owned_s = dataset::empirical_covariance(d)?;
            (&owned_s, d.n_samples())
        }
    };
    let p = s.dim();
    if cfg.q > p {
        return Err(Error::dim(format!("Q = {} exceeds p = {p}", cfg.q)));
    }
    if let Some(t) = fixed_tau {
        if t.n_nodes() != p || t.n_clusters() != cfg.q {
            return Err(Error::dim("fixed tau has the wrong shape".to_string()));
        }
    }
    if let Some(l) = lambda_override {
        if l.dim() != cfg.q {
            return Err(Error::dim("lambda override must be Q x Q".to_string()));
        }
    }

    let lambda0 = glasso::default_lambda0(s, n);
    let initial_lambda = match (lambda_override, cfg.lambda_in) {
        (Some(l), _) => l.clone(),
        (None, Some(lin)) if cfg.affiliation => {
            affiliation_lambda(cfg.q, lin, lin / cfg.lambda_ratio)
        }
        (None, Some(lin)) => affiliation_lambda(cfg.q, lin, lin),
        (None, None) => {
            // Mid-sparsity warm-up level; self-corrects when estimation is on.
            let mp = glasso::max_penalty(s, n);
            let level = if mp > 0.0 { 2.0 / mp } else { 1.0 };
            affiliation_lambda(cfg.q, level, level)
        }
    };
    let mut params = MixtureParams::uniform(cfg.q, initial_lambda, lambda0)?;

    let mut tau = match fixed_tau {
        Some(t) => t.clone(),
        None => spectral::spectral_init(s, cfg.q, cfg.seed)?,
    };
    let mut fallbacks = 0usize;
    let mut qhat_trace: Vec<f64> = Vec::new();
    let mut estimate: Option<PrecisionEstimate> = None;
    let solve_opts = SolveOptions::default();

    let mut iterations = 0usize;
    for m in 1..=cfg.em_max_iter {
        iterations = m;
        if m > 1 {
            let k_prev = &estimate.as_ref().expect("set after first M-step").k;
            if fixed_tau.is_none() {
                let (next, fell_back) = estep_fixed_point(k_prev, &params, &tau, cfg);
                tau = next;
                fallbacks += usize::from(fell_back);
            }
            if cfg.estimate_lambda {
                params.alpha = update_alpha(&tau);
                params.lambda = if cfg.affiliation {
                    let (lin, lout) = update_lambda_affiliation(&tau, k_prev)?;
                    affiliation_lambda(cfg.q, lin, lout)
                } else {
                    update_lambda(&tau, k_prev)?
                };
            }
        }

        let mstep_lambda = lambda_override.unwrap_or(&params.lambda);
        let mstep_params = MixtureParams::new(params.alpha.clone(), mstep_lambda.clone(), lambda0)?;
        let penalty = glasso::build_penalty_matrix(&tau, &mstep_params, n)?;
        let est = glasso::solve(s, &penalty, n, &solve_opts)?;
        let q_now = qhat(&tau, &est.k, &params, s, n)?;
        estimate = Some(est);
        let stop = qhat_trace
            .last()
            .map(|prev| (q_now - prev).abs() < cfg.em_tol * (1.0 + q_now.abs()))
            .unwrap_or(false);
        qhat_trace.push(q_now);
        if stop {
            break;
        }
    }

    Ok(EmResult {
        estimate: estimate.expect("at least one M-step ran"),
        tau,
        params,
        qhat_trace,
        iterations,
        fixedpoint_fallbacks: fallbacks,
    })
}

/// Ratio-diameter distance between posteriors:
/// max_i log( max_q(a_iq/b_iq) / min_q(a_iq/b_iq) ), entries clamped first.
pub fn tau_distance(a: &LatentPosterior, b: &LatentPosterior) -> Result<f64> {
    if a.p != b.p || a.q != b.q {
        return Err(Error::dim("tau_distance: shapes differ".to_string()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.p {
        let mut rmin = f64::INFINITY;
        let mut rmax = f64::NEG_INFINITY;
        for q in 0..a.q {
            let r = a.get(i, q).max(TAU_CLAMP) / b.get(i, q).max(TAU_CLAMP);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        worst = worst.max((rmax / rmin).ln());
    }
    Ok(worst)
}

/// Why a contraction-condition entry failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionFailure {
    pub i: usize,
    pub j: usize,
    /// "in" or "out".
    pub scale: &'static str,
    pub h: f64,
    pub reason: &'static str,
}

/// Diagnostic record of the fixed-point contraction condition.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    /// eps / (2 (p-1) (1 + eps)).
    pub bound: f64,
    pub min_h: f64,
    pub max_h: f64,
    /// (1 + 1/eps) * 2 (p-1) * max_h; a contraction modulus when < 1.
    pub lipschitz: f64,
    /// max |K_ij| < 1/(2e), necessary for any scale to pass.
    pub below_half_e: bool,
    pub passes: bool,
    pub failures: Vec<ContractionFailure>,
}

/// Evaluates h(lambda) = |K_ij|/lambda + log(2 lambda) for every off-diagonal
/// entry and both affiliation scales against the contraction bound.
pub fn contraction_check(
    k: &SymmetricMatrix,
    lambda_in: f64,
    lambda_out: f64,
    eps: f64,
) -> Result<ContractionReport> {
    let p = k.dim();
    if p < 2 {
        return Err(Error::dim("contraction check needs p >= 2".to_string()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::data("eps must lie in (0, 1/2)".to_string()));
    }
    if !(lambda_in > 0.0 && lambda_out > 0.0) {
        return Err(Error::data("scales must be positive".to_string()));
    }
    let bound = eps / (2.0 * (p as f64 - 1.0) * (1.0 + eps));
    let half_e = 0.5 / std::f64::consts::E;
    let below_half_e = k.max_abs_offdiag() < half_e;
    let mut min_h = f64::INFINITY;
    let mut max_h = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let kij = k.get(i, j).abs();
            for (name, lambda) in [("in", lambda_in), ("out", lambda_out)] {
                let h = kij / lambda + (2.0 * lambda).ln();
                min_h = min_h.min(h);
                max_h = max_h.max(h);
                if !(h > 0.0 && h < bound) {
                    failures.push(ContractionFailure {
                        i,
                        j,
                        scale: name,
                        h,
                        reason: if kij >= half_e { "above 1/(2e)" } else { "h outside (0, bound)" },
                    });
                }
            }
        }
    }
    let lipschitz = (1.0 + 1.0 / eps) * 2.0 * (p as f64 - 1.0) * max_h;
    Ok(ContractionReport {
        bound,
        min_h,
        max_h,
        lipschitz,
        below_half_e,
        passes: failures.is_empty(),
        failures,
    })
}

/// JSON-facing summary of an EM run.
#[derive(Debug, Clone, Serialize)]
pub struct EmReport {
    pub alpha: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    /// None encodes an infinite scale (no diagonal penalty).
    pub lambda0: Option<f64>,
    pub qhat_trace: Vec<f64>,
    pub iterations: usize,
    pub fixedpoint_fallbacks: usize,
    pub converged: bool,
}

impl EmResult {
    pub fn report(&self) -> EmReport {
        let q = self.params.alpha.len();
        let lambda = (0..q)
            .map(|a| (0..q).map(|b| self.params.lambda.get(a, b)).collect())
            .collect();
        EmReport {
            alpha: self.params.alpha.clone(),
            lambda,
            lambda0: self.params.lambda0.is_finite().then_some(self.params.lambda0),
            qhat_trace: self.qhat_trace.clone(),
            iterations: self.iterations,
            fixedpoint_fallbacks: self.fixedpoint_fallbacks,
            converged: self.estimate.converged,
        }
    }

    /// Hard clustering as CSV rows "node,class".
    pub fn clusters_csv(&self) -> String {
        let mut out = String::from("node,class\n");
        for (i, l) in self.tau.hard_labels().iter().enumerate() {
            out.push_str(&format!("{i},{l}\n"));
        }
        out
    }
}
