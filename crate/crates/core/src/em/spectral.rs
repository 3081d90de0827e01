//! Spectral-clustering initialization of the latent posterior.
//!
//! Standard normalized-cut recipe: similarity |S_ij| off the diagonal,
//! symmetric normalized adjacency D^{-1/2} A D^{-1/2}, top-Q eigenvectors
//! row-normalized, then k-means with seeded restarts. Deterministic under the
//! seed; the best restart wins, ties going to the earliest.

use rand::Rng;

use super::LatentPosterior;
use crate::error::{Error, Result};
use crate::mat::SymmetricMatrix;
use crate::rng::{stream, StreamRole};

const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITERS: usize = 100;

/// Hard initial assignment of p nodes to Q clusters from the empirical
/// covariance. Empty clusters are permitted (and logged).
pub fn spectral_init(s: &SymmetricMatrix, q: usize, seed: u64) -> Result<LatentPosterior> {
    let p = s.dim();
    if q == 0 || q > p {
        return Err(Error::dim(format!("Q = {q} must lie in 1..=p ({p})")));
    }
    if q == 1 {
        return LatentPosterior::hard(&vec![0; p], 1);
    }
    if q == p {
        // Every node its own cluster: a permutation matrix.
        let labels: Vec<usize> = (0..p).collect();
        return LatentPosterior::hard(&labels, q);
    }

    // Symmetric normalized adjacency of the |S| similarity graph.
    let degree: Vec<f64> = (0..p)
        .map(|i| (0..p).filter(|&j| j != i).map(|j| s.get(i, j).abs()).sum())
        .collect();
    let dinv: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let m = SymmetricMatrix::from_fn(p, |i, j| {
        if i == j {
            0.0
        } else {
            dinv[i] * s.get(i, j).abs() * dinv[j]
        }
    })?;

    let eig = m.eigen_symmetric();
    let order = eig.order_descending();
    // Row-normalized spectral embedding (p points in R^q).
    let mut points = vec![0.0; p * q];
    for i in 0..p {
        let mut norm = 0.0;
        for (c, &col) in order[..q].iter().enumerate() {
            let v = eig.vector_entry(i, col);
            points[i * q + c] = v;
            norm += v * v;
        }
        if norm > 0.0 {
            let inv = norm.sqrt().recip();
            for c in 0..q {
                points[i * q + c] *= inv;
            }
        }
    }

    let labels = kmeans_best_of(&points, p, q, seed);
    let mut used = vec![false; q];
    for &l in &labels {
        used[l] = true;
    }
    for (cluster, u) in used.iter().enumerate() {
        if !u {
            log::warn!("spectral init: cluster {cluster} is empty");
        }
    }
    LatentPosterior::hard(&labels, q)
}

fn kmeans_best_of(points: &[f64], n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = stream(seed, StreamRole::Kmeans, restart as u64);
        let (labels, inertia) = lloyd(points, n, k, &mut rng);
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.expect("at least one restart").1
}

fn lloyd(points: &[f64], n: usize, k: usize, rng: &mut impl Rng) -> (Vec<usize>, f64) {
    let d = points.len() / n;
    let mut centers = kmeans_plus_plus(points, n, k, d, rng);
    let mut labels = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for i in 0..n {
            let x = &points[i * d..(i + 1) * d];
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.chunks_exact(d).enumerate() {
                let dist = sq_dist(x, center);
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0; k * d];
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            for j in 0..d {
                sums[c * d + j] += points[i * d + j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centers[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            }
            // Empty clusters keep their previous center.
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(&points[i * d..(i + 1) * d], &centers[labels[i] * d..(labels[i] + 1) * d]))
        .sum();
    (labels, inertia)
}

fn kmeans_plus_plus(points: &[f64], n: usize, k: usize, d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k * d);
    let first = rng.gen_range(0..n);
    centers.extend_from_slice(&points[first * d..(first + 1) * d]);
    let mut dist2: Vec<f64> = (0..n)
        .map(|i| sq_dist(&points[i * d..(i + 1) * d], &centers[0..d]))
        .collect();
    while centers.len() < k * d {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            // All points coincide with chosen centers; pick uniformly.
            rng.gen_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(&points[next * d..(next + 1) * d]);
        for i in 0..n {
            let nd = sq_dist(&points[i * d..(i + 1) * d], &centers[start..start + d]);
            if nd < dist2[i] {
                dist2[i] = nd;
            }
        }
    }
    centers
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
