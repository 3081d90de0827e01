//! Dense symmetric-matrix toolkit: storage, Cholesky, Jacobi eigendecomposition,
//! symmetric square root and pivot block partitions.
//!
//! Everything here is plain `Vec<f64>` row-major storage. Target sizes are a few
//! hundred variables at most, so dense O(p^3) algorithms are the right tool.

use crate::error::{Error, Result};

/// Symmetric p x p matrix with exactly symmetric storage.
///
/// Construction symmetrizes via (m + m')/2 and rejects inputs whose asymmetry
/// exceeds 1e-12, so `get(i, j) == get(j, i)` holds bit-for-bit afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// Maximum input asymmetry tolerated by [`SymmetricMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

impl SymmetricMatrix {
    /// Builds from row-major entries, enforcing symmetry.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::dim(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite matrix entry {v}")));
        }
        let mut data = entries;
        let mut max_asym: f64 = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                max_asym = max_asym.max((a - b).abs());
                let m = 0.5 * (a + b);
                data[i * dim + j] = m;
                data[j * dim + i] = m;
            }
        }
        if max_asym >= SYMMETRY_TOL {
            return Err(Error::data(format!(
                "matrix is not symmetric (max |m_ij - m_ji| = {max_asym:.3e})"
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds from row-major entries of a nearly-symmetric matrix, averaging
    /// without the strict asymmetry check. Used for quantities that are
    /// symmetric only up to solver tolerance (e.g. reconstructed inverses).
    pub fn symmetrized(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::dim("symmetrized: entry count mismatch".to_string()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::data("non-finite matrix entry".to_string()));
        }
        let mut data = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let m = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = m;
                data[j * dim + i] = m;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entry (i, j) and its mirror (j, i).
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// y = M x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| dot(row, x))
            .collect()
    }

    /// Largest |m_ij| over off-diagonal entries; 0.0 for p = 1.
    pub fn max_abs_offdiag(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// True when a Cholesky factorization succeeds.
    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Lower-triangular L with L L' = self. Fails with the pivot index at which
    /// positive definiteness breaks down.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let p = self.dim;
        let mut l = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * p + k] * l[j * p + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Definiteness {
                            pivot: Some(i),
                            msg: format!("Cholesky pivot {sum:.3e} is not positive"),
                        });
                    }
                    l[i * p + i] = sum.sqrt();
                } else {
                    l[i * p + j] = sum / l[j * p + j];
                }
            }
        }
        Ok(Cholesky { dim: p, l })
    }

    /// Symmetric eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Sweeps until the off-diagonal Frobenius norm falls below 1e-12 relative
    /// to the matrix scale. Returns eigenvalues (unsorted) and the orthogonal
    /// matrix of eigenvectors stored column-wise.
    pub fn eigen_symmetric(&self) -> Eigen {
        let p = self.dim;
        let mut a = self.data.clone();
        let mut v = vec![0.0; p * p];
        for i in 0..p {
            v[i * p + i] = 1.0;
        }
        let scale: f64 = self
            .data
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let max_sweeps = 64;
        for _ in 0..max_sweeps {
            let mut off = 0.0;
            for i in 0..p {
                for j in (i + 1)..p {
                    off += 2.0 * a[i * p + j] * a[i * p + j];
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for i in 0..p {
                for j in (i + 1)..p {
                    let apq = a[i * p + j];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[i * p + i];
                    let aqq = a[j * p + j];
                    let theta = 0.5 * (aqq - app) / apq;
                    // Stable tangent of the rotation angle.
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..p {
                        let aik = a[i * p + k];
                        let ajk = a[j * p + k];
                        a[i * p + k] = c * aik - s * ajk;
                        a[j * p + k] = s * aik + c * ajk;
                    }
                    for k in 0..p {
                        let aki = a[k * p + i];
                        let akj = a[k * p + j];
                        a[k * p + i] = c * aki - s * akj;
                        a[k * p + j] = s * aki + c * akj;
                    }
                    for k in 0..p {
                        let vki = v[k * p + i];
                        let vkj = v[k * p + j];
                        v[k * p + i] = c * vki - s * vkj;
                        v[k * p + j] = s * vki + c * vkj;
                    }
                }
            }
        }
        let values = (0..p).map(|i| a[i * p + i]).collect();
        Eigen { dim: p, values, vectors: v }
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_symmetric()
            .values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric PSD square root R with R R = self.
    pub fn symmetric_sqrt(&self) -> Result<SymmetricMatrix> {
        let p = self.dim;
        let eig = self.eigen_symmetric();
        let scale = self.trace().abs().max(1.0);
        let mut roots = Vec::with_capacity(p);
        for &ev in &eig.values {
            if ev < -1e-10 * scale {
                return Err(Error::Definiteness {
                    pivot: None,
                    msg: format!("negative eigenvalue {ev:.3e} in symmetric sqrt"),
                });
            }
            roots.push(ev.max(0.0).sqrt());
        }
        // R = V diag(sqrt(l)) V'
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let mut sum = 0.0;
                for k in 0..p {
                    sum += eig.vectors[i * p + k] * roots[k] * eig.vectors[j * p + k];
                }
                data[i * p + j] = sum;
                data[j * p + i] = sum;
            }
        }
        Ok(SymmetricMatrix { dim: p, data })
    }

    /// Inverse of a positive definite matrix via its Cholesky factor.
    pub fn invert_pd(&self) -> Result<SymmetricMatrix> {
        let chol = self.cholesky()?;
        let p = self.dim;
        let mut inv = vec![0.0; p * p];
        for col in 0..p {
            let mut e = vec![0.0; p];
            e[col] = 1.0;
            let x = chol.solve(&e);
            for r in 0..p {
                inv[r * p + col] = x[r];
            }
        }
        SymmetricMatrix::symmetrized(p, inv)
    }

    /// Partition with the pivot row/column moved last.
    pub fn block_view(&self, pivot: usize) -> Result<BlockView> {
        let p = self.dim;
        if pivot >= p {
            return Err(Error::dim(format!("pivot {pivot} out of range for p = {p}")));
        }
        let map = |r: usize| if r < pivot { r } else { r + 1 };
        let q = p - 1;
        let mut sub = vec![0.0; q * q];
        let mut vec12 = vec![0.0; q];
        for r in 0..q {
            let mr = map(r);
            for c in 0..q {
                sub[r * q + c] = self.get(mr, map(c));
            }
            vec12[r] = self.get(mr, pivot);
        }
        Ok(BlockView {
            pivot,
            sub11: SymmetricMatrix { dim: q, data: sub },
            vec12,
            scalar22: self.get(pivot, pivot),
        })
    }
}

/// Cholesky factor (lower triangular, row-major).
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor(&self) -> &[f64] {
        &self.l
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.dim + j]
    }

    /// log det of the factored matrix.
    pub fn log_det(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.l[i * self.dim + i].ln())
            .sum::<f64>()
            * 2.0
    }

    /// Solves (L L') x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        assert_eq!(b.len(), p);
        let mut y = b.to_vec();
        for i in 0..p {
            for k in 0..i {
                y[i] -= self.l[i * p + k] * y[k];
            }
            y[i] /= self.l[i * p + i];
        }
        for i in (0..p).rev() {
            for k in (i + 1)..p {
                y[i] -= self.l[k * p + i] * y[k];
            }
            y[i] /= self.l[i * p + i];
        }
        y
    }

    /// y = L x (used for sampling: cov = L L').
    pub fn lower_matvec(&self, x: &[f64]) -> Vec<f64> {
        let p = self.dim;
        (0..p)
            .map(|i| (0..=i).map(|k| self.l[i * p + k] * x[k]).sum())
            .collect()
    }
}

/// Eigendecomposition result; `vectors` holds eigenvectors column-wise.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub dim: usize,
    pub values: Vec<f64>,
    vectors: Vec<f64>,
}

impl Eigen {
    /// Entry (row, col) of the eigenvector matrix: component `row` of eigenvector `col`.
    #[inline]
    pub fn vector_entry(&self, row: usize, col: usize) -> f64 {
        self.vectors[row * self.dim + col]
    }

    /// Eigenvector indices sorted by descending eigenvalue (ties by index).
    pub fn order_descending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.dim).collect();
        idx.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }
}

/// Pivot partition of a symmetric matrix: the (p-1) x (p-1) block, the pivot
/// column with the pivot entry removed, and the pivot diagonal entry.
#[derive(Debug, Clone)]
pub struct BlockView {
    pub pivot: usize,
    pub sub11: SymmetricMatrix,
    pub vec12: Vec<f64>,
    pub scalar22: f64,
}

impl BlockView {
    /// Reassembles the original matrix (exact round trip).
    pub fn reassemble(&self) -> SymmetricMatrix {
        let q = self.sub11.dim();
        let p = q + 1;
        let map = |r: usize| if r < self.pivot { r } else { r + 1 };
        let mut data = vec![0.0; p * p];
        for r in 0..q {
            let mr = map(r);
            for c in 0..q {
                data[mr * p + map(c)] = self.sub11.get(r, c);
            }
            data[mr * p + self.pivot] = self.vec12[r];
            data[self.pivot * p + mr] = self.vec12[r];
        }
        data[self.pivot * p + self.pivot] = self.scalar22;
        SymmetricMatrix { dim: p, data }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_pd(p: usize, rng: &mut impl Rng) -> SymmetricMatrix {
        // M'M/p + 0.5 I is comfortably positive definite.
        let m: Vec<f64> = (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SymmetricMatrix::from_fn(p, |i, j| {
            let mut s = 0.0;
            for k in 0..p {
                s += m[k * p + i] * m[k * p + j];
            }
            s / p as f64 + if i == j { 0.5 } else { 0.0 }
        })
        .unwrap()
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymmetricMatrix::new(2, vec![1.0, 2.0, 3.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SymmetricMatrix::new(2, vec![1.0, f64::NAN, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let id = SymmetricMatrix::identity(3);
        let l = id.cholesky().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let d = SymmetricMatrix::new(2, vec![4.0, 0.0, 0.0, 9.0]).unwrap();
        let l = d.cholesky().unwrap();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(1, 1), 3.0);
        assert_eq!(l.get(1, 0), 0.0);
    }

    #[test]
    fn cholesky_roundtrip_2x2() {
        let m = SymmetricMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let l = m.cholesky().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut v = 0.0;
                for k in 0..2 {
                    v += l.get(i, k) * l.get(j, k);
                }
                assert_abs_diff_eq!(v, m.get(i, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_with_pivot() {
        let m = SymmetricMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        match m.cholesky() {
            Err(Error::Definiteness { pivot, .. }) => assert_eq!(pivot, Some(1)),
            other => panic!("expected definiteness error, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_matches_examples() {
        let id = SymmetricMatrix::identity(4);
        let r = id.symmetric_sqrt().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(r.get(i, j), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
        let d = SymmetricMatrix::new(2, vec![4.0, 0.0, 0.0, 9.0]).unwrap();
        let r = d.symmetric_sqrt().unwrap();
        assert_abs_diff_eq!(r.get(0, 0), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.get(1, 1), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn sqrt_squares_back_on_random_pd() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let m = random_pd(3, &mut rng);
        let r = m.symmetric_sqrt().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    v += r.get(i, k) * r.get(k, j);
                }
                assert_abs_diff_eq!(v, m.get(i, j), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn sqrt_rejects_clearly_indefinite() {
        let m = SymmetricMatrix::new(2, vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(m.symmetric_sqrt().is_err());
    }

    #[test]
    fn cholesky_and_sqrt_agree_up_to_p50() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for &p in &[5usize, 20, 50] {
            let m = random_pd(p, &mut rng);
            let l = m.cholesky().unwrap();
            let r = m.symmetric_sqrt().unwrap();
            for i in 0..p {
                for j in 0..p {
                    let mut llt = 0.0;
                    let mut rr = 0.0;
                    for k in 0..p {
                        llt += l.get(i, k) * l.get(j, k);
                        rr += r.get(i, k) * r.get(k, j);
                    }
                    assert_abs_diff_eq!(llt, m.get(i, j), epsilon = 1e-8);
                    assert_abs_diff_eq!(rr, m.get(i, j), epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn eigen_recovers_diagonal() {
        let m = SymmetricMatrix::new(3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let e = m.eigen_symmetric();
        let mut vals = e.values.clone();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_reconstructs_random_matrix() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m = random_pd(6, &mut rng);
        let e = m.eigen_symmetric();
        let p = 6;
        for i in 0..p {
            for j in 0..p {
                let mut v = 0.0;
                for k in 0..p {
                    v += e.vector_entry(i, k) * e.values[k] * e.vector_entry(j, k);
                }
                assert_abs_diff_eq!(v, m.get(i, j), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn invert_pd_gives_inverse() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let m = random_pd(5, &mut rng);
        let inv = m.invert_pd().unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let mut v = 0.0;
                for k in 0..5 {
                    v += m.get(i, k) * inv.get(k, j);
                }
                assert_abs_diff_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn block_view_2x2_examples() {
        let m = SymmetricMatrix::new(2, vec![1.0, 2.0, 2.0, 5.0]).unwrap();
        let bv = m.block_view(1).unwrap();
        assert_eq!(bv.sub11.get(0, 0), 1.0);
        assert_eq!(bv.vec12, vec![2.0]);
        assert_eq!(bv.scalar22, 5.0);
        let bv0 = m.block_view(0).unwrap();
        assert_eq!(bv0.sub11.get(0, 0), 5.0);
        assert_eq!(bv0.vec12, vec![2.0]);
        assert_eq!(bv0.scalar22, 1.0);
    }

    #[test]
    fn block_view_out_of_range() {
        let m = SymmetricMatrix::identity(2);
        assert!(m.block_view(2).is_err());
    }

    #[test]
    fn block_view_roundtrip_every_pivot() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let m = random_pd(4, &mut rng);
        for pivot in 0..4 {
            let back = m.block_view(pivot).unwrap().reassemble();
            assert_eq!(back.as_slice(), m.as_slice());
        }
    }
}
