//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian
//! matrices.
//!
//! The problems in this crate are small (plane-wave blocks of a few dozen
//! components, momentum sectors of at most a few thousand states), so a
//! Jacobi sweep is accurate to machine precision and fast enough.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().map(Complex64::norm_sqr).sum())
    }

    fn off_diagonal(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    s += self[(i, j)].norm_sqr();
                }
            }
        }
        math::sqrt(s)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigenvalues ascending; eigenvector `k` is column `k` of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }
}

const MAX_SWEEPS: usize = 80;

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh(matrix: &DenseMatrix) -> Result<Eigen, LinalgError> {
    let n = matrix.dim();
    if matrix.data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFinite);
    }
    let scale = matrix.frobenius();
    let defect = matrix.hermiticity_defect();
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotHermitian(defect));
    }

    let mut a = matrix.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = DenseMatrix::identity(n);
    let target = f64::EPSILON * 1e-2 * scale;

    let mut converged = n < 2 || scale == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotated |= rotate(&mut a, &mut v, p, q, scale);
            }
        }
        converged = !rotated || a.off_diagonal() <= target;
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps,
            residual: a.off_diagonal(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DenseMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only.
pub fn eigvalsh(matrix: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    eigh(matrix).map(|e| e.values)
}

/// One Jacobi rotation zeroing `a[p][q]`: a phase on column `q` makes the
/// pivot real, then a real plane rotation diagonalizes the 2×2 block.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, scale: f64) -> bool {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag <= f64::EPSILON * 1e-3 * scale {
        return false;
    }
    let phase = g / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let zeta = (aqq - app) / (2.0 * mag);
    let t = math::signum(zeta) / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;

    // U = [[c, s], [-s e^{-iθ}, c e^{-iθ}]] in the (p, q) plane
    let phase_c = phase.conj();
    let upq = Complex64::new(s, 0.0);
    let uqp = -phase_c * s;
    let uqq = phase_c * c;
    let n = a.dim();

    for k in 0..n {
        // A <- A U
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
    for k in 0..n {
        // A <- U† A
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * uqp.conj();
        a[(q, k)] = apk * upq + aqk * uqq.conj();
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(app - t * mag, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);
    true
}

/// `Σ conj(a_i) b_i`
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    math::sqrt(a.iter().map(Complex64::norm_sqr).sum())
}
