//! Minimal dense square-matrix arithmetic.
//!
//! Everything in this crate works on small (desk-scale) symmetric matrices,
//! so a plain row-major `Vec<f64>` with the handful of operations used by
//! the transformation engine keeps the core free of linear-algebra
//! dependencies and bit-for-bit deterministic.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{invalid, Error, Result};
use crate::math;

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Mat::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have length `rows.len()`.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = Mat::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid("matrix rows must form a square matrix"));
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid("matrix data length does not match dimension"));
        }
        Ok(Mat { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Congruence transform `Mᵀ · self · M`.
    pub fn congruent(&self, m: &Mat) -> Mat {
        m.transpose().mul(self).mul(m)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.n, x.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Returns `(A + Aᵀ)/2`, exactly symmetric in storage.
    pub fn symmetrized(&self) -> Mat {
        let mut s = self.clone();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, &v| math::max(acc, math::abs(v)))
    }

    pub fn max_offdiag(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc = math::max(acc, math::abs(self[(i, j)]));
                }
            }
        }
        acc
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Checks `|A_ij − A_ji| ≤ tol · max(1, max|A|)` for all pairs.
    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        let scale = math::max(1.0, self.max_abs());
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if math::abs(self[(i, j)] - self[(j, i)]) > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                acc = math::max(acc, math::abs(self[(i, j)] - self[(j, i)]));
            }
        }
        acc
    }

    /// Cholesky factor `L` with `A = L·Lᵀ`; fails unless `A` is positive
    /// definite.
    pub fn cholesky(&self) -> Result<Mat> {
        let n = self.n;
        let mut l = Mat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l[(i, i)] = math::sqrt(sum);
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// `ln det A` for positive-definite `A`, via the Cholesky factor.
    pub fn log_det_pd(&self) -> Result<f64> {
        let l = self.cholesky()?;
        Ok((0..self.n).map(|i| 2.0 * math::ln(l[(i, i)])).sum())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}
