//! Small dense matrices and a one-sided Jacobi SVD.
//!
//! Tangent spaces here have dimension in the single digits, so a plain
//! row-major `Vec` and an O(n^3) sweep per rotation pass are all that is
//! needed. The SVD doubles as the rank-revealing factorization used for
//! Newton solves and for operator norms.

use crate::scalar::Real;
use crate::Error;
use std::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, Error> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self, Error> {
        Ok(Self::from_rows(columns)?.transpose())
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self, Error> {
        let rows: Vec<Vec<T>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| T::c(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| crate::scalar::dot(self.row(i), x))
            .collect()
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Matrix<T>) -> Matrix<T> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Matrix<T>) -> Matrix<T> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn scale(&self, s: T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    fn zip_with(&self, rhs: &Matrix<T>, f: impl Fn(T, T) -> T) -> Matrix<T> {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &Matrix<T>) -> T {
        crate::scalar::max_abs_diff(&self.data, &rhs.data)
    }

    pub fn frobenius_norm(&self) -> T {
        crate::scalar::norm(&self.data)
    }

    pub fn svd(&self) -> Svd<T> {
        Svd::new(self)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> T {
        self.svd().sigma.first().copied().unwrap_or_else(T::zero)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `A = U diag(sigma) V^T` of a square matrix, singular values in
/// descending order.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 60;

impl<T: Real> Svd<T> {
    /// One-sided Jacobi (Hestenes). Columns of a working copy of `A` are
    /// rotated pairwise until mutually orthogonal.
    pub fn new(a: &Matrix<T>) -> Self {
        assert!(a.is_square(), "svd expects a square matrix");
        let n = a.cols;
        let mut w = a.clone();
        let mut v = Matrix::identity(n);
        let eps = T::epsilon();

        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for j in 0..n {
                for k in (j + 1)..n {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for i in 0..n {
                        let (x, y) = (w[(i, j)], w[(i, k)]);
                        alpha = alpha + x * x;
                        beta = beta + y * y;
                        gamma = gamma + x * y;
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::c(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for m in [&mut w, &mut v] {
                        for i in 0..n {
                            let (x, y) = (m[(i, j)], m[(i, k)]);
                            m[(i, j)] = c * x - s * y;
                            m[(i, k)] = s * x + c * y;
                        }
                    }
                }
            }
            if !rotated {
                break;
            }
        }

        let mut order: Vec<(usize, T)> = (0..n)
            .map(|j| (j, crate::scalar::norm(&w.column(j))))
            .collect();
        order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));

        let mut u = Matrix::zeros(n, n);
        let mut vs = Matrix::zeros(n, n);
        let mut sigma = Vec::with_capacity(n);
        for (dst, &(src, s)) in order.iter().enumerate() {
            sigma.push(s);
            for i in 0..n {
                u[(i, dst)] = if s > T::zero() {
                    w[(i, src)] / s
                } else {
                    T::zero()
                };
                vs[(i, dst)] = v[(i, src)];
            }
        }
        Svd { u, sigma, v: vs }
    }

    pub fn smallest(&self) -> T {
        self.sigma.last().copied().unwrap_or_else(T::zero)
    }

    /// `V diag(1/sigma) U^T`; `None` if any singular value is zero.
    pub fn inverse(&self) -> Option<Matrix<T>> {
        if self.smallest() == T::zero() {
            return None;
        }
        let inv: Vec<T> = self.sigma.iter().map(|&s| T::one() / s).collect();
        Some(
            self.v
                .matmul(&Matrix::diag(&inv))
                .matmul(&self.u.transpose()),
        )
    }

    /// Solves `A x = b`, refusing when the smallest singular value is below
    /// `threshold`.
    pub fn solve(&self, b: &[T], threshold: T) -> Result<Vec<T>, Error> {
        let smin = self.smallest();
        if !(smin >= threshold) || smin == T::zero() {
            return Err(Error::Singular {
                sigma_min: smin.as_f64(),
            });
        }
        let utb = self.u.transpose().mul_vec(b);
        let scaled: Vec<T> = utb.iter().zip(&self.sigma).map(|(&x, &s)| x / s).collect();
        Ok(self.v.mul_vec(&scaled))
    }
}
