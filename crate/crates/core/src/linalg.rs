//! Dense complex matrices and an LU solver.
//!
//! The dictionary and the unstructured network weights are small dense
//! complex matrices (at most a few hundred rows), so a hand-rolled
//! partially-pivoted LU keeps the crate free of BLAS/LAPACK bindings while
//! supporting the adjoint solves the backward passes need.

use crate::error::{DoaError, Result};
use crate::scalar::{c_zero, Scalar, C};
use num_complex::Complex;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![c_zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                c_zero()
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    /// `A x`.
    pub fn matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(c_zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `A^H x`.
    pub fn adjoint_matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.rows, "adjoint matvec dimension mismatch");
        let mut out = vec![c_zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    /// Rank-one update `self += alpha * g * z^H`.
    pub fn outer_acc(&mut self, alpha: T, g: &[C<T>], z: &[C<T>]) {
        assert_eq!(g.len(), self.rows);
        assert_eq!(z.len(), self.cols);
        for i in 0..self.rows {
            let gi = g[i].scale(alpha);
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (r, zj) in row.iter_mut().zip(z) {
                *r += gi * zj.conj();
            }
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        for z in &mut self.data {
            *z = z.scale(s);
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    /// Maximum absolute deviation from `other`, over real and imaginary parts.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()))
            .fold(T::zero(), |m, d| m.max(d))
    }
}

/// Partially pivoted LU factorization `P A = L U` of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactors<T: Scalar> {
    n: usize,
    lu: Vec<C<T>>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    /// Factorizes `a`; fails when a pivot falls below `tiny`.
    pub fn new(a: &CMat<T>, tiny: T) -> Result<Self> {
        assert_eq!(a.rows(), a.cols(), "LU requires a square matrix");
        let n = a.rows();
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm_sqr();
            for i in (k + 1)..n {
                let cand = lu[i * n + k].norm_sqr();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if best.sqrt() < tiny {
                return Err(DoaError::Numerical(format!(
                    "singular pivot at column {k}"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    let ukj = lu[k * n + j];
                    lu[i * n + j] -= factor * ukj;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        // L y = P b, unit lower.
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // U x = y.
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^H x = b` using the same factors (`A^H = U^H L^H P`).
    pub fn solve_adjoint(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // U^H w = b, lower triangular with conjugated diagonal.
        let mut w = vec![c_zero(); n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lu[j * n + i].conj() * w[j];
            }
            w[i] = acc / self.lu[i * n + i].conj();
        }
        // L^H z = w, unit upper triangular.
        for i in (0..n).rev() {
            let mut acc = w[i];
            for j in (i + 1)..n {
                acc -= self.lu[j * n + i].conj() * w[j];
            }
            w[i] = acc;
        }
        // P x = z.
        let mut x = vec![c_zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }
}
