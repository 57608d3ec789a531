//! Thin wrapper around rustfft fixing the transform conventions used
//! everywhere in this crate.
//!
//! `fwd` is the plain DFT `X(k) = sum_n x(n) exp(-j2*pi*k*n/L)` and `inv` is
//! its exact inverse (scaled by `1/L`). Circulant eigenvalues are `fwd` of
//! the first column under this convention, so `C = inv . diag(fwd(col)) . fwd`
//! holds without extra scaling. The adjoints needed by reverse-mode code are
//! `fwd^H = inv_raw` (unscaled inverse) and `inv^H = (1/L) fwd`.

use crate::scalar::{Scalar, C};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Planned forward/inverse DFT pair for one transform length.
#[derive(Clone)]
pub struct FftPair<T: Scalar> {
    len: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for FftPair<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len).finish()
    }
}

impl<T: Scalar> FftPair<T> {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let mut planner = FftPlanner::new();
        Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Plain DFT.
    pub fn fwd(&self, x: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(x.len(), self.len);
        let mut buf = x.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse DFT (scaled by `1/L`).
    pub fn inv(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut buf = self.inv_raw(x);
        let s = T::one() / T::from_usize(self.len).unwrap();
        for z in buf.iter_mut() {
            *z = z.scale(s);
        }
        buf
    }

    /// Unscaled inverse transform `sum_k x(k) exp(+j2*pi*k*n/L)`.
    ///
    /// This is the adjoint of [`FftPair::fwd`].
    pub fn inv_raw(&self, x: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(x.len(), self.len);
        let mut buf = x.to_vec();
        self.inv.process(&mut buf);
        buf
    }

    /// Adjoint of [`FftPair::inv`]: forward transform scaled by `1/L`.
    pub fn fwd_scaled(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut buf = self.fwd(x);
        let s = T::one() / T::from_usize(self.len).unwrap();
        for z in buf.iter_mut() {
            *z = z.scale(s);
        }
        buf
    }
}

/// One-shot plain DFT. Prefer [`FftPair`] in loops.
pub fn dft<T: Scalar>(x: &[C<T>]) -> Vec<C<T>> {
    FftPair::new(x.len()).fwd(x)
}

/// One-shot inverse DFT (scaled by `1/L`).
pub fn idft<T: Scalar>(x: &[C<T>]) -> Vec<C<T>> {
    FftPair::new(x.len()).inv(x)
}
