//! Smoothed NMSE loss.
//!
//! Plain NMSE between sparse spectra is blind to how far a misplaced spike
//! is from its target: any support mismatch costs the same. Convolving both
//! spectra with a Laplacian kernel `g(k) = exp(-|k|/b)` before the NMSE makes
//! the loss decrease smoothly as an estimate approaches the true bin.

use crate::error::{DoaError, Result};
use crate::fft::FftPair;
use crate::scalar::{c_zero, fl, norm_sq, Scalar, C};

/// How the kernel is applied over the N bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    /// Kernel wrapped onto the periodic frequency grid (the default; the
    /// grid is a circle).
    #[default]
    Circular,
    /// Zero-padded linear convolution truncated to the N bins; kept for
    /// ablation.
    LinearTruncated,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LossConfig {
    /// Laplacian scale `b`.
    pub kernel_scale: f64,
    #[serde(default)]
    pub mode: ConvolutionMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            kernel_scale: 0.5,
            mode: ConvolutionMode::Circular,
        }
    }
}

/// Kernel state prepared for one spectrum length.
#[derive(Debug, Clone)]
pub struct SmoothedLoss<T: Scalar> {
    n: usize,
    mode: ConvolutionMode,
    /// `g(k)` for `k = -floor(N/2) .. floor(N/2)`, used by the linear mode.
    kernel: Vec<T>,
    /// DFT of the circularly wrapped kernel; strictly positive real.
    kernel_spec: Vec<C<T>>,
    fft: FftPair<T>,
}

impl<T: Scalar> SmoothedLoss<T> {
    pub fn new(n: usize, cfg: &LossConfig) -> Result<Self> {
        if !(cfg.kernel_scale > 0.0) {
            return Err(DoaError::Config("kernel scale must be positive".into()));
        }
        let b: T = fl(cfg.kernel_scale);
        let half = n / 2;
        let kernel: Vec<T> = (-(half as isize)..=half as isize)
            .map(|k| (-T::from_isize(k.abs()).unwrap() / b).exp())
            .collect();

        // Wrap onto the circle: bin j accumulates all kernel taps congruent
        // to j mod N.
        let mut wrapped = vec![T::zero(); n];
        for (idx, &g) in kernel.iter().enumerate() {
            let k = idx as isize - half as isize;
            let j = k.rem_euclid(n as isize) as usize;
            wrapped[j] += g;
        }
        let fft = FftPair::new(n);
        let kernel_spec = fft.fwd(
            &wrapped
                .iter()
                .map(|&g| C::new(g, T::zero()))
                .collect::<Vec<_>>(),
        );
        // A zero DFT coefficient would make distinct spectra indistinguishable
        // to the loss; the exponential kernel never produces one.
        for (k, s) in kernel_spec.iter().enumerate() {
            if s.re <= T::zero() {
                return Err(DoaError::Numerical(format!(
                    "kernel DFT coefficient {k} is not strictly positive"
                )));
            }
        }
        Ok(Self {
            n,
            mode: cfg.mode,
            kernel,
            kernel_spec,
            fft,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Kernel taps `g(-floor(N/2)) .. g(floor(N/2))`.
    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    /// `v * g` in the configured mode. Symmetric real kernel, so this
    /// operator is its own adjoint in both modes.
    pub fn convolve(&self, v: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(v.len(), self.n);
        match self.mode {
            ConvolutionMode::Circular => {
                let mut spec = self.fft.fwd(v);
                for (s, k) in spec.iter_mut().zip(&self.kernel_spec) {
                    *s *= k;
                }
                self.fft.inv(&spec)
            }
            ConvolutionMode::LinearTruncated => {
                let half = self.n / 2;
                let mut out = vec![c_zero(); self.n];
                for (i, o) in out.iter_mut().enumerate() {
                    for (idx, &g) in self.kernel.iter().enumerate() {
                        let k = idx as isize - half as isize;
                        let j = i as isize - k;
                        if j >= 0 && (j as usize) < self.n {
                            *o += v[j as usize].scale(g);
                        }
                    }
                }
                out
            }
        }
    }

    /// `NMSE(x_hat * g, x * g)`.
    pub fn loss(&self, x_hat: &[C<T>], x: &[C<T>]) -> Result<T> {
        Ok(self.loss_and_grad_impl(x_hat, x, false)?.0)
    }

    /// Loss plus its gradient with respect to `x_hat` (per complex entry,
    /// `d/d(re) + j d/d(im)`).
    pub fn loss_and_grad(&self, x_hat: &[C<T>], x: &[C<T>]) -> Result<(T, Vec<C<T>>)> {
        let (l, g) = self.loss_and_grad_impl(x_hat, x, true)?;
        Ok((l, g.unwrap()))
    }

    fn loss_and_grad_impl(
        &self,
        x_hat: &[C<T>],
        x: &[C<T>],
        want_grad: bool,
    ) -> Result<(T, Option<Vec<C<T>>>)> {
        if x_hat.len() != self.n || x.len() != self.n {
            return Err(DoaError::DimensionMismatch("loss input length".into()));
        }
        if norm_sq(x) == T::zero() {
            return Err(DoaError::UndefinedLoss("zero ground truth".into()));
        }
        let den = norm_sq(&self.convolve(x));
        if den <= T::zero() {
            return Err(DoaError::UndefinedLoss(
                "smoothed ground truth has zero norm".into(),
            ));
        }
        let diff: Vec<C<T>> = x_hat.iter().zip(x).map(|(a, b)| a - b).collect();
        let c = self.convolve(&diff);
        let loss = norm_sq(&c) / den;
        let grad = want_grad.then(|| {
            let scale = fl::<T>(2.0) / den;
            self.convolve(&c).into_iter().map(|z| z.scale(scale)).collect()
        });
        Ok((loss, grad))
    }
}
