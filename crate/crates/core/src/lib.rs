//! Sparse single-snapshot direction-of-arrival estimation.
//!
//! The crate provides four layers:
//!
//! * [`array_signal`] — array geometries, steering dictionaries and
//!   reproducible dataset synthesis.
//! * [`solvers`] — ISTA and three ADMM variants for the complex LASSO,
//!   including the `O(N log N)` circulant route valid at `gamma = 1/2`.
//! * [`nets`] — the six unfolded architectures (LISTA, TLISTA, THLISTA,
//!   ADMM-Net, CADMM-Net, CHADMM-Net) with structure-preserving
//!   parameterizations.
//! * [`training`] / [`evaluation`] — smoothed-NMSE loss with hand-written
//!   reverse-mode gradients, Adam, the training loop, and the detection-rate
//!   / RMSE / NMSE benchmark harness.
//!
//! All numerics are generic over the real scalar (`f32` or `f64`) through
//! [`scalar::Scalar`]; the concrete aliases below pin the common choice.

pub mod array_signal;
pub mod error;
pub mod evaluation;
pub mod fft;
pub mod linalg;
pub mod nets;
pub mod scalar;
pub mod solvers;
pub mod training;
pub mod verify;

pub use error::{DoaError, Result};
pub use scalar::{fl, Scalar};

/// Complex sample in double precision, the default working type.
pub type C64 = num_complex::Complex<f64>;
/// Complex sample in single precision.
pub type C32 = num_complex::Complex<f32>;
/// Double-precision dictionary.
pub type DictionaryF64 = array_signal::Dictionary<f64>;
