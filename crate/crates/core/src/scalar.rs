//! Scalar abstraction for the numerical core.
//!
//! Everything downstream is generic over a real floating-point type `T:
//! Scalar` and works on `Complex<T>` vectors. `f32` is useful for fast
//! sweeps; `f64` is what the verification suites and file formats use.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::distributions::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftNum;
use std::fmt::{Display, LowerExp};
use std::iter::Sum;

/// Real scalar type the toolkit is generic over.
pub trait Scalar:
    Float
    + FloatConst
    + FftNum
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + SampleUniform
    + Display
    + LowerExp
{
    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the uniform distribution on `[0, 1)`.
    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform_01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }
}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub fn fl<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Complex value over the working scalar.
pub type C<T> = Complex<T>;

#[inline]
pub fn c_zero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Squared 2-norm of a complex slice.
pub fn norm_sq<T: Scalar>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
}

/// 2-norm of a complex slice.
pub fn norm<T: Scalar>(v: &[C<T>]) -> T {
    norm_sq(v).sqrt()
}

/// Relative l2 distance `||a - b|| / max(||b||, eps)`.
pub fn rel_l2_dist<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> T {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm_sqr())
        .fold(T::zero(), |acc, d| acc + d)
        .sqrt();
    let denom = norm(b).max(T::min_positive_value());
    diff / denom
}

/// True when every component of every entry is finite.
pub fn all_finite<T: Scalar>(v: &[C<T>]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
