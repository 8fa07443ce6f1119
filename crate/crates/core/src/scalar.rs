//! Floating-point abstraction shared by the whole crate.
//!
//! Every numerical type is generic over [`Scalar`], implemented for `f32` and
//! `f64`. Tolerances are written once as `f64` literals tuned for double
//! precision and widened through [`Scalar::tol`] for narrower types.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Real scalar type used for amplitudes, probabilities and observables.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Short name used in diagnostics.
    const NAME: &'static str;

    /// Maps a double-precision tolerance onto this type's precision.
    fn tol(base: f64) -> Self;

    /// Lossy conversion from `f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    #[inline]
    fn tol(base: f64) -> Self {
        base
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    /// Scales by sqrt(eps32 / eps64) and floors at a small multiple of eps32.
    #[inline]
    fn tol(base: f64) -> Self {
        let ratio = (f32::EPSILON as f64 / f64::EPSILON).sqrt();
        (base * ratio).max(64.0 * f32::EPSILON as f64) as f32
    }
}

/// Complex amplitude over a [`Scalar`].
pub type C<S> = Complex<S>;

#[inline]
pub(crate) fn czero<S: Scalar>() -> C<S> {
    Complex::new(S::zero(), S::zero())
}

#[inline]
pub(crate) fn cone<S: Scalar>() -> C<S> {
    Complex::new(S::one(), S::zero())
}

#[inline]
pub(crate) fn creal<S: Scalar>(re: S) -> C<S> {
    Complex::new(re, S::zero())
}

/// `|z|` via hypot, avoiding overflow in the squares.
#[inline]
pub(crate) fn cabs<S: Scalar>(z: C<S>) -> S {
    z.re.hypot(z.im)
}

#[inline]
pub(crate) fn is_finite<S: Scalar>(z: C<S>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
