//! Scalar abstraction for the numerical core.
//!
//! Every algorithm in this crate is generic over a real field `T: Real`.
//! Production runs use `f64`; `f32` is available for quick low-precision
//! sweeps and for testing that nothing silently assumes double precision.

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Real scalar used throughout the crate.
pub trait Real:
    Float
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
    /// Lift an `f64` literal into the scalar type.
    ///
    /// Intended for constants written in source code; panics only if the
    /// literal is not representable at all (never the case for f32/f64).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal must be representable")
    }

    fn pi() -> Self {
        Self::lit(std::f64::consts::PI)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar built on top of the real field.
pub type Cplx<T> = Complex<T>;

/// `Σ xᵢ · conj(yᵢ)`, the Euclidean inner product with the second slot conjugated.
pub fn inner<T: Real>(x: &[Cplx<T>], y: &[Cplx<T>]) -> Cplx<T> {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Cplx::new(T::zero(), T::zero());
    for (a, b) in x.iter().zip(y) {
        acc += a * b.conj();
    }
    acc
}

/// Euclidean norm of a complex vector.
pub fn norm2<T: Real>(x: &[Cplx<T>]) -> T {
    let mut acc = T::zero();
    for v in x {
        acc += v.norm_sqr();
    }
    acc.sqrt()
}
