//! Scalar abstraction shared by every physics routine in the crate.
//!
//! Everything numeric is written against [`Scalar`] so the same code runs in
//! `f64` (the default, see the aliases at the crate root) or `f32`. Literal
//! constants go through [`Scalar::lit`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self;

    /// Lossless-as-possible widening to `f64` for reporting and RNG sampling.
    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Splits `total` into `n` equal shares.
///
/// Generic over any `Num` so exact types (e.g. `num_rational::Ratio`) can be
/// used where share conservation must hold exactly.
pub fn equal_share<N>(total: N, n: usize) -> N
where
    N: num_traits::Num + FromPrimitive + Copy,
{
    assert!(n >= 1, "share count must be at least 1");
    total / N::from_usize(n).expect("share count representable")
}
