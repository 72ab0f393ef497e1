use std::fmt::{Debug, Display};

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive};

/// Floating point scalar the norm engine is written against: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ScalarOperand + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless for the literals used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ScalarOperand + Debug + Display + Default + Send + Sync + 'static
{
}

/// `|x|^p` with `0^p == 0` taken exactly, so `p` never meets `ln 0`.
#[inline]
pub(crate) fn abs_pow<S: Real>(x: S, p: S) -> S {
    let a = x.abs();
    if a.is_zero() {
        S::zero()
    } else if p == S::one() {
        a
    } else if p == S::lit(2.0) {
        a * a
    } else {
        a.powf(p)
    }
}

/// `y^(1/p)` for `y >= 0`.
#[inline]
pub(crate) fn root<S: Real>(y: S, p: S) -> S {
    if y.is_zero() {
        S::zero()
    } else if p == S::one() {
        y
    } else if p == S::lit(2.0) {
        y.sqrt()
    } else {
        y.powf(p.recip())
    }
}
