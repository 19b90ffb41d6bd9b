use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used throughout the crate.
///
/// Implemented for `f32` and `f64`. All geometry, proximal and solver code is
/// written against this trait; the tolerances quoted in the tests assume `f64`.
pub trait Real:
    'static
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Converts an `f64` literal. Panics only if the target cannot represent it,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("scalar conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `acosh(1 + delta)` without the cancellation of forming `1 + delta` first.
#[inline]
pub fn acosh_1p<T: Real>(delta: T) -> T {
    let delta = delta.max(T::zero());
    (delta + (delta * (delta + T::c(2.0))).sqrt()).ln_1p()
}

/// `sinh(t) / t`, series-evaluated near zero.
#[inline]
pub fn sinhc<T: Real>(t: T) -> T {
    if t.abs() < T::c(1e-4) {
        let t2 = t * t;
        T::one() + t2 / T::c(6.0) + t2 * t2 / T::c(120.0)
    } else {
        t.sinh() / t
    }
}

/// `t * coth(t)`, series-evaluated near zero.
#[inline]
pub fn t_coth_t<T: Real>(t: T) -> T {
    if t.abs() < T::c(1e-4) {
        let t2 = t * t;
        T::one() + t2 / T::c(3.0) - t2 * t2 / T::c(45.0)
    } else {
        t / t.tanh()
    }
}

/// `t * cot(t)`, series-evaluated near zero.
#[inline]
pub fn t_cot_t<T: Real>(t: T) -> T {
    if t.abs() < T::c(1e-4) {
        let t2 = t * t;
        T::one() - t2 / T::c(3.0) - t2 * t2 / T::c(45.0)
    } else {
        t / t.tan()
    }
}

/// Sign with `sign(0) = 0`.
#[inline]
pub fn sign0<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}
