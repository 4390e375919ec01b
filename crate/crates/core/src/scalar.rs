use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar used by the one-dimensional models: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot hold it,
    /// which does not happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Convexity and envelope tolerance, scaled to the precision of the type.
    fn envelope_tol() -> Self;

    /// Tolerance on total Monge-Ampere mass.
    fn mass_tol() -> Self;
}

impl Scalar for f64 {
    fn envelope_tol() -> Self {
        1e-10
    }
    fn mass_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn envelope_tol() -> Self {
        1e-4
    }
    fn mass_tol() -> Self {
        1e-4
    }
}

/// Reference Fubini-Study profile `log sqrt(1 + e^{2t})`, evaluated without overflow.
#[inline]
pub fn reference_profile<T: Scalar>(t: T) -> T {
    let two = T::lit(2.0);
    t.max(T::zero()) + (-(two * t.abs())).exp().ln_1p() / two
}

/// Slope of the reference profile, `e^{2t} / (1 + e^{2t})`.
#[inline]
pub fn reference_slope<T: Scalar>(t: T) -> T {
    logistic(T::lit(2.0) * t)
}

/// Curvature of the reference profile, `2 s (1 - s)` with `s` the reference slope.
#[inline]
pub fn reference_curvature<T: Scalar>(t: T) -> T {
    let s = reference_slope(t);
    T::lit(2.0) * s * (T::one() - s)
}

#[inline]
pub fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_profile_matches_naive_formula() {
        for &t in &[-3.0f64, -0.5, 0.0, 0.25, 4.0] {
            let naive = 0.5 * (1.0 + (2.0 * t).exp()).ln();
            assert!((reference_profile(t) - naive).abs() < 1e-14);
        }
        assert!(reference_profile(-400.0f64).is_finite());
        assert!((reference_profile(400.0f64) - 400.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_at_origin_is_one_half() {
        assert!((reference_curvature(0.0f64) - 0.5).abs() < 1e-15);
        assert!((reference_curvature(0.0f32) - 0.5).abs() < 1e-7);
    }
}
