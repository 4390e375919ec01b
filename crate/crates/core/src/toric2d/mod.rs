//! Torus-invariant piecewise linear potentials on the model plane.
//!
//! In logarithmic coordinates a potential is `u(x) = max_i (g_i . x + b_i)`
//! with gradients in the simplex `Δ = {y >= 0, y_1 + y_2 <= 1}`. Every
//! potential carries its Legendre dual, a convex piecewise linear function on
//! the convex hull of its gradients; envelopes are maxima of duals and the
//! Monge-Ampere atoms are the cells of the dual.

mod geometry;
mod ops;
mod potential;

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub use geometry::{area, clip_convex, clip_halfplane, hull, in_convex, P2};
pub use ops::{legendre_dual, ma_measure_2d, min_envelope_2d, plane_mass, pole_regions};
pub use potential::{DualFace, DualVertex, LegendreDual, PLPotential2D, Piece};

/// Coordinate field of the planar model: floats with a collinearity
/// threshold, or exact rationals.
pub trait Coord:
    Copy + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Orientation and coincidence threshold (zero for exact fields).
    fn collinear_eps() -> Self;

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Rejects NaN and infinities.
    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Coord for f64 {
    fn collinear_eps() -> Self {
        1e-12
    }
}

impl Coord for f32 {
    fn collinear_eps() -> Self {
        1e-6
    }
}

impl Coord for Ratio<i64> {
    fn collinear_eps() -> Self {
        Ratio::from_integer(0)
    }
}

impl Coord for Ratio<i128> {
    fn collinear_eps() -> Self {
        Ratio::from_integer(0)
    }
}
