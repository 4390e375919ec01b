//! Numerical laboratory for envelopes, Monge-Ampere measures, capacities and
//! modes of convergence of quasi-plurisubharmonic functions on
//! symmetry-reduced models of the projective line and plane.

pub mod atoms_p1;
pub mod error;
pub mod lab;
pub mod lp;
pub mod measure;
pub mod samples;
pub mod scalar;
pub mod serde_ext;
pub mod suite;
pub mod toric1d;
pub mod toric2d;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double precision instances.
pub type Grid = measure::Grid1D<f64>;
pub type Measure = measure::MAMeasure<f64>;
pub type Potential = toric1d::ToricPotential1D<f64>;
pub type Obstacle = toric1d::ObstacleFunction1D<f64>;
pub type Chi = measure::Weight<f64>;
/// Planar potentials, float and exact.
pub type PlanePotential = toric2d::PLPotential2D<f64>;
pub type ExactPlanePotential = toric2d::PLPotential2D<Rational>;
pub type Rational = num_rational::Ratio<i64>;
pub type Family = lab::SequenceFamily;
pub type Verdict = lab::ConvergenceVerdict;
