#![allow(dead_code)]

pub use pshlab::samples::*;

pub type Potential = pshlab::toric1d::ToricPotential1D<f64>;
