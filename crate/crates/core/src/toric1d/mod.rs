//! Circle-invariant potentials on the Riemann sphere as convex profiles of
//! `t = log|z_1/z_0|` with slopes in `[0, 1]`.

mod capacity;
mod envelope;
mod functionals;
mod potential;

pub use capacity::{
    capacity, capacity_extremal, capacity_extremal_of_nodes, capacity_lp_of_nodes, capacity_with, cln_bound_check,
    relative_extremal, sublevel_set, CapacityMethod, ClnCheck, IntervalSet, LP_MAX_NODES,
};
pub use envelope::{project_envelope, running_inf_envelope, upper_envelope, ObstacleFunction1D};
pub use functionals::{
    blocki_inequality_check, default_atom_threshold, energy_e, l1_distance, ma_measure, ma_measure_with_threshold,
    membership_e_chi, nodal_masses, ordered_gap, quasi_distance_i, quasi_distance_i_chi, quasi_distance_i_literal,
    InequalityCheck, Membership,
};
pub use potential::ToricPotential1D;

/// `(ν(pole_0), ν(pole_∞))`.
pub fn lelong_numbers<T: crate::scalar::Scalar>(phi: &ToricPotential1D<T>) -> (T, T) {
    phi.lelong_numbers()
}
