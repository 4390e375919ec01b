//! Sequence families, convergence classifiers, the extraction algorithms and
//! the solver for `MA(φ) = e^φ μ`.

mod chain;
mod classify;
mod extract;
mod family;
mod solver;
mod verdict;

pub use chain::{check_theorem_chain, ChainReport};
pub use classify::{
    classify_capacity, classify_energy, classify_l1, classify_quasi_monotone, deviation_capacities, mesh_l1, point_at,
    running_infima, search_minorant, TailInfimum, MESH_ANGLES, MINORANT_RATIO,
};
pub use extract::{
    energy_cauchy_extract, extract_quasi_monotone, extraction_delta, extraction_eps, extraction_height,
    CauchyExtraction, QuasiMonotoneExtraction, KAPPA_SLACK, MIN_SELECTED, ORDER_TOL,
};
pub use family::{
    atom_point, infty_deviation_bound, infty_tau, pole_green, pole_level, FamilyKind, FamilyRecipe, Member,
    Monotonicity, PotentialRecipe, Rate, Realization, SequenceFamily, TailMetadata, FAMILY_FINE, FAMILY_H,
    VERIFIABLE_STAGES,
};
pub use solver::{
    equation_residual, solve_ma_equation, solve_ma_equation_from, supersolution_excess, MaSolution, MAX_NEWTON_STEPS,
};
pub use verdict::{combine, decide, rule, ConvergenceVerdict, Decision, EvidenceRow, MinorantReport, Mode, Status};
