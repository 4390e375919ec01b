//! Seeded random potentials and measures on the toric line, shared by the
//! acceptance suite, the CLI sweeps and the property tests.

use rand::Rng;

use crate::measure::{Atom, Grid1D, MAMeasure};
use crate::scalar::reference_profile;
use crate::toric1d::{project_envelope, ObstacleFunction1D, ToricPotential1D};

type Potential = ToricPotential1D<f64>;

/// `f = max(f_ω + c_0, max_k (s_k t + c_k))` with slopes in `[0, 1]`: bounded,
/// full gradient range.
pub fn random_bounded(rng: &mut impl Rng, grid: &Grid1D<f64>) -> Potential {
    let c0: f64 = rng.gen_range(-2.0..0.5);
    let pieces: Vec<(f64, f64)> =
        (0..rng.gen_range(1..5)).map(|_| (rng.gen_range(0.0..=1.0), rng.gen_range(-1.0..2.0))).collect();
    Potential::from_profile(
        grid,
        |t| pieces.iter().fold(reference_profile(t) + c0, |m, &(s, c)| m.max(s * t + c)),
        0.0,
        1.0,
    )
    .expect("convex profile with admissible slopes")
}

/// `f = max_k (s_k t + c_k)` without the reference term: Lelong numbers
/// `min s_k` and `1 - max s_k`.
pub fn random_with_poles(rng: &mut impl Rng, grid: &Grid1D<f64>) -> Potential {
    let mut pieces: Vec<(f64, f64)> =
        (0..rng.gen_range(1..4)).map(|_| (rng.gen_range(0.05..0.95), rng.gen_range(-1.0..1.0))).collect();
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (sl, sr) = (pieces[0].0, pieces[pieces.len() - 1].0);
    Potential::from_profile(grid, |t| pieces.iter().fold(f64::NEG_INFINITY, |m, &(s, c)| m.max(s * t + c)), sl, sr)
        .expect("affine maximum with slopes inside (0, 1)")
}

/// Shifted so that `sup φ = 0`.
pub fn normalized(p: &Potential) -> Potential {
    p.shifted(-p.sup_phi())
}

/// A bounded potential squeezed into `[-1, 0]`.
pub fn unit_range(p: &Potential) -> Potential {
    let (hi, lo) = (p.sup_phi(), p.inf_phi());
    let zero = Potential::reference(&p.grid);
    let lambda = if hi - lo > 1.0 { 1.0 / (hi - lo) } else { 1.0 };
    let q = Potential::combination(&[(lambda, p), (1.0 - lambda, &zero)]).expect("same grid");
    q.shifted(-q.sup_phi())
}

/// `P_ω(min(a, b))`.
pub fn envelope_min(a: &Potential, b: &Potential) -> Potential {
    let h = ObstacleFunction1D::from_potential(a).min_with(&ObstacleFunction1D::from_potential(b)).expect("same grid");
    project_envelope(&h)
}

/// Probability measure with a random smooth density and a few atoms.
pub fn random_probability(rng: &mut impl Rng, grid: &Grid1D<f64>) -> MAMeasure<f64> {
    let mut mu = MAMeasure::on_line(grid.clone());
    let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..4))
        .map(|_| (rng.gen_range(-6.0..6.0), rng.gen_range(0.3..2.0), rng.gen_range(0.2..1.0)))
        .collect();
    let atoms: Vec<(f64, f64)> =
        (0..rng.gen_range(0..3)).map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(0.05..0.3))).collect();
    let atom_total: f64 = atoms.iter().map(|a| a.1).sum();
    let dens: Vec<f64> =
        grid.nodes().iter().map(|&t| bumps.iter().map(|&(c, w, a)| a * (-((t - c) / w).powi(2)).exp()).sum()).collect();
    let mass: f64 = dens.iter().enumerate().map(|(i, d)| d * grid.dual_width(i)).sum();
    let scale = (1.0 - atom_total) / mass;
    mu.density = dens.iter().map(|d| d * scale).collect();
    mu.atoms = atoms.into_iter().map(|(location, mass)| Atom { location, mass }).collect();
    mu
}
