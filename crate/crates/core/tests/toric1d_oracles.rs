mod common;

use common::*;
use pshlab::lab::{pole_level, PotentialRecipe};
use pshlab::measure::Grid1D;
use pshlab::toric1d::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `max_{s in [0,1]} (s t_i + min_k (h_k - s t_k))`: the supremum of admissible
/// affine minorants, over the finitely many slopes where the minimum can switch.
fn brute_force_envelope(t: &[f64], h: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut slopes = vec![0.0, 1.0];
    for a in 0..n {
        for b in a + 1..n {
            let s = (h[b] - h[a]) / (t[b] - t[a]);
            if (0.0..=1.0).contains(&s) {
                slopes.push(s);
            }
        }
    }
    let lines: Vec<(f64, f64)> =
        slopes.iter().map(|&s| (s, (0..n).map(|k| h[k] - s * t[k]).fold(f64::INFINITY, f64::min))).collect();
    t.iter().map(|&ti| lines.iter().map(|&(s, c)| s * ti + c).fold(f64::NEG_INFINITY, f64::max)).collect()
}

#[test]
fn envelope_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let n = rng.gen_range(5..40);
        let grid = Grid1D::uniform(-6.0, 6.0, n).unwrap();
        let t = grid.nodes().to_vec();
        let h: Vec<f64> = t.iter().map(|&x| pshlab::scalar::reference_profile(x) + rng.gen_range(-1.5..0.5)).collect();
        let env = project_envelope(&ObstacleFunction1D::new(grid, h.clone(), (0.0, 1.0)).unwrap());
        let want = brute_force_envelope(&t, &h);
        for (a, b) in env.f_values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        for (a, b) in env.f_values.iter().zip(&h) {
            assert!(*a <= b + 1e-12);
        }
    }
}

/// `I(ε max(g, -C), 0) = ε² ∫_{t_C}^∞ (1 + e^{2t})^{-2} dt` in closed form.
fn capped_pole_energy(eps: f64, c: f64) -> f64 {
    let u = (2.0 * pole_level(c)).exp();
    -0.5 * eps * eps * ((u / (1.0 + u)).ln() + 1.0 / (1.0 + u))
}

#[test]
fn dirichlet_form_matches_closed_form_on_fine_grids() {
    for &(eps, c) in &[(1.0, 1.0), (0.5, 3.0), (0.25, 8.0), (0.1, 0.5)] {
        let recipe = PotentialRecipe::capped(eps, c);
        let kink = recipe.kink().unwrap();
        let grid = Grid1D::uniform(-40.0, 40.0, 40001).unwrap().with_extra_nodes(&[kink], 1e-9).unwrap();
        let phi = recipe.realize(&grid).unwrap();
        let zero = Potential::reference(&grid);
        let want = capped_pole_energy(eps, c);
        let got = quasi_distance_i(&phi, &zero).unwrap();
        assert!((got - want).abs() <= 1e-4 * want, "eps {eps} C {c}: {got} vs {want}");
        let literal = quasi_distance_i_literal(&phi, &zero).unwrap();
        assert!((literal - got).abs() <= 1e-9 * (1.0 + got));
    }
}

#[test]
fn dirichlet_form_matches_literal_integral_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = Grid1D::uniform(-25.0, 25.0, 1001).unwrap();
    for _ in 0..50 {
        let (a, b) = (random_bounded(&mut rng, &grid), random_bounded(&mut rng, &grid));
        let i = quasi_distance_i(&a, &b).unwrap();
        let l = quasi_distance_i_literal(&a, &b).unwrap();
        assert!((i - l).abs() <= 1e-10 * (1.0 + i), "{i} vs {l}");
    }
}

#[test]
fn capacity_routes_agree_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = Grid1D::uniform(-10.0, 10.0, 401).unwrap();
    for _ in 0..20 {
        let k = rng.gen_range(1..4);
        let iv: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let a: f64 = rng.gen_range(-9.0..8.0);
                (a, a + rng.gen_range(0.05..2.0))
            })
            .collect();
        let set = IntervalSet::new(iv).unwrap();
        let lp = capacity_with(CapacityMethod::LinearProgram, &grid, &set).unwrap();
        let ex = capacity_with(CapacityMethod::Extremal, &grid, &set).unwrap();
        assert!((lp - ex).abs() < 1e-6, "{lp} vs {ex}");
        assert!((0.0..=1.0 + 1e-12).contains(&ex));
    }
}
