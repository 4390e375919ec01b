mod common;

use common::*;
use proptest::prelude::*;
use pshlab::lab::*;
use pshlab::measure::{integrate, Grid1D};
use pshlab::toric1d::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid1D<f64> {
    Grid1D::uniform(-20.0, 20.0, 801).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ma_mass_is_one(seed in any::<u64>(), poles in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let p = if poles { random_with_poles(&mut rng, &g) } else { random_bounded(&mut rng, &g) };
        let mu = ma_measure(&p).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() <= 1e-9);
        prop_assert!(mu.is_nonnegative() || mu.density.iter().all(|&d| d > -1e-9));
    }

    #[test]
    fn envelope_is_below_idempotent_and_monotone(seed in any::<u64>(), shift in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let (a, b) = (random_bounded(&mut rng, &g), random_bounded(&mut rng, &g));
        let e = envelope_min(&a, &b);
        let (fa, fb) = (a.f_values.clone(), b.f_values.clone());
        for i in 0..g.len() {
            prop_assert!(e.f_values[i] <= fa[i].min(fb[i]) + 1e-12);
        }
        let again = project_envelope(&ObstacleFunction1D::from_potential(&e));
        for (x, y) in again.f_values.iter().zip(&e.f_values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        let higher = envelope_min(&a, &b.shifted(shift));
        for (x, y) in e.f_values.iter().zip(&higher.f_values) {
            prop_assert!(x <= &(y + 1e-12));
        }
    }

    #[test]
    fn quasi_distance_is_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let (a, b) = (random_bounded(&mut rng, &g), random_bounded(&mut rng, &g));
        let (x, y) = (quasi_distance_i(&a, &b).unwrap(), quasi_distance_i(&b, &a).unwrap());
        prop_assert!(x >= 0.0 && (x - y).abs() <= 1e-12 * (1.0 + x));
    }

    #[test]
    fn capacity_is_monotone_under_inclusion(a in -15.0f64..10.0, w in 0.1f64..5.0, extra in 0.0f64..3.0) {
        let g = grid();
        let small = IntervalSet::single(a, a + w).unwrap();
        let big = IntervalSet::single(a - extra, a + w).unwrap();
        let (cs, cb) = (capacity_extremal(&g, &small).unwrap(), capacity_extremal(&g, &big).unwrap());
        prop_assert!(cs <= cb + 1e-12);
    }

    #[test]
    fn cln_bound_holds(seed in any::<u64>(), c in 0.5f64..12.0, poles in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grid();
        let p = if poles { random_with_poles(&mut rng, &g) } else { random_bounded(&mut rng, &g) };
        let r = cln_bound_check(&normalized(&p), c, CapacityMethod::Extremal).unwrap();
        prop_assert!(r.holds(), "{} > {}", r.cap_value, r.bound);
    }

    #[test]
    fn decision_rule_ignores_scaling_of_tiny_series(scale in 0.0f64..1e-7) {
        let d: Vec<f64> = (1..=32).map(|j| scale / j as f64).collect();
        prop_assert_eq!(decide(&d).status, Status::Converges);
    }
}

fn statuses(seq: &SequenceFamily, j_max: usize) -> Status {
    classify_capacity(seq, j_max, &[0.5, 0.1]).unwrap().status
}

#[test]
fn reduction_to_bounded() {
    let families = [
        (SequenceFamily::constant(PotentialRecipe::capped(0.5, 2.0)), 16),
        (SequenceFamily::monotone_decreasing(), 32),
        (SequenceFamily::sandwich(), 32),
        (SequenceFamily::scaled_pole(), 32),
        (SequenceFamily::energy(Rate::Reciprocal, Rate::Linear), 64),
        (SequenceFamily::energy(Rate::Geometric { ratio: 0.5 }, Rate::Linear), 32),
        (SequenceFamily::geometric_interpolation(PotentialRecipe::pole(0.5)), 32),
    ];
    for (seq, j_max) in &families {
        let full = statuses(seq, *j_max);
        for c in [2.0, 5.0, 10.0] {
            let bounded = statuses(&seq.floored(c), *j_max);
            assert_eq!(full, bounded, "{} floored at {c}", seq.label());
        }
    }
}

fn weighted_mass(chi: &dyn Fn(f64) -> f64, p: &Potential) -> f64 {
    let mu = ma_measure(p).unwrap();
    let f: Vec<f64> = p.phi_values().iter().map(|&v| chi(v)).collect();
    let poles = p.pole_values().map(chi);
    integrate(&f, &mu, &poles).unwrap()
}

#[test]
fn weighted_weak_convergence() {
    let chis: [&dyn Fn(f64) -> f64; 3] = [&|s: f64| s.exp(), &|s: f64| s.abs().sqrt(), &|s: f64| (3.0 * s).sin()];
    for (seq, j_max) in [
        (SequenceFamily::sandwich(), 64),
        (SequenceFamily::geometric_interpolation(PotentialRecipe::capped(0.5, 2.0)), 24),
        (SequenceFamily::energy(Rate::Geometric { ratio: 0.5 }, Rate::Constant { value: 3.0 }), 48),
    ] {
        let re = seq.realize(j_max).unwrap();
        let members = re.toric_members().unwrap();
        for chi in chis {
            let target = weighted_mass(chi, &re.limit);
            let last = weighted_mass(chi, &members[j_max - 1]);
            assert!((last - target).abs() <= 1e-5, "{}: {last} vs {target}", seq.label());
        }
    }
}
