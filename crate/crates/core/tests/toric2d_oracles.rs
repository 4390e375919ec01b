use num_rational::Ratio;
use proptest::prelude::*;
use pshlab::toric2d::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i64>;

fn random_full_range(rng: &mut ChaCha8Rng, interior: usize) -> PLPotential2D<f64> {
    let mut pieces = vec![
        Piece { g: [0.0, 0.0], b: rng.gen_range(-1.0..1.0) },
        Piece { g: [1.0, 0.0], b: rng.gen_range(-1.0..1.0) },
        Piece { g: [0.0, 1.0], b: rng.gen_range(-1.0..1.0) },
    ];
    for _ in 0..interior {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        let g = if a + b <= 1.0 { [a, b] } else { [1.0 - a, 1.0 - b] };
        pieces.push(Piece { g, b: rng.gen_range(-0.5..1.5) });
    }
    PLPotential2D::new(pieces).unwrap()
}

/// Vertices of the primal cell complex by brute force: points where three
/// pieces tie for the maximum.
fn primal_vertices(u: &PLPotential2D<f64>) -> Vec<([f64; 2], f64)> {
    let p = u.pieces();
    let mut out: Vec<([f64; 2], f64)> = Vec::new();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            for k in j + 1..p.len() {
                let (a1, a2) =
                    ([p[j].g[0] - p[i].g[0], p[j].g[1] - p[i].g[1]], [p[k].g[0] - p[i].g[0], p[k].g[1] - p[i].g[1]]);
                let det = a1[0] * a2[1] - a1[1] * a2[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let (r1, r2) = (p[i].b - p[j].b, p[i].b - p[k].b);
                let x = [(r1 * a2[1] - r2 * a1[1]) / det, (a1[0] * r2 - a2[0] * r1) / det];
                let val = p[i].g[0] * x[0] + p[i].g[1] * x[1] + p[i].b;
                if (u.eval(x) - val).abs() < 1e-9
                    && !out.iter().any(|(y, _)| (y[0] - x[0]).abs() + (y[1] - x[1]).abs() < 1e-9)
                {
                    out.push((x, val));
                }
            }
        }
    }
    out
}

fn dual_oracle(verts: &[([f64; 2], f64)], y: [f64; 2]) -> (usize, f64) {
    verts
        .iter()
        .enumerate()
        .map(|(i, (x, ux))| (i, x[0] * y[0] + x[1] * y[1] - ux))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

fn sample_simplex(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let (a, b): (f64, f64) = (rng.gen(), rng.gen());
    if a + b <= 1.0 {
        [a, b]
    } else {
        [1.0 - a, 1.0 - b]
    }
}

#[test]
fn atom_masses_match_monte_carlo_volumes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let u = random_full_range(&mut rng, 1);
        let mu = ma_measure_2d(&u);
        let verts = primal_vertices(&u);
        assert_eq!(verts.len(), mu.atoms.len());
        let n = 4_000_000;
        let mut counts = vec![0usize; verts.len()];
        for _ in 0..n {
            counts[dual_oracle(&verts, sample_simplex(&mut rng)).0] += 1;
        }
        for (i, (x, _)) in verts.iter().enumerate() {
            let atom = mu
                .atoms
                .iter()
                .find(|a| (a.location[0] - x[0]).abs() + (a.location[1] - x[1]).abs() < 1e-8)
                .expect("atom at every primal vertex");
            let mc = counts[i] as f64 / n as f64;
            assert!((atom.mass - mc).abs() < 1e-3, "atom {x:?}: {} vs {mc}", atom.mass);
        }
    }
}

#[test]
fn dual_matches_brute_force_conjugate() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let u = random_full_range(&mut rng, 2);
        let d = legendre_dual(&u);
        let verts = primal_vertices(&u);
        for _ in 0..500 {
            let y = sample_simplex(&mut rng);
            let want = dual_oracle(&verts, y).1;
            assert!((d.eval(y).unwrap() - want).abs() < 1e-9);
        }
    }
}

#[test]
fn biconjugation_restores_the_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let mut pieces = Vec::new();
        for _ in 0..5 {
            pieces.push(Piece { g: sample_simplex(&mut rng), b: rng.gen_range(-1.0..1.0) });
        }
        let u = PLPotential2D::new(pieces).unwrap();
        let d = legendre_dual(&u);
        let mut ys: Vec<[f64; 2]> = d.vertices.iter().map(|v| v.y).collect();
        for i in 0..=40 {
            for j in 0..=40 - i {
                let y = [i as f64 / 40.0, j as f64 / 40.0];
                if d.contains(y) {
                    ys.push(y);
                }
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            for j in 0..100 {
                let x = [-5.0 + 10.0 * i as f64 / 99.0, -5.0 + 10.0 * j as f64 / 99.0];
                let bi = ys
                    .iter()
                    .map(|&y| x[0] * y[0] + x[1] * y[1] - d.eval(y).unwrap())
                    .fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max((bi - u.eval(x)).abs());
            }
        }
        assert!(worst < 1e-9, "biconjugate error {worst}");
        assert_eq!(d.conjugate(), u);
    }
}

#[test]
fn envelope_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<[f64; 2]> = (0..200)
        .flat_map(|i| (0..200).map(move |j| [-3.0 + 6.0 * i as f64 / 199.0, -3.0 + 6.0 * j as f64 / 199.0]))
        .collect();
    for _ in 0..3 {
        let u = random_full_range(&mut rng, 2);
        let v = random_full_range(&mut rng, 2);
        let e = min_envelope_2d(&u, &v).expect("full-range inputs never collapse");
        for &x in &xs {
            assert!(e.eval(x) <= u.eval(x).min(v.eval(x)) + 1e-12);
        }
        // affine minorants from a lattice of slopes bound the envelope below
        let (vu, vv) = (primal_vertices(&u), primal_vertices(&v));
        let mut slopes = Vec::new();
        for i in 0..=60 {
            for j in 0..=60 - i {
                let y = [i as f64 / 60.0, j as f64 / 60.0];
                slopes.push((y, dual_oracle(&vu, y).1.max(dual_oracle(&vv, y).1)));
            }
        }
        for &x in xs.iter().step_by(97) {
            let lower = slopes.iter().map(|(y, c)| x[0] * y[0] + x[1] * y[1] - c).fold(f64::NEG_INFINITY, f64::max);
            let ex = e.eval(x);
            assert!(ex >= lower - 1e-9, "envelope below an admissible minorant at {x:?}");
            assert!(ex - lower < 0.1, "lattice oracle too far below at {x:?}: {ex} vs {lower}");
        }
    }
}

#[test]
fn envelope_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let xs: Vec<[f64; 2]> = (0..30).map(|_| [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)]).collect();
    for _ in 0..10 {
        let u = random_full_range(&mut rng, 3);
        let v = random_full_range(&mut rng, 3);
        let e = min_envelope_2d(&u, &v).unwrap();
        let ee = min_envelope_2d(&e, &e).unwrap();
        assert!(ee.below_on(&e, &xs, 1e-9) && e.below_on(&ee, &xs, 1e-9));
        let e_up = min_envelope_2d(&u, &v.shifted(0.5)).unwrap();
        assert!(e.below_on(&e_up, &xs, 1e-9));
        let e_sym = min_envelope_2d(&v, &u).unwrap();
        assert!(e.below_on(&e_sym, &xs, 1e-9) && e_sym.below_on(&e, &xs, 1e-9));
        assert!(min_envelope_2d(&u, &u.shifted(1.0)).unwrap().below_on(&u, &xs, 1e-12));
    }
}

#[test]
fn atoms_move_with_translations_and_ignore_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let u = random_full_range(&mut rng, 2);
        let mu = ma_measure_2d(&u);
        let shifted = ma_measure_2d(&u.shifted(2.5));
        let x0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let moved = ma_measure_2d(&u.translated(x0));
        for a in &mu.atoms {
            let s = shifted
                .atoms
                .iter()
                .find(|b| (b.location[0] - a.location[0]).abs() + (b.location[1] - a.location[1]).abs() < 1e-9);
            assert!((s.unwrap().mass - a.mass).abs() < 1e-12);
            let want = [a.location[0] + x0[0], a.location[1] + x0[1]];
            let m =
                moved.atoms.iter().find(|b| (b.location[0] - want[0]).abs() + (b.location[1] - want[1]).abs() < 1e-9);
            assert!((m.unwrap().mass - a.mass).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_mass_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let mut pieces = vec![
            Piece { g: [Q::from_integer(0), Q::from_integer(0)], b: Q::new(rng.gen_range(-8..8), 4) },
            Piece { g: [Q::from_integer(1), Q::from_integer(0)], b: Q::new(rng.gen_range(-8..8), 4) },
            Piece { g: [Q::from_integer(0), Q::from_integer(1)], b: Q::new(rng.gen_range(-8..8), 4) },
        ];
        for _ in 0..3 {
            let a = rng.gen_range(0..=6);
            let b = rng.gen_range(0..=6 - a);
            pieces.push(Piece { g: [Q::new(a, 6), Q::new(b, 6)], b: Q::new(rng.gen_range(-8..8), 4) });
        }
        let u = PLPotential2D::new(pieces).unwrap();
        assert_eq!(plane_mass(&ma_measure_2d(&u)), Q::from_integer(1));
    }
    let partial = PLPotential2D::new(vec![
        Piece { g: [Q::from_integer(0), Q::from_integer(0)], b: Q::from_integer(0) },
        Piece { g: [Q::new(1, 2), Q::from_integer(0)], b: Q::from_integer(0) },
        Piece { g: [Q::from_integer(0), Q::new(1, 2)], b: Q::from_integer(0) },
    ])
    .unwrap();
    let mu = ma_measure_2d(&partial);
    assert_eq!(mu.atoms[0].mass, Q::new(1, 4));
    assert_eq!(plane_mass(&mu), Q::from_integer(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_conserved(seed in any::<u64>(), interior in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_full_range(&mut rng, interior);
        let mu = ma_measure_2d(&u);
        prop_assert!((plane_mass(&mu) - 1.0).abs() <= 1e-9);
        prop_assert!(mu.pole_masses.iter().all(|m| m.abs() <= 1e-12));
        prop_assert!(mu.atoms.iter().all(|a| a.mass > 0.0));
    }

    #[test]
    fn envelope_lies_below_both(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_full_range(&mut rng, 2);
        let v = random_full_range(&mut rng, 1);
        let e = min_envelope_2d(&u, &v).unwrap();
        for _ in 0..50 {
            let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            prop_assert!(e.eval(x) <= u.eval(x).min(v.eval(x)) + 1e-9);
        }
    }
}
