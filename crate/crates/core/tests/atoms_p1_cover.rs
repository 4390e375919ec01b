use pshlab::atoms_p1::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Points that sit on ring boundaries and halfway between neighbouring
/// centres, where the located centre is farthest away.
fn adversarial_points(cover: &StageCover, rng: &mut impl Rng, n: usize) -> Vec<SpherePoint> {
    let a = cover.cover_angle;
    (0..n)
        .map(|_| {
            let k = rng.gen_range(0..cover.ring_count.max(1));
            let theta = (a * (1.0 + k as f64) + rng.gen_range(-1e-9..1e-9) * a).clamp(0.0, PI);
            let count = cover.ring(k).map_or(1, |r| r.count) as f64;
            let phi = (rng.gen_range(0..count as u64) as f64 + 0.5) * 2.0 * PI / count;
            SpherePoint::from_angles(theta, phi)
        })
        .collect()
}

fn random_points(rng: &mut impl Rng, n: usize) -> Vec<SpherePoint> {
    (0..n).map(|_| SpherePoint::from_angles(rng.gen_range(-1.0f64..1.0).acos(), rng.gen_range(0.0..2.0 * PI))).collect()
}

#[test]
fn stages_one_to_four_cover_the_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for stage in 1..=4 {
        let cover = StageCover::new(stage).unwrap();
        assert!(cover.cover_angle <= cover.plateau_angle / 2.0 * (1.0 + 1e-12));
        let mut pts = fibonacci_mesh(20_000);
        pts.extend(random_points(&mut rng, 20_000));
        pts.extend(adversarial_points(&cover, &mut rng, 20_000));
        let worst = cover.verify(&pts).unwrap_or_else(|e| panic!("stage {stage}: {e}"));
        assert_eq!(worst, -1.0, "stage {stage}");
    }
}

#[test]
fn located_centre_is_an_enumerated_centre() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for stage in 1..=2 {
        let cover = StageCover::new(stage).unwrap();
        let n = cover.len().unwrap();
        let centres: Vec<SpherePoint> = (0..n).map(|k| cover.center(k).unwrap()).collect();
        assert_eq!(cover.center(n), None);
        for x in random_points(&mut rng, 300) {
            let c = cover.covering_center(x);
            let nearest = centres.iter().map(|p| p.angle(x)).fold(f64::INFINITY, f64::min);
            assert!(centres.iter().any(|p| p.chordal(c) < 1e-12), "stage {stage}");
            assert!(nearest <= c.angle(x) + 1e-12);
            assert!(c.angle(x) <= cover.cover_angle * (1.0 + 1e-9));
        }
    }
}

#[test]
fn members_have_the_expected_plateau() {
    for stage in 1..=4 {
        let cover = StageCover::new(stage).unwrap();
        let m = cover.member(0).unwrap();
        let r = plateau_radius(stage);
        let inside = SpherePoint::from_angles(2.0 * (0.999 * r).asin(), 0.3);
        let outside = SpherePoint::from_angles(2.0 * (1.001 * r).asin(), 0.3);
        assert_eq!(m.eval(inside), -1.0);
        assert!(m.eval(outside) > -1.0);
    }
}
