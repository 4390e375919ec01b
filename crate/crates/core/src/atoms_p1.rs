//! Potentials with logarithmic poles on the Riemann sphere,
//! `φ = Σ a_i G_{p_i} + c` with `G_p = log d(·, p)` for the chordal distance
//! `d`, and the reduction of rotation-symmetric questions to the toric model.
//!
//! Points are unit vectors of ℝ³; `[1:0]` is the north pole `(0, 0, 1)` and
//! corresponds to `t = -∞`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Grid1D;
use crate::scalar::reference_profile;
use crate::toric1d::{self, CapacityMethod, IntervalSet, ToricPotential1D};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(pub [f64; 3]);

pub const NORTH: SpherePoint = SpherePoint([0.0, 0.0, 1.0]);
pub const SOUTH: SpherePoint = SpherePoint([0.0, 0.0, -1.0]);

impl SpherePoint {
    pub fn new(x: [f64; 3]) -> Result<Self> {
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("zero or non-finite vector".into()));
        }
        Ok(SpherePoint([x[0] / n, x[1] / n, x[2] / n]))
    }

    /// Image of `[z_0 : z_1]`.
    pub fn from_homogeneous(z0: Complex64, z1: Complex64) -> Result<Self> {
        let n2 = z0.norm_sqr() + z1.norm_sqr();
        if !(n2 > 0.0) {
            return Err(Error::Domain("[0:0] is not a point".into()));
        }
        let w = z0 * z1.conj();
        Self::new([2.0 * w.re / n2, 2.0 * w.im / n2, (z0.norm_sqr() - z1.norm_sqr()) / n2])
    }

    /// A unit representative `(z_0, z_1)`.
    pub fn to_homogeneous(self) -> (Complex64, Complex64) {
        let [x, y, z] = self.0;
        let a = ((1.0 + z) / 2.0).max(0.0).sqrt();
        if a > 1e-300 {
            // z_0 real; z_0 conj(z_1) = (x + iy)/2
            let z1 = Complex64::new(x, -y) / (2.0 * a);
            (Complex64::new(a, 0.0), z1)
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
        }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        SpherePoint([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    /// Polar angle from the north pole and azimuth in `[0, 2π)`.
    pub fn angles(self) -> (f64, f64) {
        let [x, y, z] = self.0;
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x).rem_euclid(2.0 * PI);
        (theta, phi)
    }

    /// `t = log|z_1/z_0|`, infinite at the poles.
    pub fn log_coordinate(self) -> f64 {
        let z = self.0[2];
        0.5 * ((1.0 - z) / (1.0 + z)).ln()
    }

    /// Chordal distance, in `[0, 1]`.
    pub fn chordal(self, other: SpherePoint) -> f64 {
        let d: f64 = (0..3).map(|k| (self.0[k] - other.0[k]).powi(2)).sum();
        (d.sqrt() / 2.0).min(1.0)
    }

    /// Angle between the two unit vectors.
    pub fn angle(self, other: SpherePoint) -> f64 {
        2.0 * self.chordal(other).asin()
    }

    pub fn antipode(self) -> SpherePoint {
        SpherePoint([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn rotate(self, r: &[[f64; 3]; 3]) -> SpherePoint {
        let x = self.0;
        SpherePoint([
            r[0][0] * x[0] + r[0][1] * x[1] + r[0][2] * x[2],
            r[1][0] * x[0] + r[1][1] * x[1] + r[1][2] * x[2],
            r[2][0] * x[0] + r[2][1] * x[1] + r[2][2] * x[2],
        ])
    }
}

/// `G_p(x) = log d(x, p)`; `sup G_p = 0` is attained at the antipode of `p`.
pub fn green(p: SpherePoint, x: SpherePoint) -> f64 {
    p.chordal(x).ln()
}

/// Rotation taking `c` to the north pole.
pub fn rotation_to_north(c: SpherePoint) -> [[f64; 3]; 3] {
    let [x, y, z] = c.0;
    // axis c × e_3 = (y, -x, 0), angle acos(z)
    let s = (x * x + y * y).sqrt();
    if s < 1e-15 {
        return if z > 0.0 {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        } else {
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
        };
    }
    let (kx, ky) = (y / s, -x / s);
    let (sin, cos) = (s, z);
    let v = 1.0 - cos;
    [
        [cos + kx * kx * v, kx * ky * v, ky * sin],
        [kx * ky * v, cos + ky * ky * v, -kx * sin],
        [-ky * sin, kx * sin, cos],
    ]
}

/// `n` nearly uniform points (golden-angle spiral).
pub fn fibonacci_mesh(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            SpherePoint([r * a.cos(), r * a.sin(), z])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub point: SpherePoint,
    pub weight: f64,
}

/// `max(Σ a_i G_{p_i}, floor) + shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomPotential {
    pub atoms: Vec<Pole>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

/// Two points closer than this are treated as the same point.
const SAME_POINT: f64 = 1e-12;

impl AtomPotential {
    pub fn new(atoms: Vec<Pole>, shift: f64, floor: Option<f64>) -> Result<Self> {
        let p = AtomPotential { atoms, shift, floor };
        p.validate()?;
        Ok(p)
    }

    pub fn single(point: SpherePoint, weight: f64) -> Result<Self> {
        Self::new(vec![Pole { point, weight }], 0.0, None)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.weight > 0.0 && a.weight <= 1.0) {
                return Err(Error::Domain(format!("atom weight {} outside (0, 1]", a.weight)));
            }
        }
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                if a.point.chordal(b.point) < SAME_POINT {
                    return Err(Error::Domain("atom points must be distinct".into()));
                }
            }
        }
        let total: f64 = self.atoms.iter().map(|a| a.weight).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("total Lelong mass {total} exceeds 1")));
        }
        if !self.shift.is_finite() || self.floor.is_some_and(|f| !f.is_finite()) {
            return Err(Error::Domain("non-finite shift or floor".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: SpherePoint) -> f64 {
        let s: f64 = self.atoms.iter().map(|a| a.weight * green(a.point, x)).sum();
        let s = match self.floor {
            Some(f) => s.max(f),
            None => s,
        };
        s + self.shift
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// The axis through all atoms, if they lie on one line through the origin.
    pub fn axis(&self) -> Option<SpherePoint> {
        let first = self.atoms.first()?.point;
        self.atoms
            .iter()
            .all(|a| a.point.chordal(first) < SAME_POINT || a.point.chordal(first.antipode()) < SAME_POINT)
            .then_some(first)
    }

    /// The toric profile of this potential after rotating its axis to the
    /// poles (the first atom goes to `t = -∞`).
    pub fn to_toric(&self, grid: &Grid1D<f64>) -> Result<ToricPotential1D<f64>> {
        let axis = match self.axis() {
            Some(a) => a,
            None if self.atoms.is_empty() => NORTH,
            None => return Err(Error::Domain("atoms do not lie on one axis".into())),
        };
        let (mut a, mut b) = (0.0, 0.0);
        for p in &self.atoms {
            if p.point.chordal(axis) < SAME_POINT {
                a += p.weight;
            } else {
                b += p.weight;
            }
        }
        // G_north = t - f_ω and G_south = -f_ω in profile coordinates
        let shift = self.shift;
        let floor = self.floor;
        let prof = move |t: f64| {
            let fw = reference_profile(t);
            let core = (1.0 - a - b) * fw + a * t;
            match floor {
                Some(c) => core.max(fw + c) + shift,
                None => core + shift,
            }
        };
        let (sl, sr) = if floor.is_some() { (0.0, 1.0) } else { (a, 1.0 - b) };
        ToricPotential1D::from_profile(grid, prof, sl, sr)
    }
}

/// Outcome of [`collapse_test`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub collapsed: bool,
    /// `Σ_p max_m a_m(p)` over the distinct points of the family.
    pub required_mass: f64,
    /// Each distinct point with the largest weight the family puts there.
    pub required: Vec<Pole>,
    /// A potential below every member, present when not collapsed.
    pub minorant: Option<AtomPotential>,
}

/// Decides whether `P_ω(min_m φ_m) ≡ -∞`: every minorant must carry at least
/// the largest Lelong number of the family at each point, and the total
/// Lelong mass of a potential on the sphere is at most one.
pub fn collapse_test(family: &[AtomPotential]) -> Result<CollapseReport> {
    if family.is_empty() {
        return Err(Error::Domain("empty family".into()));
    }
    let mut required: Vec<Pole> = Vec::new();
    for m in family {
        m.validate()?;
        if m.floor.is_some() {
            return Err(Error::Domain("collapse test expects members without floor".into()));
        }
        for a in &m.atoms {
            match required.iter_mut().find(|r| r.point.chordal(a.point) < SAME_POINT) {
                Some(r) => r.weight = r.weight.max(a.weight),
                None => required.push(a.clone()),
            }
        }
    }
    let required_mass: f64 = required.iter().map(|r| r.weight).sum();
    let collapsed = required_mass > 1.0 + 1e-12;
    let minorant = (!collapsed).then(|| {
        let shift = family.iter().map(|m| m.shift).fold(f64::INFINITY, f64::min);
        AtomPotential { atoms: required.clone(), shift, floor: None }
    });
    Ok(CollapseReport { collapsed, required_mass, required, minorant })
}

/// Smallest value of `member - minorant` over the mesh and all members
/// (points where both are `-∞` are skipped).
pub fn certificate_margin(minorant: &AtomPotential, family: &[AtomPotential], mesh: &[SpherePoint]) -> f64 {
    let mut margin = f64::INFINITY;
    for &x in mesh {
        let lo = minorant.eval(x);
        for m in family {
            let v = m.eval(x);
            if v == f64::NEG_INFINITY && lo == f64::NEG_INFINITY {
                continue;
            }
            margin = margin.min(v - lo);
        }
    }
    margin
}

/// The cap `{d(·, center) <= r}` rotated to the north pole is
/// `{t <= ½ log(r² / (1 - r²))}`; returns that bound computed from an actual
/// boundary point of the cap.
pub fn cap_to_interval(center: SpherePoint, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("chordal radius {r} outside (0, 1)")));
    }
    let rot = rotation_to_north(center);
    // a point at chordal distance r from the center: rotate north to the center
    // and tilt by the corresponding angle
    let alpha = 2.0 * r.asin();
    let inv = transpose(&rot);
    let boundary = SpherePoint::from_angles(alpha, 0.3).rotate(&inv);
    Ok(boundary.rotate(&rot).log_coordinate())
}

fn transpose(r: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = r[j][i];
        }
    }
    t
}

/// Grid used for cap capacities: the default extent widened to contain `b`.
pub fn cap_grid(b: f64) -> Grid1D<f64> {
    let lo = (-40.0f64).min(b - 20.0);
    Grid1D::composite(-30.0, 30.0, 0.01, lo, 40.0, &[b]).expect("valid composite grid")
}

/// `Cap_ω` of a chordal cap, by rotation to the toric model.
pub fn symmetric_capacity_of_cap(center: SpherePoint, r: f64) -> Result<f64> {
    let b = cap_to_interval(center, r)?;
    symmetric_capacity_of_cap_with(center, r, &cap_grid(b), CapacityMethod::Extremal)
}

pub fn symmetric_capacity_of_cap_with(
    center: SpherePoint,
    r: f64,
    grid: &Grid1D<f64>,
    method: CapacityMethod,
) -> Result<f64> {
    let b = cap_to_interval(center, r)?;
    let k = IntervalSet::single(f64::NEG_INFINITY, b)?;
    toric1d::capacity_with(method, grid, &k)
}

/// Plateau radius of stage `n`: `max(G_a / 2^n, -1) ≡ -1` on `{d(·, a) <= e^{-2^n}}`.
pub fn plateau_radius(stage: u32) -> f64 {
    (-(2f64.powi(stage as i32))).exp()
}

/// A ring of cover centres at polar angle `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub theta: f64,
    pub count: u64,
}

/// Covering of the sphere by caps of angle `cover_angle`, half the plateau
/// angle of the stage. Centres: the north pole, rings of latitude and the
/// south pole. A point at polar angle within `cover_angle / 2` of a ring and
/// azimuth within `π / count` of a centre is at angle at most
/// `cover_angle / 2 + sin θ · π / count <= cover_angle` from it, which fixes
/// the ring counts. Rings are computed on demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCover {
    pub stage: u32,
    pub plateau_angle: f64,
    pub cover_angle: f64,
    pub ring_count: u64,
}

/// Covers with more rings than this are not enumerated centre by centre.
pub const ENUMERABLE_RINGS: u64 = 1 << 20;

impl StageCover {
    pub fn new(stage: u32) -> Result<Self> {
        if stage == 0 {
            return Err(Error::Domain("stages start at 1".into()));
        }
        let plateau_angle = 2.0 * plateau_radius(stage).asin();
        let a = plateau_angle / 2.0;
        if !(a > 1e-12) {
            return Err(Error::Domain(format!("stage {stage} is too fine to represent")));
        }
        // rings k with a(1 + k) < π - a
        let ring_count = ((PI - 2.0 * a) / a).ceil().max(0.0) as u64;
        Ok(StageCover { stage, plateau_angle, cover_angle: a, ring_count })
    }

    pub fn ring(&self, k: u64) -> Option<Ring> {
        if k >= self.ring_count {
            return None;
        }
        let a = self.cover_angle;
        let theta = a * (1.5 + k as f64);
        let (lo, hi) = (theta - a / 2.0, (theta + a / 2.0).min(PI));
        let smax = if lo <= PI / 2.0 && hi >= PI / 2.0 { 1.0 } else { lo.sin().max(hi.sin()) };
        let count = ((2.0 * PI * smax / a).ceil() as u64).max(1);
        Some(Ring { theta, count })
    }

    /// Number of centres (both poles plus the rings), when enumerable.
    pub fn len(&self) -> Option<u64> {
        (self.ring_count <= ENUMERABLE_RINGS)
            .then(|| 2 + (0..self.ring_count).map(|k| self.ring(k).expect("in range").count).sum::<u64>())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Centre `k` in enumeration order; centre 0 is the north pole.
    pub fn center(&self, k: u64) -> Option<SpherePoint> {
        if k == 0 {
            return Some(NORTH);
        }
        if self.ring_count > ENUMERABLE_RINGS {
            return None;
        }
        let mut k = k - 1;
        for ring in 0..self.ring_count {
            let r = self.ring(ring).expect("in range");
            if k < r.count {
                return Some(SpherePoint::from_angles(r.theta, 2.0 * PI * k as f64 / r.count as f64));
            }
            k -= r.count;
        }
        (k == 0).then_some(SOUTH)
    }

    /// A centre whose cover cap contains `x`.
    pub fn covering_center(&self, x: SpherePoint) -> SpherePoint {
        let (theta, phi) = x.angles();
        let a = self.cover_angle;
        if theta <= a {
            return NORTH;
        }
        if theta >= PI - a || self.ring_count == 0 {
            return SOUTH;
        }
        let ring = (((theta - a) / a).floor() as u64).min(self.ring_count - 1);
        let r = self.ring(ring).expect("in range");
        let step = 2.0 * PI / r.count as f64;
        let idx = ((phi / step).round() as u64) % r.count;
        SpherePoint::from_angles(r.theta, idx as f64 * step)
    }

    /// The stage member centred at `point`: `max(G_point / 2^n, -1)`.
    pub fn member_at(&self, point: SpherePoint) -> AtomPotential {
        AtomPotential {
            atoms: vec![Pole { point, weight: 2f64.powi(-(self.stage as i32)) }],
            shift: 0.0,
            floor: Some(-1.0),
        }
    }

    pub fn member(&self, k: u64) -> Option<AtomPotential> {
        self.center(k).map(|c| self.member_at(c))
    }

    /// Checks the covering on a mesh: each mesh point lies within the cover
    /// angle of its located centre and that member equals `-1` there. Returns
    /// the largest such member value over the mesh.
    pub fn verify(&self, mesh: &[SpherePoint]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for &x in mesh {
            let c = self.covering_center(x);
            if c.angle(x) > self.cover_angle * (1.0 + 1e-9) {
                return Err(Error::Precondition(format!("mesh point {:?} not covered", x.0)));
            }
            worst = worst.max(self.member_at(c).eval(x));
        }
        Ok(worst)
    }
}

/// Recipe of the stage-relabelled extraction sequence: index `n` carries the
/// members `max(G_a / 2^n, -1)` of the `n`-th covering.
pub fn extraction_family(stage_count: u32) -> Result<crate::lab::SequenceFamily> {
    if stage_count == 0 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    Ok(crate::lab::SequenceFamily::extraction(stage_count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_round_trip() {
        let p = SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        assert!(p.chordal(NORTH) < 1e-15);
        let q = SpherePoint::from_homogeneous(Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.7)).unwrap();
        let (z0, z1) = q.to_homogeneous();
        let back = SpherePoint::from_homogeneous(z0, z1).unwrap();
        assert!(q.chordal(back) < 1e-14);
    }

    #[test]
    fn chordal_distance_matches_homogeneous_formula() {
        let a = (Complex64::new(0.6, 0.1), Complex64::new(-0.4, 0.9));
        let b = (Complex64::new(-1.0, 0.5), Complex64::new(0.2, 0.2));
        let pa = SpherePoint::from_homogeneous(a.0, a.1).unwrap();
        let pb = SpherePoint::from_homogeneous(b.0, b.1).unwrap();
        let na = (a.0.norm_sqr() + a.1.norm_sqr()).sqrt();
        let nb = (b.0.norm_sqr() + b.1.norm_sqr()).sqrt();
        let d = (a.0 * b.1 - a.1 * b.0).norm() / (na * nb);
        assert!((pa.chordal(pb) - d).abs() < 1e-14);
    }

    #[test]
    fn north_green_function_is_the_toric_pole() {
        for &t in &[-5.0, -0.3, 0.0, 2.0] {
            let x = SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), Complex64::new(f64::exp(t), 0.0)).unwrap();
            let g = t - reference_profile(t);
            assert!((green(NORTH, x) - g).abs() < 1e-12);
            assert!((x.log_coordinate() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_moves_center_to_north() {
        let c = SpherePoint::new([0.3, -0.8, 0.2]).unwrap();
        let r = rotation_to_north(c);
        assert!(c.rotate(&r).chordal(NORTH) < 1e-14);
        assert!(SOUTH.rotate(&rotation_to_north(SOUTH)).chordal(NORTH) < 1e-15);
    }

    #[test]
    fn two_unit_atoms_collapse() {
        let a = AtomPotential::single(NORTH, 1.0).unwrap();
        let b = AtomPotential::single(SpherePoint::new([1.0, 0.0, 0.2]).unwrap(), 1.0).unwrap();
        let r = collapse_test(&[a.clone(), b]).unwrap();
        assert!(r.collapsed && r.minorant.is_none());
        assert!((r.required_mass - 2.0).abs() < 1e-15);
        let r = collapse_test(std::slice::from_ref(&a)).unwrap();
        assert!(!r.collapsed);
        assert_eq!(r.minorant.unwrap().atoms, a.atoms);
    }

    #[test]
    fn cover_of_first_stage() {
        let c = StageCover::new(1).unwrap();
        assert_eq!(c.center(0), Some(NORTH));
        let worst = c.verify(&fibonacci_mesh(4000)).unwrap();
        assert_eq!(worst, -1.0);
    }

    #[test]
    fn axial_potential_reduces_to_profile() {
        let g = Grid1D::uniform(-10.0, 10.0, 201).unwrap();
        let p = AtomPotential::new(
            vec![Pole { point: NORTH, weight: 0.25 }, Pole { point: SOUTH, weight: 0.5 }],
            -0.1,
            None,
        )
        .unwrap();
        let q = p.to_toric(&g).unwrap();
        assert_eq!(q.lelong_numbers(), (0.25, 0.5));
        for &t in &[-3.0, 0.0, 1.7] {
            let x = SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), Complex64::new(f64::exp(t), 0.0)).unwrap();
            assert!((q.eval_phi(t) - p.eval(x)).abs() < 1e-9);
        }
    }
}
