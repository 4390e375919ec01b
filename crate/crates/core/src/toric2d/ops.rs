use super::geometry::{
    area, clip_convex, clip_halfplane, dot, hull, hull_indices, lerp, line_segment_crossing, near, on_segment,
    same_point, sub, P2,
};
use super::potential::{lower_hull, DualFace, DualVertex, LegendreDual, PLPotential2D};
use super::Coord;
use crate::measure::{Atom, MAMeasure};

pub fn legendre_dual<T: Coord>(u: &PLPotential2D<T>) -> LegendreDual<T> {
    u.dual().clone()
}

/// The three regions of `Δ` where one barycentric coordinate dominates,
/// attached to the vertices `(0,0)`, `(1,0)`, `(0,1)`; each is a
/// counterclockwise quadrilateral of area `1/6`.
pub fn pole_regions<T: Coord>() -> [Vec<P2<T>>; 3] {
    let (z, o) = (T::zero(), T::one());
    let h = o / T::two();
    let t = o / (T::two() + o);
    [vec![[z, z], [h, z], [t, t], [z, h]], vec![[o, z], [h, h], [t, t], [h, z]], vec![[z, o], [z, h], [t, t], [h, h]]]
}

/// Monge-Ampere measure: an atom at each vertex `x` of the cell complex with
/// mass `2 area(∂u(x))`, and at pole `k` twice the area of the part of the
/// barycentric region `k` of `Δ` not covered by gradients.
pub fn ma_measure_2d<T: Coord>(u: &PLPotential2D<T>) -> MAMeasure<T, [T; 2]> {
    let dual = u.dual();
    let atoms = dual
        .faces
        .iter()
        .map(|f| Atom { location: f.gradient, mass: T::two() * area(&dual.face_polygon(f)) })
        .collect();
    let covered = if dual.dimension() == 2 { dual.domain_polygon() } else { Vec::new() };
    let pole_masses = pole_regions::<T>()
        .iter()
        .map(|r| {
            let inside = if covered.is_empty() { T::zero() } else { area(&clip_convex(r, &covered)) };
            T::two() * (area(r) - inside)
        })
        .collect();
    MAMeasure { atoms, density: Vec::new(), pole_masses, grid: None }
}

/// Total mass of a planar measure.
pub fn plane_mass<T: Coord>(mu: &MAMeasure<T, [T; 2]>) -> T {
    mu.atoms.iter().fold(T::zero(), |s, a| s + a.mass) + mu.pole_masses.iter().fold(T::zero(), |s, &m| s + m)
}

fn plane_eq<T: Coord>(a: &([T; 2], T), b: &([T; 2], T)) -> bool {
    near(a.0[0], b.0[0]) && near(a.0[1], b.0[1]) && near(a.1, b.1)
}

/// Intersection of the two dual domains as a convex point list (empty, a
/// point, a segment or a counterclockwise polygon).
fn domain_intersection<T: Coord>(a: &LegendreDual<T>, b: &LegendreDual<T>) -> Vec<P2<T>> {
    let (pa, pb) = (a.domain_polygon(), b.domain_polygon());
    let (small, big) = if pa.len() <= pb.len() { (&pa, &pb) } else { (&pb, &pa) };
    match (small.len(), big.len()) {
        (1, _) => {
            if super::in_convex(big, small[0]) {
                small.clone()
            } else {
                Vec::new()
            }
        }
        (2, 2) => {
            let (p, q) = (small[0], small[1]);
            if on_segment(big[0], big[1], p) || on_segment(big[0], big[1], q) || on_segment(p, q, big[0]) {
                // collinear overlap or touching
                let pts: Vec<P2<T>> = [p, q, big[0], big[1]]
                    .into_iter()
                    .filter(|&y| on_segment(p, q, y) && on_segment(big[0], big[1], y))
                    .collect();
                hull(&pts)
            } else {
                match line_segment_crossing(p, q, big[0], big[1]) {
                    Some(s) if s >= T::zero() && s <= T::one() => vec![lerp(p, q, s)],
                    _ => Vec::new(),
                }
            }
        }
        (2, _) => {
            let clipped = clip_convex(small, big);
            hull(&clipped)
        }
        _ => hull(&clip_convex(&pa, &pb)),
    }
}

fn pointwise_max<T: Coord>(a: &LegendreDual<T>, b: &LegendreDual<T>, y: P2<T>) -> Option<T> {
    let (va, vb) = (a.eval(y)?, b.eval(y)?);
    Some(if va > vb { va } else { vb })
}

/// Envelope `(min(u, v))**`, the conjugate of `max(u*, v*)`.
///
/// `None` when the dual domains are disjoint: then no convex function with
/// gradients in `Δ` lies below both, and the envelope is identically `-inf`.
pub fn min_envelope_2d<T: Coord>(u: &PLPotential2D<T>, v: &PLPotential2D<T>) -> Option<PLPotential2D<T>> {
    let (a, b) = (u.dual(), v.dual());
    let common = domain_intersection(a, b);
    match common.len() {
        0 => None,
        1 => {
            let y = common[0];
            let value = pointwise_max(a, b, y)?;
            Some(PLPotential2D::from_dual(lower_hull(&[DualVertex { y, value }])))
        }
        2 => {
            let pts = flat_candidates(a, b, common[0], common[1]);
            Some(PLPotential2D::from_dual(lower_hull(&pts)))
        }
        _ => Some(PLPotential2D::from_dual(max_of_cells(a, b))),
    }
}

/// Lifted breakpoints of `max(u*, v*)` along the segment `[p, q]`.
fn flat_candidates<T: Coord>(a: &LegendreDual<T>, b: &LegendreDual<T>, p: P2<T>, q: P2<T>) -> Vec<DualVertex<T>> {
    let (z, o) = (T::zero(), T::one());
    let mut params = vec![z, o];
    for (e0, e1) in a.edges().into_iter().chain(b.edges()) {
        if let Some(s) = line_segment_crossing(p, q, e0, e1) {
            if s > z && s < o {
                params.push(s);
            }
        }
        for e in [e0, e1] {
            if on_segment(p, q, e) {
                let d = sub(q, p);
                params.push(dot(d, sub(e, p)) / dot(d, d));
            }
        }
    }
    params.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    params.dedup_by(|x, y| near(*x, *y));
    let diff = |s: T| -> Option<(T, T)> {
        let y = lerp(p, q, s);
        Some((a.eval(y)?, b.eval(y)?))
    };
    let mut more = Vec::new();
    for w in params.windows(2) {
        if let (Some((a0, b0)), Some((a1, b1))) = (diff(w[0]), diff(w[1])) {
            let (f0, f1) = (a0 - b0, a1 - b1);
            if (f0 > z && f1 < z) || (f0 < z && f1 > z) {
                more.push(w[0] + (w[1] - w[0]) * f0 / (f0 - f1));
            }
        }
    }
    params.extend(more);
    params
        .into_iter()
        .filter_map(|s| {
            let y = lerp(p, q, s);
            pointwise_max(a, b, y).map(|value| DualVertex { y, value })
        })
        .collect()
}

/// Cells of `max(u*, v*)` when the common domain has interior: every pair of
/// cells is intersected and split along the crease, each part carrying a
/// supporting plane of the maximum; parts with the same plane form one cell.
/// A supporting plane `(gradient, offset)`.
type Plane<T> = ([T; 2], T);

fn max_of_cells<T: Coord>(a: &LegendreDual<T>, b: &LegendreDual<T>) -> LegendreDual<T> {
    let cells = |d: &LegendreDual<T>| -> Vec<(Vec<P2<T>>, Plane<T>)> {
        d.faces.iter().map(|f| (d.face_polygon(f), (f.gradient, f.offset))).collect()
    };
    let eps = T::collinear_eps();
    let mut groups: Vec<(Plane<T>, Vec<P2<T>>)> = Vec::new();
    for (pa, la) in cells(a) {
        for (pb, lb) in cells(b) {
            let c = clip_convex(&pa, &pb);
            if area(&c) <= eps {
                continue;
            }
            let n = sub(la.0, lb.0);
            let k = la.1 - lb.1;
            let neg = [-n[0], -n[1]];
            for (part, plane) in [(clip_halfplane(&c, n, k), la), (clip_halfplane(&c, neg, -k), lb)] {
                if area(&part) <= eps {
                    continue;
                }
                match groups.iter_mut().find(|(p, _)| plane_eq(p, &plane)) {
                    Some((_, pts)) => pts.extend(part),
                    None => groups.push((plane, part)),
                }
            }
        }
    }
    let mut vertices: Vec<DualVertex<T>> = Vec::new();
    let mut faces = Vec::new();
    for ((gradient, offset), pts) in groups {
        let poly = hull(&pts);
        let idx = poly
            .iter()
            .map(|&y| match vertices.iter().position(|v| same_point(v.y, y)) {
                Some(i) => i,
                None => {
                    vertices.push(DualVertex { y, value: dot(gradient, y) + offset });
                    vertices.len() - 1
                }
            })
            .collect();
        faces.push(DualFace { vertices: idx, gradient, offset });
    }
    let ys: Vec<P2<T>> = vertices.iter().map(|v| v.y).collect();
    let domain = hull_indices(&ys);
    LegendreDual { vertices, faces, domain }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn standard_potential_is_a_unit_atom() {
        let mu = ma_measure_2d(&PLPotential2D::<f64>::standard());
        assert_eq!(mu.atoms.len(), 1);
        assert_eq!(mu.atoms[0].location, [0.0, 0.0]);
        assert!((mu.atoms[0].mass - 1.0f64).abs() < 1e-15);
        assert!(mu.pole_masses.iter().all(|&m| m.abs() < 1e-15));
        let exact = ma_measure_2d(&PLPotential2D::<Q>::standard());
        assert_eq!(plane_mass(&exact), Q::from_integer(1));
        assert_eq!(exact.atoms[0].mass, Q::from_integer(1));
    }

    #[test]
    fn affine_potential_has_no_atoms() {
        let u = PLPotential2D::from_triples(&[(0.3, 0.3, 1.0)]).unwrap();
        let mu = ma_measure_2d(&u);
        assert!(mu.atoms.is_empty());
        assert!((plane_mass(&mu) - 1.0f64).abs() < 1e-12);
    }

    #[test]
    fn standard_dual_vanishes() {
        let d = legendre_dual(&PLPotential2D::<f64>::standard());
        for y in [[0.0, 0.0], [0.2, 0.3], [1.0, 0.0], [0.5, 0.5]] {
            assert_eq!(d.eval(y), Some(0.0));
        }
        assert_eq!(d.eval([0.6, 0.6]), None);
    }

    #[test]
    fn envelope_of_shift_is_lower_function() {
        let u = PLPotential2D::<Q>::standard();
        let v = u.shifted(Q::from_integer(1));
        let e = min_envelope_2d(&u, &v).unwrap();
        assert_eq!(e.dual().vertices.len(), 3);
        for p in e.pieces() {
            assert_eq!(p.b, Q::from_integer(0));
        }
        assert_eq!(min_envelope_2d(&u, &u).unwrap().pieces().len(), 3);
    }

    #[test]
    fn disjoint_gradients_collapse() {
        let u = PLPotential2D::from_triples(&[(0.0, 0.0, 0.0)]).unwrap();
        let v = PLPotential2D::from_triples(&[(1.0, 0.0, 0.0)]).unwrap();
        assert!(min_envelope_2d(&u, &v).is_none());
    }

    #[test]
    fn envelope_on_a_shared_edge() {
        // gradients meet along the segment from (0,0) to (1,0)
        let u = PLPotential2D::from_triples(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)]).unwrap();
        let v = PLPotential2D::from_triples(&[(0.0, 0.0, -1.0), (1.0, 0.0, 1.0)]).unwrap();
        let e = min_envelope_2d(&u, &v).unwrap();
        assert_eq!(e.dual().dimension(), 1);
        for x in [[0.0, 0.0], [3.0, -2.0], [-4.0, 5.0], [0.5, 0.5]] {
            assert!(e.eval(x) <= f64::min(u.eval(x), v.eval(x)) + 1e-12);
        }
    }
}
