//! Planar kernel: orientation, hulls, areas and convex clipping, over any
//! [`Coord`] field. Float instances compare against [`Coord::collinear_eps`],
//! rational instances are exact.

use super::Coord;

pub type P2<T> = [T; 2];

#[inline]
pub fn sub<T: Coord>(a: P2<T>, b: P2<T>) -> P2<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot<T: Coord>(a: P2<T>, b: P2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

/// `(a - o) x (b - o)`, positive for a left turn.
#[inline]
pub fn cross<T: Coord>(o: P2<T>, a: P2<T>, b: P2<T>) -> T {
    let (u, v) = (sub(a, o), sub(b, o));
    u[0] * v[1] - u[1] * v[0]
}

#[inline]
pub fn near<T: Coord>(a: T, b: T) -> bool {
    (a - b).abs() <= T::collinear_eps()
}

#[inline]
pub fn same_point<T: Coord>(a: P2<T>, b: P2<T>) -> bool {
    near(a[0], b[0]) && near(a[1], b[1])
}

/// `a + s (b - a)`.
#[inline]
pub fn lerp<T: Coord>(a: P2<T>, b: P2<T>, s: T) -> P2<T> {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

fn cmp<T: Coord>(a: &P2<T>, b: &P2<T>) -> std::cmp::Ordering {
    a[0].partial_cmp(&b[0])
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a[1].partial_cmp(&b[1]).unwrap_or(std::cmp::Ordering::Equal))
}

/// Indices of the convex hull vertices, counterclockwise, collinear points
/// dropped. Degenerate inputs give one index (a point) or two (a segment).
pub fn hull_indices<T: Coord>(points: &[P2<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| cmp(&points[a], &points[b]));
    idx.dedup_by(|a, b| same_point(points[*a], points[*b]));
    if idx.len() <= 2 {
        return idx;
    }
    let eps = T::collinear_eps();
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && cross(points[lower[lower.len() - 2]], points[lower[lower.len() - 1]], points[i]) <= eps
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && cross(points[upper[upper.len() - 2]], points[upper[upper.len() - 1]], points[i]) <= eps
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && same_point(points[lower[0]], points[lower[1]]) {
        lower.truncate(1);
    }
    lower
}

pub fn hull<T: Coord>(points: &[P2<T>]) -> Vec<P2<T>> {
    hull_indices(points).into_iter().map(|i| points[i]).collect()
}

/// Signed area of a polygon (positive when counterclockwise).
pub fn area<T: Coord>(poly: &[P2<T>]) -> T {
    if poly.len() < 3 {
        return T::zero();
    }
    let mut s = T::zero();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        s = s + a[0] * b[1] - a[1] * b[0];
    }
    s / T::two()
}

/// Part of a convex polygon where `n . y + c >= 0`.
pub fn clip_halfplane<T: Coord>(poly: &[P2<T>], n: P2<T>, c: T) -> Vec<P2<T>> {
    let zero = T::zero();
    let mut out: Vec<P2<T>> = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (dot(n, p) + c, dot(n, q) + c);
        if fp >= zero {
            out.push(p);
        }
        if (fp > zero && fq < zero) || (fp < zero && fq > zero) {
            out.push(lerp(p, q, fp / (fp - fq)));
        }
    }
    out.dedup_by(|a, b| same_point(*a, *b));
    if out.len() > 1 && same_point(out[0], out[out.len() - 1]) {
        out.pop();
    }
    out
}

/// Intersection of two counterclockwise convex polygons.
pub fn clip_convex<T: Coord>(subject: &[P2<T>], clip: &[P2<T>]) -> Vec<P2<T>> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        // left of a -> b: (b - a) x (y - a) >= 0
        let n = [a[1] - b[1], b[0] - a[0]];
        out = clip_halfplane(&out, n, -dot(n, a));
    }
    out
}

/// Membership in a counterclockwise convex polygon, boundary included.
pub fn in_convex<T: Coord>(poly: &[P2<T>], y: P2<T>) -> bool {
    let eps = T::collinear_eps();
    match poly.len() {
        0 => false,
        1 => same_point(poly[0], y),
        2 => on_segment(poly[0], poly[1], y),
        n => (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], y) >= -eps),
    }
}

pub fn on_segment<T: Coord>(a: P2<T>, b: P2<T>, y: P2<T>) -> bool {
    let eps = T::collinear_eps();
    if cross(a, b, y).abs() > eps {
        return false;
    }
    let d = sub(b, a);
    let s = dot(d, sub(y, a));
    s >= -eps && s <= dot(d, d) + eps
}

/// Parameter `s` of the crossing of the line `a + s (b - a)` with the segment
/// `[p, q]`, when they cross transversally.
pub fn line_segment_crossing<T: Coord>(a: P2<T>, b: P2<T>, p: P2<T>, q: P2<T>) -> Option<T> {
    let d = sub(b, a);
    let e = sub(q, p);
    let den = d[0] * e[1] - d[1] * e[0];
    if den.abs() <= T::collinear_eps() {
        return None;
    }
    let w = sub(p, a);
    let s = (w[0] * e[1] - w[1] * e[0]) / den;
    let r = (w[0] * d[1] - w[1] * d[0]) / den;
    let eps = T::collinear_eps();
    (r >= -eps && r <= T::one() + eps).then_some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [0.0, 1.0], [0.2, 0.2]];
        let h = hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(area(&h), 0.5);
        assert_eq!(hull_indices(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).len(), 2);
        assert_eq!(hull_indices(&[[0.5, 0.5], [0.5, 0.5]]).len(), 1);
    }

    #[test]
    fn exact_clipping() {
        let tri = [[q(0, 1), q(0, 1)], [q(1, 1), q(0, 1)], [q(0, 1), q(1, 1)]];
        let sq = [[q(0, 1), q(0, 1)], [q(1, 2), q(0, 1)], [q(1, 2), q(1, 2)], [q(0, 1), q(1, 2)]];
        let c = clip_convex(&tri, &sq);
        assert_eq!(area(&c), q(1, 4));
        let half = clip_halfplane(&tri, [q(-1, 1), q(0, 1)], q(1, 3));
        assert_eq!(area(&half), q(1, 2) - q(2, 9));
        assert!(in_convex(&tri, [q(1, 2), q(1, 2)]));
        assert!(!in_convex(&tri, [q(2, 3), q(1, 2)]));
    }

    #[test]
    fn crossing_parameter() {
        let s: f64 = line_segment_crossing([0.0, 0.0], [1.0, 0.0], [0.5, -1.0], [0.5, 1.0]).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!(line_segment_crossing([0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, 2.0]).is_none());
    }
}
