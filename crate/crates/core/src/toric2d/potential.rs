use serde::{Deserialize, Serialize};

use super::geometry::{cross, dot, hull_indices, in_convex, same_point, sub, P2};
use super::Coord;
use crate::error::{Error, Result};

/// One affine piece `g . x + b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece<T> {
    pub g: [T; 2],
    pub b: T,
}

/// A vertex `(y, u*(y))` of the dual graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualVertex<T> {
    pub y: [T; 2],
    pub value: T,
}

/// A two-dimensional cell of the dual, where `u*(y) = gradient . y + offset`.
/// The gradient is the primal vertex `x` whose subdifferential is the cell,
/// and `offset = -u(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFace<T> {
    /// Counterclockwise polygon, as indices into the dual vertices.
    pub vertices: Vec<usize>,
    pub gradient: [T; 2],
    pub offset: T,
}

/// Convex piecewise linear function on the hull of the gradients, `+inf`
/// outside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreDual<T> {
    pub vertices: Vec<DualVertex<T>>,
    /// Empty unless the domain has interior.
    pub faces: Vec<DualFace<T>>,
    /// Domain: counterclockwise hull, a segment `[a, b]` in order along the
    /// line, or a single point.
    pub domain: Vec<usize>,
}

impl<T: Coord> LegendreDual<T> {
    pub fn dimension(&self) -> usize {
        match self.domain.len() {
            1 => 0,
            2 => 1,
            _ => 2,
        }
    }

    pub fn domain_polygon(&self) -> Vec<P2<T>> {
        self.domain.iter().map(|&i| self.vertices[i].y).collect()
    }

    pub fn face_polygon(&self, f: &DualFace<T>) -> Vec<P2<T>> {
        f.vertices.iter().map(|&i| self.vertices[i].y).collect()
    }

    pub fn contains(&self, y: P2<T>) -> bool {
        in_convex(&self.domain_polygon(), y)
    }

    /// `u*(y)`, `None` outside the domain.
    pub fn eval(&self, y: P2<T>) -> Option<T> {
        if !self.contains(y) {
            return None;
        }
        match self.dimension() {
            0 => Some(self.vertices[0].value),
            1 => {
                // vertices are sorted along the segment
                let a = self.vertices[0].y;
                let d = sub(self.vertices[self.vertices.len() - 1].y, a);
                let s = dot(d, sub(y, a));
                let pos: Vec<T> = self.vertices.iter().map(|v| dot(d, sub(v.y, a))).collect();
                let k = (1..pos.len()).find(|&k| s <= pos[k]).unwrap_or(pos.len() - 1);
                let (s0, s1) = (pos[k - 1], pos[k]);
                let (v0, v1) = (self.vertices[k - 1].value, self.vertices[k].value);
                Some(v0 + (v1 - v0) * (s - s0) / (s1 - s0))
            }
            _ => self.faces.iter().map(|f| dot(f.gradient, y) + f.offset).reduce(|a, b| if b > a { b } else { a }),
        }
    }

    /// Edges of the cell complex (segments of the domain when it is flat).
    pub fn edges(&self) -> Vec<(P2<T>, P2<T>)> {
        match self.dimension() {
            0 => Vec::new(),
            1 => self.vertices.windows(2).map(|w| (w[0].y, w[1].y)).collect(),
            _ => self
                .faces
                .iter()
                .flat_map(|f| {
                    let n = f.vertices.len();
                    (0..n).map(move |i| (f.vertices[i], f.vertices[(i + 1) % n]))
                })
                .map(|(a, b)| (self.vertices[a].y, self.vertices[b].y))
                .collect(),
        }
    }

    /// The conjugate `(u*)*`: one piece per dual vertex.
    pub fn conjugate(&self) -> PLPotential2D<T> {
        let pieces = self.vertices.iter().map(|v| Piece { g: v.y, b: -v.value }).collect();
        PLPotential2D { pieces, dual: self.clone() }
    }
}

fn rel_tol<T: Coord>(scale: T) -> T {
    T::collinear_eps() * (T::one() + scale)
}

/// Plane `a . y + c` through three lifted points with independent `y`.
fn plane<T: Coord>(p: [DualVertex<T>; 3]) -> ([T; 2], T) {
    let (u, v) = (sub(p[1].y, p[0].y), sub(p[2].y, p[0].y));
    let (hu, hv) = (p[1].value - p[0].value, p[2].value - p[0].value);
    let det = u[0] * v[1] - u[1] * v[0];
    let a = [(hu * v[1] - hv * u[1]) / det, (u[0] * hv - v[0] * hu) / det];
    let c = p[0].value - dot(a, p[0].y);
    (a, c)
}

/// Lower convex hull of lifted points: the dual of `max_i (g_i . x + b_i)`
/// from the points `(g_i, -b_i)`. Points off the hull are dropped.
///
/// Brute force over triples, `O(n^4)`; potentials here have few pieces.
pub(crate) fn lower_hull<T: Coord>(points: &[DualVertex<T>]) -> LegendreDual<T> {
    // one point per gradient, the lowest
    let mut pts: Vec<DualVertex<T>> = Vec::new();
    for p in points {
        match pts.iter_mut().find(|q| same_point(q.y, p.y)) {
            Some(q) if p.value < q.value => q.value = p.value,
            Some(_) => {}
            None => pts.push(*p),
        }
    }
    let ys: Vec<P2<T>> = pts.iter().map(|p| p.y).collect();
    let h = hull_indices(&ys);
    match h.len() {
        1 => LegendreDual { vertices: vec![pts[h[0]]], faces: Vec::new(), domain: vec![0] },
        2 => lower_hull_1d(&pts, h[0], h[1]),
        _ => lower_hull_2d(&pts),
    }
}

fn lower_hull_1d<T: Coord>(pts: &[DualVertex<T>], a: usize, b: usize) -> LegendreDual<T> {
    let (o, d) = (pts[a].y, sub(pts[b].y, pts[a].y));
    let mut order: Vec<(T, DualVertex<T>)> = pts.iter().map(|p| (dot(d, sub(p.y, o)), *p)).collect();
    order.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let scale = pts.iter().map(|p| p.value.abs()).fold(T::zero(), |m, v| if v > m { v } else { m });
    let tol = rel_tol(scale) * dot(d, d);
    let mut keep: Vec<(T, DualVertex<T>)> = Vec::new();
    for q in order {
        while keep.len() >= 2 {
            let (p0, p1) = (&keep[keep.len() - 2], &keep[keep.len() - 1]);
            let c = cross([p0.0, p0.1.value], [p1.0, p1.1.value], [q.0, q.1.value]);
            if c <= tol {
                keep.pop();
            } else {
                break;
            }
        }
        keep.push(q);
    }
    let vertices: Vec<DualVertex<T>> = keep.into_iter().map(|(_, v)| v).collect();
    let last = vertices.len() - 1;
    LegendreDual { vertices, faces: Vec::new(), domain: vec![0, last] }
}

fn lower_hull_2d<T: Coord>(pts: &[DualVertex<T>]) -> LegendreDual<T> {
    let n = pts.len();
    let scale = pts.iter().map(|p| p.value.abs()).fold(T::zero(), |m, v| if v > m { v } else { m });
    let tol = rel_tol(scale);
    let eps = T::collinear_eps();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut raw: Vec<(Vec<usize>, [T; 2], T)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if cross(pts[i].y, pts[j].y, pts[k].y).abs() <= eps {
                    continue;
                }
                let (a, c) = plane([pts[i], pts[j], pts[k]]);
                let mut on = Vec::new();
                let mut supporting = true;
                for (m, p) in pts.iter().enumerate() {
                    let gap = p.value - (dot(a, p.y) + c);
                    if gap < -tol {
                        supporting = false;
                        break;
                    }
                    if gap <= tol {
                        on.push(m);
                    }
                }
                if !supporting || seen.contains(&on) {
                    continue;
                }
                seen.push(on.clone());
                let ys: Vec<P2<T>> = on.iter().map(|&m| pts[m].y).collect();
                let poly: Vec<usize> = hull_indices(&ys).into_iter().map(|h| on[h]).collect();
                raw.push((poly, a, c));
            }
        }
    }
    // keep only vertices of some cell, renumbered
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut vertices = Vec::new();
    for (poly, _, _) in &raw {
        for &m in poly {
            if map[m].is_none() {
                map[m] = Some(vertices.len());
                vertices.push(pts[m]);
            }
        }
    }
    let faces = raw
        .into_iter()
        .map(|(poly, gradient, offset)| DualFace {
            vertices: poly.iter().map(|&m| map[m].expect("cell vertex")).collect(),
            gradient,
            offset,
        })
        .collect();
    let ys: Vec<P2<T>> = vertices.iter().map(|v| v.y).collect();
    let domain = hull_indices(&ys);
    LegendreDual { vertices, faces, domain }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct PiecesRecord<T> {
    pieces: Vec<Piece<T>>,
}

/// `u(x) = max_i (g_i . x + b_i)`, normalized: every stored piece is active on
/// a region of positive area (or on a half-line or everywhere when the
/// gradients are collinear or equal).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PiecesRecord<T>",
    into = "PiecesRecord<T>",
    bound(serialize = "T: Coord + Serialize", deserialize = "T: Coord + Deserialize<'de>")
)]
pub struct PLPotential2D<T> {
    pieces: Vec<Piece<T>>,
    dual: LegendreDual<T>,
}

impl<T: Coord> TryFrom<PiecesRecord<T>> for PLPotential2D<T> {
    type Error = Error;
    fn try_from(r: PiecesRecord<T>) -> Result<Self> {
        PLPotential2D::new(r.pieces)
    }
}

impl<T: Coord> From<PLPotential2D<T>> for PiecesRecord<T> {
    fn from(u: PLPotential2D<T>) -> Self {
        PiecesRecord { pieces: u.pieces }
    }
}

/// Gradient membership in the simplex, vertex-exact up to the threshold.
pub fn in_simplex<T: Coord>(g: [T; 2]) -> bool {
    let eps = T::collinear_eps();
    g[0] >= -eps && g[1] >= -eps && g[0] + g[1] <= T::one() + eps
}

impl<T: Coord> PLPotential2D<T> {
    pub fn new(pieces: Vec<Piece<T>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidPotential("no pieces".into()));
        }
        for p in &pieces {
            if !(p.g[0].is_finite_value() && p.g[1].is_finite_value() && p.b.is_finite_value()) {
                return Err(Error::InvalidPotential(format!("non-finite piece {p:?}")));
            }
            if !in_simplex(p.g) {
                return Err(Error::InvalidPotential(format!("gradient {:?} outside the simplex", p.g)));
            }
        }
        let lifted: Vec<DualVertex<T>> = pieces.iter().map(|p| DualVertex { y: p.g, value: -p.b }).collect();
        Ok(lower_hull(&lifted).conjugate())
    }

    /// Builds from pieces given as `(g1, g2, b)`.
    pub fn from_triples(pieces: &[(T, T, T)]) -> Result<Self> {
        Self::new(pieces.iter().map(|&(a, b, c)| Piece { g: [a, b], b: c }).collect())
    }

    /// `max(0, x_1, x_2)`.
    pub fn standard() -> Self {
        let (z, o) = (T::zero(), T::one());
        Self::from_triples(&[(z, z, z), (o, z, z), (z, o, z)]).expect("valid standard potential")
    }

    pub(crate) fn from_dual(dual: LegendreDual<T>) -> Self {
        dual.conjugate()
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn dual(&self) -> &LegendreDual<T> {
        &self.dual
    }

    pub fn eval(&self, x: [T; 2]) -> T {
        self.pieces.iter().map(|p| dot(p.g, x) + p.b).reduce(|a, b| if b > a { b } else { a }).expect("nonempty pieces")
    }

    pub fn shifted(&self, c: T) -> Self {
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.b = p.b + c;
        }
        for v in &mut out.dual.vertices {
            v.value = v.value - c;
        }
        for f in &mut out.dual.faces {
            f.offset = f.offset - c;
        }
        out
    }

    /// `x -> u(x - x0)`.
    pub fn translated(&self, x0: [T; 2]) -> Self {
        let pieces = self.pieces.iter().map(|p| Piece { g: p.g, b: p.b - dot(p.g, x0) }).collect();
        PLPotential2D::new(pieces).expect("translation keeps gradients")
    }

    /// Whether the closure of the gradient range is the whole simplex.
    pub fn full_range(&self) -> bool {
        let (z, o) = (T::zero(), T::one());
        self.dual.dimension() == 2
            && [[z, z], [o, z], [z, o]].iter().all(|&c| self.dual.vertices.iter().any(|v| same_point(v.y, c)))
    }

    /// `u <= v` on the sample points, up to `tol`.
    pub fn below_on(&self, other: &Self, xs: &[[T; 2]], tol: T) -> bool {
        xs.iter().all(|&x| self.eval(x) <= other.eval(x) + tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn redundant_pieces_are_pruned() {
        let u = PLPotential2D::from_triples(&[
            (0.0, 0.0, 0.0),
            (1.0, 0.0, 0.0),
            (0.0, 1.0, 0.0),
            (0.2, 0.2, -1.0),
            (0.0, 0.0, -3.0),
        ])
        .unwrap();
        assert_eq!(u.pieces().len(), 3);
        assert_eq!(u.dual().faces.len(), 1);
        assert!(u.full_range());
    }

    #[test]
    fn rejects_gradients_outside_simplex() {
        assert!(PLPotential2D::from_triples(&[(0.7, 0.7, 0.0)]).is_err());
        assert!(PLPotential2D::<f64>::new(Vec::new()).is_err());
    }

    #[test]
    fn collinear_gradients_give_a_segment() {
        let u = PLPotential2D::from_triples(&[(0.0, 0.0, 0.0), (0.5, 0.0, 0.0), (1.0, 0.0, -2.0), (0.25, 0.0, -1.0)])
            .unwrap();
        assert_eq!(u.dual().dimension(), 1);
        assert_eq!(u.pieces().len(), 3);
        assert_eq!(u.dual().eval([0.75, 0.0]), Some(1.0));
        assert_eq!(u.dual().eval([0.5, 0.1]), None);
    }

    #[test]
    fn json_shape() {
        let u = PLPotential2D::<f64>::standard();
        let s = serde_json::to_string(&u).unwrap();
        assert!(s.starts_with("{\"pieces\":[{\"g\":[0.0,0.0],\"b\":0.0}"));
        let back: PLPotential2D<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
        assert!(serde_json::from_str::<PLPotential2D<f64>>("{\"pieces\":[]}").is_err());
    }
}
