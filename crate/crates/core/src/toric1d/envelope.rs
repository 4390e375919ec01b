use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Grid1D;
use crate::scalar::Scalar;

use super::ToricPotential1D;

/// Upper semicontinuous obstacle in profile coordinates.
///
/// Node values may be `-∞`. Beyond the grid the obstacle is affine with the
/// slopes in `tail_slopes` (left, right); `+∞` on the left or `-∞` on the right
/// describe an obstacle that falls off faster than any line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ObstacleFunction1D<T> {
    pub grid: Grid1D<T>,
    pub h_values: Vec<T>,
    pub tail_slopes: (T, T),
}

impl<T: Scalar> ObstacleFunction1D<T> {
    pub fn new(grid: Grid1D<T>, h_values: Vec<T>, tail_slopes: (T, T)) -> Result<Self> {
        if h_values.len() != grid.len() {
            return Err(Error::DomainMismatch(format!("{} obstacle values for {} nodes", h_values.len(), grid.len())));
        }
        if h_values.iter().any(|v| v.is_nan() || *v == T::infinity()) {
            return Err(Error::InvalidPotential("obstacle values must lie in [-inf, inf)".into()));
        }
        if tail_slopes.0.is_nan() || tail_slopes.1.is_nan() {
            return Err(Error::InvalidPotential("NaN tail slope".into()));
        }
        Ok(ObstacleFunction1D { grid, h_values, tail_slopes })
    }

    /// The obstacle `f_φ` of a potential.
    pub fn from_potential(p: &ToricPotential1D<T>) -> Self {
        if p.is_minus_infinity {
            return Self::void(p.grid.clone());
        }
        ObstacleFunction1D {
            grid: p.grid.clone(),
            h_values: p.f_values.clone(),
            tail_slopes: (p.slope_left, p.slope_right),
        }
    }

    /// Obstacle given in `φ`-coordinates.
    pub fn from_phi_values(grid: &Grid1D<T>, phi: &[T], tail_slopes: (T, T)) -> Result<Self> {
        let h = grid.nodes().iter().zip(phi).map(|(&t, &v)| crate::scalar::reference_profile(t) + v).collect();
        Self::new(grid.clone(), h, tail_slopes)
    }

    /// The obstacle `-∞`.
    pub fn void(grid: Grid1D<T>) -> Self {
        let n = grid.len();
        ObstacleFunction1D { grid, h_values: vec![T::neg_infinity(); n], tail_slopes: (T::zero(), T::one()) }
    }

    pub fn is_void(&self) -> bool {
        self.h_values.iter().all(|v| *v == T::neg_infinity())
    }

    /// Node-wise minimum; tails take the steeper fall-off on each side.
    pub fn min_with(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::DomainMismatch("obstacles live on different grids".into()));
        }
        Ok(ObstacleFunction1D {
            grid: self.grid.clone(),
            h_values: self.h_values.iter().zip(&other.h_values).map(|(&a, &b)| a.min(b)).collect(),
            tail_slopes: (self.tail_slopes.0.max(other.tail_slopes.0), self.tail_slopes.1.min(other.tail_slopes.1)),
        })
    }
}

/// `P_ω(h)`: the largest convex profile below `h` with slopes in `[0, 1]` and
/// tails compatible with the obstacle's tails. Returns the `-∞` potential when
/// no such profile exists.
///
/// Lower convex hull by monotone chain, clamped at the support points of the
/// extreme admissible slopes.
pub fn project_envelope<T: Scalar>(h: &ObstacleFunction1D<T>) -> ToricPotential1D<T> {
    let grid = &h.grid;
    let collapsed = || ToricPotential1D::minus_infinity(grid.clone());
    if h.h_values.iter().any(|v| *v == T::neg_infinity()) {
        return collapsed();
    }
    let lo = T::zero().max(h.tail_slopes.0);
    let hi = T::one().min(h.tail_slopes.1);
    if !(lo <= hi) {
        return collapsed();
    }
    let t = grid.nodes();
    let v = &h.h_values;
    let n = t.len();

    // support points of the extreme slopes
    let mut il = 0;
    let mut best = v[0] - lo * t[0];
    for i in 1..n {
        let c = v[i] - lo * t[i];
        if c <= best {
            best = c;
            il = i;
        }
    }
    let mut ir = n - 1;
    let mut best = v[n - 1] - hi * t[n - 1];
    for i in (0..n - 1).rev() {
        let c = v[i] - hi * t[i];
        if c <= best {
            best = c;
            ir = i;
        }
    }

    let mut f = vec![T::zero(); n];
    if il > ir {
        // only possible when lo == hi: a single supporting line
        let base = v[ir] - hi * t[ir];
        let base = base.min(v[il] - lo * t[il]);
        for i in 0..n {
            f[i] = base + lo * t[i];
        }
        return ToricPotential1D::from_parts(grid.clone(), f, lo, hi);
    }

    // lower hull of the points il..=ir
    let mut hull: Vec<usize> = Vec::with_capacity(ir - il + 1);
    for i in il..=ir {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // remove b when it lies on or above the chord a -> i
            let lhs = (v[b] - v[a]) * (t[i] - t[a]);
            let rhs = (v[i] - v[a]) * (t[b] - t[a]);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    for i in 0..il {
        f[i] = v[il] + lo * (t[i] - t[il]);
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        f[a] = v[a];
        let slope = (v[b] - v[a]) / (t[b] - t[a]);
        for k in a + 1..b {
            f[k] = v[a] + slope * (t[k] - t[a]);
        }
    }
    f[ir] = v[ir];
    for i in ir + 1..n {
        f[i] = v[ir] + hi * (t[i] - t[ir]);
    }
    ToricPotential1D::from_parts(grid.clone(), f, lo, hi)
}

/// `φ_j^- = P_ω(min_{ℓ >= j} φ_ℓ)` over the supplied (finite) tail.
pub fn running_inf_envelope<T: Scalar>(seq: &[ToricPotential1D<T>], j: usize) -> Result<ToricPotential1D<T>> {
    let tail = seq
        .get(j..)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::Precondition(format!("no members from index {j}")))?;
    let mut h = ObstacleFunction1D::from_potential(&tail[0]);
    for p in &tail[1..] {
        h = h.min_with(&ObstacleFunction1D::from_potential(p))?;
    }
    Ok(project_envelope(&h))
}

/// `φ_j^+ = (sup_{ℓ >= j} φ_ℓ)^*` over the supplied tail. On a finite grid the
/// node-wise maximum of admissible profiles is already admissible.
pub fn upper_envelope<T: Scalar>(seq: &[ToricPotential1D<T>], j: usize) -> Result<ToricPotential1D<T>> {
    let tail = seq
        .get(j..)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::Precondition(format!("no members from index {j}")))?;
    let grid = tail[0].grid.clone();
    let mut out: Option<ToricPotential1D<T>> = None;
    for p in tail {
        if !p.grid.same_as(&grid) {
            return Err(Error::DomainMismatch("sequence members on different grids".into()));
        }
        if p.is_minus_infinity {
            continue;
        }
        out = Some(match out {
            None => p.clone(),
            Some(mut q) => {
                for (a, &b) in q.f_values.iter_mut().zip(&p.f_values) {
                    *a = a.max(b);
                }
                q.slope_left = q.slope_left.min(p.slope_left);
                q.slope_right = q.slope_right.max(p.slope_right);
                q
            }
        });
    }
    Ok(out.unwrap_or_else(|| ToricPotential1D::minus_infinity(grid)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::reference_profile;

    #[test]
    fn reference_is_a_fixed_point() {
        let g = Grid1D::<f64>::uniform(-20.0, 20.0, 401).unwrap();
        let p = ToricPotential1D::reference(&g);
        let e = project_envelope(&ObstacleFunction1D::from_potential(&p));
        for (a, b) in e.f_values.iter().zip(&p.f_values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!((e.slope_left, e.slope_right), (0.0, 1.0));
    }

    #[test]
    fn kinked_obstacle_collapses() {
        let g = Grid1D::<f64>::uniform(-20.0, 20.0, 401).unwrap();
        let h: Vec<f64> = g.nodes().iter().map(|&t| reference_profile(t) - t.abs()).collect();
        let obs = ObstacleFunction1D::new(g, h, (1.0, 0.0)).unwrap();
        assert!(project_envelope(&obs).is_minus_infinity);
    }

    #[test]
    fn minus_infinity_node_collapses() {
        let g = Grid1D::<f64>::uniform(-1.0, 1.0, 5).unwrap();
        let mut h = vec![0.0; 5];
        h[2] = f64::NEG_INFINITY;
        let obs = ObstacleFunction1D::new(g, h, (0.0, 1.0)).unwrap();
        assert!(project_envelope(&obs).is_minus_infinity);
    }

    #[test]
    fn affine_tails_are_clamped() {
        let g = Grid1D::<f64>::uniform(-1.0, 1.0, 3).unwrap();
        // V shape with slopes -1 and 2: clamp to 0 on the left and 1 on the right
        let obs = ObstacleFunction1D::new(g, vec![1.0, 0.0, 2.0], (-1.0, 2.0)).unwrap();
        let e = project_envelope(&obs);
        assert_eq!(e.f_values, vec![0.0, 0.0, 1.0]);
        assert_eq!((e.slope_left, e.slope_right), (0.0, 1.0));
    }
}
