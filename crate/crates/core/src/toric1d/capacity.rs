use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::DenseLp;
use crate::measure::Grid1D;
use crate::scalar::{reference_profile, Scalar};

use super::{functionals, project_envelope, ObstacleFunction1D, ToricPotential1D};

/// Largest grid accepted by the dense LP route.
pub const LP_MAX_NODES: usize = 1200;

/// Finite union of closed intervals of the log coordinate. Infinite endpoints
/// mean the set runs into a pole and are clipped to the grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct IntervalSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Scalar> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    /// Sorts and merges; rejects `a > b` and NaN endpoints.
    pub fn new(mut intervals: Vec<(T, T)>) -> Result<Self> {
        if intervals.iter().any(|(a, b)| a.is_nan() || b.is_nan() || a > b) {
            return Err(Error::Domain("intervals must satisfy a <= b".into()));
        }
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut merged: Vec<(T, T)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalSet { intervals: merged })
    }

    pub fn single(a: T, b: T) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, t: T) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t <= b)
    }

    pub fn touches_pole(&self) -> bool {
        self.intervals.iter().any(|&(a, b)| a == T::neg_infinity() || b == T::infinity())
    }

    /// Runs of consecutive selected nodes as intervals between node locations;
    /// runs touching the grid ends are extended to the poles.
    pub fn from_node_mask(grid: &Grid1D<T>, mask: &[bool]) -> Self {
        let n = grid.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            if !mask[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < n && mask[i + 1] {
                i += 1;
            }
            let a = if start == 0 { T::neg_infinity() } else { grid.node(start) };
            let b = if i == n - 1 { T::infinity() } else { grid.node(i) };
            out.push((a, b));
            i += 1;
        }
        IntervalSet { intervals: out }
    }

    /// Checks finite endpoints against the grid and returns the grid with
    /// those endpoints inserted as nodes, together with the node mask of the set.
    pub fn resolve(&self, grid: &Grid1D<T>) -> Result<(Grid1D<T>, Vec<bool>)> {
        let mut extra = Vec::new();
        for &(a, b) in &self.intervals {
            for e in [a, b] {
                if e.is_finite() {
                    if e < grid.t_min() || e > grid.t_max() {
                        return Err(Error::Domain(format!(
                            "endpoint {e} outside grid [{}, {}]",
                            grid.t_min(),
                            grid.t_max()
                        )));
                    }
                    extra.push(e);
                }
            }
        }
        let g = if extra.is_empty() {
            grid.clone()
        } else {
            let tol = grid.max_spacing() * T::lit(1e-9);
            grid.with_extra_nodes(&extra, tol)?
        };
        let h = g.max_spacing() * T::lit(1e-9);
        let mask = g.nodes().iter().map(|&t| self.intervals.iter().any(|&(a, b)| a - h <= t && t <= b + h)).collect();
        Ok((g, mask))
    }
}

/// Which discretization computes the capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    /// Linear program over the profile values.
    LinearProgram,
    /// Mass on the set of the relative extremal envelope.
    Extremal,
}

/// `Cap(K)` by the linear program
/// `max Σ_{i ∈ K} m_i(f)` over convex profiles with tail slopes `(0, 1)` and
/// `f_ω <= f <= f_ω + 1`.
pub fn capacity<T: Scalar>(grid: &Grid1D<T>, k: &IntervalSet<T>) -> Result<T> {
    if k.is_empty() {
        return Ok(T::zero());
    }
    let (g, mask) = k.resolve(grid)?;
    capacity_lp_of_nodes(&g, &mask)
}

/// `Cap(K)` through the relative extremal function
/// `u_K = P_ω(-1 on K, 0 elsewhere)`: the mass of `MA(u_K)` on `K`.
pub fn capacity_extremal<T: Scalar>(grid: &Grid1D<T>, k: &IntervalSet<T>) -> Result<T> {
    if k.is_empty() {
        return Ok(T::zero());
    }
    let (g, mask) = k.resolve(grid)?;
    Ok(capacity_extremal_of_nodes(&g, &mask))
}

pub fn capacity_with<T: Scalar>(method: CapacityMethod, grid: &Grid1D<T>, k: &IntervalSet<T>) -> Result<T> {
    match method {
        CapacityMethod::LinearProgram => capacity(grid, k),
        CapacityMethod::Extremal => capacity_extremal(grid, k),
    }
}

/// Relative extremal function of a set of nodes: the envelope of the obstacle
/// `f_ω - a` on the selected nodes and `f_ω` elsewhere.
pub fn relative_extremal<T: Scalar>(grid: &Grid1D<T>, mask: &[bool], a: T) -> ToricPotential1D<T> {
    let h =
        grid.nodes().iter().zip(mask).map(|(&t, &m)| reference_profile(t) - if m { a } else { T::zero() }).collect();
    let obs = ObstacleFunction1D { grid: grid.clone(), h_values: h, tail_slopes: (T::zero(), T::one()) };
    project_envelope(&obs)
}

pub fn capacity_extremal_of_nodes<T: Scalar>(grid: &Grid1D<T>, mask: &[bool]) -> T {
    if !mask.iter().any(|&m| m) {
        return T::zero();
    }
    let u = relative_extremal(grid, mask, T::one());
    let m = functionals::nodal_masses(&u).expect("extremal envelope is finite");
    m.iter().zip(mask).filter(|(_, &k)| k).map(|(&v, _)| v).sum()
}

pub fn capacity_lp_of_nodes<T: Scalar>(grid: &Grid1D<T>, mask: &[bool]) -> Result<T> {
    let n = grid.len();
    if !mask.iter().any(|&m| m) {
        return Ok(T::zero());
    }
    if n > LP_MAX_NODES {
        return Err(Error::Precondition(format!("{n} nodes exceed the dense linear program limit of {LP_MAX_NODES}")));
    }
    let t: Vec<f64> = grid.nodes().iter().map(|v| v.as_f64()).collect();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let reference = ToricPotential1D::reference(&Grid1D::from_nodes(t.clone())?);
    let m0 = functionals::nodal_masses(&reference)?;

    // coefficients of m_i(x) - m_i(0) in x: the discrete second difference
    let row = |i: usize| -> Vec<(usize, f64)> {
        let mut r = Vec::with_capacity(3);
        if i + 1 < n {
            r.push((i + 1, 1.0 / h[i]));
            r.push((i, -1.0 / h[i]));
        }
        if i > 0 {
            r.push((i, -1.0 / h[i - 1]));
            r.push((i - 1, 1.0 / h[i - 1]));
        }
        r
    };

    let mut c = vec![0.0; n];
    let mut base = 0.0;
    for i in 0..n {
        if mask[i] {
            base += m0[i];
            for (j, v) in row(i) {
                c[j] += v;
            }
        }
    }
    let mut lp = DenseLp::new(c);
    for (i, &mi) in m0.iter().enumerate() {
        // -m_i(x) + m_i(0) <= m_i(0)
        let mut r = vec![0.0; n];
        for (j, v) in row(i) {
            r[j] -= v;
        }
        lp.push(r, mi.max(0.0));
    }
    for i in 0..n {
        let mut r = vec![0.0; n];
        r[i] = 1.0;
        lp.push(r, 1.0);
    }
    let sol = lp.solve()?;
    Ok(T::lit((base + sol.objective).clamp(0.0, 1.0)))
}

/// `{φ < level}` as a union of intervals between grid nodes.
pub fn sublevel_set<T: Scalar>(phi: &ToricPotential1D<T>, level: T) -> IntervalSet<T> {
    let v = phi.phi_values();
    let mask: Vec<bool> = v.iter().map(|&x| x < level).collect();
    IntervalSet::from_node_mask(&phi.grid, &mask)
}

/// Capacity of `{φ < -C}` against the bound `(‖φ‖_{L¹(MA(0))} + 1) / C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClnCheck<T> {
    pub cap_value: T,
    pub bound: T,
}

impl<T: Scalar> ClnCheck<T> {
    pub fn holds(&self) -> bool {
        self.cap_value <= self.bound + T::lit(1e-9)
    }
}

pub fn cln_bound_check<T: Scalar>(phi: &ToricPotential1D<T>, c: T, method: CapacityMethod) -> Result<ClnCheck<T>> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!("level must be positive, got {c}")));
    }
    if phi.is_minus_infinity || phi.sup_phi() > T::envelope_tol() {
        return Err(Error::Precondition("potential must satisfy sup φ <= 0".into()));
    }
    let zero = ToricPotential1D::reference(&phi.grid);
    let norm = functionals::l1_distance(phi, &zero)?;
    let v = phi.phi_values();
    let mask: Vec<bool> = v.iter().map(|&x| x < -c).collect();
    let cap_value = match method {
        CapacityMethod::LinearProgram => capacity_lp_of_nodes(&phi.grid, &mask)?,
        CapacityMethod::Extremal => capacity_extremal_of_nodes(&phi.grid, &mask),
    };
    Ok(ClnCheck { cap_value, bound: (norm + T::one()) / c })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D<f64> {
        Grid1D::uniform(-20.0, 20.0, 161).unwrap()
    }

    #[test]
    fn empty_and_full_sets() {
        let g = grid();
        assert_eq!(capacity(&g, &IntervalSet::empty()).unwrap(), 0.0);
        let all = IntervalSet::single(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((capacity(&g, &all).unwrap() - 1.0).abs() < 1e-9);
        assert!((capacity_extremal(&g, &all).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_on_intervals() {
        let g = grid();
        for &(a, b) in &[(-2.0, 1.0), (-7.5, -3.25), (0.0, 0.0), (4.0, 19.0)] {
            let k = IntervalSet::single(a, b).unwrap();
            let lp = capacity(&g, &k).unwrap();
            let ex = capacity_extremal(&g, &k).unwrap();
            assert!((lp - ex).abs() < 1e-8, "[{a}, {b}]: {lp} vs {ex}");
        }
    }

    #[test]
    fn endpoint_outside_grid_is_rejected() {
        let g = grid();
        let k = IntervalSet::single(-30.0, -25.0).unwrap();
        assert!(matches!(capacity(&g, &k), Err(Error::Domain(_))));
    }

    #[test]
    fn capacity_is_monotone() {
        let g = grid();
        let mut prev = 0.0;
        for b in [-10.0, -5.0, -1.0, 0.0, 3.0] {
            let c = capacity_extremal(&g, &IntervalSet::single(-12.0, b).unwrap()).unwrap();
            assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn cln_on_constants() {
        let g = grid();
        let z = ToricPotential1D::reference(&g);
        let r = cln_bound_check(&z, 3.0, CapacityMethod::LinearProgram).unwrap();
        assert_eq!(r.cap_value, 0.0);
        assert!((r.bound - 1.0 / 3.0).abs() < 1e-12);
        let m2 = z.shifted(-2.0);
        let r = cln_bound_check(&m2, 1.0, CapacityMethod::LinearProgram).unwrap();
        assert!((r.cap_value - 1.0).abs() < 1e-9 && (r.bound - 3.0).abs() < 1e-9);
    }
}
