//! Shared numeric substrate: grids in the log coordinate, measures on the
//! model spaces, weights and quadrature.
//!
//! Measures are normalized so that the reference form has unit volume. A
//! one-dimensional measure keeps its absolutely continuous part as a density
//! on the dual cells of the grid (the cell of node `i` is
//! `[t_i - h_{i-1}/2, t_i + h_i/2]`), so integrating a nodal function against
//! it is the midpoint rule and reproduces nodal sums exactly.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ratio of consecutive coarse steps in [`Grid1D::composite`].
pub const COARSE_GROWTH: f64 = 1.05;

/// Default grid extent and size.
pub const DEFAULT_T_MIN: f64 = -40.0;
pub const DEFAULT_T_MAX: f64 = 40.0;
pub const DEFAULT_NODES: usize = 8001;

/// Strictly increasing nodes of the log coordinate `t = log|z_1/z_0|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord<T>", into = "GridRecord<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Grid1D<T> {
    nodes: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct GridRecord<T> {
    t_min: T,
    t_max: T,
    n_nodes: usize,
    nodes: Vec<T>,
}

impl<T: Scalar> TryFrom<GridRecord<T>> for Grid1D<T> {
    type Error = Error;

    fn try_from(r: GridRecord<T>) -> Result<Self> {
        if r.nodes.len() != r.n_nodes {
            return Err(Error::InvalidGrid(format!("n_nodes = {} but {} nodes given", r.n_nodes, r.nodes.len())));
        }
        let g = Grid1D::from_nodes(r.nodes)?;
        if g.t_min() != r.t_min || g.t_max() != r.t_max {
            return Err(Error::InvalidGrid("t_min/t_max disagree with nodes".into()));
        }
        Ok(g)
    }
}

impl<T: Scalar> From<Grid1D<T>> for GridRecord<T> {
    fn from(g: Grid1D<T>) -> Self {
        GridRecord { t_min: g.t_min(), t_max: g.t_max(), n_nodes: g.len(), nodes: g.nodes }
    }
}

impl<T: Scalar> Grid1D<T> {
    pub fn uniform(t_min: T, t_max: T, n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n_nodes}")));
        }
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::InvalidGrid(format!("bad extent [{t_min}, {t_max}]")));
        }
        let h = (t_max - t_min) / T::from_usize(n_nodes - 1).unwrap();
        let mut nodes: Vec<T> = (0..n_nodes).map(|i| t_min + h * T::from_usize(i).unwrap()).collect();
        nodes[n_nodes - 1] = t_max;
        Ok(Grid1D { nodes })
    }

    /// The default grid: uniform on `[-40, 40]` with 8001 nodes.
    pub fn default_grid() -> Self {
        Self::uniform(T::lit(DEFAULT_T_MIN), T::lit(DEFAULT_T_MAX), DEFAULT_NODES).expect("default grid is valid")
    }

    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        Ok(Grid1D { nodes })
    }

    /// Uniform fine block on `[fine_min, fine_max]` with spacing `h`, extended by
    /// coarse nodes (first step 1, growing by [`COARSE_GROWTH`]) down to
    /// `coarse_min` and up to `coarse_max`, with
    /// the `extra` nodes merged in. Used for potentials whose kinks sit far out
    /// in the flat part of the reference profile.
    pub fn composite(fine_min: T, fine_max: T, h: T, coarse_min: T, coarse_max: T, extra: &[T]) -> Result<Self> {
        if !(h > T::zero()) || !(fine_min < fine_max) {
            return Err(Error::InvalidGrid("bad fine block".into()));
        }
        let n = ((fine_max - fine_min) / h).round().to_usize().unwrap_or(0) + 1;
        let mut nodes = Self::uniform(fine_min, fine_max, n.max(3))?.nodes;
        let growth = T::lit(COARSE_GROWTH);
        let mut step = T::one();
        let mut t = fine_min - step;
        while t > coarse_min {
            nodes.push(t);
            step *= growth;
            t -= step;
        }
        if coarse_min < fine_min {
            nodes.push(coarse_min);
        }
        let mut step = T::one();
        let mut t = fine_max + step;
        while t < coarse_max {
            nodes.push(t);
            step *= growth;
            t += step;
        }
        if coarse_max > fine_max {
            nodes.push(coarse_max);
        }
        nodes.extend(extra.iter().copied().filter(|x| x.is_finite()));
        Self::from_nodes(dedup_sorted(nodes, h * T::lit(1e-3)))
    }

    /// Grid with additional nodes merged in (near-duplicates within `merge_tol`
    /// of an existing node are dropped).
    pub fn with_extra_nodes(&self, extra: &[T], merge_tol: T) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        nodes.extend(extra.iter().copied().filter(|x| x.is_finite()));
        Self::from_nodes(dedup_sorted(nodes, merge_tol))
    }

    /// Each cell split into `factor` equal sub-cells.
    pub fn refined(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let mut nodes = Vec::with_capacity((self.len() - 1) * factor + 1);
        for w in self.nodes.windows(2) {
            let h = (w[1] - w[0]) / T::from_usize(factor).unwrap();
            for k in 0..factor {
                nodes.push(w[0] + h * T::from_usize(k).unwrap());
            }
        }
        nodes.push(self.t_max());
        Grid1D { nodes }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        self.nodes[i]
    }

    #[inline]
    pub fn t_min(&self) -> T {
        self.nodes[0]
    }

    #[inline]
    pub fn t_max(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Width of cell `i`, i.e. `t_{i+1} - t_i`.
    #[inline]
    pub fn spacing(&self, i: usize) -> T {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Width of the dual cell of node `i`.
    pub fn dual_width(&self, i: usize) -> T {
        let half = T::lit(0.5);
        let n = self.len();
        let left = if i == 0 { T::zero() } else { self.spacing(i - 1) * half };
        let right = if i + 1 == n { T::zero() } else { self.spacing(i) * half };
        left + right
    }

    pub fn max_spacing(&self) -> T {
        (0..self.len() - 1).map(|i| self.spacing(i)).fold(T::zero(), T::max)
    }

    /// Index of the node equal to `t` (within `tol`), if any.
    pub fn find_node(&self, t: T, tol: T) -> Option<usize> {
        let i = self.cell_of(t);
        [i, i + 1].into_iter().filter(|&k| k < self.len()).find(|&k| (self.nodes[k] - t).abs() <= tol)
    }

    /// Cell index `i` with `t_i <= t < t_{i+1}`, clamped to the valid range.
    pub fn cell_of(&self, t: T) -> usize {
        let n = self.len();
        if t <= self.nodes[0] {
            return 0;
        }
        if t >= self.nodes[n - 1] {
            return n - 2;
        }
        match self.nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    /// Linear interpolation of nodal values at `t` (constant extrapolation).
    pub fn interpolate(&self, values: &[T], t: T) -> T {
        let n = self.len();
        if t <= self.nodes[0] {
            return values[0];
        }
        if t >= self.nodes[n - 1] {
            return values[n - 1];
        }
        let i = self.cell_of(t);
        let w = (t - self.nodes[i]) / self.spacing(i);
        values[i] * (T::one() - w) + values[i + 1] * w
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

fn dedup_sorted<T: Scalar>(mut nodes: Vec<T>, tol: T) -> Vec<T> {
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<T> = Vec::with_capacity(nodes.len());
    for x in nodes {
        match out.last() {
            Some(&last) if x - last <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

/// A point mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom<T, P> {
    pub location: P,
    pub mass: T,
}

/// Monge-Ampere type measure on a model space: interior atoms, an absolutely
/// continuous part (1D only) and masses at the poles.
///
/// `P` is the location type: `T` on the model line, `[T; 2]` on the model plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize + Scalar, P: Serialize",
    deserialize = "T: Deserialize<'de> + Scalar, P: Deserialize<'de>"
))]
pub struct MAMeasure<T, P = T> {
    pub atoms: Vec<Atom<T, P>>,
    /// Density per dual cell of `grid`; empty when there is no continuous part.
    pub density: Vec<T>,
    pub pole_masses: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid1D<T>>,
}

impl<T: Scalar, P> MAMeasure<T, P> {
    pub fn atom_mass(&self) -> T {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn density_mass(&self) -> T {
        match &self.grid {
            Some(g) => self.density.iter().enumerate().map(|(i, &d)| d * g.dual_width(i)).sum(),
            None => T::zero(),
        }
    }

    pub fn pole_mass(&self) -> T {
        self.pole_masses.iter().copied().sum()
    }

    pub fn total_mass(&self) -> T {
        self.atom_mass() + self.density_mass() + self.pole_mass()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.mass >= T::zero())
            && self.density.iter().all(|&d| d >= T::zero())
            && self.pole_masses.iter().all(|&m| m >= T::zero())
    }

    pub fn scaled(&self, c: T) -> Self
    where
        P: Clone,
    {
        MAMeasure {
            atoms: self.atoms.iter().map(|a| Atom { location: a.location.clone(), mass: a.mass * c }).collect(),
            density: self.density.iter().map(|&d| d * c).collect(),
            pole_masses: self.pole_masses.iter().map(|&m| m * c).collect(),
            grid: self.grid.clone(),
        }
    }
}

impl<T: Scalar> MAMeasure<T, T> {
    /// Measure on the model line with the two poles `t = -inf`, `t = +inf`.
    pub fn on_line(grid: Grid1D<T>) -> Self {
        MAMeasure {
            atoms: Vec::new(),
            density: vec![T::zero(); grid.len()],
            pole_masses: vec![T::zero(); 2],
            grid: Some(grid),
        }
    }

    pub fn line_grid(&self) -> Result<&Grid1D<T>> {
        self.grid.as_ref().ok_or_else(|| Error::DomainMismatch("measure carries no grid".into()))
    }

    /// Total mass carried by each node once atoms are snapped to their cell's
    /// nearest node and the density is multiplied out. Pole masses excluded.
    pub fn nodal_masses(&self) -> Result<Vec<T>> {
        let g = self.line_grid()?;
        let mut m: Vec<T> = if self.density.is_empty() {
            vec![T::zero(); g.len()]
        } else {
            if self.density.len() != g.len() {
                return Err(Error::DomainMismatch("density length differs from grid".into()));
            }
            self.density.iter().enumerate().map(|(i, &d)| d * g.dual_width(i)).collect()
        };
        for a in &self.atoms {
            let i = g.cell_of(a.location);
            let w = ((a.location - g.node(i)) / g.spacing(i)).max(T::zero()).min(T::one());
            // split linearly so that integrals of linear functions are preserved
            m[i] += a.mass * (T::one() - w);
            m[i + 1] += a.mass * w;
        }
        Ok(m)
    }

    /// Concatenation (sum) of two measures on the same grid.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        let g = self.line_grid()?;
        if !g.same_as(other.line_grid()?) {
            return Err(Error::DomainMismatch("measures live on different grids".into()));
        }
        let n = g.len();
        let pad = |d: &Vec<T>| if d.is_empty() { vec![T::zero(); n] } else { d.clone() };
        let (a, b) = (pad(&self.density), pad(&other.density));
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let poles = self.pole_masses.iter().zip(other.pole_masses.iter()).map(|(&x, &y)| x + y).collect();
        Ok(MAMeasure {
            atoms,
            density: a.iter().zip(b.iter()).map(|(&x, &y)| x + y).collect(),
            pole_masses: poles,
            grid: self.grid.clone(),
        })
    }
}

/// `∫ f dμ` for a nodal function `f` on the measure's grid.
///
/// Atoms are evaluated by linear interpolation. Pole values may be `-inf`; a
/// pole with positive mass and value `-inf` makes the integral `-inf`, a pole
/// with zero mass contributes nothing whatever its value.
pub fn integrate<T: Scalar>(f: &[T], mu: &MAMeasure<T>, pole_values: &[T]) -> Result<T> {
    let g = mu.line_grid()?;
    if f.len() != g.len() {
        return Err(Error::DomainMismatch(format!("function has {} values, grid has {} nodes", f.len(), g.len())));
    }
    if pole_values.len() != mu.pole_masses.len() {
        return Err(Error::DomainMismatch(format!(
            "{} pole values for {} poles",
            pole_values.len(),
            mu.pole_masses.len()
        )));
    }
    let mut acc = T::zero();
    if !mu.density.is_empty() {
        if mu.density.len() != g.len() {
            return Err(Error::DomainMismatch("density length differs from grid".into()));
        }
        for (i, (&d, &v)) in mu.density.iter().zip(f.iter()).enumerate() {
            if d != T::zero() {
                acc += d * g.dual_width(i) * v;
            }
        }
    }
    for a in &mu.atoms {
        if a.mass != T::zero() {
            acc += a.mass * g.interpolate(f, a.location);
        }
    }
    for (&m, &v) in mu.pole_masses.iter().zip(pole_values.iter()) {
        if m > T::zero() {
            acc += m * v;
        }
    }
    Ok(acc)
}

/// Shape of a weight, read off its second differences on `t <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightShape {
    Convex,
    ConcavePolynomialGrowth,
}

/// Serializable description of a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `χ(t) = -(-t)^p`.
    Power { p: f64 },
    /// `χ(t) = -log(1 - t)`: slower than every power.
    Log,
}

/// Nondecreasing weight `χ` on `(-inf, 0]` with `χ(0) = 0` and `χ(-inf) = -inf`.
#[derive(Clone)]
pub struct Weight<T> {
    eval: Arc<dyn Fn(T) -> T + Send + Sync>,
    shape: WeightShape,
    exponent: Option<T>,
    label: String,
}

impl<T: Scalar> fmt::Debug for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("label", &self.label)
            .field("shape", &self.shape)
            .field("exponent", &self.exponent)
            .finish()
    }
}

/// Points where weight axioms are sampled.
const PROBES: [f64; 13] = [-1e6, -1e4, -1e3, -100.0, -30.0, -10.0, -3.0, -1.0, -0.3, -0.1, -0.03, -0.01, 0.0];

impl<T: Scalar> Weight<T> {
    pub fn power(p: T) -> Result<Self> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::InvalidWeight(format!("exponent must be positive, got {p}")));
        }
        Self::custom(format!("power({p})"), move |s: T| -(-s).powf(p)).map(|w| Weight { exponent: Some(p), ..w })
    }

    pub fn identity() -> Self {
        Self::power(T::one()).expect("p = 1 is valid")
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        match *spec {
            WeightSpec::Power { p } => Self::power(T::lit(p)),
            WeightSpec::Log => Self::custom("log".into(), |s: T| -(-s).ln_1p()),
        }
    }

    /// Wraps an arbitrary evaluator after checking the weight axioms on a
    /// fixed probe set and tagging its shape from sampled second differences.
    pub fn custom<F>(label: String, f: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        let xs: Vec<T> = PROBES.iter().map(|&x| T::lit(x)).collect();
        let ys: Vec<T> = xs.iter().map(|&x| f(x)).collect();
        if ys.iter().any(|y| y.is_nan()) {
            return Err(Error::InvalidWeight(format!("{label}: NaN on probe set")));
        }
        if ys[ys.len() - 1] != T::zero() {
            return Err(Error::InvalidWeight(format!("{label}: χ(0) must vanish")));
        }
        if ys.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidWeight(format!("{label}: not increasing on probe set")));
        }
        if !(ys[0] < ys[1] && ys[0] < -T::one()) {
            return Err(Error::InvalidWeight(format!("{label}: no decay toward -inf")));
        }
        // divided second differences on the nonuniform probe set
        let mut convex = true;
        let mut concave = true;
        for k in 1..xs.len() - 1 {
            let l = (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1]);
            let r = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
            let scale = l.abs().max(r.abs()).max(T::one());
            let tol = T::lit(1e-9) * scale;
            if r < l - tol {
                convex = false;
            }
            if r > l + tol {
                concave = false;
            }
        }
        let shape = if convex {
            WeightShape::Convex
        } else if concave {
            WeightShape::ConcavePolynomialGrowth
        } else {
            return Err(Error::InvalidWeight(format!("{label}: neither convex nor concave")));
        };
        Ok(Weight { eval: Arc::new(f), shape, exponent: None, label })
    }

    pub fn eval(&self, s: T) -> Result<T> {
        if s > T::zero() || s.is_nan() {
            return Err(Error::Domain(format!("weight evaluated at positive argument {s}")));
        }
        Ok((self.eval)(s))
    }

    /// `|χ(-|x|)|` for any real `x`; infinite inputs map to `+inf`.
    pub fn magnitude(&self, x: T) -> T {
        if x.is_infinite() {
            return T::infinity();
        }
        (self.eval)(-x.abs()).abs()
    }

    pub fn shape(&self) -> WeightShape {
        self.shape
    }

    pub fn exponent(&self) -> Option<T> {
        self.exponent
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_atom(g: &Grid1D<f64>, t: f64) -> MAMeasure<f64> {
        let mut mu = MAMeasure::on_line(g.clone());
        mu.atoms.push(Atom { location: t, mass: 1.0 });
        mu
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid1D::<f64>::uniform(0.0, 1.0, 2).is_err());
        assert!(Grid1D::<f64>::uniform(1.0, 1.0, 5).is_err());
        assert!(Grid1D::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        let g = Grid1D::<f64>::default_grid();
        assert_eq!(g.len(), 8001);
        assert_eq!(g.t_min(), -40.0);
        assert_eq!(g.t_max(), 40.0);
    }

    #[test]
    fn dual_widths_partition_the_extent() {
        let g = Grid1D::from_nodes(vec![-2.0, -1.5, 0.0, 0.1, 3.0]).unwrap();
        let total: f64 = (0..g.len()).map(|i| g.dual_width(i)).sum();
        assert!((total - 5.0).abs() < 1e-15);
    }

    #[test]
    fn integrate_constant_one_gives_total_mass() {
        let g = Grid1D::<f64>::uniform(-5.0, 5.0, 101).unwrap();
        let mut mu = MAMeasure::on_line(g.clone());
        for i in 0..g.len() {
            mu.density[i] = 0.25 / 10.0;
        }
        mu.atoms.push(Atom { location: 0.37, mass: 0.5 });
        mu.pole_masses = vec![0.1, 0.15];
        let one = vec![1.0; g.len()];
        let v = integrate(&one, &mu, &[1.0, 1.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        let zero = vec![0.0; g.len()];
        assert_eq!(integrate(&zero, &mu, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn integrate_dirac_evaluates_linear_function() {
        let g = Grid1D::<f64>::uniform(-2.0, 2.0, 41).unwrap();
        let f: Vec<f64> = g.nodes().to_vec();
        let v = integrate(&f, &unit_atom(&g, 0.5), &[0.0, 0.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn integrate_handles_infinite_poles() {
        let g = Grid1D::<f64>::uniform(-2.0, 2.0, 5).unwrap();
        let mut mu = MAMeasure::on_line(g.clone());
        mu.pole_masses = vec![0.0, 1.0];
        let f = vec![0.0; 5];
        assert_eq!(integrate(&f, &mu, &[f64::NEG_INFINITY, 3.0]).unwrap(), 3.0);
        mu.pole_masses = vec![0.5, 0.5];
        assert_eq!(integrate(&f, &mu, &[f64::NEG_INFINITY, 3.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn integrate_rejects_mismatched_grid() {
        let g = Grid1D::<f64>::uniform(-2.0, 2.0, 5).unwrap();
        let mu = MAMeasure::on_line(g);
        assert!(matches!(integrate(&[0.0; 4], &mu, &[0.0, 0.0]), Err(Error::DomainMismatch(_))));
        assert!(matches!(integrate(&[0.0; 5], &mu, &[0.0]), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn power_weight_values() {
        let w1 = Weight::<f64>::power(1.0).unwrap();
        let w2 = Weight::<f64>::power(2.0).unwrap();
        let wh = Weight::<f64>::power(0.5).unwrap();
        assert_eq!(w1.eval(-2.0).unwrap(), -2.0);
        assert_eq!(w2.eval(-3.0).unwrap(), -9.0);
        assert_eq!(wh.eval(0.0).unwrap(), 0.0);
        assert!(matches!(w1.eval(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn weight_shapes_follow_second_differences() {
        assert_eq!(Weight::<f64>::power(0.5).unwrap().shape(), WeightShape::Convex);
        assert_eq!(Weight::<f64>::power(1.0).unwrap().shape(), WeightShape::Convex);
        assert_eq!(Weight::<f64>::power(2.0).unwrap().shape(), WeightShape::ConcavePolynomialGrowth);
        assert_eq!(Weight::<f64>::from_spec(&WeightSpec::Log).unwrap().shape(), WeightShape::Convex);
    }

    #[test]
    fn weight_axioms_are_checked() {
        assert!(Weight::<f64>::power(0.0).is_err());
        assert!(Weight::<f64>::custom("shifted".into(), |s| s - 1.0).is_err());
        assert!(Weight::<f64>::custom("bounded".into(), |s: f64| s.max(-0.5)).is_err());
        assert!(Weight::<f64>::custom("wiggly".into(), |s: f64| s + 0.4 * s.sin()).is_err());
    }
}
