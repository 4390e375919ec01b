use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Grid1D;
use crate::scalar::{reference_profile, Scalar};

/// S¹-invariant potential on the sphere, stored as the convex profile
/// `f = f_ω + φ` of `t = log|z_1/z_0|` sampled on a grid.
///
/// Beyond the grid `f` is affine with slope `slope_left` (as `t → -∞`) and
/// `slope_right` (as `t → +∞`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ToricPotential1D<T> {
    pub grid: Grid1D<T>,
    pub f_values: Vec<T>,
    pub slope_left: T,
    pub slope_right: T,
    #[serde(default)]
    pub is_minus_infinity: bool,
}

impl<T: Scalar> ToricPotential1D<T> {
    /// Validating constructor.
    pub fn new(grid: Grid1D<T>, f_values: Vec<T>, slope_left: T, slope_right: T) -> Result<Self> {
        let p = ToricPotential1D { grid, f_values, slope_left, slope_right, is_minus_infinity: false };
        p.validate()?;
        Ok(p)
    }

    /// Builds without checking; used by operations that produce admissible
    /// profiles by construction.
    pub(crate) fn from_parts(grid: Grid1D<T>, f_values: Vec<T>, slope_left: T, slope_right: T) -> Self {
        ToricPotential1D { grid, f_values, slope_left, slope_right, is_minus_infinity: false }
    }

    /// The function identically `-∞`.
    pub fn minus_infinity(grid: Grid1D<T>) -> Self {
        let n = grid.len();
        ToricPotential1D {
            grid,
            f_values: vec![T::neg_infinity(); n],
            slope_left: T::zero(),
            slope_right: T::one(),
            is_minus_infinity: true,
        }
    }

    /// `φ = 0`.
    pub fn reference(grid: &Grid1D<T>) -> Self {
        let f = grid.nodes().iter().map(|&t| reference_profile(t)).collect();
        Self::from_parts(grid.clone(), f, T::zero(), T::one())
    }

    /// `φ ≡ c`.
    pub fn constant(grid: &Grid1D<T>, c: T) -> Self {
        Self::reference(grid).shifted(c)
    }

    /// Samples a profile `f` given in closed form.
    pub fn from_profile<F: Fn(T) -> T>(grid: &Grid1D<T>, f: F, slope_left: T, slope_right: T) -> Result<Self> {
        let vals = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid.clone(), vals, slope_left, slope_right)
    }

    /// Samples `φ` given in closed form; the profile is `f_ω + φ`.
    pub fn from_phi<F: Fn(T) -> T>(grid: &Grid1D<T>, phi: F, slope_left: T, slope_right: T) -> Result<Self> {
        Self::from_profile(grid, |t| reference_profile(t) + phi(t), slope_left, slope_right)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::envelope_tol();
        let n = self.grid.len();
        if self.is_minus_infinity {
            return Ok(());
        }
        if self.f_values.len() != n {
            return Err(Error::InvalidPotential(format!("{} values for {} nodes", self.f_values.len(), n)));
        }
        if self.f_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite profile value".into()));
        }
        let (sl, sr) = (self.slope_left, self.slope_right);
        if !(sl >= T::zero() && sl <= sr && sr <= T::one()) {
            return Err(Error::InvalidPotential(format!(
                "asymptotic slopes ({sl}, {sr}) must satisfy 0 <= left <= right <= 1"
            )));
        }
        let s = self.slopes();
        let scale = |v: T| tol * (T::one() + v.abs());
        if s[0] < sl - scale(s[0]) {
            return Err(Error::InvalidPotential(format!("first slope {} below asymptotic left slope {sl}", s[0])));
        }
        if s[s.len() - 1] > sr + scale(s[s.len() - 1]) {
            return Err(Error::InvalidPotential(format!(
                "last slope {} above asymptotic right slope {sr}",
                s[s.len() - 1]
            )));
        }
        for (i, w) in s.windows(2).enumerate() {
            // slope differences scaled by the local spacing give a second difference
            let h = self.grid.spacing(i).min(self.grid.spacing(i + 1));
            if (w[1] - w[0]) * h < -scale(self.f_values[i + 1]) {
                return Err(Error::InvalidPotential(format!("not convex at node {}", i + 1)));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.f_values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.f_values.is_empty()
    }

    /// Cell slopes `(f_{i+1} - f_i) / (t_{i+1} - t_i)`.
    pub fn slopes(&self) -> Vec<T> {
        let t = self.grid.nodes();
        self.f_values.windows(2).zip(t.windows(2)).map(|(f, t)| (f[1] - f[0]) / (t[1] - t[0])).collect()
    }

    /// Cell slopes with the asymptotic slopes appended at both ends.
    pub fn extended_slopes(&self) -> Vec<T> {
        let mut s = Vec::with_capacity(self.len() + 1);
        s.push(self.slope_left);
        s.extend(self.slopes());
        s.push(self.slope_right);
        s
    }

    /// Nodal values of `φ = f - f_ω`.
    pub fn phi_values(&self) -> Vec<T> {
        self.f_values.iter().zip(self.grid.nodes()).map(|(&f, &t)| f - reference_profile(t)).collect()
    }

    /// Limits of `φ` at the two poles (`-∞` where the Lelong number is positive).
    pub fn pole_values(&self) -> [T; 2] {
        if self.is_minus_infinity {
            return [T::neg_infinity(); 2];
        }
        let n = self.len();
        let left = if self.slope_left > T::zero() { T::neg_infinity() } else { self.f_values[0] };
        let right =
            if self.slope_right < T::one() { T::neg_infinity() } else { self.f_values[n - 1] - self.grid.t_max() };
        [left, right]
    }

    /// `(ν(pole_0), ν(pole_∞)) = (slope_left, 1 - slope_right)`.
    pub fn lelong_numbers(&self) -> (T, T) {
        (self.slope_left, T::one() - self.slope_right)
    }

    /// Supremum of `φ` over nodes and pole limits.
    pub fn sup_phi(&self) -> T {
        if self.is_minus_infinity {
            return T::neg_infinity();
        }
        let [a, b] = self.pole_values();
        self.phi_values().into_iter().fold(a.max(b), T::max)
    }

    /// Infimum of `φ` over nodes and pole limits.
    pub fn inf_phi(&self) -> T {
        if self.is_minus_infinity {
            return T::neg_infinity();
        }
        let [a, b] = self.pole_values();
        self.phi_values().into_iter().fold(a.min(b), T::min)
    }

    /// True when both Lelong numbers vanish and all values are finite.
    pub fn is_bounded(&self) -> bool {
        !self.is_minus_infinity && self.slope_left == T::zero() && self.slope_right == T::one()
    }

    /// True when the profile still bends near the grid ends, so the affine tail
    /// model is an approximation of a potential defined on the whole line.
    pub fn truncated_tails(&self) -> bool {
        if self.is_minus_infinity {
            return false;
        }
        let s = self.slopes();
        let tol = T::lit(1e-8);
        (s[0] - self.slope_left).abs() > tol || (self.slope_right - s[s.len() - 1]).abs() > tol
    }

    /// Profile value at an arbitrary `t`, using the affine tails off the grid.
    pub fn eval_f(&self, t: T) -> T {
        if self.is_minus_infinity {
            return T::neg_infinity();
        }
        let g = &self.grid;
        if t < g.t_min() {
            return self.f_values[0] + self.slope_left * (t - g.t_min());
        }
        if t > g.t_max() {
            return self.f_values[self.len() - 1] + self.slope_right * (t - g.t_max());
        }
        g.interpolate(&self.f_values, t)
    }

    pub fn eval_phi(&self, t: T) -> T {
        if t == T::neg_infinity() {
            return self.pole_values()[0];
        }
        if t == T::infinity() {
            return self.pole_values()[1];
        }
        self.eval_f(t) - reference_profile(t)
    }

    /// `φ + c`.
    pub fn shifted(&self, c: T) -> Self {
        let mut p = self.clone();
        if !p.is_minus_infinity {
            p.f_values.iter_mut().for_each(|v| *v += c);
        }
        p
    }

    /// `Σ w_k φ_k` with `w_k >= 0`, `Σ w_k <= 1`; the remaining weight goes to
    /// `φ = 0`, which keeps the result admissible.
    pub fn combination(terms: &[(T, &Self)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidPotential("empty combination".into()))?.1;
        let total: T = terms.iter().map(|(w, _)| *w).sum();
        if terms.iter().any(|(w, _)| *w < T::zero()) || total > T::one() + T::lit(1e-12) {
            return Err(Error::InvalidPotential("combination weights must be nonnegative with sum at most one".into()));
        }
        for (_, p) in terms {
            if !p.grid.same_as(&first.grid) {
                return Err(Error::DomainMismatch("combination over different grids".into()));
            }
        }
        let rest = (T::one() - total).max(T::zero());
        let mut out = Self::reference(&first.grid);
        out.f_values.iter_mut().for_each(|v| *v *= rest);
        out.slope_left = T::zero();
        out.slope_right = rest;
        for (w, p) in terms {
            if *w == T::zero() {
                continue;
            }
            if p.is_minus_infinity {
                return Ok(Self::minus_infinity(first.grid.clone()));
            }
            for (o, &v) in out.f_values.iter_mut().zip(&p.f_values) {
                *o += *w * v;
            }
            out.slope_left += *w * p.slope_left;
            out.slope_right += *w * p.slope_right;
        }
        out.slope_right = out.slope_right.min(T::one());
        Ok(out)
    }

    /// `max(φ, ψ)` node-wise.
    pub fn max_with(&self, other: &Self) -> Result<Self> {
        super::upper_envelope(&[self.clone(), other.clone()], 0)
    }

    /// `max(φ, c)` node-wise; tails become those of a bounded potential.
    pub fn floored(&self, c: T) -> Self {
        let floor = Self::constant(&self.grid, c);
        if self.is_minus_infinity {
            return floor;
        }
        let f = self.f_values.iter().zip(&floor.f_values).map(|(&a, &b)| a.max(b)).collect();
        Self::from_parts(self.grid.clone(), f, T::zero(), T::one())
    }

    /// Same potential resampled on another grid through its profile.
    pub fn resampled(&self, grid: &Grid1D<T>) -> Self {
        if self.is_minus_infinity {
            return Self::minus_infinity(grid.clone());
        }
        let f = grid.nodes().iter().map(|&t| self.eval_f(t)).collect();
        Self::from_parts(grid.clone(), f, self.slope_left, self.slope_right)
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::DomainMismatch("potentials live on different grids".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D<f64> {
        Grid1D::uniform(-10.0, 10.0, 201).unwrap()
    }

    #[test]
    fn reference_is_admissible() {
        let p = ToricPotential1D::reference(&grid());
        p.validate().unwrap();
        assert!(p.phi_values().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(p.lelong_numbers(), (0.0, 0.0));
        assert!(p.is_bounded());
    }

    #[test]
    fn constructor_rejects_violations() {
        let g = grid();
        assert!(ToricPotential1D::from_profile(&g, |t| -t.abs(), 0.0, 1.0).is_err());
        assert!(ToricPotential1D::from_profile(&g, |t| 2.0 * t.max(0.0), 0.0, 1.0).is_err());
        assert!(ToricPotential1D::from_profile(&g, |t| t, 0.5, 1.0).is_ok());
        assert!(ToricPotential1D::from_profile(&g, |t| t, 0.0, 1.2).is_err());
    }

    #[test]
    fn lelong_numbers_from_slopes() {
        let g = grid();
        let p = ToricPotential1D::from_profile(&g, |t| t, 1.0, 1.0).unwrap();
        assert_eq!(p.lelong_numbers(), (1.0, 0.0));
        let q = ToricPotential1D::from_profile(&g, |t| (0.5 * t).max(0.0), 0.0, 0.5).unwrap();
        assert_eq!(q.lelong_numbers(), (0.0, 0.5));
        assert_eq!(q.pole_values()[1], f64::NEG_INFINITY);
    }

    #[test]
    fn combination_keeps_slope_bounds() {
        let g = grid();
        let a = ToricPotential1D::from_profile(&g, |t| t, 1.0, 1.0).unwrap();
        let b = ToricPotential1D::constant(&g, -2.0);
        let c = ToricPotential1D::combination(&[(0.25, &a), (0.5, &b)]).unwrap();
        c.validate().unwrap();
        assert!((c.slope_left - 0.25).abs() < 1e-15);
        assert!((c.slope_right - 1.0).abs() < 1e-15);
        let phi = c.phi_values();
        let pa = a.phi_values();
        for i in 0..g.len() {
            assert!((phi[i] - (0.25 * pa[i] - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = Grid1D::uniform(-3.0, 3.0, 7).unwrap();
        let p = ToricPotential1D::from_phi(&g, |t: f64| -0.1 * t.abs(), 0.0, 1.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: ToricPotential1D<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
