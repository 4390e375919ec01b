//! `MA(φ) = e^φ μ` for a probability measure `μ` on the toric line.
//!
//! Discretely the nodal masses of `f = f_ω + φ` must equal `e^{φ_i} μ_i`, with
//! tails of slopes 0 and 1. The map is strictly monotone, and Newton's method
//! on the tridiagonal system is damped by backtracking on the total
//! variation of the residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Grid1D, MAMeasure};
use crate::scalar::reference_profile;
use crate::toric1d::{nodal_masses, ToricPotential1D};

type Potential = ToricPotential1D<f64>;

pub const MAX_NEWTON_STEPS: usize = 200;
const MAX_HALVINGS: usize = 60;
/// Negative nodal masses down to this size are rounding and read as zero.
const ROUNDING: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaSolution {
    pub potential: Potential,
    /// `‖MA(φ) - e^φ μ‖` in total variation.
    pub residual: f64,
    pub iterations: usize,
}

fn check_measure(mu: &MAMeasure<f64>) -> Result<(Grid1D<f64>, Vec<f64>)> {
    if mu.pole_mass() != 0.0 {
        return Err(Error::Domain("the measure charges a pole".into()));
    }
    let grid = mu.line_grid()?.clone();
    let mut m = mu.nodal_masses()?;
    if m.iter().any(|&v| !(v >= -ROUNDING) || !v.is_finite()) {
        return Err(Error::Domain("the measure must be nonnegative".into()));
    }
    for v in &mut m {
        *v = v.max(0.0);
    }
    let total: f64 = m.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("total mass {total} is not 1")));
    }
    Ok((grid, m))
}

/// `F_i = m_i(f) - e^{φ_i} μ_i` and its total variation.
fn residual(grid: &Grid1D<f64>, f: &[f64], mu: &[f64]) -> (Vec<f64>, f64) {
    let n = f.len();
    let slopes: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / grid.spacing(i)).collect();
    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        let left = if i == 0 { 0.0 } else { slopes[i - 1] };
        let right = if i == n - 1 { 1.0 } else { slopes[i] };
        let phi = f[i] - reference_profile(grid.node(i));
        r.push(right - left - phi.exp() * mu[i]);
    }
    let tv = r.iter().map(|v| v.abs()).sum();
    (r, tv)
}

/// Solves `J x = b` for tridiagonal `J` (sub, diag, sup).
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut m = diag[0];
    if m == 0.0 {
        return None;
    }
    c[0] = if n > 1 { sup[0] / m } else { 0.0 };
    d[0] = b[0] / m;
    for i in 1..n {
        m = diag[i] - sub[i - 1] * c[i - 1];
        if m == 0.0 || !m.is_finite() {
            return None;
        }
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (b[i] - sub[i - 1] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// Solves with the start `φ = 0`.
pub fn solve_ma_equation(mu: &MAMeasure<f64>, tol: f64) -> Result<MaSolution> {
    let grid = mu.line_grid()?.clone();
    solve_ma_equation_from(mu, tol, &Potential::reference(&grid))
}

/// Solves starting from `initial`, which must live on the measure's grid.
pub fn solve_ma_equation_from(mu: &MAMeasure<f64>, tol: f64, initial: &Potential) -> Result<MaSolution> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let (grid, m) = check_measure(mu)?;
    if !initial.grid.same_as(&grid) || initial.is_minus_infinity {
        return Err(Error::DomainMismatch("initial potential must be finite on the measure's grid".into()));
    }
    let n = grid.len();
    let mut f = initial.f_values.clone();
    let (mut r, mut tv) = residual(&grid, &f, &m);
    let mut iterations = 0;
    while tv > tol {
        if iterations == MAX_NEWTON_STEPS {
            return Err(Error::Convergence { iterations, residual: tv });
        }
        iterations += 1;
        let inv_h: Vec<f64> = (0..n - 1).map(|i| 1.0 / grid.spacing(i)).collect();
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n - 1];
        let mut sup = vec![0.0; n - 1];
        for i in 0..n {
            let e = (f[i] - reference_profile(grid.node(i))).exp() * m[i];
            let mut d = -e;
            if i > 0 {
                d -= inv_h[i - 1];
                sub[i - 1] = inv_h[i - 1];
            }
            if i < n - 1 {
                d -= inv_h[i];
                sup[i] = inv_h[i];
            }
            diag[i] = d;
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = thomas(&sub, &diag, &sup, &rhs).ok_or(Error::Convergence { iterations, residual: tv })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = f.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            let (r2, tv2) = residual(&grid, &trial, &m);
            if tv2.is_finite() && tv2 < tv * (1.0 - 1e-4 * lambda) {
                f = trial;
                r = r2;
                tv = tv2;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            return Err(Error::Convergence { iterations, residual: tv });
        }
    }
    let potential = Potential::new(grid, f, 0.0, 1.0)?;
    Ok(MaSolution { potential, residual: tv, iterations })
}

/// `‖MA(φ) - e^φ μ‖` in total variation, `μ` on the grid of `φ`.
pub fn equation_residual(phi: &Potential, mu: &MAMeasure<f64>) -> Result<f64> {
    let m = mu.nodal_masses()?;
    if !mu.line_grid()?.same_as(&phi.grid) {
        return Err(Error::DomainMismatch("measure and potential on different grids".into()));
    }
    let ma = nodal_masses(phi)?;
    let v = phi.phi_values();
    let nodes: f64 = ma.iter().zip(&m).zip(&v).map(|((a, b), p)| (a - p.exp() * b).abs()).sum();
    let (l, r) = phi.lelong_numbers();
    Ok(nodes + l + r)
}

/// `MA(φ) <= e^φ μ + tol` in total variation of the positive part.
pub fn supersolution_excess(phi: &Potential, mu: &MAMeasure<f64>) -> Result<f64> {
    let m = mu.nodal_masses()?;
    let ma = nodal_masses(phi)?;
    let v = phi.phi_values();
    let (l, r) = phi.lelong_numbers();
    Ok(ma.iter().zip(&m).zip(&v).map(|((a, b), p)| (a - p.exp() * b).max(0.0)).sum::<f64>() + l + r)
}
