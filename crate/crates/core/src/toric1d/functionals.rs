use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{integrate, Atom, MAMeasure, Weight};
use crate::scalar::Scalar;

use super::ToricPotential1D;

/// Mass carried by each node: `m_i = s_i - s_{i-1}` where the slopes are
/// extended by the asymptotic slopes at both ends. Telescopes to
/// `slope_right - slope_left`.
pub fn nodal_masses<T: Scalar>(phi: &ToricPotential1D<T>) -> Result<Vec<T>> {
    if phi.is_minus_infinity {
        return Err(Error::UndefinedInput("Monge-Ampere measure of the -inf potential".into()));
    }
    let s = phi.extended_slopes();
    Ok(s.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Default mass above which a node is reported as an atom.
pub fn default_atom_threshold<T: Scalar>(phi: &ToricPotential1D<T>) -> T {
    phi.grid.max_spacing().sqrt()
}

/// `MA(φ)`: slope jumps and curvature of the profile, plus the Lelong
/// numbers at the poles. Total mass is one.
pub fn ma_measure<T: Scalar>(phi: &ToricPotential1D<T>) -> Result<MAMeasure<T>> {
    ma_measure_with_threshold(phi, default_atom_threshold(phi))
}

/// As [`ma_measure`], reporting nodes with mass above `atom_threshold` as atoms
/// and the rest as density. The split does not affect any integral.
pub fn ma_measure_with_threshold<T: Scalar>(phi: &ToricPotential1D<T>, atom_threshold: T) -> Result<MAMeasure<T>> {
    let m = nodal_masses(phi)?;
    let g = &phi.grid;
    let mut mu = MAMeasure::on_line(g.clone());
    for (i, &mi) in m.iter().enumerate() {
        let w = g.dual_width(i);
        if mi > atom_threshold {
            mu.atoms.push(Atom { location: g.node(i), mass: mi });
        } else {
            mu.density[i] = mi / w;
        }
    }
    let (a, b) = phi.lelong_numbers();
    mu.pole_masses = vec![a, b];
    Ok(mu)
}

/// `∫ v dMA(φ)` for nodal values `v` and pole values.
fn against<T: Scalar>(v: &[T], poles: [T; 2], phi: &ToricPotential1D<T>) -> Result<T> {
    let m = nodal_masses(phi)?;
    let mut acc: T = m.iter().zip(v).map(|(&m, &v)| m * v).sum();
    let (a, b) = phi.lelong_numbers();
    for (mass, val) in [(a, poles[0]), (b, poles[1])] {
        if mass > T::zero() {
            acc += mass * val;
        }
    }
    Ok(acc)
}

/// `E(φ) = ½ [∫ φ dMA(0) + ∫ φ dMA(φ)]`; `-∞` exactly when a pole carries mass
/// on which `φ = -∞`.
pub fn energy_e<T: Scalar>(phi: &ToricPotential1D<T>) -> T {
    if phi.is_minus_infinity {
        return T::neg_infinity();
    }
    let zero = ToricPotential1D::reference(&phi.grid);
    let v = phi.phi_values();
    let poles = phi.pole_values();
    let a = against(&v, poles, &zero).expect("reference is finite");
    let b = against(&v, poles, phi).expect("finite potential");
    T::lit(0.5) * (a + b)
}

fn require_finite_energy<T: Scalar>(p: &ToricPotential1D<T>, name: &str) -> Result<()> {
    if p.is_minus_infinity || !energy_e(p).is_finite() {
        return Err(Error::Domain(format!("{name} has infinite energy")));
    }
    Ok(())
}

/// `I(φ, ψ) = ∫ (φ - ψ) [MA(ψ) - MA(φ)]`.
///
/// For finite-energy inputs both asymptotic slopes agree, so summation by parts
/// turns the integral into the discrete Dirichlet form `Σ h_i (s^φ_i - s^ψ_i)²`,
/// which is evaluated directly and is nonnegative by construction.
pub fn quasi_distance_i<T: Scalar>(phi: &ToricPotential1D<T>, psi: &ToricPotential1D<T>) -> Result<T> {
    phi.check_same_grid(psi)?;
    require_finite_energy(phi, "first argument")?;
    require_finite_energy(psi, "second argument")?;
    let a = phi.slopes();
    let b = psi.slopes();
    let g = &phi.grid;
    Ok((0..a.len())
        .map(|i| {
            let d = a[i] - b[i];
            g.spacing(i) * d * d
        })
        .sum())
}

/// `I(φ, ψ)` evaluated literally as the difference of two integrals; kept as
/// the cross-check of [`quasi_distance_i`].
pub fn quasi_distance_i_literal<T: Scalar>(phi: &ToricPotential1D<T>, psi: &ToricPotential1D<T>) -> Result<T> {
    phi.check_same_grid(psi)?;
    require_finite_energy(phi, "first argument")?;
    require_finite_energy(psi, "second argument")?;
    let d: Vec<T> = phi.phi_values().iter().zip(psi.phi_values()).map(|(&a, b)| a - b).collect();
    let zero = [T::zero(); 2];
    Ok(integrate(&d, &ma_measure(psi)?, &zero)? - integrate(&d, &ma_measure(phi)?, &zero)?)
}

/// Membership in `E_χ` with the value of `∫ |χ(-|φ|)| dMA(φ)` as certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership<T> {
    pub member: bool,
    pub integral: T,
    /// Set when the affine tails approximate a profile that still bends, so the
    /// verdict concerns the truncated model.
    pub truncated_model: bool,
}

pub fn membership_e_chi<T: Scalar>(chi: &Weight<T>, phi: &ToricPotential1D<T>) -> Membership<T> {
    if phi.is_minus_infinity {
        return Membership { member: false, integral: T::infinity(), truncated_model: false };
    }
    let (a, b) = phi.lelong_numbers();
    let truncated_model = phi.truncated_tails();
    if a > T::zero() || b > T::zero() {
        return Membership { member: false, integral: T::infinity(), truncated_model };
    }
    let m = nodal_masses(phi).expect("finite potential");
    let integral: T = m.iter().zip(phi.phi_values()).map(|(&m, v)| m * chi.magnitude(v)).sum();
    Membership { member: integral.is_finite(), integral, truncated_model }
}

/// `I_χ(u, v) = ∫ |χ(-|u - v|)| (MA(u) + MA(v))`.
pub fn quasi_distance_i_chi<T: Scalar>(chi: &Weight<T>, u: &ToricPotential1D<T>, v: &ToricPotential1D<T>) -> Result<T> {
    u.check_same_grid(v)?;
    for (p, name) in [(u, "first argument"), (v, "second argument")] {
        if !membership_e_chi(chi, p).member {
            return Err(Error::Domain(format!("{name} is not in the weighted energy class")));
        }
    }
    let mu = nodal_masses(u)?;
    let mv = nodal_masses(v)?;
    Ok(u.phi_values()
        .iter()
        .zip(v.phi_values())
        .zip(mu.iter().zip(&mv))
        .map(|((&a, b), (&x, &y))| (x + y) * chi.magnitude(a - b))
        .sum())
}

/// `∫ (φ - ψ) dMA(ψ)` for `ψ <= φ`.
pub fn ordered_gap<T: Scalar>(phi: &ToricPotential1D<T>, psi: &ToricPotential1D<T>) -> Result<T> {
    phi.check_same_grid(psi)?;
    require_finite_energy(phi, "first argument")?;
    require_finite_energy(psi, "second argument")?;
    let d: Vec<T> = phi.phi_values().iter().zip(psi.phi_values()).map(|(&a, b)| a - b).collect();
    against(&d, [T::zero(); 2], psi)
}

/// `∫ |φ - ψ| dMA(0)`.
pub fn l1_distance<T: Scalar>(phi: &ToricPotential1D<T>, psi: &ToricPotential1D<T>) -> Result<T> {
    phi.check_same_grid(psi)?;
    if phi.is_minus_infinity || psi.is_minus_infinity {
        return Ok(T::infinity());
    }
    let zero = ToricPotential1D::reference(&phi.grid);
    let d: Vec<T> = phi.phi_values().iter().zip(psi.phi_values()).map(|(&a, b)| (a - b).abs()).collect();
    against(&d, [T::zero(); 2], &zero)
}

/// Both sides and the margin of the comparison
/// `∫ (w - v)² dMA(u) <= 2 [∫ (w - v)² dMA(0) + ∫ (w - v) dMA(v)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
}

pub fn blocki_inequality_check<T: Scalar>(
    u: &ToricPotential1D<T>,
    v: &ToricPotential1D<T>,
    w: &ToricPotential1D<T>,
) -> Result<InequalityCheck<T>> {
    u.check_same_grid(v)?;
    u.check_same_grid(w)?;
    let tol = T::envelope_tol();
    for (p, name) in [(u, "u"), (v, "v"), (w, "w")] {
        if !p.is_bounded() {
            return Err(Error::Domain(format!("{name} must be bounded")));
        }
    }
    if u.sup_phi() > tol || u.inf_phi() < -T::one() - tol {
        return Err(Error::Domain("u must satisfy -1 <= u <= 0".into()));
    }
    let vv = v.phi_values();
    let ww = w.phi_values();
    if vv.iter().zip(&ww).any(|(&a, &b)| a > b + tol) {
        return Err(Error::Domain("v must lie below w".into()));
    }
    let rho: Vec<T> = vv.iter().zip(&ww).map(|(&a, &b)| (b - a).max(T::zero())).collect();
    let rho2: Vec<T> = rho.iter().map(|&r| r * r).collect();
    let zero = ToricPotential1D::reference(&u.grid);
    let p0 = [T::zero(); 2];
    let lhs = against(&rho2, p0, u)?;
    let rhs = T::lit(2.0) * (against(&rho2, p0, &zero)? + against(&rho, p0, v)?);
    Ok(InequalityCheck { lhs, rhs, margin: rhs - lhs })
}
