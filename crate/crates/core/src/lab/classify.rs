//! The four convergence classifiers.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::family::{infty_deviation_bound, FamilyRecipe, Member, Realization, SequenceFamily, VERIFIABLE_STAGES};
use super::verdict::{combine, decide, rule, ConvergenceVerdict, EvidenceRow, MinorantReport, Mode, Status};
use crate::atoms_p1::{collapse_test, AtomPotential, SpherePoint, StageCover};
use crate::error::{Error, Result};
use crate::measure::{Grid1D, Weight};
use crate::toric1d::{
    capacity_extremal, capacity_extremal_of_nodes, l1_distance, membership_e_chi, nodal_masses, project_envelope,
    quasi_distance_i_chi, ObstacleFunction1D, ToricPotential1D,
};

type Potential = ToricPotential1D<f64>;

/// Azimuthal resolution of mesh quadratures on the sphere.
pub const MESH_ANGLES: usize = 128;

/// A minorant passes when the last tail doubling changes its weighted energy
/// by at most this fraction of the previous change.
pub const MINORANT_RATIO: f64 = 0.5;

fn check_j_max(j_max: usize) -> Result<()> {
    if j_max < rule::MIN_J_MAX {
        return Err(Error::Precondition(format!("j_max = {j_max} below {}", rule::MIN_J_MAX)));
    }
    Ok(())
}

fn rows(values: &[f64], delta: Option<f64>) -> Vec<EvidenceRow> {
    values.iter().enumerate().map(|(i, &value)| EvidenceRow { j: i + 1, delta, value }).collect()
}

/// The sphere point with coordinates `(t, θ)`.
pub fn point_at(t: f64, theta: f64) -> SpherePoint {
    let w = Complex64::from_polar(t.exp(), theta);
    SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), w).expect("nonzero homogeneous vector")
}

/// `∫ |a - φ| dMA(0)` on the product of the grid nodes (dual-cell masses of
/// `MA(0)`) and [`MESH_ANGLES`] azimuthal midpoints.
pub fn mesh_l1(a: &AtomPotential, phi: &Potential) -> Result<f64> {
    let w = nodal_masses(&Potential::reference(&phi.grid))?;
    let vals = phi.phi_values();
    let mut total = 0.0;
    for ((&t, &wi), &v) in phi.grid.nodes().iter().zip(&w).zip(&vals) {
        if wi == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for k in 0..MESH_ANGLES {
            let theta = 2.0 * PI * (k as f64 + 0.5) / MESH_ANGLES as f64;
            s += (a.eval(point_at(t, theta)) - v).abs();
        }
        total += wi * s / MESH_ANGLES as f64;
    }
    Ok(total)
}

pub fn classify_l1(seq: &SequenceFamily, j_max: usize) -> Result<ConvergenceVerdict> {
    check_j_max(j_max)?;
    let re = seq.realize(j_max)?;
    let mut mesh = false;
    let d = re
        .members
        .iter()
        .map(|m| match m {
            Member::Toric(p) => l1_distance(p, &re.limit),
            Member::Atoms(a) => {
                mesh = true;
                mesh_l1(a, &re.limit)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut v = ConvergenceVerdict::new(Mode::L1, decide(&d).status, rows(&d, None));
    if mesh {
        v.flag("mesh_approximate");
    }
    Ok(v)
}

/// Node mask of `{|φ_j - φ| >= δ}`.
fn deviation_mask(p: &Potential, limit: &Potential, delta: f64) -> Vec<bool> {
    p.phi_values().iter().zip(limit.phi_values()).map(|(&a, b)| (a - b).abs() >= delta).collect()
}

/// `Cap_ω({|φ_j - φ| >= δ})` for every member, and whether the value is only
/// an upper bound.
pub fn deviation_capacities(re: &Realization, delta: f64) -> Result<(Vec<f64>, bool, bool)> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("deviation level {delta} must be positive")));
    }
    let mut upper = false;
    let mut pole_adjacent = false;
    let mut caps = Vec::with_capacity(re.members.len());
    for (i, m) in re.members.iter().enumerate() {
        let c = match m {
            Member::Toric(p) => {
                let mask = deviation_mask(p, &re.limit, delta);
                if i + 1 == re.members.len() && (mask[0] || mask[mask.len() - 1]) {
                    pole_adjacent = true;
                }
                capacity_extremal_of_nodes(&re.grid, &mask)
            }
            Member::Atoms(_) => {
                upper = true;
                match infty_deviation_bound(i + 1, delta) {
                    Some(set) => capacity_extremal(&re.grid, &set)?,
                    None => 1.0,
                }
            }
        };
        caps.push(c);
    }
    Ok((caps, upper, pole_adjacent))
}

pub fn classify_capacity(seq: &SequenceFamily, j_max: usize, deltas: &[f64]) -> Result<ConvergenceVerdict> {
    check_j_max(j_max)?;
    if deltas.is_empty() {
        return Err(Error::Precondition("no deviation levels".into()));
    }
    let re = seq.realize(j_max)?;
    let mut evidence = Vec::new();
    let mut statuses = Vec::new();
    let mut flags = Vec::new();
    for &delta in deltas {
        let (caps, upper, pole) = deviation_capacities(&re, delta)?;
        let mut s = decide(&caps).status;
        if upper {
            flags.push("upper_bound".to_string());
            if s == Status::Diverges {
                s = Status::Inconclusive;
            }
        }
        if pole {
            flags.push(format!("pole_adjacent:delta={delta}"));
        }
        statuses.push(s);
        evidence.extend(rows(&caps, Some(delta)));
    }
    let mut v = ConvergenceVerdict::new(Mode::Capacity, combine(&statuses), evidence);
    for f in flags {
        v.flag(f);
    }
    Ok(v)
}

/// `φ_j^-` over the available tail.
#[derive(Clone, Debug)]
pub struct TailInfimum {
    pub j: usize,
    pub envelope: Potential,
    pub collapsed: bool,
    pub certificate: Option<String>,
}

/// `φ_j^- = P_ω(min_{j <= ℓ <= j_max} φ_ℓ)` for `j = 1..=upto`.
///
/// Toric families use the running node-wise minimum. The atom family uses the
/// Lelong-number collapse test on consecutive members. The covering family
/// uses the actual covering members at the points `(t_i, θ = 0)`; stages that
/// cannot be resolved in double precision contribute their floor `-1`, which
/// they attain by construction.
pub fn running_infima(seq: &SequenceFamily, re: &Realization, upto: usize) -> Result<Vec<TailInfimum>> {
    let n = re.members.len();
    let upto = upto.min(n);
    match &seq.recipe {
        FamilyRecipe::Extraction { .. } => (1..=upto).map(|j| cover_infimum(&re.grid, j, n)).collect(),
        _ if seq.is_toric() => {
            let toric: Vec<&Potential> = re.members.iter().map(|m| m.toric().expect("toric family")).collect();
            let mut h = ObstacleFunction1D::from_potential(toric[n - 1]);
            let mut out = Vec::with_capacity(upto);
            for j in (1..=n).rev() {
                if j < n {
                    h = h.min_with(&ObstacleFunction1D::from_potential(toric[j - 1]))?;
                }
                if j <= upto {
                    out.push(envelope_of(j, &h));
                }
            }
            out.reverse();
            Ok(out)
        }
        FamilyRecipe::InftyAtoms => (1..=upto)
            .map(|j| {
                let atoms: Vec<AtomPotential> = re.members[j - 1..]
                    .iter()
                    .take(2)
                    .map(|m| match m {
                        Member::Atoms(a) => a.clone(),
                        Member::Toric(_) => unreachable!("atom family"),
                    })
                    .collect();
                let r = collapse_test(&atoms)?;
                let certificate = r.collapsed.then(|| {
                    format!(
                        "members {} and {} need Lelong mass {:.3} > 1 at distinct points",
                        j,
                        j + 1,
                        r.required_mass
                    )
                });
                Ok(TailInfimum {
                    j,
                    envelope: Potential::minus_infinity(re.grid.clone()),
                    collapsed: r.collapsed,
                    certificate,
                })
            })
            .collect::<Result<Vec<_>>>()
            .and_then(|v| {
                if v.iter().all(|t| t.collapsed) {
                    Ok(v)
                } else {
                    Err(Error::Precondition("non-collapsing atom tail has no toric envelope".into()))
                }
            }),
        _ => Err(Error::Precondition(format!("no tail envelope for {}", seq.label()))),
    }
}

fn envelope_of(j: usize, h: &ObstacleFunction1D<f64>) -> TailInfimum {
    let envelope = project_envelope(h);
    let collapsed = envelope.is_minus_infinity;
    TailInfimum {
        j,
        certificate: collapsed.then(|| format!("envelope of the tail from {j} is identically -inf")),
        envelope,
        collapsed,
    }
}

fn cover_infimum(grid: &Grid1D<f64>, j: usize, n: usize) -> Result<TailInfimum> {
    let verifiable: Vec<u32> = (j..=n).map(|s| s as u32).filter(|&s| s <= VERIFIABLE_STAGES).collect();
    let covers = verifiable.iter().map(|&s| StageCover::new(s)).collect::<Result<Vec<_>>>()?;
    let phi: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| {
            let x = point_at(t, 0.0);
            covers.iter().map(|c| c.member_at(c.covering_center(x)).eval(x)).fold(-1.0f64, f64::min)
        })
        .collect();
    let h = ObstacleFunction1D::from_phi_values(grid, &phi, (0.0, 1.0))?;
    let envelope = project_envelope(&h);
    let certificate = if verifiable.is_empty() {
        format!("stages {j}..{n} lie below -1 on their covers by construction")
    } else {
        format!("covering members of stages {verifiable:?} evaluated at every node")
    };
    Ok(TailInfimum { j, envelope, collapsed: false, certificate: Some(certificate) })
}

/// `∫ |φ - ψ| dMA(0)` with `+∞` for a collapsed `ψ`.
fn gap(phi: &Potential, psi: &Potential) -> Result<f64> {
    if psi.is_minus_infinity {
        return Ok(f64::INFINITY);
    }
    l1_distance(phi, psi)
}

pub fn classify_quasi_monotone(seq: &SequenceFamily, j_max: usize) -> Result<ConvergenceVerdict> {
    check_j_max(j_max)?;
    let re = seq.realize(j_max)?;
    let upto = j_max / 2;
    let infima = match running_infima(seq, &re, upto) {
        Ok(v) => v,
        Err(Error::Precondition(msg)) => {
            let mut v = ConvergenceVerdict::new(Mode::QuasiMonotone, Status::Inconclusive, Vec::new());
            v.flag("unsupported_model");
            v.notes.push(msg);
            return Ok(v);
        }
        Err(e) => return Err(e),
    };
    let d = infima.iter().map(|t| gap(&re.limit, &t.envelope)).collect::<Result<Vec<_>>>()?;
    let mut v = ConvergenceVerdict::new(Mode::QuasiMonotone, decide(&d).status, rows(&d, None));
    if let Some(c) = infima.iter().find(|t| t.collapsed) {
        v.status = Status::Diverges;
        v.certificate = c.certificate.clone();
    } else if let Some(c) = infima.iter().find_map(|t| t.certificate.clone()) {
        v.certificate = Some(c);
    }
    let mut worst_drop = 0.0f64;
    for w in infima.windows(2) {
        let (a, b) = (&w[0].envelope, &w[1].envelope);
        if a.is_minus_infinity || b.is_minus_infinity {
            continue;
        }
        for (x, y) in a.phi_values().iter().zip(b.phi_values()) {
            worst_drop = worst_drop.max(x - y);
        }
    }
    if worst_drop > 1e-9 {
        v.flag("non_monotone_envelopes");
        v.notes.push(format!("envelopes decrease by up to {worst_drop:.3e} between consecutive j"));
    }
    if let Some(last) = infima.last() {
        if !last.envelope.is_minus_infinity {
            let sup = re
                .limit
                .phi_values()
                .iter()
                .zip(last.envelope.phi_values())
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            v.notes.push(format!("sup(φ - φ_j^-) at j = {}: {sup:.3e}", last.j));
        }
    }
    if seq.tail.closed_form_infimum {
        v.flag("certified");
    } else {
        v.flag("finite_tail_bias");
    }
    Ok(v)
}

pub fn classify_energy(chi: &Weight<f64>, seq: &SequenceFamily, j_max: usize) -> Result<ConvergenceVerdict> {
    check_j_max(j_max)?;
    let re = seq.realize(j_max)?;
    let mut v = ConvergenceVerdict::new(Mode::EnergyChi, Status::Inconclusive, Vec::new());
    v.notes.push(format!("weight {}", chi.label()));
    if !membership_e_chi(chi, &re.limit).member {
        v.flag("limit_not_member");
    }
    let mut d = Vec::with_capacity(j_max);
    for (i, m) in re.members.iter().enumerate() {
        let value = match m {
            Member::Toric(p) if membership_e_chi(chi, p).member && !v.has_flag("limit_not_member") => {
                quasi_distance_i_chi(chi, p, &re.limit)?
            }
            _ => {
                v.flag(format!("non_member:{}", i + 1));
                f64::NAN
            }
        };
        d.push(value);
    }
    v.evidence = rows(&d, None);
    let members_ok = d.iter().all(|x| !x.is_nan());
    if members_ok {
        v.status = decide(&d).status;
    }
    v.minorant = Some(search_minorant(chi, seq, &re)?);
    Ok(v)
}

/// Looks for a common `E_χ` minorant: `φ_1^-` over the tails
/// `J = j_max/4, j_max/2, j_max` must be members whose weighted energies
/// settle geometrically; a declared lower bound is accepted after checking it
/// node-wise.
pub fn search_minorant(chi: &Weight<f64>, seq: &SequenceFamily, re: &Realization) -> Result<MinorantReport> {
    let n = re.members.len();
    if let Some(lb) = &seq.tail.lower_bound {
        if let (Ok(psi), Some(members)) = (lb.realize(&re.grid), re.toric_members()) {
            let below =
                members.iter().all(|m| m.phi_values().iter().zip(psi.phi_values()).all(|(a, b)| *a >= b - 1e-12));
            let mem = membership_e_chi(chi, &psi);
            if below && mem.member {
                return Ok(MinorantReport { found: true, tails: vec![(n, mem.integral)], declared: true });
            }
        }
    }
    let mut tails = Vec::new();
    let mut ok = true;
    for big_j in [n / 4, n / 2, n] {
        let sub = SequenceFamily { recipe: seq.recipe.clone(), tail: seq.tail.clone() };
        let sub_re =
            Realization { grid: re.grid.clone(), members: re.members[..big_j].to_vec(), limit: re.limit.clone() };
        let first = match running_infima(&sub, &sub_re, 1) {
            Ok(v) => v.into_iter().next(),
            Err(_) => None,
        };
        match first {
            Some(t) if !t.collapsed => {
                let m = membership_e_chi(chi, &t.envelope);
                ok &= m.member;
                tails.push((big_j, m.integral));
            }
            _ => {
                ok = false;
                tails.push((big_j, f64::INFINITY));
            }
        }
    }
    if ok {
        let (a, b, c) = (tails[0].1, tails[1].1, tails[2].1);
        ok = (c - b).abs() <= MINORANT_RATIO * (b - a).abs() + rule::TOL;
    }
    Ok(MinorantReport { found: ok, tails, declared: false })
}
