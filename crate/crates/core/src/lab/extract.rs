//! Executable extractions: quasi-monotone minorants of a capacity-convergent
//! bounded sequence, and the increasing minorants of a sequence with summable
//! `I_χ` increments.

use serde::{Deserialize, Serialize};

use super::family::SequenceFamily;
use crate::error::{Error, Result};
use crate::measure::{Grid1D, Weight};
use crate::toric1d::{
    capacity_extremal_of_nodes, l1_distance, membership_e_chi, project_envelope, quasi_distance_i_chi,
    relative_extremal, Membership, ObstacleFunction1D, ToricPotential1D,
};

type Potential = ToricPotential1D<f64>;

/// Node-wise tolerance for the monotonicity and ordering checks.
pub const ORDER_TOL: f64 = 1e-8;
/// Fewest selected indices for a successful extraction.
pub const MIN_SELECTED: usize = 3;
/// Safety factor on the fitted comparability constant.
pub const KAPPA_SLACK: f64 = 2.0;

/// `δ_k = 2^{-k-1} / (1 - 2^{-k})`.
pub fn extraction_delta(k: usize) -> f64 {
    let p = (-(k as f64)).exp2();
    0.5 * p / (1.0 - p)
}

/// `ε_k = 2^{-2(k+1)}`, so that `A_k² ε_k = 1`.
pub fn extraction_eps(k: usize) -> f64 {
    (-2.0 * (k as f64 + 1.0)).exp2()
}

/// `A_k = 2^{k+1}`.
pub fn extraction_height(k: usize) -> f64 {
    (k as f64 + 1.0).exp2()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuasiMonotoneExtraction {
    /// Selected indices `j_1 < j_2 < ...` into the original sequence.
    pub indices: Vec<usize>,
    /// `Cap({|φ_{j_k} - φ_{j_{k+1}}| >= δ_k})` for consecutive selections.
    pub pair_capacities: Vec<f64>,
    /// `ψ_k = max((1 - 2^{-k}) φ_{j_k} + H_k - 2^{-k+1}, -1)`.
    pub minorants: Vec<Potential>,
    /// `∫ (φ - ψ_k) dMA(0)`.
    pub gaps: Vec<f64>,
    /// Largest `ψ_k - φ_{j_k}` over nodes.
    pub worst_excess: f64,
    /// Largest `ψ_k - ψ_{k+1}` over nodes.
    pub worst_drop: f64,
}

impl QuasiMonotoneExtraction {
    pub fn verified(&self) -> bool {
        self.worst_excess <= ORDER_TOL && self.worst_drop <= ORDER_TOL
    }
}

fn toric_members(seq: &SequenceFamily, j_max: usize) -> Result<(Grid1D<f64>, Vec<Potential>, Potential)> {
    let re = seq.realize(j_max)?;
    let members = re.toric_members().ok_or_else(|| Error::Precondition("extraction needs toric members".into()))?;
    Ok((re.grid, members, re.limit))
}

fn cap_between(grid: &Grid1D<f64>, a: &[f64], b: &[f64], delta: f64) -> f64 {
    let mask: Vec<bool> = a.iter().zip(b).map(|(x, y)| (x - y).abs() >= delta).collect();
    capacity_extremal_of_nodes(grid, &mask)
}

/// Extracts a quasi-monotone subsequence with explicit minorants.
///
/// Requires `-1 <= φ_j <= 0`. Index `j_k` is the first index after `j_{k-1}`
/// whose deviation from the limit at level `δ_k / 2` has capacity at most
/// `(ε_k - ε_{k+1}) / 2` and which satisfies the pair condition with
/// `j_{k-1}`; by subadditivity this keeps every later pair condition
/// reachable for a capacity-convergent sequence.
pub fn extract_quasi_monotone(seq: &SequenceFamily, j_max: usize) -> Result<QuasiMonotoneExtraction> {
    let (grid, members, limit) = toric_members(seq, j_max)?;
    for (i, m) in members.iter().enumerate() {
        let bounded = m.is_bounded() && m.phi_values().iter().all(|&v| (-1.0 - 1e-12..=1e-12).contains(&v));
        if !bounded {
            return Err(Error::Precondition(format!("member {} is not between -1 and 0; rescale first", i + 1)));
        }
    }
    let values: Vec<Vec<f64>> = members.iter().map(|m| m.phi_values()).collect();
    let lim = limit.phi_values();
    let budget = |k: usize| extraction_eps(k) - extraction_eps(k + 1);

    let mut indices: Vec<usize> = Vec::new();
    let mut pair_capacities = Vec::new();
    let mut next = 0usize;
    loop {
        let k = indices.len() + 1;
        let found = (next..members.len()).find_map(|j| {
            let close = cap_between(&grid, &values[j], &lim, extraction_delta(k) / 2.0) <= budget(k) / 2.0;
            if !close {
                return None;
            }
            match indices.last() {
                None => Some((j, None)),
                Some(&prev) => {
                    let c = cap_between(&grid, &values[prev], &values[j], extraction_delta(k - 1));
                    (c <= budget(k - 1)).then_some((j, Some(c)))
                }
            }
        });
        match found {
            Some((j, c)) => {
                indices.push(j);
                pair_capacities.extend(c);
                next = j + 1;
            }
            None => break,
        }
    }
    if indices.len() < MIN_SELECTED {
        return Err(Error::ExtractionExhausted(format!(
            "only {} indices meet the capacity rates within j_max = {j_max}",
            indices.len()
        )));
    }

    // E_k = {φ_{j_{k+1}} <= φ_{j_k} - δ_k}, F_k = ∪_{ℓ >= k} E_ℓ, h_k, then H_k
    let steps = indices.len() - 1;
    let n = grid.len();
    let mut f_mask = vec![false; n];
    let mut h: Vec<Potential> = Vec::with_capacity(steps);
    for k in (1..=steps).rev() {
        let (a, b) = (&values[indices[k - 1]], &values[indices[k]]);
        let delta = extraction_delta(k);
        for i in 0..n {
            f_mask[i] |= b[i] <= a[i] - delta;
        }
        h.push(relative_extremal(&grid, &f_mask, extraction_height(k)));
    }
    h.reverse();

    let mut minorants = Vec::with_capacity(steps);
    for k in 1..=steps {
        let p = (-(k as f64)).exp2();
        let phi_k = &members[indices[k - 1]];
        let mut terms: Vec<(f64, &Potential)> = vec![(1.0 - p, phi_k)];
        for l in k..=steps {
            terms.push(((-(l as f64) - 1.0).exp2(), &h[l - 1]));
        }
        let psi = Potential::combination(&terms)?.shifted(-2.0 * p).floored(-1.0);
        minorants.push(psi);
    }

    let mut worst_excess = f64::NEG_INFINITY;
    for (k, psi) in minorants.iter().enumerate() {
        let phi = &values[indices[k]];
        for (a, b) in psi.phi_values().iter().zip(phi) {
            worst_excess = worst_excess.max(a - b);
        }
    }
    let mut worst_drop = f64::NEG_INFINITY;
    for w in minorants.windows(2) {
        for (a, b) in w[0].phi_values().iter().zip(w[1].phi_values()) {
            worst_drop = worst_drop.max(a - b);
        }
    }
    let gaps = minorants.iter().map(|m| l1_distance(&limit, m)).collect::<Result<Vec<_>>>()?;
    Ok(QuasiMonotoneExtraction {
        indices: indices.iter().map(|j| j + 1).collect(),
        pair_capacities,
        minorants,
        gaps,
        worst_excess,
        worst_drop: worst_drop.max(0.0),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CauchyExtraction {
    /// `φ_j^-` for `j = 1..j_max`.
    pub minorants: Vec<Potential>,
    /// `I_χ(φ_j, φ_j^-)`.
    pub distances: Vec<f64>,
    /// Comparability constant fitted at `j = 2`.
    pub kappa: f64,
    /// Indices in `3..=8` where `I_χ(φ_j, φ_j^-) > κ 2^{-j+1}`.
    pub bound_violations: Vec<usize>,
    /// Largest increase of `φ_{j,k}^-` in `k` over nodes.
    pub worst_increase_in_k: f64,
    /// Largest `φ_1^- - φ_j` over nodes and `j`.
    pub worst_excess: f64,
    /// Membership certificate of `ψ = φ_1^-`.
    pub minorant_membership: Membership<f64>,
}

impl CauchyExtraction {
    pub fn verified(&self) -> bool {
        self.bound_violations.is_empty()
            && self.worst_increase_in_k <= ORDER_TOL
            && self.worst_excess <= ORDER_TOL
            && self.minorant_membership.member
    }
}

/// Minorants `φ_j^- = lim_k P_ω(min_{j <= ℓ <= j+k} φ_ℓ)` of a sequence with
/// `I_χ(φ_j, φ_{j+1}) <= 2^{-j}`.
pub fn energy_cauchy_extract(chi: &Weight<f64>, seq: &SequenceFamily, j_max: usize) -> Result<CauchyExtraction> {
    if j_max < 3 {
        return Err(Error::Precondition("need at least three members".into()));
    }
    let (_, members, _) = toric_members(seq, j_max)?;
    for (i, m) in members.iter().enumerate() {
        if !membership_e_chi(chi, m).member {
            return Err(Error::Precondition(format!("member {} is not in the weighted class", i + 1)));
        }
    }
    for j in 1..j_max {
        let inc = quasi_distance_i_chi(chi, &members[j - 1], &members[j])?;
        let bound = (-(j as f64)).exp2();
        if inc > bound * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!("increment I(φ_{j}, φ_{}) = {inc:.3e} exceeds 2^-{j}", j + 1)));
        }
    }

    let mut minorants = Vec::with_capacity(j_max);
    let mut worst_increase_in_k = f64::NEG_INFINITY;
    for j in 1..=j_max {
        let mut h = ObstacleFunction1D::from_potential(&members[j - 1]);
        let mut prev: Option<Vec<f64>> = None;
        let mut env = project_envelope(&h);
        for l in j..=j_max {
            if l > j {
                h = h.min_with(&ObstacleFunction1D::from_potential(&members[l - 1]))?;
                env = project_envelope(&h);
            }
            if env.is_minus_infinity {
                return Err(Error::Precondition(format!("minorant from {j} collapses")));
            }
            let v = env.phi_values();
            if let Some(p) = &prev {
                for (a, b) in v.iter().zip(p) {
                    worst_increase_in_k = worst_increase_in_k.max(a - b);
                }
            }
            prev = Some(v);
        }
        minorants.push(env);
    }
    let distances =
        members.iter().zip(&minorants).map(|(m, e)| quasi_distance_i_chi(chi, m, e)).collect::<Result<Vec<_>>>()?;
    let scale = |j: usize| (1.0 - j as f64).exp2();
    let kappa = (KAPPA_SLACK * distances[1] / scale(2)).max(f64::MIN_POSITIVE);
    let bound_violations = (3..=j_max.min(8)).filter(|&j| distances[j - 1] > kappa * scale(j) + 1e-12).collect();
    let psi = &minorants[0];
    let mut worst_excess = f64::NEG_INFINITY;
    for m in &members {
        for (a, b) in psi.phi_values().iter().zip(m.phi_values()) {
            worst_excess = worst_excess.max(a - b);
        }
    }
    Ok(CauchyExtraction {
        minorant_membership: membership_e_chi(chi, psi),
        minorants,
        distances,
        kappa,
        bound_violations,
        worst_increase_in_k: worst_increase_in_k.max(0.0),
        worst_excess,
    })
}
