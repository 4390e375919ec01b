//! Consistency of the four verdicts with the implications between modes.

use serde::{Deserialize, Serialize};

use super::classify::{classify_capacity, classify_energy, classify_l1, classify_quasi_monotone};
use super::family::SequenceFamily;
use super::verdict::{ConvergenceVerdict, Status};
use crate::error::Result;
use crate::measure::Weight;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainReport {
    pub family: String,
    pub l1: ConvergenceVerdict,
    pub capacity: ConvergenceVerdict,
    pub quasi_monotone: ConvergenceVerdict,
    pub energy: ConvergenceVerdict,
    /// Implications whose premise holds and whose conclusion is refuted.
    pub violations: Vec<String>,
    /// Implications whose premise holds and whose conclusion is inconclusive.
    pub unconfirmed: Vec<String>,
}

/// The implications checked:
/// quasi-monotone ⇒ capacity; capacity with an `E¹` minorant ⇒ energy
/// (`χ(t) = t`); energy ⇒ capacity.
pub fn check_theorem_chain(seq: &SequenceFamily, j_max: usize, deltas: &[f64]) -> Result<ChainReport> {
    let l1 = classify_l1(seq, j_max)?;
    let capacity = classify_capacity(seq, j_max, deltas)?;
    let quasi_monotone = classify_quasi_monotone(seq, j_max)?;
    let energy = classify_energy(&Weight::identity(), seq, j_max)?;
    let minorant = energy.minorant.as_ref().is_some_and(|m| m.found);
    let mut violations = Vec::new();
    let mut unconfirmed = Vec::new();
    let mut check = |name: &str, premise: bool, conclusion: Status| match conclusion {
        Status::Diverges if premise => violations.push(name.to_string()),
        Status::Inconclusive if premise => unconfirmed.push(name.to_string()),
        _ => {}
    };
    let conv = |v: &ConvergenceVerdict| v.status == Status::Converges;
    check("quasi_monotone => capacity", conv(&quasi_monotone), capacity.status);
    check("capacity + minorant => energy", conv(&capacity) && minorant, energy.status);
    check("energy => capacity", conv(&energy), capacity.status);
    Ok(ChainReport { family: seq.label(), l1, capacity, quasi_monotone, energy, violations, unconfirmed })
}
