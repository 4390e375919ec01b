//! Verdict types and the decision rule shared by all classifiers.

use serde::{Deserialize, Serialize};

/// Decision-rule constants. Every classifier reads them from here.
pub mod rule {
    /// Absolute tolerance on a diagnostic.
    pub const TOL: f64 = 1e-6;
    /// Required contraction of the tail supremum per doubling of `j`.
    pub const RATE: f64 = 0.8;
    /// Divergence needs the tail infimum above `MARGIN * TOL`.
    pub const MARGIN: f64 = 10.0;
    /// Divergence also needs the last doubling to keep this fraction of the tail.
    pub const PLATEAU: f64 = 0.9;
    /// Smallest admissible `j_max`.
    pub const MIN_J_MAX: usize = 8;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    L1,
    Capacity,
    QuasiMonotone,
    EnergyChi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converges,
    Diverges,
    Inconclusive,
}

/// One diagnostic value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(with = "crate::serde_ext::extended")]
    pub value: f64,
}

/// Result of a classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub mode: Mode,
    pub status: Status,
    pub evidence: Vec<EvidenceRow>,
    /// Qualifiers such as `finite_tail_bias`, `mesh_approximate`, `upper_bound`.
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    /// Common minorant search, energy mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minorant: Option<MinorantReport>,
}

impl ConvergenceVerdict {
    pub fn new(mode: Mode, status: Status, evidence: Vec<EvidenceRow>) -> Self {
        ConvergenceVerdict {
            mode,
            status,
            evidence,
            flags: Vec::new(),
            notes: Vec::new(),
            certificate: None,
            minorant: None,
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub(crate) fn flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if !self.has_flag(&flag) {
            self.flags.push(flag);
        }
    }

    /// Evidence rows for one `delta` (or all rows without one).
    pub fn series(&self, delta: Option<f64>) -> Vec<(usize, f64)> {
        self.evidence.iter().filter(|r| r.delta == delta).map(|r| (r.j, r.value)).collect()
    }
}

/// Outcome of the search for a common `E_χ` minorant among the `φ_J^-`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorantReport {
    pub found: bool,
    /// `(J, ∫|χ(φ_1^-)| MA(φ_1^-))` over the tested tail lengths.
    pub tails: Vec<(usize, f64)>,
    #[serde(default)]
    pub declared: bool,
}

/// Per-series decision, with the tail suprema it was based on.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub status: Status,
    pub j0: usize,
    /// `D_j = max_{ℓ >= j} d_ℓ` for `j = 1..=j_max`.
    pub tail_sup: Vec<f64>,
}

/// Applies the decision rule to `d_1, ..., d_{j_max}` (`d[0]` is `d_1`).
///
/// With `D_j` the tail supremum and `j0 = max(1, j_max / 4)`:
/// converges when `D_{j0} <= TOL`, or when `D_{2j} <= RATE * D_j + TOL` for
/// every dyadic pair `j0 <= j < 2j <= j_max`; diverges when the tail infimum
/// from `j0` exceeds `MARGIN * TOL` and `D_{j_max} >= PLATEAU * D_{j_max/2}`;
/// inconclusive otherwise (including any NaN).
pub fn decide(d: &[f64]) -> Decision {
    let n = d.len();
    let mut tail_sup = vec![f64::NEG_INFINITY; n];
    let mut acc = f64::NEG_INFINITY;
    for i in (0..n).rev() {
        acc = acc.max(d[i]);
        tail_sup[i] = acc;
    }
    let j0 = (n / 4).max(1);
    let mut decision = Decision { status: Status::Inconclusive, j0, tail_sup };
    if n < 2 || d.iter().any(|v| v.is_nan()) {
        return decision;
    }
    let sup = |j: usize| decision.tail_sup[j - 1];
    if sup(j0) <= rule::TOL {
        decision.status = Status::Converges;
        return decision;
    }
    let mut contracts = sup(j0).is_finite();
    let mut j = j0;
    while 2 * j <= n {
        if !(sup(2 * j) <= rule::RATE * sup(j) + rule::TOL) {
            contracts = false;
        }
        j *= 2;
    }
    if contracts && j > j0 {
        decision.status = Status::Converges;
        return decision;
    }
    let tail_inf = d[j0 - 1..].iter().copied().fold(f64::INFINITY, f64::min);
    let (last, half) = (sup(n), sup((n / 2).max(1)));
    let plateau = if last.is_infinite() && half.is_infinite() { true } else { last >= rule::PLATEAU * half };
    if tail_inf > rule::MARGIN * rule::TOL && plateau {
        decision.status = Status::Diverges;
    }
    decision
}

/// Combines per-series statuses: converges only if all converge, diverges if
/// any diverges, inconclusive otherwise.
pub fn combine(statuses: &[Status]) -> Status {
    if statuses.contains(&Status::Diverges) {
        Status::Diverges
    } else if !statuses.is_empty() && statuses.iter().all(|&s| s == Status::Converges) {
        Status::Converges
    } else {
        Status::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
        (1..=n).map(|j| f(j as f64)).collect()
    }

    #[test]
    fn zero_converges() {
        assert_eq!(decide(&[0.0; 16]).status, Status::Converges);
    }

    #[test]
    fn power_rates() {
        assert_eq!(decide(&series(|j| 1.0 / j, 64)).status, Status::Converges);
        assert_eq!(decide(&series(|j| j.powf(-0.5), 64)).status, Status::Converges);
        assert_eq!(decide(&series(|j| 0.5f64.powf(j), 64)).status, Status::Converges);
    }

    #[test]
    fn plateaus_diverge() {
        assert_eq!(decide(&vec![1.0; 64]).status, Status::Diverges);
        assert_eq!(decide(&series(|j| 1.0 + 1.0 / j, 64)).status, Status::Diverges);
        assert_eq!(decide(&series(|j| j, 64)).status, Status::Diverges);
        assert_eq!(decide(&[f64::INFINITY; 16]).status, Status::Diverges);
    }

    #[test]
    fn slow_decay_is_inconclusive() {
        assert_eq!(decide(&series(|j| 1.0 / (1.0 + j.ln()), 64)).status, Status::Inconclusive);
        assert_eq!(decide(&[1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).status, Status::Inconclusive);
    }

    #[test]
    fn verdict_round_trips_infinite_values() {
        let mut v = ConvergenceVerdict::new(
            Mode::QuasiMonotone,
            Status::Diverges,
            vec![EvidenceRow { j: 1, delta: None, value: f64::INFINITY }],
        );
        v.flag("finite_tail_bias");
        let s = serde_json::to_string(&v).unwrap();
        let back: ConvergenceVerdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
