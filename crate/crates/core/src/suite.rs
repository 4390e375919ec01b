//! The eleven acceptance criteria as runnable checks. Each criterion reports
//! every number it decides on together with the tolerance it was held to.
//! Random draws come from `ChaCha8Rng` seeded with `seed + id`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms_p1::collapse_test;
use crate::lab::*;
use crate::measure::{Grid1D, Weight};
use crate::samples::*;
use crate::toric1d::*;
use crate::toric2d::{ma_measure_2d, plane_mass, PLPotential2D, Piece};
use crate::{Error, Potential, Result};

/// Names of criteria `1..=11`.
pub const CRITERIA: [&str; 11] = [
    "theorem chain",
    "quasi-monotone implies capacity",
    "capacity without quasi-monotonicity",
    "envelope collapse",
    "energy criterion",
    "Blocki inequality",
    "CLN bound",
    "mass conservation",
    "capacity oracles",
    "MA equation solver",
    "Cauchy extraction",
];

const DELTAS: [f64; 3] = [0.5, 0.1, 0.02];

/// One checked number: passes when `value <= tolerance` (NaN fails).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(quantity: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { quantity: quantity.into(), value, tolerance, passed: value <= tolerance }
    }

    /// A yes/no condition, recorded as `0` (holds) or `1` against tolerance `0`.
    pub fn holds(quantity: impl Into<String>, ok: bool) -> Self {
        Check::at_most(quantity, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub seconds: f64,
}

impl CriterionResult {
    /// `criterion  N PASS: name: detail`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}: {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

type Outcome = (String, Vec<Check>);

/// Runs criterion `id` in `1..=11`. A panic inside the criterion is reported
/// as a failure, not propagated.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionResult> {
    let f: fn(&mut ChaCha8Rng) -> Outcome = match id {
        1 => criterion_1,
        2 => criterion_2,
        3 => criterion_3,
        4 => criterion_4,
        5 => criterion_5,
        6 => criterion_6,
        7 => criterion_7,
        8 => criterion_8,
        9 => criterion_9,
        10 => criterion_10,
        11 => criterion_11,
        _ => return Err(Error::Domain(format!("no criterion {id}; criteria are 1 to 11"))),
    };
    let seed = seed.wrapping_add(id as u64);
    let start = Instant::now();
    let (detail, checks) =
        catch_unwind(AssertUnwindSafe(|| f(&mut ChaCha8Rng::seed_from_u64(seed)))).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (format!("panicked: {msg}"), vec![Check::holds("completed", false)])
        });
    Ok(CriterionResult {
        id,
        name: CRITERIA[id - 1].to_string(),
        passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
        detail,
        checks,
        seed,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the listed criteria concurrently, one thread each, in input order.
pub fn run_criteria(ids: &[usize], seed: u64) -> Result<Vec<CriterionResult>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = ids.iter().map(|&id| s.spawn(move || run_criterion(id, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    run_criteria(&(1..=11).collect::<Vec<_>>(), seed).expect("ids in range")
}

fn energy_regimes() -> Vec<(&'static str, SequenceFamily)> {
    vec![
        ("(1/j, 1)", SequenceFamily::energy(Rate::Reciprocal, Rate::Constant { value: 1.0 })),
        ("(1/j, j)", SequenceFamily::energy(Rate::Reciprocal, Rate::Linear)),
        ("(1/j, j^2)", SequenceFamily::energy(Rate::Reciprocal, Rate::Square)),
        ("(2^-j, j)", SequenceFamily::energy(Rate::Geometric { ratio: 0.5 }, Rate::Linear)),
    ]
}

fn criterion_1(_: &mut ChaCha8Rng) -> Outcome {
    let start = Instant::now();
    let mut families: Vec<(SequenceFamily, usize)> = vec![
        (SequenceFamily::constant(PotentialRecipe::capped(0.5, 2.0)), 16),
        (SequenceFamily::monotone_decreasing(), 64),
        (SequenceFamily::sandwich(), 64),
        (SequenceFamily::extraction(16), 16),
        (SequenceFamily::infty_atoms(), 16),
    ];
    families.extend(energy_regimes().into_iter().map(|(_, f)| (f, 256)));
    let reports: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> =
            families.iter().map(|(f, j)| s.spawn(move || check_theorem_chain(f, *j, &DELTAS))).collect();
        handles.into_iter().map(|h| h.join().expect("chain thread")).collect()
    });
    let mut violations = Vec::new();
    for r in reports {
        match r {
            Ok(r) => violations.extend(r.violations.iter().map(|v| format!("{}: {v}", r.family))),
            Err(e) => violations.push(format!("error {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        format!("{} families, violations {:?}, {secs:.1} s", families.len(), violations),
        vec![
            Check::at_most("implication violations", violations.len() as f64, 0.0),
            Check::at_most("seconds", secs, 60.0),
        ],
    )
}

fn criterion_2(_: &mut ChaCha8Rng) -> Outcome {
    let last = classify_capacity(&SequenceFamily::sandwich(), 64, &[0.1])
        .ok()
        .and_then(|v| v.series(Some(0.1)).iter().find(|r| r.0 == 64).map(|r| r.1))
        .unwrap_or(f64::NAN);
    (format!("Cap at delta 0.1, j = 64: {last:.3e}"), vec![Check::at_most("Cap({|phi_64 - phi| > 0.1})", last, 1e-4)])
}

fn criterion_3(_: &mut ChaCha8Rng) -> Outcome {
    let seq = SequenceFamily::extraction(16);
    let cap = classify_capacity(&seq, 16, &DELTAS).map(|v| v.status);
    let qm = classify_quasi_monotone(&seq, 16).map(|v| v.status);
    let dev = seq
        .realize(16)
        .and_then(|re| running_infima(&seq, &re, 8))
        .map(|infima| {
            infima.iter().flat_map(|t| t.envelope.phi_values()).map(|v| (v + 1.0).abs()).fold(0.0f64, f64::max)
        })
        .unwrap_or(f64::NAN);
    let (ok_ex, ex_note) = match extract_quasi_monotone(&seq, 16) {
        Ok(e) => (e.verified(), format!("indices {:?}, drop {:.1e}", e.indices, e.worst_drop)),
        Err(e) => (false, e.to_string()),
    };
    (
        format!("cap {}, qm {}, |inf + 1| <= {dev:.1e}, extraction {ex_note}", show(&cap), show(&qm)),
        vec![
            Check::holds("capacity verdict converges", matches!(cap, Ok(Status::Converges))),
            Check::holds("quasi-monotone verdict diverges", matches!(qm, Ok(Status::Diverges))),
            Check::at_most("sup |phi_j^- + 1|", dev, 1e-10),
            Check::holds("extracted subsequence verified", ok_ex),
        ],
    )
}

fn show(s: &Result<Status>) -> String {
    s.as_ref().map_or_else(|e| e.to_string(), |s| format!("{s:?}"))
}

fn criterion_4(_: &mut ChaCha8Rng) -> Outcome {
    let seq = SequenceFamily::infty_atoms();
    let run = || -> Result<(bool, bool)> {
        let re = seq.realize(8)?;
        let infima = running_infima(&seq, &re, 7)?;
        let two = infima.iter().all(|t| t.collapsed && t.certificate.is_some());
        let atoms: Vec<_> = re
            .members
            .iter()
            .filter_map(|m| match m {
                Member::Atoms(a) => Some(a.clone()),
                Member::Toric(_) => None,
            })
            .collect();
        let mut kept = !atoms.is_empty();
        for a in &atoms {
            kept &= !collapse_test(std::slice::from_ref(a))?.collapsed;
        }
        kept &= !collapse_test(&[atoms[0].clone(), atoms[0].clone()])?.collapsed;
        Ok((two, kept))
    };
    let (two, kept) = run().unwrap_or((false, false));
    (
        format!("two-atom tails collapsed {two}, single atoms kept {kept}"),
        vec![Check::holds("two-atom tails collapse", two), Check::holds("single and repeated atoms survive", kept)],
    )
}

fn criterion_5(_: &mut ChaCha8Rng) -> Outcome {
    let mut ratios = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        let chi = Weight::power(p).expect("power weight");
        for k in 0..=8 {
            let eps = (-(k as f64)).exp2();
            for m in 0..=10 {
                let c = (m as f64).exp2();
                let i = SequenceFamily::constant(PotentialRecipe::capped(eps, c))
                    .realize(1)
                    .and_then(|re| quasi_distance_i_chi(&chi, &re.limit, &Potential::reference(&re.grid)));
                let norm = (eps * (eps * c).powf(p)).max(eps.powf(p));
                ratios.push(i.map_or(f64::NAN, |i| i / norm));
            }
        }
    }
    let hi = ratios.iter().copied().fold(0.0f64, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let kappa = if ratios.iter().any(|r| r.is_nan()) { f64::NAN } else { hi.max(1.0 / lo) };

    let mut jobs = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        for (name, fam) in energy_regimes() {
            let expect = match name {
                "(1/j, j^2)" if p >= 1.0 => Status::Diverges,
                _ => Status::Converges,
            };
            jobs.push((p, name, fam, expect));
        }
    }
    let results: Vec<(f64, &str, Status, Status)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(p, name, fam, expect)| {
                s.spawn(move || {
                    let got = Weight::power(*p)
                        .and_then(|chi| classify_energy(&chi, fam, 256))
                        .map_or(Status::Inconclusive, |v| v.status);
                    (*p, *name, got, *expect)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("energy thread")).collect()
    });
    let mismatches: Vec<String> = results
        .iter()
        .filter(|r| r.2 != r.3)
        .map(|r| format!("p={} {}: {:?} (expected {:?})", r.0, r.1, r.2, r.3))
        .collect();
    (
        format!("ratio window [{lo:.3}, {hi:.3}], kappa {kappa:.2}; verdict mismatches {mismatches:?}"),
        vec![
            Check::at_most("comparability constant kappa", kappa, 8.0),
            Check::at_most("energy verdict mismatches", mismatches.len() as f64, 0.0),
        ],
    )
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Outcome {
    let grid = Grid1D::uniform(-20.0, 20.0, 801).expect("grid");
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..500 {
        let u = unit_range(&random_bounded(rng, &grid));
        let w = random_bounded(rng, &grid);
        let drop = rng.gen_range(0.1..1.0);
        let v = envelope_min(&w, &random_bounded(rng, &grid).shifted(-drop));
        let margin = blocki_inequality_check(&u, &v, &w).map_or(f64::NAN, |c| c.margin);
        worst = worst.min(margin);
        if !(margin >= -1e-9) {
            failures += 1;
        }
    }
    (
        format!("500 triples, worst margin {worst:.3e}, failures {failures}"),
        vec![Check::at_most("negative margin", -worst, 1e-9), Check::at_most("failures", failures as f64, 0.0)],
    )
}

fn criterion_7(rng: &mut ChaCha8Rng) -> Outcome {
    let grid = Grid1D::uniform(-30.0, 30.0, 3001).expect("grid");
    let mut failures = 0;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let p = if i % 2 == 0 { random_bounded(rng, &grid) } else { random_with_poles(rng, &grid) };
        let phi = normalized(&p);
        for c in [1.0, 2.0, 5.0, 10.0] {
            match cln_bound_check(&phi, c, CapacityMethod::Extremal) {
                Ok(r) => {
                    worst = worst.max(r.cap_value / r.bound);
                    failures += usize::from(!r.holds());
                }
                Err(_) => failures += 1,
            }
        }
    }
    (
        format!("400 checks, largest cap/bound {worst:.3}, failures {failures}"),
        vec![Check::at_most("failures", failures as f64, 0.0)],
    )
}

fn criterion_8(rng: &mut ChaCha8Rng) -> Outcome {
    let grid = Grid1D::uniform(-25.0, 25.0, 2001).expect("grid");
    let mut worst1 = 0.0f64;
    for _ in 0..200 {
        let err = ma_measure(&random_bounded(rng, &grid)).map_or(f64::NAN, |mu| (mu.total_mass() - 1.0).abs());
        worst1 = if err.is_nan() { err } else { worst1.max(err) };
    }
    let mut worst2 = 0.0f64;
    for _ in 0..200 {
        let mut pieces = vec![
            Piece { g: [0.0, 0.0], b: rng.gen_range(-1.0..1.0) },
            Piece { g: [1.0, 0.0], b: rng.gen_range(-1.0..1.0) },
            Piece { g: [0.0, 1.0], b: rng.gen_range(-1.0..1.0) },
        ];
        for _ in 0..rng.gen_range(0..6) {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let g = if a + b <= 1.0 { [a, b] } else { [1.0 - a, 1.0 - b] };
            pieces.push(Piece { g, b: rng.gen_range(-0.5..1.5) });
        }
        let err = PLPotential2D::new(pieces).map_or(f64::NAN, |u| (plane_mass(&ma_measure_2d(&u)) - 1.0).abs());
        worst2 = if err.is_nan() { err } else { worst2.max(err) };
    }
    let std_mu = ma_measure_2d(&PLPotential2D::<f64>::standard());
    let atom_err = match std_mu.atoms.as_slice() {
        [a] if a.location == [0.0, 0.0] => (a.mass - 1.0).abs(),
        _ => f64::INFINITY,
    };
    (
        format!("1D mass error {worst1:.1e}, 2D mass error {worst2:.1e}, unit atom error {atom_err:.1e}"),
        vec![
            Check::at_most("1D total mass error", worst1, 1e-9),
            Check::at_most("2D total mass error", worst2, 1e-9),
            Check::at_most("standard potential atom mass error", atom_err, 1e-9),
        ],
    )
}

fn criterion_9(rng: &mut ChaCha8Rng) -> Outcome {
    let grid = Grid1D::uniform(-15.0, 15.0, 601).expect("grid");
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = rng.gen_range(1..4);
        let intervals: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                let a: f64 = rng.gen_range(-12.0..11.0);
                (a, a + rng.gen_range(0.1..4.0))
            })
            .collect();
        let d = IntervalSet::new(intervals).and_then(|set| {
            let lp = capacity(&grid, &set)?;
            Ok((lp - capacity_extremal(&grid, &set)?).abs())
        });
        worst = d.map_or(f64::NAN, |d| if worst.is_nan() { worst } else { worst.max(d) });
    }
    let tail_grid = Grid1D::uniform(-80.0, 20.0, 10001).expect("grid");
    let ts = [5.0, 10.0, 20.0, 50.0];
    let caps: Vec<f64> = ts
        .iter()
        .map(|&t| {
            IntervalSet::single(f64::NEG_INFINITY, -t)
                .and_then(|s| capacity_extremal(&tail_grid, &s))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let err = |c: f64| ts.iter().zip(&caps).map(|(t, k)| (k * (t + c) - 1.0).abs()).fold(0.0f64, f64::max);
    let (best_c, best) = (0..=6000)
        .map(|i| -3.0 + i as f64 * 1e-3)
        .map(|c| (c, err(c)))
        .fold((0.0, f64::NAN), |a, b| if !(b.1 >= a.1) { b } else { a });
    (
        format!("LP vs extremal {worst:.1e} on 50 families; 1/(T+c) fit c = {best_c:.3}, max rel. error {best:.3}"),
        vec![
            Check::at_most("|LP - extremal| capacity", worst, 1e-6),
            Check::at_most("relative error of 1/(T+c) tail fit", best, 0.1),
        ],
    )
}

fn criterion_10(rng: &mut ChaCha8Rng) -> Outcome {
    let grid = Grid1D::uniform(-20.0, 20.0, 1601).expect("grid");
    let tol = 1e-10;
    let (mut worst_res, mut worst_agree, mut worst_super) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = Vec::new();
    for _ in 0..20 {
        let mu = random_probability(rng, &grid);
        let a = match solve_ma_equation(&mu, tol) {
            Ok(s) => s,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        match equation_residual(&a.potential, &mu) {
            Ok(r) => worst_res = worst_res.max(r),
            Err(e) => errors.push(e.to_string()),
        }
        let start = unit_range(&random_bounded(rng, &grid));
        match solve_ma_equation_from(&mu, tol, &start) {
            Ok(b) => {
                let d = a
                    .potential
                    .phi_values()
                    .iter()
                    .zip(b.potential.phi_values())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0f64, f64::max);
                worst_agree = worst_agree.max(d);
            }
            Err(e) => errors.push(e.to_string()),
        }
        // a second supersolution: the solution for a reweighting of mu, lifted
        // by log(max weight / normalization) so that its measure stays below e^lift mu
        let (c, w) = (rng.gen_range(-5.0..5.0), rng.gen_range(1.0..4.0));
        let weight = |t: f64| 0.5 + 1.5 * (-((t - c) / w).powi(2)).exp();
        let mut mixed = mu.clone();
        for (i, d) in mixed.density.iter_mut().enumerate() {
            *d *= weight(grid.node(i));
        }
        for at in &mut mixed.atoms {
            at.mass *= weight(at.location);
        }
        let z = mixed.total_mass();
        let mixed = mixed.scaled(1.0 / z);
        let lift = (2.0 / z).ln() + rng.gen_range(0.0..0.5);
        match solve_ma_equation(&mixed, tol) {
            Ok(s2) => {
                let phi = a.potential.shifted(rng.gen_range(0.0..0.5));
                let psi = s2.potential.shifted(lift);
                match supersolution_excess(&envelope_min(&phi, &psi), &mu) {
                    Ok(x) => worst_super = worst_super.max(x),
                    Err(e) => errors.push(e.to_string()),
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    (
        format!(
            "residual {worst_res:.1e}, two starts {worst_agree:.1e}, envelope excess {worst_super:.1e}, errors {errors:?}"
        ),
        vec![
            Check::at_most("solver errors", errors.len() as f64, 0.0),
            Check::at_most("equation residual", worst_res, 1e-8),
            Check::at_most("sup |phi_a - phi_b| over two starts", worst_agree, 1e-7),
            Check::at_most("supersolution excess of min envelope", worst_super, 10.0 * tol),
        ],
    )
}

fn criterion_11(_: &mut ChaCha8Rng) -> Outcome {
    let seq = SequenceFamily::geometric_interpolation(PotentialRecipe::capped(0.5, 1.0));
    match energy_cauchy_extract(&Weight::identity(), &seq, 10) {
        Ok(e) => (
            format!(
                "kappa {:.3}, violations at {:?}, minorant member {}",
                e.kappa, e.bound_violations, e.minorant_membership.member
            ),
            vec![
                Check::at_most("I_chi(phi_j, phi_j^-) bound violations", e.bound_violations.len() as f64, 0.0),
                Check::holds("common minorant in E_chi", e.minorant_membership.member),
                Check::holds("extraction verified", e.verified()),
            ],
        ),
        Err(e) => (e.to_string(), vec![Check::holds("extraction completed", false)]),
    }
}
