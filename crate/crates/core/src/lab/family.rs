//! Sequence families as serializable recipes.
//!
//! Indices start at 1. Every member of a toric family lives on one grid that
//! contains the kinks of all members up to the requested `j_max`.

use serde::{Deserialize, Serialize};

use crate::atoms_p1::{AtomPotential, Pole, SpherePoint, NORTH};
use crate::error::{Error, Result};
use crate::measure::Grid1D;
use crate::scalar::reference_profile;
use crate::toric1d::{IntervalSet, ToricPotential1D};

type Potential = ToricPotential1D<f64>;

/// Fine block and spacing of family grids.
pub const FAMILY_FINE: (f64, f64) = (-25.0, 25.0);
pub const FAMILY_H: f64 = 0.01;

/// Stages whose covers can be evaluated in double precision.
pub const VERIFIABLE_STAGES: u32 = 4;

/// `g = log|z_1| - log|z|` in the coordinate `t`.
pub fn pole_green(t: f64) -> f64 {
    if t > 0.0 {
        -0.5 * (-2.0 * t).exp().ln_1p()
    } else {
        t - reference_profile(t)
    }
}

/// The solution of `g(t) = -c` for `c > 0`.
pub fn pole_level(c: f64) -> f64 {
    -c - 0.5 * (-(-2.0 * c).exp()).ln_1p()
}

/// A scalar sequence indexed by `j >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    Constant {
        value: f64,
    },
    /// `1/j`
    Reciprocal,
    /// `j`
    Linear,
    /// `j²`
    Square,
    /// `ratio^j`
    Geometric {
        ratio: f64,
    },
    /// `j^exponent`
    Power {
        exponent: f64,
    },
}

impl Rate {
    pub fn at(&self, j: usize) -> f64 {
        let x = j as f64;
        match *self {
            Rate::Constant { value } => value,
            Rate::Reciprocal => 1.0 / x,
            Rate::Linear => x,
            Rate::Square => x * x,
            Rate::Geometric { ratio } => ratio.powf(x),
            Rate::Power { exponent } => x.powf(exponent),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Rate::Constant { value } => format!("{value}"),
            Rate::Reciprocal => "1/j".into(),
            Rate::Linear => "j".into(),
            Rate::Square => "j^2".into(),
            Rate::Geometric { ratio } => format!("{ratio}^j"),
            Rate::Power { exponent } => format!("j^{exponent}"),
        }
    }
}

/// `shift + scale * max(g, -cap)`; no cap means `shift + scale * g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialRecipe {
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default)]
    pub shift: f64,
}

fn one() -> f64 {
    1.0
}

impl PotentialRecipe {
    pub fn zero() -> Self {
        PotentialRecipe { scale: 0.0, cap: None, shift: 0.0 }
    }

    pub fn capped(scale: f64, cap: f64) -> Self {
        PotentialRecipe { scale, cap: Some(cap), shift: 0.0 }
    }

    pub fn pole(scale: f64) -> Self {
        PotentialRecipe { scale, cap: None, shift: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.scale) {
            return Err(Error::InvalidPotential(format!("scale {} outside [0, 1]", self.scale)));
        }
        if let Some(c) = self.cap {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidPotential(format!("cap {c} must be positive and finite")));
            }
        }
        if !self.shift.is_finite() {
            return Err(Error::InvalidPotential("non-finite shift".into()));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let g = pole_green(t);
        let g = match self.cap {
            Some(c) => g.max(-c),
            None => g,
        };
        self.shift + self.scale * g
    }

    pub fn kink(&self) -> Option<f64> {
        match self.cap {
            Some(c) if self.scale > 0.0 => Some(pole_level(c)),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.cap.is_some() || self.scale == 0.0
    }

    pub fn realize(&self, grid: &Grid1D<f64>) -> Result<Potential> {
        self.validate()?;
        let left = if self.is_bounded() { 0.0 } else { self.scale };
        let shift = self.shift;
        let scale = self.scale;
        match self.cap {
            Some(c) => Potential::from_profile(
                grid,
                |t| {
                    let fw = reference_profile(t);
                    ((1.0 - scale) * fw + scale * t).max(fw - scale * c) + shift
                },
                left,
                1.0,
            ),
            None => {
                Potential::from_profile(grid, |t| (1.0 - scale) * reference_profile(t) + scale * t + shift, left, 1.0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ExplicitList,
    Parametric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Declarations used for reporting only.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<Monotonicity>,
    /// A declared common lower bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<PotentialRecipe>,
    /// `inf_{ℓ >= j} φ_ℓ` is known in closed form.
    #[serde(default)]
    pub closed_form_infimum: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyRecipe {
    /// `φ_j = φ`.
    Constant {
        potential: PotentialRecipe,
    },
    /// `φ_j = φ + offset` against the limit `φ`.
    Shifted {
        potential: PotentialRecipe,
        offset: f64,
    },
    /// `φ_j = max(g, -C_j)` decreasing to `g`.
    MonotoneDecreasing {
        cap: Rate,
    },
    /// `φ_j = (1 - ε_j) φ + ε_j θ_j` with `φ = ½ max(g, -base_cap)`,
    /// `θ_j = max(g, -lower_cap)` for odd `j` and `θ_j = φ` for even `j`,
    /// `ε_j = 2^{-j / decay}`.
    Sandwich {
        base_cap: f64,
        lower_cap: f64,
        decay: f64,
    },
    /// `φ_j = ε_j max(g, -C_j)` (or `ε_j g` without cap) against the limit 0.
    Energy {
        eps: Rate,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<Rate>,
    },
    /// Stage `n` of the covering construction, through its member centred at
    /// the pole `[1:0]`: `max(g / 2^n, -1)`, limit 0.
    Extraction {
        stages: u32,
    },
    /// `φ_j = log|z_1 - τ_j z_0| - log|z|` with `τ_j = e^{-j}`, limit `g`.
    InftyAtoms,
    /// `φ_j = (1 - 2^{-j}) φ`.
    GeometricInterpolation {
        potential: PotentialRecipe,
    },
    /// `φ_j = (1 - c_j) φ + c_j ζ_j` with `φ = ½ max(g, -1)`, `c_j = 2^{-j-1}`,
    /// `ζ_j = 0` for odd `j` and `ζ_j = 2φ` for even `j`.
    CauchyInterpolation,
    Explicit {
        members: Vec<Potential>,
        limit: Potential,
    },
    /// `max(φ_j, -level)` against `max(φ, -level)`.
    Floored {
        inner: Box<FamilyRecipe>,
        level: f64,
    },
}

/// A member of a family.
#[derive(Clone, Debug, PartialEq)]
pub enum Member {
    Toric(Potential),
    Atoms(AtomPotential),
}

impl Member {
    pub fn toric(&self) -> Option<&Potential> {
        match self {
            Member::Toric(p) => Some(p),
            Member::Atoms(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceFamily {
    pub recipe: FamilyRecipe,
    #[serde(default)]
    pub tail: TailMetadata,
}

impl SequenceFamily {
    pub fn new(recipe: FamilyRecipe) -> Self {
        SequenceFamily { recipe, tail: TailMetadata::default() }
    }

    pub fn with_tail(mut self, tail: TailMetadata) -> Self {
        self.tail = tail;
        self
    }

    pub fn constant(potential: PotentialRecipe) -> Self {
        Self::new(FamilyRecipe::Constant { potential })
            .with_tail(TailMetadata { closed_form_infimum: true, ..Default::default() })
    }

    pub fn shifted(potential: PotentialRecipe, offset: f64) -> Self {
        Self::new(FamilyRecipe::Shifted { potential, offset })
    }

    /// `φ_j = g / j`.
    pub fn scaled_pole() -> Self {
        Self::new(FamilyRecipe::Energy { eps: Rate::Reciprocal, cap: None })
    }

    /// `φ_j = max(g, -j)`.
    pub fn monotone_decreasing() -> Self {
        Self::new(FamilyRecipe::MonotoneDecreasing { cap: Rate::Linear }).with_tail(TailMetadata {
            monotonicity: Some(Monotonicity::Decreasing),
            closed_form_infimum: true,
            ..Default::default()
        })
    }

    pub fn sandwich() -> Self {
        Self::new(FamilyRecipe::Sandwich { base_cap: 3.0, lower_cap: 6.0, decay: 3.0 })
            .with_tail(TailMetadata { lower_bound: Some(PotentialRecipe::capped(1.0, 6.0)), ..Default::default() })
    }

    pub fn energy(eps: Rate, cap: Rate) -> Self {
        Self::new(FamilyRecipe::Energy { eps, cap: Some(cap) })
    }

    pub fn extraction(stages: u32) -> Self {
        Self::new(FamilyRecipe::Extraction { stages }).with_tail(TailMetadata {
            lower_bound: Some(PotentialRecipe { scale: 0.0, cap: None, shift: -1.0 }),
            ..Default::default()
        })
    }

    pub fn infty_atoms() -> Self {
        Self::new(FamilyRecipe::InftyAtoms)
    }

    pub fn geometric_interpolation(potential: PotentialRecipe) -> Self {
        Self::new(FamilyRecipe::GeometricInterpolation { potential }).with_tail(TailMetadata {
            monotonicity: Some(Monotonicity::Increasing),
            closed_form_infimum: true,
            ..Default::default()
        })
    }

    pub fn cauchy_interpolation() -> Self {
        Self::new(FamilyRecipe::CauchyInterpolation)
    }

    pub fn explicit(members: Vec<Potential>, limit: Potential) -> Self {
        Self::new(FamilyRecipe::Explicit { members, limit })
    }

    pub fn floored(&self, level: f64) -> Self {
        Self::new(FamilyRecipe::Floored { inner: Box::new(self.recipe.clone()), level })
    }

    pub fn kind(&self) -> FamilyKind {
        self.recipe.kind()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.recipe.max_index()
    }

    /// Members are genuine toric potentials (not atom potentials).
    pub fn is_toric(&self) -> bool {
        self.recipe.is_toric()
    }

    /// Checks that members `1..=j_max` are defined and the limit is valid.
    pub fn validate(&self, j_max: usize) -> Result<()> {
        self.recipe.validate(j_max)
    }

    pub fn grid(&self, j_max: usize) -> Result<Grid1D<f64>> {
        self.recipe.validate(j_max)?;
        self.recipe.grid(j_max)
    }

    pub fn member(&self, j: usize, grid: &Grid1D<f64>) -> Result<Member> {
        self.recipe.member(j, grid)
    }

    pub fn limit(&self, grid: &Grid1D<f64>) -> Result<Potential> {
        self.recipe.limit(grid)
    }

    /// The grid, members `1..=j_max` and the limit.
    pub fn realize(&self, j_max: usize) -> Result<Realization> {
        let grid = self.grid(j_max)?;
        let members = (1..=j_max).map(|j| self.member(j, &grid)).collect::<Result<Vec<_>>>()?;
        let limit = self.limit(&grid)?;
        Ok(Realization { grid, members, limit })
    }

    pub fn label(&self) -> String {
        self.recipe.label()
    }
}

/// Members of a family on a common grid (`members[0]` is index 1).
#[derive(Clone, Debug)]
pub struct Realization {
    pub grid: Grid1D<f64>,
    pub members: Vec<Member>,
    pub limit: Potential,
}

impl Realization {
    pub fn toric_members(&self) -> Option<Vec<Potential>> {
        self.members.iter().map(|m| m.toric().cloned()).collect()
    }
}

fn sandwich_eps(decay: f64, j: usize) -> f64 {
    (-(j as f64) / decay).exp2()
}

fn cauchy_coefficient(j: usize) -> f64 {
    (-(j as f64) - 1.0).exp2()
}

/// The point `[1 : τ]`.
pub fn atom_point(tau: f64) -> SpherePoint {
    use num_complex::Complex64;
    SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), Complex64::new(tau, 0.0))
        .expect("nonzero homogeneous vector")
}

pub fn infty_tau(j: usize) -> f64 {
    (-(j as f64)).exp()
}

impl FamilyRecipe {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilyRecipe::Explicit { .. } => FamilyKind::ExplicitList,
            FamilyRecipe::Floored { inner, .. } => inner.kind(),
            _ => FamilyKind::Parametric,
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        match self {
            FamilyRecipe::Explicit { members, .. } => Some(members.len()),
            FamilyRecipe::Extraction { stages } => Some(*stages as usize),
            FamilyRecipe::Floored { inner, .. } => inner.max_index(),
            _ => None,
        }
    }

    pub fn is_toric(&self) -> bool {
        match self {
            FamilyRecipe::InftyAtoms => false,
            FamilyRecipe::Floored { inner, .. } => inner.is_toric(),
            _ => true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            FamilyRecipe::Constant { .. } => "constant".into(),
            FamilyRecipe::Shifted { offset, .. } => format!("shifted({offset})"),
            FamilyRecipe::MonotoneDecreasing { cap } => format!("monotone_decreasing(C={})", cap.label()),
            FamilyRecipe::Sandwich { .. } => "sandwich".into(),
            FamilyRecipe::Energy { eps, cap: Some(c) } => {
                format!("energy(eps={}, C={})", eps.label(), c.label())
            }
            FamilyRecipe::Energy { eps, cap: None } => format!("scaled_pole(eps={})", eps.label()),
            FamilyRecipe::Extraction { stages } => format!("extraction(stages={stages})"),
            FamilyRecipe::InftyAtoms => "infty_atoms".into(),
            FamilyRecipe::GeometricInterpolation { .. } => "geometric_interpolation".into(),
            FamilyRecipe::CauchyInterpolation => "cauchy_interpolation".into(),
            FamilyRecipe::Explicit { members, .. } => format!("explicit({})", members.len()),
            FamilyRecipe::Floored { inner, level } => format!("floored({}, -{level})", inner.label()),
        }
    }

    fn validate(&self, j_max: usize) -> Result<()> {
        if j_max == 0 {
            return Err(Error::Precondition("j_max must be at least 1".into()));
        }
        if let Some(m) = self.max_index() {
            if j_max > m {
                return Err(Error::Precondition(format!("family defines {m} members, {j_max} requested")));
            }
        }
        match self {
            FamilyRecipe::Constant { potential } | FamilyRecipe::GeometricInterpolation { potential } => {
                potential.validate()
            }
            FamilyRecipe::Shifted { potential, offset } => {
                if !offset.is_finite() {
                    return Err(Error::InvalidPotential("non-finite offset".into()));
                }
                potential.validate()
            }
            FamilyRecipe::MonotoneDecreasing { cap } => {
                for j in 1..=j_max {
                    PotentialRecipe::capped(1.0, cap.at(j)).validate()?;
                }
                Ok(())
            }
            FamilyRecipe::Sandwich { base_cap, lower_cap, decay } => {
                if !(*base_cap > 0.0 && *lower_cap > 0.0 && *decay > 0.0) || lower_cap < base_cap {
                    return Err(Error::InvalidPotential("sandwich needs 0 < base_cap <= lower_cap, decay > 0".into()));
                }
                Ok(())
            }
            FamilyRecipe::Energy { eps, cap } => {
                for j in 1..=j_max {
                    PotentialRecipe { scale: eps.at(j), cap: cap.as_ref().map(|c| c.at(j)), shift: 0.0 }.validate()?;
                }
                Ok(())
            }
            FamilyRecipe::Extraction { stages } => {
                if *stages == 0 {
                    return Err(Error::Precondition("extraction needs at least one stage".into()));
                }
                Ok(())
            }
            FamilyRecipe::InftyAtoms | FamilyRecipe::CauchyInterpolation => Ok(()),
            FamilyRecipe::Explicit { members, limit } => {
                limit.validate()?;
                for m in members {
                    if !m.grid.same_as(&limit.grid) {
                        return Err(Error::DomainMismatch("explicit members must share the limit's grid".into()));
                    }
                    m.validate()?;
                }
                Ok(())
            }
            FamilyRecipe::Floored { inner, level } => {
                if !(*level > 0.0 && level.is_finite()) {
                    return Err(Error::InvalidPotential(format!("floor level {level} must be positive")));
                }
                inner.validate(j_max)
            }
        }
    }

    fn kinks(&self, j_max: usize) -> Vec<f64> {
        let capped = |c: f64| pole_level(c);
        match self {
            FamilyRecipe::Constant { potential }
            | FamilyRecipe::Shifted { potential, .. }
            | FamilyRecipe::GeometricInterpolation { potential } => potential.kink().into_iter().collect(),
            FamilyRecipe::MonotoneDecreasing { cap } => (1..=j_max).map(|j| capped(cap.at(j))).collect(),
            FamilyRecipe::Sandwich { base_cap, lower_cap, .. } => vec![capped(*base_cap), capped(*lower_cap)],
            FamilyRecipe::Energy { cap: Some(cap), .. } => (1..=j_max).map(|j| capped(cap.at(j))).collect(),
            FamilyRecipe::Energy { cap: None, .. } => Vec::new(),
            FamilyRecipe::Extraction { .. } => (1..=j_max).map(|n| capped((n as f64).exp2())).collect(),
            FamilyRecipe::InftyAtoms => Vec::new(),
            FamilyRecipe::CauchyInterpolation => vec![capped(1.0)],
            FamilyRecipe::Explicit { .. } => Vec::new(),
            FamilyRecipe::Floored { inner, level } => {
                let mut k = inner.kinks(j_max);
                k.push(capped(*level));
                k
            }
        }
    }

    fn grid(&self, j_max: usize) -> Result<Grid1D<f64>> {
        match self {
            FamilyRecipe::Explicit { limit, .. } => Ok(limit.grid.clone()),
            FamilyRecipe::Floored { inner, .. } if matches!(**inner, FamilyRecipe::Explicit { .. }) => {
                inner.grid(j_max)
            }
            _ => {
                let mut kinks = self.kinks(j_max);
                if let FamilyRecipe::InftyAtoms = self.base() {
                    kinks.extend((1..=j_max).map(|j| infty_tau(j).ln()));
                }
                let lo = kinks.iter().copied().fold(-40.0f64, |a, k| a.min(k - 20.0));
                Grid1D::composite(FAMILY_FINE.0, FAMILY_FINE.1, FAMILY_H, lo, 40.0, &kinks)
            }
        }
    }

    fn base(&self) -> &FamilyRecipe {
        match self {
            FamilyRecipe::Floored { inner, .. } => inner.base(),
            other => other,
        }
    }

    fn member(&self, j: usize, grid: &Grid1D<f64>) -> Result<Member> {
        if j == 0 {
            return Err(Error::Precondition("family indices start at 1".into()));
        }
        let toric = |p: Result<Potential>| p.map(Member::Toric);
        match self {
            FamilyRecipe::Constant { potential } => toric(potential.realize(grid)),
            FamilyRecipe::Shifted { potential, offset } => toric(potential.realize(grid).map(|p| p.shifted(*offset))),
            FamilyRecipe::MonotoneDecreasing { cap } => toric(PotentialRecipe::capped(1.0, cap.at(j)).realize(grid)),
            FamilyRecipe::Sandwich { base_cap, lower_cap, decay } => {
                let phi = PotentialRecipe::capped(0.5, *base_cap).realize(grid)?;
                if j.is_multiple_of(2) {
                    return Ok(Member::Toric(phi));
                }
                let psi = PotentialRecipe::capped(1.0, *lower_cap).realize(grid)?;
                let e = sandwich_eps(*decay, j);
                toric(Potential::combination(&[(1.0 - e, &phi), (e, &psi)]))
            }
            FamilyRecipe::Energy { eps, cap } => toric(
                PotentialRecipe { scale: eps.at(j), cap: cap.as_ref().map(|c| c.at(j)), shift: 0.0 }.realize(grid),
            ),
            FamilyRecipe::Extraction { stages } => {
                if j > *stages as usize {
                    return Err(Error::Precondition(format!("stage {j} beyond the {stages} defined")));
                }
                let pole = Pole { point: NORTH, weight: (-(j as f64)).exp2() };
                toric(AtomPotential::new(vec![pole], 0.0, Some(-1.0))?.to_toric(grid))
            }
            FamilyRecipe::InftyAtoms => {
                let tau = infty_tau(j);
                Ok(Member::Atoms(AtomPotential::new(
                    vec![Pole { point: atom_point(tau), weight: 1.0 }],
                    0.5 * (tau * tau).ln_1p(),
                    None,
                )?))
            }
            FamilyRecipe::GeometricInterpolation { potential } => {
                let phi = potential.realize(grid)?;
                toric(Potential::combination(&[(1.0 - (-(j as f64)).exp2(), &phi)]))
            }
            FamilyRecipe::CauchyInterpolation => {
                let phi = PotentialRecipe::capped(0.5, 1.0).realize(grid)?;
                let c = cauchy_coefficient(j);
                if j % 2 == 1 {
                    toric(Potential::combination(&[(1.0 - c, &phi)]))
                } else {
                    let zeta = PotentialRecipe::capped(1.0, 1.0).realize(grid)?;
                    toric(Potential::combination(&[(1.0 - c, &phi), (c, &zeta)]))
                }
            }
            FamilyRecipe::Explicit { members, .. } => {
                let p = members
                    .get(j - 1)
                    .ok_or_else(|| Error::Precondition(format!("explicit family has no member {j}")))?;
                if !p.grid.same_as(grid) {
                    return Err(Error::DomainMismatch("explicit member on a different grid".into()));
                }
                Ok(Member::Toric(p.clone()))
            }
            FamilyRecipe::Floored { inner, level } => match inner.member(j, grid)? {
                Member::Toric(p) => Ok(Member::Toric(p.floored(-level))),
                Member::Atoms(mut a) => {
                    let floor = -level - a.shift;
                    a.floor = Some(a.floor.map_or(floor, |f| f.max(floor)));
                    Ok(Member::Atoms(a))
                }
            },
        }
    }

    fn limit(&self, grid: &Grid1D<f64>) -> Result<Potential> {
        match self {
            FamilyRecipe::Constant { potential }
            | FamilyRecipe::Shifted { potential, .. }
            | FamilyRecipe::GeometricInterpolation { potential } => potential.realize(grid),
            FamilyRecipe::MonotoneDecreasing { .. } | FamilyRecipe::InftyAtoms => {
                PotentialRecipe::pole(1.0).realize(grid)
            }
            FamilyRecipe::Sandwich { base_cap, .. } => PotentialRecipe::capped(0.5, *base_cap).realize(grid),
            FamilyRecipe::Energy { .. } | FamilyRecipe::Extraction { .. } => Ok(Potential::constant(grid, 0.0)),
            FamilyRecipe::CauchyInterpolation => PotentialRecipe::capped(0.5, 1.0).realize(grid),
            FamilyRecipe::Explicit { limit, .. } => {
                if !limit.grid.same_as(grid) {
                    return Err(Error::DomainMismatch("explicit limit on a different grid".into()));
                }
                Ok(limit.clone())
            }
            FamilyRecipe::Floored { inner, level } => Ok(inner.limit(grid)?.floored(-level)),
        }
    }
}

/// For the atom family: a set of the form `(-∞, b]` containing
/// `{|φ_j - g| >= δ}`, or `None` when no such bound is available.
///
/// Writing `x = [1 : w]`, `φ_j - g = log|1 - τ/w| + ½ log(1 + τ²)`. With
/// `R = 1 / (1 - e^{-δ/2})` and `τ² <= δ`, `|w| >= Rτ` forces the first term
/// below `δ/2` in absolute value and the second is at most `τ²/2 <= δ/2`.
/// Flooring both sides only shrinks the deviation.
pub fn infty_deviation_bound(j: usize, delta: f64) -> Option<IntervalSet<f64>> {
    let tau = infty_tau(j);
    if !(delta > 0.0) || tau * tau > delta {
        return None;
    }
    let r = 1.0 / (-(-delta / 2.0).exp_m1());
    IntervalSet::single(f64::NEG_INFINITY, (r * tau).ln()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_level_inverts_green() {
        for &c in &[0.1, 1.0, 7.5, 4096.0] {
            let t = pole_level(c);
            assert!((pole_green(t) + c).abs() < 1e-12 * c.max(1.0));
        }
    }

    #[test]
    fn recipes_realize_their_closed_forms() {
        let g = Grid1D::composite(-10.0, 10.0, 0.05, -50.0, 40.0, &[pole_level(3.0)]).unwrap();
        let r = PotentialRecipe { scale: 0.4, cap: Some(3.0), shift: -0.2 };
        let p = r.realize(&g).unwrap();
        for &t in &[-45.0, -3.1, 0.0, 2.5, 30.0] {
            assert!((p.eval_phi(t) - r.eval(t)).abs() < 1e-9);
        }
        assert!(p.is_bounded());
        let q = PotentialRecipe::pole(0.25).realize(&g).unwrap();
        assert_eq!(q.lelong_numbers(), (0.25, 0.0));
    }

    #[test]
    fn sandwich_members_sit_between_bounds() {
        let fam = SequenceFamily::sandwich();
        let re = fam.realize(9).unwrap();
        let phi = re.limit.phi_values();
        let psi = PotentialRecipe::capped(1.0, 6.0).realize(&re.grid).unwrap().phi_values();
        for (j, m) in re.members.iter().enumerate() {
            let e = sandwich_eps(3.0, j + 1);
            let v = m.toric().unwrap().phi_values();
            for i in 0..v.len() {
                assert!(v[i] >= (1.0 - e) * phi[i] + e * psi[i] - 1e-12);
                assert!(v[i] <= phi[i] + 1e-12);
            }
        }
    }

    #[test]
    fn extraction_members_are_floored_scaled_poles() {
        let fam = SequenceFamily::extraction(12);
        let g = fam.grid(12).unwrap();
        let m = fam.member(12, &g).unwrap();
        let p = m.toric().unwrap();
        assert!(p.is_bounded());
        let t = pole_level(4096.0);
        assert!((p.eval_phi(t) + 1.0).abs() < 1e-9);
        assert!((p.eval_phi(-100.0) - pole_green(-100.0) / 4096.0).abs() < 1e-9);
    }

    #[test]
    fn infty_atoms_approach_the_pole() {
        let fam = SequenceFamily::infty_atoms();
        let g = fam.grid(8).unwrap();
        let Member::Atoms(a) = fam.member(8, &g).unwrap() else { panic!("atom member expected") };
        let x = atom_point(1.0);
        let limit = pole_green(0.0);
        assert!((a.eval(x) - limit).abs() < 1e-3);
        let b = infty_deviation_bound(8, 0.1).unwrap();
        assert!(b.intervals()[0].1 < -4.5);
    }

    #[test]
    fn recipes_round_trip_through_json() {
        for fam in [
            SequenceFamily::sandwich(),
            SequenceFamily::energy(Rate::Geometric { ratio: 0.5 }, Rate::Linear),
            SequenceFamily::extraction(10).floored(5.0),
            SequenceFamily::infty_atoms(),
        ] {
            let s = serde_json::to_string(&fam).unwrap();
            let back: SequenceFamily = serde_json::from_str(&s).unwrap();
            assert_eq!(back, fam);
        }
    }
}
