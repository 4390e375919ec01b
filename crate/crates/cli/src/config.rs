//! Experiment configuration, schema version 1.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "model": "toric1d",
//!   "seed": 7,
//!   "experiment": { "classify": { "family": { "recipe": { "family": "sandwich", ... } }, "j_max": 64 } }
//! }
//! ```
//!
//! `experiment` holds exactly one of `envelope`, `ma`, `capacity`, `energy`,
//! `distance`, `classify`, `extract`, `solve`, `sweep`, `acceptance`
//! (also accepted under the key `paper_suite`).
//! Potentials are written per model: `{"toric1d": {scale, cap, shift}}`,
//! `{"atoms_p1": {atoms, shift, floor}}` or `{"toric2d": {pieces}}`.

use std::path::{Path, PathBuf};

use pshlab::atoms_p1::{AtomPotential, SpherePoint};
use pshlab::lab::{PotentialRecipe, SequenceFamily, Status};
use pshlab::measure::{Grid1D, Weight, WeightSpec};
use pshlab::toric1d::{CapacityMethod, IntervalSet, LP_MAX_NODES};
use pshlab::PlanePotential;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Toric1d,
    AtomsP1,
    Toric2d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory; `--out` and `PSHLAB_OUT` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Envelope(EnvelopeParams),
    Ma(MaParams),
    Capacity(CapacityParams),
    Energy(EnergyParams),
    Distance(DistanceParams),
    Classify(ClassifyParams),
    Extract(ExtractParams),
    Solve(SolveParams),
    Sweep(SweepParams),
    #[serde(alias = "paper_suite")]
    Acceptance(SuiteParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Envelope(_) => "envelope",
            Experiment::Ma(_) => "ma",
            Experiment::Capacity(_) => "capacity",
            Experiment::Energy(_) => "energy",
            Experiment::Distance(_) => "distance",
            Experiment::Classify(_) => "classify",
            Experiment::Extract(_) => "extract",
            Experiment::Solve(_) => "solve",
            Experiment::Sweep(_) => "sweep",
            Experiment::Acceptance(_) => "acceptance",
        }
    }
}

/// Uniform grid of the log coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_min: -20.0, t_max: 20.0, n_nodes: 801 }
    }
}

impl GridSpec {
    pub fn build(&self) -> pshlab::Result<Grid1D<f64>> {
        Grid1D::uniform(self.t_min, self.t_max, self.n_nodes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Toric1d(PotentialRecipe),
    AtomsP1(AtomPotential),
    Toric2d(PlanePotential),
}

impl PotentialSpec {
    fn model(&self) -> Model {
        match self {
            PotentialSpec::Toric1d(_) => Model::Toric1d,
            PotentialSpec::AtomsP1(_) => Model::AtomsP1,
            PotentialSpec::Toric2d(_) => Model::Toric2d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeParams {
    /// The envelope of the pointwise minimum of these.
    pub obstacles: Vec<PotentialSpec>,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaParams {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    LinearProgram,
    #[default]
    Extremal,
    /// Both routes, checked against each other.
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<CapacityMethod> {
        match self {
            MethodChoice::LinearProgram => vec![CapacityMethod::LinearProgram],
            MethodChoice::Extremal => vec![CapacityMethod::Extremal],
            MethodChoice::Both => vec![CapacityMethod::LinearProgram, CapacityMethod::Extremal],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    pub center: [f64; 3],
    /// Chordal radius.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    /// Unions of `t`-intervals (toric1d); endpoints may be `null` for `∓∞`.
    #[serde(default)]
    pub sets: Vec<Vec<(Option<f64>, Option<f64>)>>,
    /// Chordal caps (atoms_p1).
    #[serde(default)]
    pub caps: Vec<CapSpec>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default)]
    pub grid: GridSpec,
}

fn default_chi() -> WeightSpec {
    WeightSpec::Power { p: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub potentials: Vec<PotentialSpec>,
    #[serde(default = "default_chi")]
    pub chi: WeightSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceParams {
    pub pairs: Vec<(PotentialSpec, PotentialSpec)>,
    #[serde(default = "default_chi")]
    pub chi: WeightSpec,
    #[serde(default)]
    pub grid: GridSpec,
}

fn default_deltas() -> Vec<f64> {
    vec![0.5, 0.1, 0.02]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub family: SequenceFamily,
    pub j_max: usize,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_chi")]
    pub chi: WeightSpec,
    /// Verdicts the run is checked against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<ExpectedVerdicts>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedVerdicts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasi_monotone: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<Status>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractMethod {
    QuasiMonotone,
    Cauchy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractParams {
    pub family: SequenceFamily,
    pub j_max: usize,
    pub method: ExtractMethod,
    #[serde(default = "default_chi")]
    pub chi: WeightSpec,
}

/// `exp(-((t - center) / width)^2)` scaled by `weight` before normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMass {
    pub location: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Smooth bumps normalized to mass `1 - Σ atoms`.
    Explicit {
        bumps: Vec<Bump>,
        #[serde(default)]
        atoms: Vec<PointMass>,
    },
    /// Drawn from the run seed.
    Random,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    pub measure: MeasureSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    /// `I_χ(ε max(g, -C), 0)` over the product of these lists.
    pub eps: Vec<f64>,
    pub caps: Vec<f64>,
    #[serde(default = "default_chi")]
    pub chi: WeightSpec,
    /// Fixed grid for every point; absent means each point gets a grid wide
    /// enough for its cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    /// Criterion numbers; all eleven when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<usize>>,
}

/// Parses and validates; errors carry the field path and position.
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column()))
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("at `{field}`: {msg}"))
}

fn check_grid(field: &str, g: &GridSpec) -> Result<(), CliError> {
    g.build().map(|_| ()).map_err(|e| bad(field, e))
}

fn check_chi(field: &str, chi: &WeightSpec) -> Result<(), CliError> {
    Weight::<f64>::from_spec(chi).map(|_| ()).map_err(|e| bad(field, e))
}

fn check_potentials<'a>(
    field: &str,
    model: Model,
    specs: impl IntoIterator<Item = &'a PotentialSpec>,
) -> Result<(), CliError> {
    for (i, p) in specs.into_iter().enumerate() {
        if p.model() != model {
            return Err(bad(&format!("{field}[{i}]"), format!("a {:?} potential in a {model:?} run", p.model())));
        }
        let r = match p {
            PotentialSpec::Toric1d(r) => r.validate(),
            PotentialSpec::AtomsP1(a) => a.validate(),
            PotentialSpec::Toric2d(_) => Ok(()),
        };
        r.map_err(|e| bad(&format!("{field}[{i}]"), e))?;
    }
    Ok(())
}

fn check_family(field: &str, model: Model, family: &SequenceFamily, j_max: usize) -> Result<(), CliError> {
    family.validate(j_max).map_err(|e| bad(field, e))?;
    let want = if family.is_toric() { Model::Toric1d } else { Model::AtomsP1 };
    if model != want {
        return Err(bad("model", format!("family `{}` runs in the {want:?} model", family.label())));
    }
    Ok(())
}

fn only(model: Model, allowed: &[Model], experiment: &str) -> Result<(), CliError> {
    if allowed.contains(&model) {
        Ok(())
    } else {
        Err(bad("model", format!("experiment `{experiment}` is not available for the {model:?} model")))
    }
}

/// Semantic checks beyond the schema: resolvable recipes, valid weights and
/// grids, model support.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(bad("schema_version", format!("expected {SCHEMA_VERSION}, got {}", cfg.schema_version)));
    }
    let m = cfg.model;
    let name = cfg.experiment.name();
    let f = |s: &str| format!("experiment.{name}.{s}");
    match &cfg.experiment {
        Experiment::Envelope(p) => {
            if p.obstacles.is_empty() {
                return Err(bad(&f("obstacles"), "at least one obstacle is required"));
            }
            check_potentials(&f("obstacles"), m, &p.obstacles)?;
            check_grid(&f("grid"), &p.grid)
        }
        Experiment::Ma(p) => {
            only(m, &[Model::Toric1d, Model::Toric2d], name)?;
            check_potentials(&f("potential"), m, [&p.potential])?;
            check_grid(&f("grid"), &p.grid)
        }
        Experiment::Capacity(p) => {
            only(m, &[Model::Toric1d, Model::AtomsP1], name)?;
            match m {
                Model::Toric1d if !p.caps.is_empty() => return Err(bad(&f("caps"), "caps need the atoms_p1 model")),
                Model::AtomsP1 if !p.sets.is_empty() => {
                    return Err(bad(&f("sets"), "interval sets need the toric1d model"))
                }
                _ => {}
            }
            if p.sets.is_empty() && p.caps.is_empty() {
                return Err(bad(&f("sets"), "nothing to measure"));
            }
            for (i, s) in p.sets.iter().enumerate() {
                interval_set(s).map_err(|e| bad(&f(&format!("sets[{i}]")), e))?;
                // endpoints become extra nodes
                if p.method != MethodChoice::Extremal && p.grid.n_nodes + 2 * s.len() > LP_MAX_NODES {
                    return Err(bad(
                        &f("grid.n_nodes"),
                        format!("the linear program takes at most {LP_MAX_NODES} nodes including set endpoints"),
                    ));
                }
            }
            for (i, c) in p.caps.iter().enumerate() {
                let ok = SpherePoint::new(c.center).is_ok() && c.radius > 0.0 && c.radius < 1.0;
                if !ok {
                    return Err(bad(&f(&format!("caps[{i}]")), "centre must be nonzero and radius in (0, 1)"));
                }
            }
            check_grid(&f("grid"), &p.grid)
        }
        Experiment::Energy(p) => {
            only(m, &[Model::Toric1d], name)?;
            check_potentials(&f("potentials"), m, &p.potentials)?;
            check_chi(&f("chi"), &p.chi)?;
            check_grid(&f("grid"), &p.grid)
        }
        Experiment::Distance(p) => {
            only(m, &[Model::Toric1d], name)?;
            check_potentials(&f("pairs"), m, p.pairs.iter().flat_map(|(a, b)| [a, b]))?;
            check_chi(&f("chi"), &p.chi)?;
            check_grid(&f("grid"), &p.grid)
        }
        Experiment::Classify(p) => {
            only(m, &[Model::Toric1d, Model::AtomsP1], name)?;
            check_family(&f("family"), m, &p.family, p.j_max)?;
            if p.deltas.is_empty() || p.deltas.iter().any(|d| !(*d > 0.0)) {
                return Err(bad(&f("deltas"), "need at least one positive delta"));
            }
            check_chi(&f("chi"), &p.chi)
        }
        Experiment::Extract(p) => {
            only(m, &[Model::Toric1d], name)?;
            check_family(&f("family"), m, &p.family, p.j_max)?;
            check_chi(&f("chi"), &p.chi)
        }
        Experiment::Solve(p) => {
            only(m, &[Model::Toric1d], name)?;
            if !(p.tol > 0.0) {
                return Err(bad(&f("tol"), "must be positive"));
            }
            if let MeasureSpec::Explicit { bumps, atoms } = &p.measure {
                let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();
                if bumps.is_empty() || bumps.iter().any(|b| !(b.width > 0.0 && b.weight > 0.0)) {
                    return Err(bad(&f("measure.explicit.bumps"), "need bumps with positive width and weight"));
                }
                if atoms.iter().any(|a| !(a.mass > 0.0 && a.location.is_finite())) || !(atom_mass < 1.0) {
                    return Err(bad(&f("measure.explicit.atoms"), "atom masses must be positive with total below 1"));
                }
            }
            check_grid(&f("grid"), &p.grid)
        }
        Experiment::Sweep(p) => {
            only(m, &[Model::Toric1d], name)?;
            if p.eps.is_empty() || p.eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
                return Err(bad(&f("eps"), "need values in (0, 1]"));
            }
            if p.caps.is_empty() || p.caps.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
                return Err(bad(&f("caps"), "need positive finite values"));
            }
            check_chi(&f("chi"), &p.chi)?;
            match &p.grid {
                Some(g) => check_grid(&f("grid"), g),
                None => Ok(()),
            }
        }
        Experiment::Acceptance(p) => {
            if let Some(ids) = &p.criteria {
                if ids.is_empty() || ids.iter().any(|&i| !(1..=pshlab::suite::CRITERIA.len()).contains(&i)) {
                    return Err(bad(&f("criteria"), "criterion numbers run from 1 to 11"));
                }
            }
            Ok(())
        }
    }
}

pub fn interval_set(s: &[(Option<f64>, Option<f64>)]) -> pshlab::Result<IntervalSet<f64>> {
    IntervalSet::new(s.iter().map(|&(a, b)| (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))).collect())
}
