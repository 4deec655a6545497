//! Scenario files and the batch runner behind the `dilate` binary.
//!
//! A scenario names an algebra, a module rank, optionally a semigroup with an
//! action, and exactly one source of a kernel: explicit values, a generator
//! recipe or a completely positive map. Tasks run in a fixed canonical order;
//! prerequisites are computed on demand and a failed prerequisite turns its
//! dependents into `TaskDependencyError` verdicts.

use std::collections::BTreeMap;
use std::path::Path;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{AlgebraElement, AlgebraShape, Seminorm};
use crate::error::{Error, Result};
use crate::generators;
use crate::io::{self, JsonMatrix, SCHEMA_VERSION};
use crate::kernel::{self, OperatorKernel};
use crate::linalg;
use crate::linearisation::{self, KVector, Linearisation, Representation, ReproducingSpace};
use crate::module::{gramian, AdjointableOp, ModuleVector};
use crate::semigroup::{validate_action, Action, StarSemigroup};
use crate::stinespring::{self, ApproximateUnitNet, CPMapSpec, Dilation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Validate,
    Hermitian,
    Psd,
    TwoPositive,
    Invariance,
    Dilate,
    Representation,
    B1,
    B2,
    Schwarz4,
    PosSchwarz,
    Krld,
    Mtop,
    Propagation,
    RkCheck,
    CpCheck,
    Stinespring,
    Strictness,
    Constants,
    Equivalence,
}

impl Task {
    pub const ALL: [Task; 20] = [
        Task::Validate,
        Task::Hermitian,
        Task::Psd,
        Task::TwoPositive,
        Task::Invariance,
        Task::Dilate,
        Task::Representation,
        Task::B1,
        Task::B2,
        Task::Schwarz4,
        Task::PosSchwarz,
        Task::Krld,
        Task::Mtop,
        Task::Propagation,
        Task::RkCheck,
        Task::CpCheck,
        Task::Stinespring,
        Task::Strictness,
        Task::Constants,
        Task::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Validate => "validate",
            Task::Hermitian => "hermitian",
            Task::Psd => "psd",
            Task::TwoPositive => "two_positive",
            Task::Invariance => "invariance",
            Task::Dilate => "dilate",
            Task::Representation => "representation",
            Task::B1 => "b1",
            Task::B2 => "b2",
            Task::Schwarz4 => "schwarz4",
            Task::PosSchwarz => "pos_schwarz",
            Task::Krld => "krld",
            Task::Mtop => "mtop",
            Task::Propagation => "propagation",
            Task::RkCheck => "rk_check",
            Task::CpCheck => "cp_check",
            Task::Stinespring => "stinespring",
            Task::Strictness => "strictness",
            Task::Constants => "constants",
            Task::Equivalence => "equivalence",
        }
    }

    pub fn prerequisites(self) -> &'static [Task] {
        match self {
            Task::Invariance => &[Task::Validate],
            Task::Dilate | Task::B2 | Task::PosSchwarz | Task::Krld => &[Task::Psd],
            Task::Representation => &[Task::Validate, Task::Dilate],
            Task::B1 => &[Task::Representation],
            Task::Propagation => &[Task::TwoPositive],
            Task::RkCheck | Task::Equivalence => &[Task::Dilate],
            Task::Stinespring => &[Task::CpCheck],
            _ => &[],
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse { path: "tasks".into(), message: format!("unknown task {s:?}") })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_psd_tol")]
    pub psd_tol: f64,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_rep_tol")]
    pub rep_tol: f64,
}

fn default_psd_tol() -> f64 {
    1e-10
}
fn default_rank_tol() -> f64 {
    1e-10
}
fn default_rep_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { psd_tol: default_psd_tol(), rank_tol: default_rank_tol(), rep_tol: default_rep_tol() }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self { psd_tol: tol, rank_tol: tol, rep_tol: tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SemigroupSpec {
    Table { mult: Vec<Vec<usize>>, star: Vec<usize>, #[serde(default)] unit: Option<usize> },
    Trivial,
    Cyclic { order: usize },
    Klein,
    Symmetric3,
    TwoElementSemilattice,
    UnionSemilattice,
    SaturatingShift { len: usize },
    TruncatedFreeStarMonoid { max_len: usize },
    MatrixUnits2,
    /// `Z_{2n}` acting partially on the window `{0, ..., n-1}`.
    IntegerWindow { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSpec {
    Table { table: Vec<Vec<Option<usize>>>, #[serde(default)] unital: bool },
    LeftRegular,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitKernel {
    pub points: usize,
    /// `values[x][y]` lists the components of `k(x, y)`.
    pub values: Vec<Vec<Vec<JsonMatrix>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    RandomPsd { points: usize, ranks: Vec<usize> },
    InvariantFromRep,
    Circulant { q: usize },
    Kms { a: f64, points: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    /// Falls back to the scenario seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Adds `delta` times the identity to `k(x, y)` and `k(y, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub x: usize,
    pub y: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    pub component: usize,
    pub row: usize,
    pub col: usize,
    /// `phi(E^component_{row,col})`, one matrix per codomain component.
    pub value: Vec<JsonMatrix>,
}

/// Maps into `L(A^m)` with `A` the scenario algebra and `m` its rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CpMapSource {
    Identity,
    Transpose,
    Depolarizing,
    RandomKraus { domain: AlgebraShape, count: usize },
    /// Values on matrix units; missing units map to zero.
    Explicit { domain: AlgebraShape, values: Vec<MapEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub algebra: AlgebraShape,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default)]
    pub semigroup: Option<SemigroupSpec>,
    #[serde(default)]
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub kernel: Option<ExplicitKernel>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub cp_map: Option<CpMapSource>,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Support of the seminorm used by constants and inequalities; defaults
    /// to every component.
    #[serde(default)]
    pub seminorm: Option<Seminorm>,
    /// Scalars `t_j` of the approximate unit `t_j 1` for `strictness`.
    #[serde(default)]
    pub net: Option<Vec<f64>>,
}

fn default_rank() -> usize {
    1
}
fn default_samples() -> usize {
    1000
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        io::read_versioned(path)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        io::from_versioned_str(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
    /// Informational result without a pass/fail meaning.
    Note,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    pub verdict: Verdict,
    pub payload: BTreeMap<String, Value>,
    pub error: Option<ErrorInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub library_version: String,
    pub kernel_hash: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub tasks: Vec<TaskReport>,
}

impl ScenarioReport {
    pub fn task(&self, t: Task) -> Option<&TaskReport> {
        self.tasks.iter().find(|r| r.task == t)
    }

    /// 0 when every verdict passes (notes included), 2 if any task errored,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.tasks.iter().any(|t| t.verdict == Verdict::Error) {
            2
        } else if self.tasks.iter().any(|t| t.verdict == Verdict::Fail) {
            1
        } else {
            0
        }
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        io::to_canonical_string(self)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_canonical(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        io::read_versioned(path)
    }
}

/// Exit code for a run that could not start.
pub const EXIT_ERROR: i32 = 2;

/// Deterministic per-task seed derived from the scenario seed.
pub fn task_seed(seed: u64, name: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}:{name}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn num(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

type Payload = BTreeMap<String, Value>;

struct Outcome {
    verdict: Verdict,
    payload: Payload,
}

fn outcome(passed: bool, payload: Payload) -> Result<Outcome> {
    Ok(Outcome { verdict: if passed { Verdict::Pass } else { Verdict::Fail }, payload })
}

macro_rules! payload {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = Payload::new();
        $( m.insert($k.to_string(), json!($v)); )*
        m
    }};
}

/// Largest ratio `lhs / rhs` minus `c`, skipping draws with `rhs = 0` and
/// `lhs = 0`; a positive `lhs` against a vanishing `rhs` counts as infinite.
fn ratio_excess(lhs: f64, rhs: f64, c: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs - c
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

struct Setup {
    semigroup: Option<StarSemigroup>,
    action: Option<Action>,
    kernel: OperatorKernel,
    phi: Option<CPMapSpec>,
}

fn build_semigroup(spec: &SemigroupSpec) -> Result<(StarSemigroup, Option<Action>)> {
    Ok(match spec {
        SemigroupSpec::Table { mult, star, unit } => (StarSemigroup::new(mult.clone(), star.clone(), *unit)?, None),
        SemigroupSpec::Trivial => (StarSemigroup::trivial(), None),
        SemigroupSpec::Cyclic { order } => {
            if *order == 0 {
                return Err(Error::Dimension("semigroup.order must be positive".into()));
            }
            (StarSemigroup::cyclic(*order), None)
        }
        SemigroupSpec::Klein => (StarSemigroup::klein(), None),
        SemigroupSpec::Symmetric3 => (StarSemigroup::symmetric3(), None),
        SemigroupSpec::TwoElementSemilattice => (StarSemigroup::two_element_semilattice(), None),
        SemigroupSpec::UnionSemilattice => (StarSemigroup::union_semilattice(), None),
        SemigroupSpec::SaturatingShift { len } => (StarSemigroup::saturating_shift(*len), None),
        SemigroupSpec::TruncatedFreeStarMonoid { max_len } => {
            if *max_len == 0 {
                return Err(Error::Dimension("semigroup.max_len must be positive".into()));
            }
            (StarSemigroup::truncated_free_star_monoid(*max_len), None)
        }
        SemigroupSpec::MatrixUnits2 => (StarSemigroup::matrix_units2(), None),
        SemigroupSpec::IntegerWindow { n } => {
            if *n == 0 {
                return Err(Error::Dimension("semigroup.n must be positive".into()));
            }
            let (sg, act) = Action::integer_window(*n);
            (sg, Some(act))
        }
    })
}

fn build_map(sc: &Scenario, source: &CpMapSource, rng: &mut ChaCha8Rng) -> Result<CPMapSpec> {
    let single = |what: &str| -> Result<usize> {
        if sc.rank != 1 || sc.algebra.num_components() != 1 {
            return Err(Error::Dimension(format!("cp_map.{what} needs a single-block algebra with rank 1")));
        }
        Ok(sc.algebra.dim(0))
    };
    match source {
        CpMapSource::Identity => {
            if sc.rank != 1 {
                return Err(Error::Dimension("cp_map.identity needs rank 1".into()));
            }
            Ok(CPMapSpec::identity(&sc.algebra))
        }
        CpMapSource::Transpose => Ok(CPMapSpec::transpose(single("transpose")?)),
        CpMapSource::Depolarizing => Ok(CPMapSpec::depolarizing(single("depolarizing")?)),
        CpMapSource::RandomKraus { domain, count } => {
            Ok(CPMapSpec::random_kraus(rng, domain, &sc.algebra, sc.rank, *count))
        }
        CpMapSource::Explicit { domain, values } => {
            let mut ops = vec![AdjointableOp::zero(&sc.algebra, sc.rank); domain.algebra_dim()];
            let units = stinespring::matrix_units(domain);
            for (n, e) in values.iter().enumerate() {
                let idx = units
                    .iter()
                    .position(|&u| u == (e.component, e.row, e.col))
                    .ok_or_else(|| Error::Dimension(format!("cp_map.values[{n}]: no such matrix unit")))?;
                ops[idx] = AdjointableOp::new(sc.algebra.clone(), sc.rank, e.value.iter().map(|m| m.0.clone()).collect())
                    .map_err(|err| Error::Dimension(format!("cp_map.values[{n}].value: {err}")))?;
            }
            CPMapSpec::new(domain.clone(), sc.algebra.clone(), sc.rank, ops)
        }
    }
}

fn setup(sc: &Scenario) -> Result<Setup> {
    if sc.schema_version != SCHEMA_VERSION {
        return Err(Error::VersionMismatch { expected: SCHEMA_VERSION, found: sc.schema_version });
    }
    if sc.rank == 0 {
        return Err(Error::Dimension("rank must be positive".into()));
    }
    if let Some(p) = &sc.seminorm {
        Seminorm::for_shape(&sc.algebra, p.support().iter().copied())?;
    }
    let sources = [sc.kernel.is_some(), sc.generator.is_some(), sc.cp_map.is_some()].iter().filter(|b| **b).count();
    if sources != 1 {
        return Err(Error::Parse {
            path: "kernel".into(),
            message: format!("exactly one of kernel, generator, cp_map is required, found {sources}"),
        });
    }
    let (semigroup, window) = match &sc.semigroup {
        Some(spec) => {
            let (sg, act) = build_semigroup(spec)?;
            (Some(sg), act)
        }
        None => (None, None),
    };
    let mut phi = None;
    let kernel = if let Some(k) = &sc.kernel {
        io::kernel_from_values(&sc.algebra, sc.rank, k.points, k.values.clone(), "kernel.values")?
    } else if let Some(g) = &sc.generator {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed.unwrap_or(sc.seed));
        match &g.kind {
            GeneratorKind::RandomPsd { points, ranks } => {
                generators::random_psd(&mut rng, &sc.algebra, sc.rank, *points, ranks)?
            }
            GeneratorKind::InvariantFromRep => {
                let sg = semigroup
                    .as_ref()
                    .ok_or_else(|| Error::Dimension("generator.invariant_from_rep needs a semigroup".into()))?;
                generators::invariant_from_rep(&mut rng, sg, &sc.algebra, sc.rank, sc.tolerances.rep_tol)?.kernel
            }
            GeneratorKind::Circulant { q } => {
                if *q == 0 {
                    return Err(Error::Dimension("generator.q must be positive".into()));
                }
                generators::circulant(&mut rng, &sc.algebra, sc.rank, *q)
            }
            GeneratorKind::Kms { a, points } => {
                if *points == 0 {
                    return Err(Error::Dimension("generator.points must be positive".into()));
                }
                generators::kms(&sc.algebra, sc.rank, *points, *a)
            }
        }
    } else {
        let source = sc.cp_map.as_ref().expect("counted above");
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(sc.seed, "cp_map"));
        let map = build_map(sc, source, &mut rng)?;
        let k = stinespring::kernel_of_map(&map);
        phi = Some(map);
        k
    };
    let kernel = match &sc.perturbation {
        Some(pt) => {
            if pt.x >= kernel.points() || pt.y >= kernel.points() {
                return Err(Error::Dimension("perturbation point out of range".into()));
            }
            let mut k = kernel;
            let bump = AdjointableOp::scalar(&sc.algebra, sc.rank, pt.delta.into());
            let xy = k.get(pt.x, pt.y).add(&bump)?;
            k.set(pt.x, pt.y, xy)?;
            if pt.x != pt.y {
                let yx = k.get(pt.y, pt.x).add(&bump)?;
                k.set(pt.y, pt.x, yx)?;
            }
            k
        }
        None => kernel,
    };
    let action = match (&semigroup, &sc.action, window) {
        (None, Some(_), _) => return Err(Error::Dimension("an action needs a semigroup".into())),
        (None, None, _) => None,
        (Some(_), None, Some(w)) => Some(w),
        (Some(sg), spec, _) => Some(match spec {
            Some(ActionSpec::Table { table, unital }) => Action::new(table.clone(), kernel.points(), *unital)?,
            Some(ActionSpec::Trivial) => Action::trivial(sg, kernel.points()),
            Some(ActionSpec::LeftRegular) | None => Action::left_regular(sg),
        }),
    };
    if let (Some(sg), Some(act)) = (&semigroup, &action) {
        if act.table().len() != sg.order() {
            return Err(Error::Dimension(format!("action has {} rows, semigroup order {}", act.table().len(), sg.order())));
        }
        if act.points() != kernel.points() {
            return Err(Error::Dimension(format!("action on {} points, kernel on {}", act.points(), kernel.points())));
        }
    }
    Ok(Setup { semigroup, action, kernel, phi })
}

struct Runner<'a> {
    sc: &'a Scenario,
    s: Setup,
    p: Seminorm,
    done: BTreeMap<Task, TaskReport>,
    lin: Option<Linearisation>,
    rep: Option<Representation>,
    dilation: Option<Dilation>,
}

impl<'a> Runner<'a> {
    fn rng(&self, t: Task) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(task_seed(self.sc.seed, t.name()))
    }

    fn tol(&self) -> Tolerances {
        self.sc.tolerances
    }

    fn k(&self) -> &OperatorKernel {
        &self.s.kernel
    }

    /// Runs `t` unless already done; `true` when it passed.
    fn ensure(&mut self, t: Task) -> bool {
        if !self.done.contains_key(&t) {
            let report = self.run_task(t);
            debug!("{}: {:?}", t.name(), report.verdict);
            self.done.insert(t, report);
        }
        self.done[&t].verdict == Verdict::Pass
    }

    fn run_task(&mut self, t: Task) -> TaskReport {
        for &pre in t.prerequisites() {
            if !self.ensure(pre) {
                let e = Error::TaskDependency { task: t.name().into(), prerequisite: pre.name().into() };
                return error_report(t, &e);
            }
        }
        match self.execute(t) {
            Ok(o) => TaskReport { task: t, verdict: o.verdict, payload: o.payload, error: None },
            Err(e) => error_report(t, &e),
        }
    }

    fn semigroup(&self) -> Result<(&StarSemigroup, &Action)> {
        match (&self.s.semigroup, &self.s.action) {
            (Some(sg), Some(act)) => Ok((sg, act)),
            _ => Err(Error::Dimension("task needs a semigroup".into())),
        }
    }

    fn phi(&self) -> Result<&CPMapSpec> {
        self.s.phi.as_ref().ok_or_else(|| Error::Dimension("task needs a cp_map".into()))
    }

    fn execute(&mut self, t: Task) -> Result<Outcome> {
        match t {
            Task::Validate => self.validate(),
            Task::Hermitian => {
                let r = self.k().hermitian_residual();
                outcome(self.k().is_hermitian(self.tol().psd_tol), payload! {"residual" => num(r)})
            }
            Task::Psd => {
                let ext = kernel::gram_spectrum_extremes(self.k());
                let lo: Vec<f64> = ext.iter().map(|e| e.0).collect();
                let hi: Vec<f64> = ext.iter().map(|e| e.1).collect();
                let passed = kernel::is_positive_semidefinite(self.k(), self.tol().psd_tol);
                outcome(passed, payload! {"min_eigenvalues" => nums(&lo), "max_eigenvalues" => nums(&hi)})
            }
            Task::TwoPositive => match kernel::two_positive_structure(self.k(), self.tol().psd_tol) {
                Ok(r) => outcome(
                    true,
                    payload! {
                        "degenerate" => r.degenerate,
                        "regular" => r.regular,
                        "hermitian_residual" => num(r.hermitian_residual),
                        "degenerate_row_residual" => num(r.degenerate_row_residual),
                    },
                ),
                Err(Error::NotTwoPositive { x, y }) => outcome(false, payload! {"failing_pair" => [x, y]}),
                Err(e) => Err(e),
            },
            Task::Invariance => {
                let (sg, act) = self.semigroup()?;
                let r = kernel::is_invariant(self.k(), sg, act, self.tol().psd_tol)?;
                outcome(
                    r.passed,
                    payload! {
                        "max_residual" => num(r.max_residual),
                        "violation" => r.violation.map(|(a, b, c)| vec![a, b, c]),
                        "checked" => r.checked,
                    },
                )
            }
            Task::Dilate => self.dilate(),
            Task::Representation => self.representation(),
            Task::B1 => self.b1(),
            Task::B2 => self.b2(),
            Task::Schwarz4 => self.schwarz4(),
            Task::PosSchwarz => self.pos_schwarz(),
            Task::Krld => self.krld(),
            Task::Mtop => self.mtop(),
            Task::Propagation => self.propagation(),
            Task::RkCheck => self.rk_check(),
            Task::Equivalence => self.equivalence(),
            Task::CpCheck => self.cp_check(),
            Task::Stinespring => self.stinespring(),
            Task::Strictness => self.strictness(),
            Task::Constants => self.constants(),
        }
    }

    fn validate(&mut self) -> Result<Outcome> {
        let mut pl = payload! {"points" => self.k().points()};
        let Some(sg) = &self.s.semigroup else {
            pl.insert("semigroup".into(), Value::Null);
            return outcome(true, pl);
        };
        pl.insert("order".into(), json!(sg.order()));
        let act = self.s.action.as_ref().expect("semigroup implies action");
        pl.insert("action_total".into(), json!(act.is_total()));
        let violation = match sg.validate() {
            Err(v) => Some(v.to_string()),
            Ok(()) => match validate_action(sg, act) {
                Ok(()) => None,
                Err(Error::InvalidSemigroup(v)) => Some(v.to_string()),
                Err(e) => return Err(e),
            },
        };
        pl.insert("group_with_inverse_star".into(), json!(violation.is_none() && sg.is_group_with_inverse_star()));
        let passed = violation.is_none();
        pl.insert("violation".into(), json!(violation));
        outcome(passed, pl)
    }

    fn dilate(&mut self) -> Result<Outcome> {
        let tol = self.tol().rank_tol;
        let lin = linearisation::kolmogorov(self.k(), tol)?;
        let gram = kernel::gram_block(self.k());
        let gnorm = gram.spectral_norm();
        let ranks: Vec<usize> = gram
            .components()
            .iter()
            .map(|g| {
                let (vals, _) = linalg::hermitian_eigen(g);
                let lmax = vals.first().copied().unwrap_or(0.0);
                vals.iter().filter(|&&v| lmax > 0.0 && v >= tol * lmax).count()
            })
            .collect();
        let residual = lin.reconstruction_residual(self.k())?;
        let bound = 10.0 * tol * gnorm.max(f64::MIN_POSITIVE);
        let dims = lin.dims();
        let passed = residual <= bound.max(1e-14) && dims == ranks;
        let pl = payload! {
            "dims" => dims,
            "total_dim" => lin.total_dim(),
            "gram_ranks" => ranks,
            "reconstruction_residual" => num(residual),
            "bound" => num(bound),
            "row_independence" => nums(&lin.row_independence()),
        };
        self.lin = Some(lin);
        outcome(passed, pl)
    }

    fn representation(&mut self) -> Result<Outcome> {
        let (sg, act) = self.semigroup()?;
        let lin = self.lin.as_ref().expect("dilate passed");
        let tol = self.tol().rep_tol;
        let rep = linearisation::induce_representation(lin, sg, act, tol)?;
        let r = linearisation::verify_star_rep(&rep, sg, tol)?;
        let inter = linearisation::intertwining_residual(lin, &rep, act);
        let unitary: Vec<f64> = (0..rep.order())
            .map(|xi| {
                rep.get(xi)
                    .iter()
                    .map(|u| linalg::spectral_norm(&(u.adjoint() * u - linalg::identity(u.nrows()))))
                    .fold(0.0, f64::max)
            })
            .collect();
        let passed = r.passed && inter <= tol;
        let pl = payload! {
            "multiplicative_residual" => num(r.multiplicative_residual),
            "adjoint_residual" => num(r.adjoint_residual),
            "worst_pair" => [r.worst_pair.0, r.worst_pair.1],
            "intertwining_residual" => num(inter),
            "isometry_defects" => nums(&unitary),
        };
        self.rep = Some(rep);
        outcome(passed, pl)
    }

    fn b1(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::B1);
        let (sg, act) = self.semigroup()?;
        let rep = self.rep.as_ref().expect("representation passed");
        let constants: Vec<f64> = (0..sg.order()).map(|xi| linearisation::b1_constant_exact(rep, xi, &self.p)).collect();
        let mut excess = f64::NEG_INFINITY;
        for _ in 0..self.sc.samples {
            let xi = rng.random_range(0..sg.order());
            let (pts, hs) = generators::random_support(&mut rng, self.k(), 4);
            let (lhs, rhs) = linearisation::b1_sides(self.k(), act, xi, &pts, &hs, &self.p)?;
            excess = excess.max(ratio_excess(lhs, rhs, constants[xi]));
        }
        let group = sg.is_group_with_inverse_star();
        let deviation = constants.iter().map(|c| (c - 1.0).abs()).fold(0.0, f64::max);
        let passed = excess <= 1e-8 && (!group || deviation <= 1e-10);
        outcome(
            passed,
            payload! {
                "seminorm" => self.p.support(),
                "constants" => nums(&constants),
                "max_ratio_excess" => num(excess),
                "group_with_inverse_star" => group,
                "unit_deviation" => if group { num(deviation) } else { Value::Null },
            },
        )
    }

    fn b2(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::B2);
        let tol = self.tol().psd_tol;
        let n = self.k().points();
        let constants: Vec<f64> = (0..n).map(|x| kernel::b2_constant(self.k(), x, &self.p, tol)).collect::<Result<_>>()?;
        let mut excess = f64::NEG_INFINITY;
        for _ in 0..self.sc.samples {
            let x = rng.random_range(0..n);
            let (pts, hs) = generators::random_support(&mut rng, self.k(), 4);
            let (lhs, rhs) = kernel::b2_sides(self.k(), x, &pts, &hs, &self.p)?;
            excess = excess.max(ratio_excess(lhs, rhs, constants[x]));
        }
        outcome(
            excess <= 1e-8,
            payload! {"seminorm" => self.p.support(), "constants" => nums(&constants), "max_ratio_excess" => num(excess)},
        )
    }

    fn schwarz4(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Schwarz4);
        let (shape, m) = (self.sc.algebra.clone(), self.sc.rank);
        let (mut m4, mut m1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..self.sc.samples {
            let e = ModuleVector::random(&mut rng, &shape, m);
            let f = ModuleVector::random(&mut rng, &shape, m);
            let lhs = self.p.eval(&gramian(&e, &f)?);
            let rhs = (self.p.eval(&gramian(&e, &e)?) * self.p.eval(&gramian(&f, &f)?)).sqrt();
            m4 = m4.max((lhs - 4.0 * rhs) / (1.0 + rhs));
            m1 = m1.max((lhs - rhs) / (1.0 + rhs));
        }
        outcome(
            m4 <= 1e-10 && m1 <= 1e-10,
            payload! {"max_margin_constant_4" => num(m4), "max_margin_constant_1" => num(m1)},
        )
    }

    fn pos_schwarz(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::PosSchwarz);
        let tol = self.tol().psd_tol;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..self.sc.samples {
            let x = rng.random_range(0..self.k().points());
            let t = self.k().get(x, x);
            let h = ModuleVector::random(&mut rng, self.k().shape(), self.k().rank());
            let v = kernel::pos_schwarz_check(t, &self.p, std::slice::from_ref(&h), tol)?;
            let scale = 1.0 + self.p.eval(&gramian(&t.apply(&h)?, &h)?);
            worst = worst.max(v / scale);
        }
        outcome(worst <= 1e-10, payload! {"max_violation" => num(worst)})
    }

    fn krld(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Krld);
        let tol = self.tol().psd_tol;
        let n = self.k().points();
        let constants: Vec<f64> =
            (0..n).map(|x| kernel::krld_constant(self.k().get(x, x), &self.p, tol)).collect::<Result<_>>()?;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..self.sc.samples {
            let x = rng.random_range(0..n);
            let h = ModuleVector::random(&mut rng, self.k().shape(), self.k().rank());
            let lhs = self.p.eval(&gramian(&self.k().get(x, x).apply(&h)?, &h)?);
            let rhs = constants[x] * self.p.eval(&gramian(&h, &h)?);
            worst = worst.max((lhs - rhs) / (1.0 + rhs));
        }
        outcome(worst <= 1e-10, payload! {"constants" => nums(&constants), "max_violation" => num(worst)})
    }

    fn mtop(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Mtop);
        let n = self.k().points();
        let per = (self.sc.samples / n).max(1);
        let mut d = Vec::with_capacity(n);
        let mut worst = 0.0f64;
        for x in 0..n {
            let hs: Vec<ModuleVector> =
                (0..per).map(|_| ModuleVector::random(&mut rng, self.k().shape(), self.k().rank())).collect();
            let w = kernel::mtop_witness(self.k().get(x, x), &self.p, 8, &hs)?;
            d.push(w.d_p);
            worst = worst.max(w.max_residual);
        }
        outcome(worst <= 1e-8, payload! {"d_p" => nums(&d), "n_max" => 8, "max_residual" => num(worst)})
    }

    fn propagation(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Propagation);
        let tol = self.tol().psd_tol;
        let n = self.k().points();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..self.sc.samples {
            let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
            let h = ModuleVector::random(&mut rng, self.k().shape(), self.k().rank());
            let pr = kernel::propagation_unchecked(self.k(), x, y, &self.p, std::slice::from_ref(&h), tol)?;
            let scale = 1.0 + pr.c * self.p.eval(&gramian(&h, &h)?);
            worst = worst.max(pr.max_violation / scale);
        }
        outcome(worst <= 1e-10, payload! {"max_violation" => num(worst)})
    }

    fn rk_check(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::RkCheck);
        let lin = self.lin.clone().expect("dilate passed");
        let rk = ReproducingSpace::new(&lin, self.k())?;
        let n = self.k().points();
        let draws = self.sc.samples.min(100);
        let (mut rk3, mut range) = (0.0f64, 0.0f64);
        let mut hs = Vec::new();
        for _ in 0..draws {
            let f = rk.element(&KVector::random(&mut rng, &lin))?;
            let x = rng.random_range(0..n);
            let h = ModuleVector::random(&mut rng, self.k().shape(), self.k().rank());
            rk3 = rk3.max(rk.reproducing_residual(&f, x, &h)?);
            range = range.max(rk.range_residual(&rk.kernel_section(x, &h)?));
            if hs.len() < 3 {
                hs.push(h);
            }
        }
        let eval = (0..n).map(|x| rk.evaluation_adjoint_residual(x)).fold(0.0, f64::max);
        let rho = if self.s.action.as_ref().is_some_and(Action::is_total) && self.ensure(Task::Representation) {
            let act = self.s.action.as_ref().expect("checked");
            Some(rk.rho_intertwining_residual(self.rep.as_ref().expect("passed"), act, &hs)?)
        } else {
            None
        };
        let scale = 1.0 + kernel::gram_block(self.k()).spectral_norm();
        let passed = rk3 <= 1e-10 * scale
            && eval <= 1e-10 * scale
            && range <= 1e-10 * scale
            && rho.is_none_or(|r| r <= self.tol().rep_tol * scale);
        outcome(
            passed,
            payload! {
                "reproducing_residual" => num(rk3),
                "evaluation_adjoint_residual" => num(eval),
                "range_residual" => num(range),
                "rho_intertwining_residual" => rho.map(num),
                "scale" => num(scale),
            },
        )
    }

    fn equivalence(&mut self) -> Result<Outcome> {
        let lin = self.lin.clone().expect("dilate passed");
        let other = linearisation::kolmogorov_pivoted_cholesky(self.k(), self.tol().rank_tol)?;
        let with_rep = self.s.action.as_ref().is_some_and(Action::is_total) && self.ensure(Task::Representation);
        let other_rep = if with_rep {
            let (sg, act) = self.semigroup()?;
            Some(linearisation::induce_representation(&other, sg, act, self.tol().rep_tol)?)
        } else {
            None
        };
        let reps = match (&self.rep, &other_rep) {
            (Some(a), Some(b)) if with_rep => Some((a, b)),
            _ => None,
        };
        let mut pl = payload! {"dims" => lin.dims(), "cholesky_dims" => other.dims()};
        match linearisation::unitary_equivalence(&lin, &other, reps, self.tol().rep_tol) {
            Ok(eq) => {
                pl.insert("isometry_residual".into(), num(eq.isometry_residual));
                pl.insert("coisometry_residual".into(), num(eq.coisometry_residual));
                pl.insert("intertwining_residual".into(), num(eq.intertwining_residual));
                pl.insert("representation_residual".into(), json!(eq.representation_residual.map(num)));
                outcome(true, pl)
            }
            Err(Error::NotEquivalent(msg)) => {
                pl.insert("reason".into(), json!(msg));
                outcome(false, pl)
            }
            Err(e) => Err(e),
        }
    }

    fn cp_check(&mut self) -> Result<Outcome> {
        let phi = self.phi()?;
        let tol = self.tol().psd_tol;
        let kernel_psd = stinespring::is_completely_positive(phi, tol);
        let mut mins = Vec::new();
        let mut choi_psd = true;
        for c in 0..phi.domain().num_components() {
            let mut row = Vec::new();
            for i in 0..phi.codomain().num_components() {
                let ch = stinespring::choi_matrix(phi, c, i);
                choi_psd &= linalg::is_psd(&ch, tol);
                row.push(num(linalg::eig_range(&ch).0));
            }
            mins.push(Value::Array(row));
        }
        outcome(
            kernel_psd && choi_psd,
            payload! {"kernel_psd" => kernel_psd, "choi_psd" => choi_psd, "oracles_agree" => kernel_psd == choi_psd, "choi_min_eigenvalues" => mins},
        )
    }

    fn stinespring(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Stinespring);
        let phi = self.phi()?.clone();
        let tol = self.tol();
        let dil = stinespring::stinespring_dilate(&phi, tol.rank_tol)?;
        let basis = dil.basis_residual(&phi)?;
        let samples: Vec<AlgebraElement> =
            (0..self.sc.samples.min(100)).map(|_| AlgebraElement::random(&mut rng, phi.domain())).collect();
        let random = dil.dilation_residual(&phi, &samples)?;
        let w = dil.w_residual(&phi);
        let unital = dil.unital_residual();
        let choi = stinespring::choi_ranks(&phi, tol.rank_tol);
        let mult = dil.multiplicities(tol.rep_tol);
        let cyclic = dil.cyclic_ranks(tol.rep_tol);
        let star = linearisation::verify_star_rep(&dil.representation, &stinespring::matrix_unit_semigroup(phi.domain()), tol.rep_tol)?;
        let other = stinespring::stinespring_dilate_cholesky(&phi, tol.rank_tol)?;
        let eq = linearisation::unitary_equivalence(
            &dil.linearisation,
            &other.linearisation,
            Some((&dil.representation, &other.representation)),
            tol.rep_tol,
        );
        let scale = 1.0 + phi.unit_image().components().iter().map(linalg::spectral_norm).fold(0.0, f64::max);
        let passed = basis <= 1e-8 * scale
            && random <= 1e-8 * scale
            && w <= 1e-10 * scale
            && mult == choi
            && cyclic == dil.dims()
            && star.passed
            && eq.is_ok();
        let pl = payload! {
            "dims" => dil.dims(),
            "choi_ranks" => choi,
            "multiplicities" => mult,
            "cyclic_ranks" => cyclic,
            "basis_residual" => num(basis),
            "random_residual" => num(random),
            "w_residual" => num(w),
            "unital_residual" => num(unital),
            "consistency_residual" => num(dil.consistency_residual),
            "multiplicative_residual" => num(star.multiplicative_residual),
            "adjoint_residual" => num(star.adjoint_residual),
            "equivalent_to_cholesky_route" => eq.is_ok(),
        };
        self.dilation = Some(dil);
        outcome(passed, pl)
    }

    fn strictness(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Strictness);
        let phi = self.phi()?.clone();
        let steps = self.sc.net.clone().unwrap_or_else(|| vec![0.5, 0.75, 1.0, 1.0]);
        let net = ApproximateUnitNet::scalar_staircase(phi.domain(), &steps, self.tol().psd_tol)?;
        let hs: Vec<ModuleVector> =
            (0..self.sc.samples.min(50)).map(|_| ModuleVector::random(&mut rng, phi.codomain(), phi.rank())).collect();
        let r = stinespring::strictness_check(&phi, &net, &self.p, &hs, self.tol().psd_tol)?;
        Ok(Outcome {
            verdict: Verdict::Note,
            payload: payload! {"gaps" => nums(&r.gaps), "tail_index" => r.tail_index, "note" => r.note},
        })
    }

    fn constants(&mut self) -> Result<Outcome> {
        let mut rng = self.rng(Task::Constants);
        let phi = self.phi()?.clone();
        let cc = stinespring::continuity_constants(&phi, &self.p, self.tol().psd_tol);
        let mut worst = f64::NEG_INFINITY;
        let samples: Vec<AlgebraElement> =
            (0..self.sc.samples.min(200)).map(|_| AlgebraElement::random(&mut rng, phi.domain())).collect();
        for b in &samples {
            let lhs = phi.apply(b)?.seminorm(&self.p);
            worst = worst.max(lhs - cc.d_p * cc.r.eval(b));
        }
        let mut pl = payload! {
            "r" => cc.r.support(),
            "d_p" => num(cc.d_p),
            "exact" => cc.exact,
            "max_violation" => num(worst),
        };
        let mut passed = worst <= 1e-10 * (1.0 + cc.d_p);
        if cc.exact {
            let dil = match self.dilation.take() {
                Some(d) => d,
                None => stinespring::stinespring_dilate(&phi, self.tol().rank_tol)?,
            };
            let q = stinespring::representation_quotient(&dil, &self.p)?;
            let mut rep_worst = f64::NEG_INFINITY;
            for b in &samples {
                let pb = dil.pi(b);
                let lhs = self.p.max_over(|i| linalg::spectral_norm(&pb[i]));
                rep_worst = rep_worst.max(lhs - q.d_p * cc.r.eval(b));
            }
            passed &= rep_worst <= 1e-10 * (1.0 + q.d_p)
                && q.multiplicative_residual <= self.tol().rep_tol
                && q.adjoint_residual <= self.tol().rep_tol;
            pl.insert("representation_d_p".into(), num(q.d_p));
            pl.insert("representation_max_violation".into(), num(rep_worst));
            pl.insert("quotient_multiplicative_residual".into(), num(q.multiplicative_residual));
            self.dilation = Some(dil);
        }
        outcome(passed, pl)
    }
}

fn error_report(t: Task, e: &Error) -> TaskReport {
    TaskReport {
        task: t,
        verdict: Verdict::Error,
        payload: Payload::new(),
        error: Some(ErrorInfo { kind: e.kind().into(), message: e.to_string() }),
    }
}

/// Runs every requested task; setup problems (malformed tables, dimension
/// clashes) are returned as errors, task-level problems become verdicts.
pub fn run(sc: &Scenario) -> Result<ScenarioReport> {
    let s = setup(sc)?;
    let p = sc.seminorm.clone().unwrap_or_else(|| Seminorm::full(&sc.algebra));
    let hash = io::kernel_hash(&s.kernel);
    let mut runner = Runner { sc, s, p, done: BTreeMap::new(), lin: None, rep: None, dilation: None };
    let mut wanted: Vec<Task> = sc.tasks.clone();
    wanted.sort();
    wanted.dedup();
    for &t in &wanted {
        runner.ensure(t);
        info!("{}: {:?}", t.name(), runner.done[&t].verdict);
    }
    let tasks = wanted.iter().map(|t| runner.done[t].clone()).collect();
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            scenario: sc.name.clone(),
            seed: sc.seed,
            samples: sc.samples,
            tolerances: sc.tolerances,
            library_version: env!("CARGO_PKG_VERSION").into(),
            kernel_hash: Some(hash),
        },
        tasks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> Scenario {
        Scenario::from_json(text).unwrap()
    }

    #[test]
    fn trivial_scenario_passes() {
        let sc = scenario(
            r#"{"schema_version": 1, "algebra": [1], "kernel": {"points": 1, "values": [[[[[[1.0, 0.0]]]]]]},
                "tasks": ["dilate", "psd"]}"#,
        );
        let r = run(&sc).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.tasks[0].task, Task::Psd);
        let d = r.task(Task::Dilate).unwrap();
        assert_eq!(d.payload["dims"], json!([1]));
        assert_eq!(d.payload["reconstruction_residual"], json!(0.0));
    }

    #[test]
    fn failed_prerequisite_is_a_dependency_error() {
        let sc = scenario(
            r#"{"schema_version": 1, "algebra": [1],
                "kernel": {"points": 2, "values": [[[[[[1.0, 0.0]]]], [[[[2.0, 0.0]]]]], [[[[[2.0, 0.0]]]], [[[[1.0, 0.0]]]]]]},
                "tasks": ["dilate"]}"#,
        );
        let r = run(&sc).unwrap();
        let d = r.task(Task::Dilate).unwrap();
        assert_eq!(d.verdict, Verdict::Error);
        assert_eq!(d.error.as_ref().unwrap().kind, "TaskDependencyError");
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn unknown_task_is_a_parse_error() {
        let text = r#"{"schema_version": 1, "algebra": [1], "generator": {"kind": "kms", "a": 0.5, "points": 2}, "tasks": ["nope"]}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn two_kernel_sources_are_rejected() {
        let sc = scenario(
            r#"{"schema_version": 1, "algebra": [1], "generator": {"kind": "kms", "a": 0.5, "points": 2},
                "cp_map": {"kind": "identity"}, "tasks": ["psd"]}"#,
        );
        assert!(matches!(run(&sc), Err(Error::Parse { .. })));
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(1, "b1"), task_seed(1, "b2"));
        assert_eq!(task_seed(1, "b1"), task_seed(1, "b1"));
    }
}
