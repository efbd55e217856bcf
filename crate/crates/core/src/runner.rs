//! Campaign execution: resolve a chart, sample points, evaluate the
//! selected checks and invariants, and collect report records.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ambient::AmbientSpace;
use crate::catalog;
use crate::chart::Chart;
use crate::chartfile::load_chart_file;
use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::geometry::{point_geometry, PointGeom};
use crate::inequalities::{
    check_chen_type, check_corollary_c03, check_curvature_bound_form, check_holomorphic,
    check_mixed_scalar, check_supplement, check_theorem_v, d_minimality_diagnostic, CheckConfig,
};
use crate::invariants::{
    chen_delta, delta_h, delta_m, delta_m_aggregate, mixed_scalar_curvature, normalized_delta_bar,
    partitions, script_h, tau_full, InvariantConfig, InvariantValue, Sign,
};
use crate::linalg::dot;
use crate::report::{InvariantRecord, Payload, Record};
use crate::subspace::OptConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    Random { count: usize },
    Grid { per_axis: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog spec such as `sphere_in_Cq:2,1,2`, or `file:<path>`.
    pub chart: String,
    pub seed: u64,
    pub sampling: Sampling,
    pub checks: Vec<String>,
    pub invariants: Vec<String>,
    pub tol: ToleranceConfig,
    /// Optimizer settings; its `seed` is replaced by the run seed.
    pub opt: OptConfig,
    /// Oracle samples attached to each optimized invariant; zero disables.
    pub certify_samples: usize,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chart: String::new(),
            seed: 0,
            sampling: Sampling::Random { count: 9 },
            checks: Vec::new(),
            invariants: Vec::new(),
            tol: ToleranceConfig::default(),
            opt: OptConfig::default(),
            certify_samples: 0,
            jobs: 1,
            out: None,
            format: Format::Jsonl,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn check_config(&self) -> CheckConfig {
        CheckConfig {
            tol: self.tol,
            inv: InvariantConfig {
                opt: OptConfig {
                    seed: self.seed,
                    ..self.opt
                },
                certify_samples: self.certify_samples,
                ..InvariantConfig::default()
            },
        }
    }

    /// Structural validation that needs no chart.
    pub fn validate(&self) -> Result<()> {
        if self.chart.trim().is_empty() {
            return Err(Error::Config("no chart selected".into()));
        }
        match self.sampling {
            Sampling::Random { count: 0 } | Sampling::Grid { per_axis: 0 } => {
                return Err(Error::Config("sampling needs at least one point".into()))
            }
            _ => {}
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if self.checks.is_empty() && self.invariants.is_empty() {
            return Err(Error::Config(
                "select at least one check or invariant".into(),
            ));
        }
        let t = &self.tol;
        for (name, v) in [
            ("rank", t.rank),
            ("cr", t.cr),
            ("orthonormality", t.orthonormality),
            ("identity", t.identity),
            ("phi", t.phi),
            ("slack", t.slack),
            ("eq", t.eq),
            ("diag", t.diag),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerance `{name}` must be positive and finite"
                )));
            }
        }
        if t.cr >= 1.0 {
            return Err(Error::Config("tolerance `cr` must be below 1".into()));
        }
        if self.opt.restarts == 0 || self.opt.max_sweeps == 0 {
            return Err(Error::Config(
                "optimizer needs at least one restart and one sweep".into(),
            ));
        }
        if !(self.opt.floor >= 0.0) || !(self.opt.line_tol > 0.0) {
            return Err(Error::Config(
                "optimizer floor and line tolerance must be non-negative".into(),
            ));
        }
        for c in &self.checks {
            CheckSpec::parse(c)?;
        }
        for i in &self.invariants {
            InvariantSpec::parse(i)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    TheoremV,
    CurvatureBound,
    ChenType,
    Supplement,
    MixedScalar,
    Holomorphic,
    CorollaryC03,
    DMinimality,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::TheoremV,
        CheckKind::CurvatureBound,
        CheckKind::ChenType,
        CheckKind::Supplement,
        CheckKind::MixedScalar,
        CheckKind::Holomorphic,
        CheckKind::CorollaryC03,
        CheckKind::DMinimality,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CheckKind::TheoremV => "theorem_V",
            CheckKind::CurvatureBound => "curvature_bound",
            CheckKind::ChenType => "chen_type",
            CheckKind::Supplement => "supplement",
            CheckKind::MixedScalar => "mixed_scalar",
            CheckKind::Holomorphic => "holomorphic",
            CheckKind::CorollaryC03 => "corollary_C03",
            CheckKind::DMinimality => "d_minimality",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    fn needs_flat(self) -> bool {
        matches!(self, CheckKind::CorollaryC03 | CheckKind::DMinimality)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CheckParam {
    Default,
    Sizes(Vec<usize>),
    K(usize),
}

/// A parsed `--check` selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckSpec {
    kinds: Vec<CheckKind>,
    param: CheckParam,
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let v = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::Config(format!("invalid block size `{p}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(v)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid {what} `{s}`")))
}

impl CheckSpec {
    /// `all`, `<id>` or `<id>:<param>` where the parameter is a block-size
    /// list for the tuple checks and `k` for `supplement` and `holomorphic`.
    pub fn parse(s: &str) -> Result<Self> {
        let (id, param) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b)),
            None => (s.trim(), None),
        };
        if id == "all" {
            if param.is_some() {
                return Err(Error::Config("`all` takes no parameter".into()));
            }
            return Ok(CheckSpec {
                kinds: CheckKind::ALL.to_vec(),
                param: CheckParam::Default,
            });
        }
        let kind =
            CheckKind::from_id(id).ok_or_else(|| Error::Config(format!("unknown check `{id}`")))?;
        let param = match (kind, param) {
            (_, None) => CheckParam::Default,
            (CheckKind::TheoremV | CheckKind::CurvatureBound | CheckKind::ChenType, Some(p)) => {
                CheckParam::Sizes(parse_sizes(p)?)
            }
            (CheckKind::Supplement | CheckKind::Holomorphic, Some(p)) => {
                CheckParam::K(parse_usize(p, "k")?)
            }
            (_, Some(_)) => return Err(Error::Config(format!("check `{id}` takes no parameter"))),
        };
        Ok(CheckSpec {
            kinds: vec![kind],
            param,
        })
    }
}

/// A parsed `--invariant` selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantSpec {
    DeltaM(Sign, Vec<usize>),
    DeltaMAggregate(Sign, usize),
    DeltaH(Sign, usize),
    ChenDelta(Vec<usize>),
    ScriptH(usize),
    NormalizedDeltaBar(usize),
    MixedScalar,
    ScalarD,
    MeanCurvatureSq,
    MeanCurvatureDSq,
}

fn parse_sign(s: &str) -> Result<Sign> {
    match s.trim() {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        other => Err(Error::Config(format!(
            "invalid sign `{other}` (use + or -)"
        ))),
    }
}

impl InvariantSpec {
    /// Forms: `delta_m:<sign>:<sizes>`, `delta_m_k:<sign>:<k>`,
    /// `delta_h:<sign>:<k>`, `chen_delta:<sizes>`, `script_h:<s>`,
    /// `normalized_delta_bar:<s>`, `mixed_scalar`, `tau_d`, `norm_h_sq`,
    /// `norm_h_d_sq`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("malformed invariant `{s}`"));
        Ok(match parts.as_slice() {
            ["delta_m", sign, sizes] => {
                InvariantSpec::DeltaM(parse_sign(sign)?, parse_sizes(sizes)?)
            }
            ["delta_m_k", sign, k] => {
                InvariantSpec::DeltaMAggregate(parse_sign(sign)?, parse_usize(k, "k")?)
            }
            ["delta_h", sign, k] => InvariantSpec::DeltaH(parse_sign(sign)?, parse_usize(k, "k")?),
            ["chen_delta", sizes] => InvariantSpec::ChenDelta(parse_sizes(sizes)?),
            ["chen_delta"] => InvariantSpec::ChenDelta(Vec::new()),
            ["script_h", s] => InvariantSpec::ScriptH(parse_usize(s, "s")?),
            ["normalized_delta_bar", s] => InvariantSpec::NormalizedDeltaBar(parse_usize(s, "s")?),
            ["mixed_scalar"] => InvariantSpec::MixedScalar,
            ["tau_d"] => InvariantSpec::ScalarD,
            ["norm_h_sq"] => InvariantSpec::MeanCurvatureSq,
            ["norm_h_d_sq"] => InvariantSpec::MeanCurvatureDSq,
            _ => return Err(bad()),
        })
    }

    fn name(&self) -> &'static str {
        match self {
            InvariantSpec::DeltaM(..) => "delta_m",
            InvariantSpec::DeltaMAggregate(..) => "delta_m_k",
            InvariantSpec::DeltaH(..) => "delta_h",
            InvariantSpec::ChenDelta(_) => "chen_delta",
            InvariantSpec::ScriptH(_) => "script_h",
            InvariantSpec::NormalizedDeltaBar(_) => "normalized_delta_bar",
            InvariantSpec::MixedScalar => "mixed_scalar",
            InvariantSpec::ScalarD => "tau_d",
            InvariantSpec::MeanCurvatureSq => "norm_h_sq",
            InvariantSpec::MeanCurvatureDSq => "norm_h_d_sq",
        }
    }

    fn params(&self) -> String {
        let sizes = |v: &[usize]| {
            v.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            InvariantSpec::DeltaM(s, v) => format!("{}:{}", s.symbol(), sizes(v)),
            InvariantSpec::DeltaMAggregate(s, k) | InvariantSpec::DeltaH(s, k) => {
                format!("{}:{k}", s.symbol())
            }
            InvariantSpec::ChenDelta(v) => sizes(v),
            InvariantSpec::ScriptH(s) | InvariantSpec::NormalizedDeltaBar(s) => s.to_string(),
            _ => String::new(),
        }
    }

    fn evaluate(&self, geom: &PointGeom, cfg: &InvariantConfig) -> Result<InvariantValue> {
        let r = geom.curvature_on_d();
        let closed = |value: f64| InvariantValue {
            value,
            sizes: Vec::new(),
            attainer: crate::invariants::Attainer::Closed,
            gap: None,
            restarts: 0,
        };
        Ok(match self {
            InvariantSpec::DeltaM(sign, sizes) => delta_m(&r, sizes, *sign, cfg)?,
            InvariantSpec::DeltaMAggregate(sign, k) => delta_m_aggregate(&r, *k, *sign, cfg)?,
            InvariantSpec::DeltaH(sign, k) => delta_h(&r, &geom.phi, *k, *sign, cfg)?,
            InvariantSpec::ChenDelta(sizes) => chen_delta(&r, sizes, cfg)?.0,
            InvariantSpec::ScriptH(s) => script_h(&geom.h_on_d(), geom.d, *s, cfg)?,
            InvariantSpec::NormalizedDeltaBar(s) => normalized_delta_bar(&r, *s, cfg)?,
            InvariantSpec::MixedScalar => closed(mixed_scalar_curvature(&geom.curvature, geom.d)),
            InvariantSpec::ScalarD => closed(tau_full(&r)),
            InvariantSpec::MeanCurvatureSq => {
                closed(dot(&geom.mean_curvature, &geom.mean_curvature))
            }
            InvariantSpec::MeanCurvatureDSq => {
                closed(dot(&geom.mean_curvature_d, &geom.mean_curvature_d))
            }
        })
    }
}

/// One concrete per-point check.
#[derive(Debug, Clone, PartialEq)]
enum Task {
    TheoremV(Vec<usize>),
    CurvatureBound(Vec<usize>),
    ChenType(Vec<usize>),
    Supplement(usize),
    MixedScalar,
    Holomorphic(usize),
    CorollaryC03,
}

impl Task {
    fn label(&self) -> String {
        let sizes = |v: &[usize]| {
            v.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Task::TheoremV(v) => format!("theorem_V:{}", sizes(v)),
            Task::CurvatureBound(v) => format!("curvature_bound:{}", sizes(v)),
            Task::ChenType(v) => format!("chen_type:{}", sizes(v)),
            Task::Supplement(k) => format!("supplement:{k}"),
            Task::MixedScalar => "mixed_scalar".into(),
            Task::Holomorphic(k) => format!("holomorphic:{k}"),
            Task::CorollaryC03 => "corollary_C03".into(),
        }
    }
}

/// Per-point tasks and whether the cross-point D-minimality record is wanted.
fn expand(specs: &[CheckSpec], d: usize, ambient: &AmbientSpace) -> Result<(Vec<Task>, bool)> {
    let mut tasks: Vec<Task> = Vec::new();
    let mut dmin = false;
    let push = |t: Task, tasks: &mut Vec<Task>| {
        if !tasks.contains(&t) {
            tasks.push(t);
        }
    };
    for spec in specs {
        let broad = spec.kinds.len() > 1;
        for &kind in &spec.kinds {
            if kind.needs_flat() && !ambient.is_flat() {
                if broad {
                    continue;
                }
                return Err(Error::Config(format!(
                    "check `{}` requires a flat ambient",
                    kind.id()
                )));
            }
            let tuples = |min_k: usize| -> Vec<Vec<usize>> {
                (min_k..=d)
                    .flat_map(|k| partitions(k, 0, d))
                    .filter(|p| p != &vec![d])
                    .collect()
            };
            match (&spec.param, kind) {
                (CheckParam::Sizes(s), CheckKind::TheoremV) => {
                    push(Task::TheoremV(s.clone()), &mut tasks)
                }
                (CheckParam::Sizes(s), CheckKind::CurvatureBound) => {
                    push(Task::CurvatureBound(s.clone()), &mut tasks)
                }
                (CheckParam::Sizes(s), CheckKind::ChenType) => {
                    push(Task::ChenType(s.clone()), &mut tasks)
                }
                (CheckParam::K(k), CheckKind::Supplement) => push(Task::Supplement(*k), &mut tasks),
                (CheckParam::K(k), CheckKind::Holomorphic) => {
                    push(Task::Holomorphic(*k), &mut tasks)
                }
                (_, CheckKind::TheoremV) => tuples(2)
                    .into_iter()
                    .for_each(|p| push(Task::TheoremV(p), &mut tasks)),
                (_, CheckKind::CurvatureBound) => tuples(2)
                    .into_iter()
                    .for_each(|p| push(Task::CurvatureBound(p), &mut tasks)),
                (_, CheckKind::ChenType) => tuples(1)
                    .into_iter()
                    .for_each(|p| push(Task::ChenType(p), &mut tasks)),
                (_, CheckKind::Supplement) => {
                    (2..d).for_each(|k| push(Task::Supplement(k), &mut tasks))
                }
                (_, CheckKind::Holomorphic) => {
                    (2..=d / 2).for_each(|k| push(Task::Holomorphic(k), &mut tasks))
                }
                (_, CheckKind::MixedScalar) => push(Task::MixedScalar, &mut tasks),
                (_, CheckKind::CorollaryC03) => push(Task::CorollaryC03, &mut tasks),
                (_, CheckKind::DMinimality) => dmin = true,
            }
        }
    }
    Ok((tasks, dmin))
}

fn run_task(task: &Task, geom: &PointGeom, cfg: &CheckConfig) -> Result<Vec<Payload>> {
    let c = geom.ambient.sectional_upper_bound();
    let one = |r| Ok(vec![Payload::Check(r)]);
    match task {
        Task::TheoremV(s) => one(check_theorem_v(geom, s, cfg)?),
        Task::CurvatureBound(s) => one(check_curvature_bound_form(geom, c, s, cfg)?),
        Task::ChenType(s) => one(check_chen_type(geom, c, s, cfg)?),
        Task::Supplement(k) => one(check_supplement(geom, *k, cfg)?),
        Task::MixedScalar => one(check_mixed_scalar(geom, cfg)?),
        Task::Holomorphic(k) => one(check_holomorphic(geom, *k, cfg)?),
        Task::CorollaryC03 => Ok(check_corollary_c03(geom, cfg)?
            .into_iter()
            .map(Payload::Check)
            .collect()),
    }
}

/// Resolves a chart spec to its chart and ambient.
pub fn resolve_chart(spec: &str, tol: &ToleranceConfig) -> Result<(Chart, AmbientSpace)> {
    match spec.strip_prefix("file:") {
        Some(path) => load_chart_file(std::path::Path::new(path), tol),
        None => {
            let e = catalog::lookup(spec)?;
            Ok((e.chart, e.ambient))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Pass,
    CheckFailed,
    ComputationError,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::CheckFailed => 1,
            RunStatus::ComputationError => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<Record>,
    pub status: RunStatus,
}

/// Executes a campaign. An `Err` is a configuration problem detected
/// before any computation; failures during computation become error
/// records.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let (chart, ambient) = resolve_chart(&cfg.chart, &cfg.tol)?;
    let check_specs = cfg
        .checks
        .iter()
        .map(|s| CheckSpec::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let inv_specs = cfg
        .invariants
        .iter()
        .map(|s| InvariantSpec::parse(s))
        .collect::<Result<Vec<_>>>()?;
    let (tasks, want_dmin) = expand(&check_specs, chart.declared_d(), &ambient)?;
    let points = match cfg.sampling {
        Sampling::Random { count } => chart.random_points(count, cfg.seed),
        Sampling::Grid { per_axis } => chart.grid_points(per_axis),
    };
    let ccfg = cfg.check_config();
    let make = |point_index: Option<usize>, payload: Payload| Record {
        version: VERSION,
        chart: cfg.chart.clone(),
        seed: cfg.seed,
        point_index,
        payload,
    };

    let per_point = |i: usize| -> (Vec<Record>, Option<PointGeom>) {
        let u = &points[i];
        let geom = match point_geometry(&ambient, &chart, u, &cfg.tol) {
            Ok(g) => g,
            Err(e) => {
                let err = Payload::Error {
                    computation: "point_geometry".into(),
                    message: e.to_string(),
                };
                return (vec![make(Some(i), err)], None);
            }
        };
        let mut out = Vec::new();
        for inv in &inv_specs {
            let payload = match inv.evaluate(&geom, &ccfg.inv) {
                Ok(v) => Payload::Invariant(InvariantRecord {
                    name: inv.name().into(),
                    params: inv.params(),
                    point: u.clone(),
                    value: v.value,
                    sizes: v.sizes,
                    certification_gap: v.gap,
                    restarts: v.restarts,
                }),
                Err(e) => Payload::Error {
                    computation: format!("{}:{}", inv.name(), inv.params()),
                    message: e.to_string(),
                },
            };
            out.push(make(Some(i), payload));
        }
        for task in &tasks {
            match run_task(task, &geom, &ccfg) {
                Ok(ps) => out.extend(ps.into_iter().map(|p| make(Some(i), p))),
                Err(e) => out.push(make(
                    Some(i),
                    Payload::Error {
                        computation: task.label(),
                        message: e.to_string(),
                    },
                )),
            }
        }
        (out, Some(geom))
    };

    let jobs = cfg.jobs.min(points.len()).max(1);
    let mut slots: Vec<Option<(Vec<Record>, Option<PointGeom>)>> =
        (0..points.len()).map(|_| None).collect();
    if jobs == 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(per_point(i));
        }
    } else {
        let results: Vec<Vec<(usize, (Vec<Record>, Option<PointGeom>))>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..jobs)
                    .map(|t| {
                        let per_point = &per_point;
                        let n = points.len();
                        scope.spawn(move || {
                            (t..n)
                                .step_by(jobs)
                                .map(|i| (i, per_point(i)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
        for (i, r) in results.into_iter().flatten() {
            slots[i] = Some(r);
        }
    }

    // ordered merge: computation first, then point index
    let mut per_point_records: Vec<Vec<Record>> = Vec::with_capacity(points.len());
    let mut geoms = Vec::new();
    for slot in slots {
        let (recs, g) = slot.expect("every point evaluated");
        per_point_records.push(recs);
        geoms.extend(g);
    }
    let mut records = Vec::new();
    let width = per_point_records.iter().map(Vec::len).max().unwrap_or(0);
    let ok_width = per_point_records
        .iter()
        .filter(|r| !(r.len() == 1 && r[0].is_error()))
        .map(Vec::len)
        .all(|w| w == width);
    if ok_width {
        for col in 0..width {
            for recs in &per_point_records {
                if let Some(r) = recs.get(col) {
                    records.push(r.clone());
                }
            }
        }
    } else {
        for recs in per_point_records {
            records.extend(recs);
        }
    }
    if want_dmin && !geoms.is_empty() {
        let payload = match d_minimality_diagnostic(&geoms, &ccfg) {
            Ok(r) => Payload::DMinimality(r),
            Err(e) => Payload::Error {
                computation: "d_minimality".into(),
                message: e.to_string(),
            },
        };
        records.push(make(None, payload));
    }

    let status = if records.iter().any(Record::is_error) {
        RunStatus::ComputationError
    } else if records.iter().any(Record::failed) {
        RunStatus::CheckFailed
    } else {
        RunStatus::Pass
    };
    Ok(RunOutcome { records, status })
}

/// Renders records in the configured format.
pub fn render(records: &[Record], format: Format) -> std::io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Jsonl => crate::report::write_jsonl(records, &mut buf)?,
        Format::Csv => crate::report::write_csv(records, &mut buf)?,
    }
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(chart: &str, checks: &[&str]) -> RunConfig {
        RunConfig {
            chart: chart.into(),
            checks: checks.iter().map(|s| s.to_string()).collect(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn toml_rejects_unknown_keys() {
        assert!(RunConfig::from_toml("chart = \"flat_torus:2\"\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("chart = \"flat_torus:2\"\n[tol]\nslak = 1\n").is_err());
        let c = RunConfig::from_toml(
            "chart = \"flat_torus:2\"\nseed = 4\nchecks = [\"all\"]\n[sampling]\nmode = \"grid\"\nper_axis = 2\n[tol]\nslack = 1e-7\n",
        )
        .unwrap();
        assert_eq!(c.sampling, Sampling::Grid { per_axis: 2 });
        assert_eq!(c.tol.slack, 1e-7);
        c.validate().unwrap();
    }

    #[test]
    fn specs_parse() {
        assert!(CheckSpec::parse("theorem_V:1,2").is_ok());
        assert!(CheckSpec::parse("supplement:3").is_ok());
        assert!(CheckSpec::parse("mixed_scalar:1").is_err());
        assert!(CheckSpec::parse("nope").is_err());
        assert_eq!(
            InvariantSpec::parse("delta_m:+:1,1").unwrap(),
            InvariantSpec::DeltaM(Sign::Plus, vec![1, 1])
        );
        assert!(InvariantSpec::parse("delta_m:*:1,1").is_err());
    }

    #[test]
    fn mixed_scalar_run_on_three_sphere() {
        let out = run(&cfg("sphere_in_Cq:2,1,2", &["mixed_scalar"])).unwrap();
        assert_eq!(out.records.len(), 9);
        assert_eq!(out.status, RunStatus::Pass);
        for r in &out.records {
            let Payload::Check(c) = &r.payload else {
                panic!()
            };
            assert!((c.slack - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_torus_invariant_vanishes() {
        let mut c = cfg("flat_torus:2", &[]);
        c.invariants = vec!["delta_m:+:1,1".into()];
        let out = run(&c).unwrap();
        for r in &out.records {
            let Payload::Invariant(v) = &r.payload else {
                panic!()
            };
            assert!(v.value.abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let mut c = cfg("sphere_in_Cq:4,1,3", &["theorem_V:1,2", "holomorphic"]);
        c.sampling = Sampling::Random { count: 5 };
        let a = render(&run(&c).unwrap().records, Format::Jsonl).unwrap();
        c.jobs = 3;
        let b = render(&run(&c).unwrap().records, Format::Jsonl).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flat_only_checks_are_config_errors_on_curved_ambients() {
        let dir = std::env::temp_dir().join(format!("crcurv-runner-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let e = catalog::lookup("sphere_in_Cq:2,1,2").unwrap();
        let text = crate::chartfile::emit_chart_file(
            &e.chart,
            &AmbientSpace::const_holomorphic(2, 0.5),
            None,
        );
        let p = dir.join("curved.chart");
        std::fs::write(&p, text).unwrap();
        let spec = format!("file:{}", p.display());
        assert!(matches!(
            run(&cfg(&spec, &["corollary_C03"])),
            Err(Error::Config(_))
        ));
        let out = run(&cfg(&spec, &["all"])).unwrap();
        assert!(out
            .records
            .iter()
            .all(|r| matches!(r.payload, Payload::Check(_))));
        assert_eq!(
            out.status,
            RunStatus::Pass,
            "{:?}",
            out.records.iter().find(|r| r.failed())
        );
        let _ = std::fs::remove_dir_all(&dir);
    }
}
