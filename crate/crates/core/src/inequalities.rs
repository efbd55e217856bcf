//! Pointwise certification of the curvature inequalities for CR-submanifolds.
//!
//! Each check evaluates both sides at one point, reports the slack
//! `rhs - lhs`, and evaluates the equality conditions at the configuration
//! that attains the left-hand side.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambient::AmbientSpace;
use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::geometry::{restrict_leading, PointGeom};
use crate::invariants::{
    chen_delta, delta_h, delta_m, delta_m_aggregate, delta_m_with_sum, mixed_scalar_curvature,
    mutual_curvature, normalized_delta_bar, partitions, script_h, Attainer, InvariantConfig,
    InvariantValue, Sign,
};
use crate::linalg::{dot, norm, sub};
use crate::subspace::{random_subspace_tuple, validate_sizes, SubspaceTuple};
use crate::tensor::CurvatureTensor;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckConfig {
    pub tol: ToleranceConfig,
    pub inv: InvariantConfig,
}

/// A named quantity entering one side of an inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
    pub source: String,
}

fn term(name: &str, value: f64, source: impl Into<String>) -> Term {
    Term {
        name: name.to_string(),
        value,
        source: source.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub theorem: String,
    pub params: String,
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub equality: bool,
    /// Residuals of the equality conditions at the attaining configuration.
    pub diagnostics: BTreeMap<String, f64>,
    pub diagnostics_pass: bool,
    /// Additional values reported alongside (not part of the verdict).
    pub info: BTreeMap<String, f64>,
    pub terms: Vec<Term>,
    pub notes: Vec<String>,
    pub certification_gap: Option<f64>,
    pub tol_slack: f64,
    pub tol_eq: f64,
    pub tol_diag: f64,
}

impl InequalityReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        theorem: &str,
        params: String,
        geom: &PointGeom,
        lhs: f64,
        rhs: f64,
        diagnostics: BTreeMap<String, f64>,
        terms: Vec<Term>,
        tol: &ToleranceConfig,
    ) -> Self {
        let slack = rhs - lhs;
        let diagnostics_pass = diagnostics.values().all(|v| v.abs() <= tol.diag);
        InequalityReport {
            theorem: theorem.to_string(),
            params,
            point: geom.u.clone(),
            lhs,
            rhs,
            slack,
            pass: slack >= -tol.slack,
            equality: slack.abs() <= tol.eq,
            diagnostics,
            diagnostics_pass,
            info: BTreeMap::new(),
            terms,
            notes: Vec::new(),
            certification_gap: None,
            tol_slack: tol.slack,
            tol_eq: tol.eq,
            tol_diag: tol.diag,
        }
    }

    /// Passing, and if equality is flagged, every equality condition holds.
    pub fn consistent(&self) -> bool {
        self.pass && (!self.equality || self.diagnostics_pass)
    }
}

fn fmt_sizes(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn min_gap(values: &[&InvariantValue]) -> Option<f64> {
    values.iter().filter_map(|v| v.gap).reduce(f64::min)
}

/// Extremal mutual curvature of the ambient tensor over tuples of the given
/// sizes in the full ambient tangent space.
pub fn ambient_delta_m(amb: &AmbientSpace, sizes: &[usize], cfg: &InvariantConfig) -> Result<Term> {
    if amb.is_flat() {
        return Ok(term("ambient_delta_m_plus", 0.0, "flat ambient"));
    }
    let v = delta_m(&amb.tensor(), sizes, Sign::Plus, &no_cert(cfg))?;
    Ok(term(
        "ambient_delta_m_plus",
        v.value,
        format!("optimizer over ambient tuples ({})", fmt_sizes(sizes)),
    ))
}

/// Aggregate over `k`-tuples of the ambient with total size at most `max_sum`.
pub fn ambient_delta_m_aggregate(
    amb: &AmbientSpace,
    k: usize,
    max_sum: usize,
    cfg: &InvariantConfig,
) -> Result<Term> {
    if amb.is_flat() {
        return Ok(term("ambient_delta_m_plus_aggregate", 0.0, "flat ambient"));
    }
    let r = amb.tensor();
    let mut best = f64::NEG_INFINITY;
    for p in partitions(k, 0, max_sum) {
        best = best.max(delta_m(&r, &p, Sign::Plus, &no_cert(cfg))?.value);
    }
    Ok(term(
        "ambient_delta_m_plus_aggregate",
        best,
        format!("optimizer over ambient {k}-tuples with total size <= {max_sum}"),
    ))
}

/// Extremal `S_h` of the ambient over `k` orthogonal complex lines.
pub fn ambient_delta_h(amb: &AmbientSpace, k: usize, cfg: &InvariantConfig) -> Result<Term> {
    if amb.is_flat() {
        return Ok(term("ambient_delta_h_plus", 0.0, "flat ambient"));
    }
    let v = delta_h(
        &amb.tensor(),
        amb.complex_structure(),
        k,
        Sign::Plus,
        &no_cert(cfg),
    )?;
    Ok(term(
        "ambient_delta_h_plus",
        v.value,
        format!("optimizer over {k} ambient complex lines"),
    ))
}

fn no_cert(cfg: &InvariantConfig) -> InvariantConfig {
    InvariantConfig {
        certify_samples: 0,
        ..*cfg
    }
}

/// Largest sectional curvature over `samples` random ambient planes;
/// fails when it exceeds `c + 1e-9`.
pub fn validate_curvature_bound(
    amb: &AmbientSpace,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let r = amb.tensor();
    let n = amb.dim();
    let mut observed = f64::NEG_INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let t = random_subspace_tuple(n, &[1, 1], rand::Rng::random(&mut rng))?;
        observed = observed.max(r.sectional(&t.cols[0], &t.cols[1]));
    }
    if observed > c + 1e-9 {
        return Err(Error::BoundViolation { bound: c, observed });
    }
    Ok(observed)
}

/// Equality-condition residuals for a tuple of subspaces of `D`.
struct TupleDiagnostics {
    mixed: f64,
    spread: f64,
    h_v: Vec<f64>,
}

fn tuple_diagnostics(geom: &PointGeom, tuple: &SubspaceTuple) -> TupleDiagnostics {
    let blocks = tuple.blocks();
    let mut mixed = 0.0f64;
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            for x in blocks[i] {
                for y in blocks[j] {
                    mixed = mixed.max(norm(&geom.h_coords(x, y)));
                }
            }
        }
    }
    let means: Vec<Vec<f64>> = blocks
        .iter()
        .map(|b| {
            let mut acc = vec![0.0; geom.ambient.dim()];
            for x in *b {
                crate::linalg::axpy(1.0, &geom.h_coords(x, x), &mut acc);
            }
            acc
        })
        .collect();
    let mut spread = 0.0f64;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            spread = spread.max(norm(&sub(&means[i], &means[j])));
        }
    }
    let mut h_v = vec![0.0; geom.ambient.dim()];
    for m in &means {
        crate::linalg::axpy(1.0, m, &mut h_v);
    }
    TupleDiagnostics { mixed, spread, h_v }
}

fn flag_of(v: &InvariantValue) -> Option<SubspaceTuple> {
    match &v.attainer {
        Attainer::Flag(t) => Some(t.clone()),
        Attainer::Planes(p) => Some(p.as_flag()),
        Attainer::Closed => None,
    }
}

/// Mean-curvature term `|H_D|^2` when `s = d`, else `script H_D(s)^2`.
fn mean_curvature_term(geom: &PointGeom, s: usize, cfg: &InvariantConfig) -> Result<Term> {
    if s == geom.d {
        let h = &geom.mean_curvature_d;
        return Ok(term("mean_curvature_sq", dot(h, h), "|H_D|^2"));
    }
    let v = script_h(&geom.h_on_d(), geom.d, s, &no_cert(cfg))?;
    Ok(term(
        "mean_curvature_sq",
        v.value * v.value,
        format!("script_H_D({s})^2, optimizer"),
    ))
}

fn ambient_on_d(geom: &PointGeom) -> CurvatureTensor {
    restrict_leading(&geom.ambient_curvature, geom.d)
}

fn mutual_rhs_diagnostics(
    geom: &PointGeom,
    tuple: &SubspaceTuple,
    mean_term: &Term,
    ambient_bound: f64,
) -> Result<BTreeMap<String, f64>> {
    let s: usize = tuple.sizes.iter().sum();
    let diag = tuple_diagnostics(geom, tuple);
    let mut out = BTreeMap::new();
    out.insert("mixed_totally_geodesic".to_string(), diag.mixed);
    out.insert("mean_curvature_spread".to_string(), diag.spread);
    if s < geom.d {
        out.insert(
            "script_h_gap".to_string(),
            mean_curvature_term_norm(mean_term) - norm(&diag.h_v),
        );
    }
    let ambient_value = mutual_curvature(&ambient_on_d(geom), tuple)?;
    out.insert(
        "ambient_attainment".to_string(),
        ambient_bound - ambient_value,
    );
    Ok(out)
}

fn mean_curvature_term_norm(t: &Term) -> f64 {
    t.value.max(0.0).sqrt()
}

fn require_blocks(d: usize, sizes: &[usize]) -> Result<usize> {
    validate_sizes(d, sizes)?;
    if sizes.len() < 2 {
        return Err(Error::BlockSize {
            sizes: sizes.to_vec(),
            dim: d,
            reason: "need at least two blocks".into(),
        });
    }
    Ok(sizes.iter().sum())
}

/// `delta^+_m(n) <= ambient delta^+_m(n) + (k-1)/(2k) * (script H_D(s)^2 or |H_D|^2)`.
pub fn check_theorem_v(
    geom: &PointGeom,
    sizes: &[usize],
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let s = require_blocks(geom.d, sizes)?;
    let k = sizes.len() as f64;
    let lhs = delta_m(&geom.curvature_on_d(), sizes, Sign::Plus, &cfg.inv)?;
    let amb = ambient_delta_m(&geom.ambient, sizes, &cfg.inv)?;
    let mean = mean_curvature_term(geom, s, &cfg.inv)?;
    let rhs = amb.value + (k - 1.0) / (2.0 * k) * mean.value;
    let tuple = flag_of(&lhs).expect("optimizer result");
    let diagnostics = mutual_rhs_diagnostics(geom, &tuple, &mean, amb.value)?;
    let mut rep = InequalityReport::new(
        "theorem_V",
        fmt_sizes(sizes),
        geom,
        lhs.value,
        rhs,
        diagnostics,
        vec![
            term("delta_m_plus", lhs.value, "optimizer over tuples in D"),
            amb,
            mean,
        ],
        &cfg.tol,
    );
    rep.certification_gap = min_gap(&[&lhs]);
    Ok(rep)
}

/// Same left side, with the ambient term bounded by `(c/2)(s^2 - sum n_i^2)`
/// for an upper bound `c` of the ambient sectional curvature.
pub fn check_curvature_bound_form(
    geom: &PointGeom,
    c: f64,
    sizes: &[usize],
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let s = require_blocks(geom.d, sizes)?;
    let observed = validate_curvature_bound(&geom.ambient, c, 1000, cfg.inv.opt.seed)?;
    let k = sizes.len() as f64;
    let lhs = delta_m(&geom.curvature_on_d(), sizes, Sign::Plus, &cfg.inv)?;
    let sq: usize = sizes.iter().map(|n| n * n).sum();
    let bound_term = 0.5 * c * (s * s - sq) as f64;
    let mean = mean_curvature_term(geom, s, &cfg.inv)?;
    let rhs = bound_term + (k - 1.0) / (2.0 * k) * mean.value;
    let tuple = flag_of(&lhs).expect("optimizer result");
    let diagnostics = mutual_rhs_diagnostics(geom, &tuple, &mean, bound_term)?;
    let mut rep = InequalityReport::new(
        "curvature_bound",
        format!("{};c={c:?}", fmt_sizes(sizes)),
        geom,
        lhs.value,
        rhs,
        diagnostics,
        vec![
            term("delta_m_plus", lhs.value, "optimizer over tuples in D"),
            term("curvature_bound_term", bound_term, "(c/2)(s^2 - sum n_i^2)"),
            mean,
        ],
        &cfg.tol,
    );
    rep.info.insert("sampled_max_sectional".into(), observed);
    rep.certification_gap = min_gap(&[&lhs]);
    Ok(rep)
}

/// `delta_D(n) <= d^2 (d+k-1-s) / (2(d+k-s)) |H_D|^2 + (c/2)[d(d-1) - sum n_i(n_i-1)]`.
pub fn check_chen_type(
    geom: &PointGeom,
    c: f64,
    sizes: &[usize],
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let d = geom.d;
    if !sizes.is_empty() {
        validate_sizes(d, sizes)?;
    }
    let observed = validate_curvature_bound(&geom.ambient, c, 1000, cfg.inv.opt.seed)?;
    let (delta, _) = chen_delta(&geom.curvature_on_d(), sizes, &cfg.inv)?;
    let k = sizes.len() as f64;
    let s: usize = sizes.iter().sum();
    let (df, sf) = (d as f64, s as f64);
    let coef = df * df * (df + k - 1.0 - sf) / (2.0 * (df + k - sf));
    let h2 = dot(&geom.mean_curvature_d, &geom.mean_curvature_d);
    let pairs: usize = sizes.iter().map(|n| n * (n - 1)).sum();
    let bound_term = 0.5 * c * (d * (d - 1) - pairs) as f64;
    let rhs = coef * h2 + bound_term;
    let mut diagnostics = BTreeMap::new();
    if let Some(t) = flag_of(&delta) {
        let diag = tuple_diagnostics(geom, &t);
        diagnostics.insert("mixed_totally_geodesic".to_string(), diag.mixed);
    }
    let mut rep = InequalityReport::new(
        "chen_type",
        format!("{};c={c:?}", fmt_sizes(sizes)),
        geom,
        delta.value,
        rhs,
        diagnostics,
        vec![
            term(
                "delta_D",
                delta.value,
                "tau_D minus minimal block scalar curvature",
            ),
            term(
                "mean_curvature_coefficient",
                coef,
                "d^2 (d+k-1-s) / (2(d+k-s))",
            ),
            term("mean_curvature_sq", h2, "|H_D|^2"),
            term(
                "curvature_bound_term",
                bound_term,
                "(c/2)[d(d-1) - sum n_i(n_i-1)]",
            ),
        ],
        &cfg.tol,
    );
    rep.info.insert("sampled_max_sectional".into(), observed);
    rep.certification_gap = min_gap(&[&delta]);
    Ok(rep)
}

/// Supplementary bound on `delta^-_m(k)` through `(k+1)`-tuples covering `D`.
///
/// For any `(k+1)`-tuple each pair of blocks survives in `k - 1` of the
/// `k + 1` leave-one-out `k`-tuples, so
/// `(k+1) delta^-_m(k) <= (k-1) S_m(V_1, ..., V_{k+1})`, and bounding the
/// right side with `s = d` gives
/// `delta^-_m(k) <= (k-1)/(k+1) ambient delta^+_m(k+1) + k(k-1)/(2(k+1)^2) |H_D|^2`.
///
/// The value `(k-1)/(2k(k+1)) |H_D|^2 + ambient delta^+_m(k+1)` is reported
/// in `info` as `alternative_rhs`.
pub fn check_supplement(geom: &PointGeom, k: usize, cfg: &CheckConfig) -> Result<InequalityReport> {
    let d = geom.d;
    if k < 2 || k + 1 > d {
        return Err(Error::BlockSize {
            sizes: vec![1; k + 1],
            dim: d,
            reason: "need k >= 2 and k + 1 blocks fitting in D".into(),
        });
    }
    let r = geom.curvature_on_d();
    let lhs = delta_m_aggregate(&r, k, Sign::Minus, &cfg.inv)?;
    let amb = ambient_delta_m_aggregate(&geom.ambient, k + 1, d, &cfg.inv)?;
    let h2 = dot(&geom.mean_curvature_d, &geom.mean_curvature_d);
    let kf = k as f64;
    let rhs =
        (kf - 1.0) / (kf + 1.0) * amb.value + kf * (kf - 1.0) / (2.0 * (kf + 1.0).powi(2)) * h2;
    let alternative = (kf - 1.0) / (2.0 * kf * (kf + 1.0)) * h2 + amb.value;

    // equality conditions at the best (k+1)-tuple filling D
    let cover = delta_m_with_sum(&r, k + 1, d, Sign::Plus, &cfg.inv)?;
    let tuple = flag_of(&cover).expect("optimizer result");
    let diag = tuple_diagnostics(geom, &tuple);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("mixed_totally_geodesic".to_string(), diag.mixed);
    diagnostics.insert("mean_curvature_spread".to_string(), diag.spread);
    let blocks = tuple.blocks();
    let mut loo = 0.0f64;
    for skip in 0..blocks.len() {
        let mut sizes = Vec::new();
        let mut cols = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            if i != skip {
                sizes.push(b.len());
                cols.extend(b.iter().cloned());
            }
        }
        let t = SubspaceTuple { sizes, cols };
        loo = loo.max((mutual_curvature(&r, &t)? - lhs.value).abs());
    }
    diagnostics.insert("leave_one_out".to_string(), loo);
    let ambient_value = mutual_curvature(&ambient_on_d(geom), &tuple)?;
    diagnostics.insert("ambient_attainment".to_string(), amb.value - ambient_value);

    let mut rep = InequalityReport::new(
        "supplement",
        format!("k={k}"),
        geom,
        lhs.value,
        rhs,
        diagnostics,
        vec![
            term(
                "delta_m_minus_aggregate",
                lhs.value,
                format!("minimum over {k}-tuples in D"),
            ),
            amb,
            term("mean_curvature_sq", h2, "|H_D|^2"),
        ],
        &cfg.tol,
    );
    rep.info.insert("alternative_rhs".into(), alternative);
    rep.info
        .insert("alternative_slack".into(), alternative - lhs.value);
    rep.info.insert("covering_tuple_value".into(), cover.value);
    rep.certification_gap = min_gap(&[&lhs, &cover]);
    Ok(rep)
}

/// `S_m(D, D^perp) <= |H|^2 / 4 + ambient delta^+_m(d, l)`, with the mean
/// curvature of the whole submanifold.
pub fn check_mixed_scalar(geom: &PointGeom, cfg: &CheckConfig) -> Result<InequalityReport> {
    let lhs = mixed_scalar_curvature(&geom.curvature, geom.d);
    let amb = ambient_delta_m(&geom.ambient, &[geom.d, geom.l], &cfg.inv)?;
    let h = &geom.mean_curvature;
    let h2 = dot(h, h);
    let rhs = 0.25 * h2 + amb.value;
    let m = geom.dim();
    let mut mixed = 0.0f64;
    for a in 0..geom.d {
        for b in geom.d..m {
            mixed = mixed.max(norm(geom.h_at(a, b)));
        }
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("mixed_totally_geodesic".to_string(), mixed);
    diagnostics.insert(
        "mean_curvature_spread".to_string(),
        norm(&sub(&geom.mean_curvature_d, &geom.mean_curvature_perp)),
    );
    let ambient_value = mixed_scalar_curvature(&geom.ambient_curvature, geom.d);
    diagnostics.insert("ambient_attainment".to_string(), amb.value - ambient_value);
    let mut rep = InequalityReport::new(
        "mixed_scalar",
        format!("d={},l={}", geom.d, geom.l),
        geom,
        lhs,
        rhs,
        diagnostics,
        vec![
            term(
                "mixed_scalar_curvature",
                lhs,
                "sum over D x D^perp frame pairs",
            ),
            term("mean_curvature_sq", h2, "|H|^2 of the whole tangent space"),
            amb,
        ],
        &cfg.tol,
    );
    let ratio = |v: &[f64]| if h2 > 0.0 { dot(v, h) / h2 } else { 0.0 };
    rep.info
        .insert("h_d_over_h".into(), ratio(&geom.mean_curvature_d));
    rep.info
        .insert("h_perp_over_h".into(), ratio(&geom.mean_curvature_perp));
    rep.info.insert(
        "h_d_norm_sq".into(),
        dot(&geom.mean_curvature_d, &geom.mean_curvature_d),
    );
    rep.notes
        .push("right side uses the mean curvature of the whole tangent space".into());
    Ok(rep)
}

/// `delta^+_h(k) <= ambient delta^+_h(k) + (k-1)/(4k) * (script H_D(2k)^2 or |H_D|^2)`.
pub fn check_holomorphic(
    geom: &PointGeom,
    k: usize,
    cfg: &CheckConfig,
) -> Result<InequalityReport> {
    let d = geom.d;
    if k < 2 || 2 * k > d {
        return Err(Error::BlockSize {
            sizes: vec![2; k],
            dim: d,
            reason: "need 2 <= k <= d/2".into(),
        });
    }
    let lhs = delta_h(&geom.curvature_on_d(), &geom.phi, k, Sign::Plus, &cfg.inv)?;
    let amb = ambient_delta_h(&geom.ambient, k, &cfg.inv)?;
    let mean = mean_curvature_term(geom, 2 * k, &cfg.inv)?;
    let kf = k as f64;
    let rhs = amb.value + (kf - 1.0) / (4.0 * kf) * mean.value;
    let tuple = flag_of(&lhs).expect("optimizer result");
    let diag = tuple_diagnostics(geom, &tuple);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("mixed_totally_geodesic".to_string(), diag.mixed);
    diagnostics.insert("mean_curvature_spread".to_string(), diag.spread);
    if 2 * k < d {
        diagnostics.insert(
            "script_h_gap".to_string(),
            mean_curvature_term_norm(&mean) - norm(&diag.h_v),
        );
    }
    let ambient_value = 0.5 * mutual_curvature(&ambient_on_d(geom), &tuple)?;
    diagnostics.insert("ambient_attainment".to_string(), amb.value - ambient_value);
    let mut rep = InequalityReport::new(
        "holomorphic",
        format!("k={k}"),
        geom,
        lhs.value,
        rhs,
        diagnostics,
        vec![
            term(
                "delta_h_plus",
                lhs.value,
                format!("optimizer over {k} phi-invariant planes in D"),
            ),
            amb,
            mean,
        ],
        &cfg.tol,
    );
    rep.certification_gap = min_gap(&[&lhs]);
    Ok(rep)
}

/// `Delta bar(s) <= script H_D(s)^2` for `s < d` and `<= |H_D|^2` for
/// `s = d`, one report per `s = 2..d`; flat ambient only.
pub fn check_corollary_c03(geom: &PointGeom, cfg: &CheckConfig) -> Result<Vec<InequalityReport>> {
    if !geom.ambient.is_flat() {
        return Err(Error::AmbientMismatch);
    }
    let r = geom.curvature_on_d();
    let mut out = Vec::new();
    for s in 2..=geom.d {
        let bar = normalized_delta_bar(&r, s, &cfg.inv)?;
        let mean = mean_curvature_term(geom, s, &cfg.inv)?;
        let tuple = flag_of(&bar).expect("optimizer result");
        let diagnostics = mutual_rhs_diagnostics(geom, &tuple, &mean, 0.0)?;
        let mut rep = InequalityReport::new(
            "corollary_C03",
            format!("s={s}"),
            geom,
            bar.value,
            mean.value,
            diagnostics,
            vec![
                term(
                    "normalized_delta_bar",
                    bar.value,
                    format!(
                        "maximum over tuples ({}) family with total {s}",
                        fmt_sizes(&bar.sizes)
                    ),
                ),
                mean,
            ],
            &cfg.tol,
        );
        rep.certification_gap = min_gap(&[&bar]);
        out.push(rep);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DMinimalityReport {
    pub points: usize,
    pub max_h_d_norm: f64,
    /// Largest value of each positivity witness over the samples.
    pub witnesses: BTreeMap<String, f64>,
    pub d_minimal: bool,
    pub contradiction: bool,
    pub tol_eq: f64,
}

/// Positivity witnesses whose strict positivity rules out `H_D = 0` in a
/// flat ambient, evaluated on every sample and compared with `|H_D|`.
pub fn d_minimality_diagnostic(
    geoms: &[PointGeom],
    cfg: &CheckConfig,
) -> Result<DMinimalityReport> {
    let mut witnesses: BTreeMap<String, f64> = BTreeMap::new();
    let mut max_h = 0.0f64;
    let mut bump = |name: &str, v: f64| {
        let e = witnesses
            .entry(name.to_string())
            .or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    };
    for geom in geoms {
        if !geom.ambient.is_flat() {
            return Err(Error::AmbientMismatch);
        }
        max_h = max_h.max(norm(&geom.mean_curvature_d));
        let r = geom.curvature_on_d();
        let d = geom.d;
        let mut full = f64::NEG_INFINITY;
        let mut minus = f64::NEG_INFINITY;
        for k in 2..=d {
            full = full.max(delta_m_with_sum(&r, k, d, Sign::Plus, &cfg.inv)?.value);
            minus = minus.max(delta_m_aggregate(&r, k, Sign::Minus, &cfg.inv)?.value);
        }
        bump("delta_m_plus_filling", full);
        bump("delta_m_minus_aggregate", minus);
        bump("mixed_scalar", mixed_scalar_curvature(&geom.curvature, d));
        if d >= 4 {
            bump(
                "delta_h_plus_half",
                delta_h(&r, &geom.phi, d / 2, Sign::Plus, &cfg.inv)?.value,
            );
        }
    }
    let d_minimal = max_h <= cfg.tol.eq;
    let contradiction = d_minimal && witnesses.values().any(|v| *v > cfg.tol.eq);
    Ok(DMinimalityReport {
        points: geoms.len(),
        max_h_d_norm: max_h,
        witnesses,
        d_minimal,
        contradiction,
        tol_eq: cfg.tol.eq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::lookup;
    use crate::geometry::point_geometry;

    fn geom(spec: &str) -> PointGeom {
        let e = lookup(spec).unwrap();
        let u = e.chart.center();
        point_geometry(&e.ambient, &e.chart, &u, &ToleranceConfig::default()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mixed_scalar_on_three_sphere_is_strict() {
        let cfg = CheckConfig::default();
        let r = check_mixed_scalar(&geom("sphere_in_Cq:2,1,2"), &cfg).unwrap();
        assert!(close(r.lhs, 2.0, 1e-8) && close(r.rhs, 2.25, 1e-8), "{r:?}");
        assert!(close(r.slack, 0.25, 1e-8) && r.pass && !r.equality);
        assert!(close(r.info["h_d_over_h"], 2.0 / 3.0, 1e-8));
    }

    #[test]
    fn mixed_scalar_on_four_sphere_is_sharp() {
        let cfg = CheckConfig::default();
        let r = check_mixed_scalar(&geom("sphere_in_Cq:2,2,3"), &cfg).unwrap();
        assert!(close(r.lhs, 4.0, 1e-8) && close(r.rhs, 4.0, 1e-8), "{r:?}");
        assert!(r.equality && r.diagnostics_pass, "{r:?}");
    }

    #[test]
    fn sphere_values_for_the_other_checks() {
        let cfg = CheckConfig::default();
        let s3 = geom("sphere_in_Cq:2,1,2");
        let chen = check_chen_type(&s3, 0.0, &[1], &cfg).unwrap();
        assert!(
            close(chen.lhs, 1.0, 1e-8) && close(chen.rhs, 4.0, 1e-8),
            "{chen:?}"
        );

        let t1 = check_theorem_v(&s3, &[1, 1], &cfg).unwrap();
        assert!(
            close(t1.lhs, 1.0, 1e-8)
                && close(t1.rhs, 1.0, 1e-8)
                && t1.equality
                && t1.diagnostics_pass
        );

        let s5 = geom("sphere_in_Cq:4,1,3");
        let sup = check_supplement(&s5, 3, &cfg).unwrap();
        assert!(
            close(sup.lhs, 3.0, 1e-7) && close(sup.rhs, 3.0, 1e-7),
            "{sup:?}"
        );
        assert!(sup.equality && sup.diagnostics_pass, "{sup:?}");
        assert!(close(sup.info["alternative_rhs"], 4.0 / 3.0, 1e-8));

        let hol = check_holomorphic(&s5, 2, &cfg).unwrap();
        assert!(
            close(hol.lhs, 2.0, 1e-7) && close(hol.rhs, 2.0, 1e-7),
            "{hol:?}"
        );
        assert!(hol.equality && hol.diagnostics_pass);

        let t1 = check_theorem_v(&s5, &[1, 2], &cfg).unwrap();
        assert!(
            close(t1.lhs, 2.0, 1e-7) && close(t1.rhs, 2.25, 1e-6) && !t1.equality,
            "{t1:?}"
        );

        for r in check_corollary_c03(&s5, &cfg).unwrap() {
            assert!(r.equality && r.diagnostics_pass, "{r:?}");
        }
    }

    #[test]
    fn curvature_bound_must_dominate_the_ambient() {
        let g = geom("sphere_in_Cq:2,1,2");
        let cfg = CheckConfig::default();
        assert!(matches!(
            check_curvature_bound_form(&g, -1.0, &[1, 1], &cfg),
            Err(Error::BoundViolation { .. })
        ));
        let r = check_curvature_bound_form(&g, 0.0, &[1, 1], &cfg).unwrap();
        assert!(close(r.rhs, 1.0, 1e-8));
    }

    #[test]
    fn holomorphic_ambient_extremes() {
        let amb = AmbientSpace::const_holomorphic(3, 0.5);
        let cfg = InvariantConfig::default();
        for k in 2..=3 {
            let t = ambient_delta_h(&amb, k, &cfg).unwrap();
            assert!(close(t.value, 0.5 * (k * (k - 1)) as f64, 1e-8), "{t:?}");
        }
        assert!(check_corollary_c03(
            &{
                let e = lookup("sphere_in_Cq:2,1,2").unwrap();
                point_geometry(
                    &AmbientSpace::const_holomorphic(2, 1.0),
                    &e.chart,
                    &e.chart.center(),
                    &ToleranceConfig::default(),
                )
                .unwrap()
            },
            &CheckConfig::default()
        )
        .is_err());
    }

    #[test]
    fn d_minimality_witnesses() {
        let cfg = CheckConfig::default();
        let min = d_minimality_diagnostic(&[geom("holomorphic_product")], &cfg).unwrap();
        assert!(min.d_minimal && !min.contradiction, "{min:?}");
        assert!(min.witnesses.values().all(|v| *v <= 1e-6));
        let s3 = d_minimality_diagnostic(&[geom("sphere_in_Cq:2,1,2")], &cfg).unwrap();
        assert!(!s3.d_minimal && !s3.contradiction && close(s3.max_h_d_norm, 2.0, 1e-8));
        assert!(s3.witnesses.values().all(|v| *v > 0.5), "{s3:?}");
    }
}
