//! Built-in charts with known curvature data.

use std::fmt;

use crate::ambient::AmbientSpace;
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::geometry::PointGeom;
use crate::invariants::{mixed_scalar_curvature, tau_full};
use crate::linalg::dot;

/// Pointwise quantity with a closed-form value on some catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    MeanCurvatureSq,
    MeanCurvatureDSq,
    MeanCurvaturePerpSq,
    MixedScalar,
    ScalarD,
    Scalar,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::MeanCurvatureSq => "|H|^2",
            Quantity::MeanCurvatureDSq => "|H_D|^2",
            Quantity::MeanCurvaturePerpSq => "|H_perp|^2",
            Quantity::MixedScalar => "S_m(D,D_perp)",
            Quantity::ScalarD => "tau_D",
            Quantity::Scalar => "tau",
        }
    }

    pub fn evaluate(self, geom: &PointGeom) -> f64 {
        match self {
            Quantity::MeanCurvatureSq => dot(&geom.mean_curvature, &geom.mean_curvature),
            Quantity::MeanCurvatureDSq => dot(&geom.mean_curvature_d, &geom.mean_curvature_d),
            Quantity::MeanCurvaturePerpSq => {
                dot(&geom.mean_curvature_perp, &geom.mean_curvature_perp)
            }
            Quantity::MixedScalar => mixed_scalar_curvature(&geom.curvature, geom.d),
            Quantity::ScalarD => tau_full(&geom.curvature_on_d()),
            Quantity::Scalar => tau_full(&geom.curvature),
        }
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A documented closed-form value of a quantity, as a function of the
/// chart parameter.
pub struct Expected {
    pub quantity: Quantity,
    pub reason: &'static str,
    value: ValueFn,
}

impl Expected {
    fn constant(quantity: Quantity, value: f64, reason: &'static str) -> Self {
        Expected {
            quantity,
            reason,
            value: Box::new(move |_| value),
        }
    }

    pub fn value_at(&self, u: &[f64]) -> f64 {
        (self.value)(u)
    }
}

impl fmt::Debug for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expected")
            .field("quantity", &self.quantity)
            .field("reason", &self.reason)
            .finish()
    }
}

#[derive(Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: Vec<String>,
    pub chart: Chart,
    pub ambient: AmbientSpace,
    pub doc: String,
    pub expected: Vec<Expected>,
}

impl CatalogEntry {
    /// `name:p1,p2,...` as accepted by [`lookup`].
    pub fn spec(&self) -> String {
        if self.params.is_empty() {
            self.name.to_string()
        } else {
            format!("{}:{}", self.name, self.params.join(","))
        }
    }
}

const LO: f64 = 0.3;
const HI: f64 = 1.2;

fn build_chart(
    components: &[String],
    domain: Vec<(f64, f64)>,
    d: usize,
    l: usize,
) -> Result<Chart> {
    let m = domain.len();
    let exprs = components
        .iter()
        .map(|s| parse_expression(s, m))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Chart::new(exprs, domain, d, l)
}

/// Unit sphere coordinates `x_0..x_n` on `S^n` from hyperspherical angles
/// named `u{first}..u{first+n-1}`.
fn hyperspherical(n: usize, first: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n + 1);
    let mut prefix = String::new();
    for i in 0..n {
        let var = format!("u{}", first + i);
        out.push(format!("{prefix}cos({var})"));
        prefix.push_str(&format!("sin({var})*"));
    }
    out.push(prefix.trim_end_matches('*').to_string());
    out
}

fn pad(mut comps: Vec<String>, len: usize) -> Vec<String> {
    comps.resize(len, "0".to_string());
    comps
}

/// CR type of the unit sphere `S^n` in `R^{n+1}`, the first real
/// coordinates of `C^q` with `q` minimal.
fn sphere_type(n: usize) -> (usize, usize, usize) {
    if n % 2 == 1 {
        (n - 1, 1, n.div_ceil(2))
    } else {
        (n - 2, 2, (n + 2) / 2)
    }
}

fn check_sphere_dims(name: &str, d: usize, l: usize, q: usize) -> Result<()> {
    if d == 0 || l == 0 {
        return Err(Error::Config(format!("{name}: d and l must be positive")));
    }
    let want = sphere_type(d + l);
    if (d, l, q) != want {
        return Err(Error::Config(format!(
            "{name}: the unit sphere of dimension {} has CR type d={}, l={} in C^{}",
            d + l,
            want.0,
            want.1,
            want.2
        )));
    }
    Ok(())
}

fn umbilic_expected(d: usize, l: usize) -> Vec<Expected> {
    let (df, lf) = (d as f64, l as f64);
    let n = df + lf;
    vec![
        Expected::constant(Quantity::MeanCurvatureSq, n * n, "h = g nu with |nu| = 1"),
        Expected::constant(Quantity::MeanCurvatureDSq, df * df, "trace of g nu over D"),
        Expected::constant(
            Quantity::MeanCurvaturePerpSq,
            lf * lf,
            "trace of g nu over D_perp",
        ),
        Expected::constant(Quantity::MixedScalar, df * lf, "unit sectional curvature"),
        Expected::constant(
            Quantity::ScalarD,
            df * (df - 1.0),
            "unit sectional curvature",
        ),
        Expected::constant(Quantity::Scalar, n * (n - 1.0), "unit sectional curvature"),
    ]
}

/// Unit sphere `S^{d+l}` in the leading real coordinates of `C^q`, in
/// hyperspherical angles over `[0.3, 1.2]^{d+l}`.
pub fn sphere_in_cq(d: usize, l: usize, q: usize) -> Result<CatalogEntry> {
    check_sphere_dims("sphere_in_Cq", d, l, q)?;
    let n = d + l;
    let comps = pad(hyperspherical(n, 1), 2 * q);
    let chart = build_chart(&comps, vec![(LO, HI); n], d, l)?;
    Ok(CatalogEntry {
        name: "sphere_in_Cq",
        params: vec![d.to_string(), l.to_string(), q.to_string()],
        chart,
        ambient: AmbientSpace::flat(q),
        doc: format!(
            "unit sphere S^{n} in R^{} inside C^{q}; totally umbilic with unit sectional curvature",
            n + 1
        ),
        expected: umbilic_expected(d, l),
    })
}

/// The same sphere in join coordinates `(cos t y, sin t z)` with `y` on
/// `S^d` and `z` on a circle; only even-dimensional spheres (`l = 2`).
pub fn product_sphere_chart(d: usize, l: usize, q: usize) -> Result<CatalogEntry> {
    if l < 2 {
        return Err(Error::Config("product_sphere_chart: needs l >= 2".into()));
    }
    check_sphere_dims("product_sphere_chart", d, l, q)?;
    let n = d + l;
    // parameters: u1 = t, u2..u{d+1} angles on S^d, u{d+2} circle angle
    let mut comps: Vec<String> = hyperspherical(d, 2)
        .into_iter()
        .map(|c| format!("cos(u1)*{c}"))
        .collect();
    let beta = format!("u{}", d + 2);
    comps.push(format!("sin(u1)*cos({beta})"));
    comps.push(format!("sin(u1)*sin({beta})"));
    let comps = pad(comps, 2 * q);
    let mut domain = vec![(LO, 1.0)];
    domain.extend(vec![(LO, HI); d]);
    domain.push((LO, 1.0));
    let chart = build_chart(&comps, domain, d, l)?;
    Ok(CatalogEntry {
        name: "product_sphere_chart",
        params: vec![d.to_string(), l.to_string(), q.to_string()],
        chart,
        ambient: AmbientSpace::flat(q),
        doc: format!(
            "unit sphere S^{n} in C^{q} as a join of S^{d} and a circle; same geometry as sphere_in_Cq({d},{l},{q})"
        ),
        expected: umbilic_expected(d, l),
    })
}

/// `C^{q-1}` times a unit circle in the last complex line: a flat real
/// hypersurface with `D` tangent to the flat factor.
pub fn flat_torus(q: usize) -> Result<CatalogEntry> {
    if q < 2 {
        return Err(Error::Config("flat_torus: needs q >= 2".into()));
    }
    let d = 2 * q - 2;
    let m = d + 1;
    let mut comps: Vec<String> = (1..=d).map(|i| format!("u{i}")).collect();
    comps.push(format!("cos(u{m})"));
    comps.push(format!("sin(u{m})"));
    let chart = build_chart(&comps, vec![(LO, HI); m], d, 1)?;
    Ok(CatalogEntry {
        name: "flat_torus",
        params: vec![q.to_string()],
        chart,
        ambient: AmbientSpace::flat(q),
        doc: format!(
            "C^{} x S^1 in C^{q}; intrinsically flat, D-minimal, h supported on the circle",
            q - 1
        ),
        expected: vec![
            Expected::constant(Quantity::Scalar, 0.0, "flat product"),
            Expected::constant(Quantity::ScalarD, 0.0, "flat product"),
            Expected::constant(Quantity::MixedScalar, 0.0, "flat product"),
            Expected::constant(
                Quantity::MeanCurvatureDSq,
                0.0,
                "flat factor is totally geodesic",
            ),
            Expected::constant(Quantity::MeanCurvatureSq, 1.0, "unit circle"),
        ],
    })
}

/// `C^{d/2}` plus the real parts of `l` further complex coordinates.
pub fn totally_geodesic_plane(d: usize, l: usize, q: usize) -> Result<CatalogEntry> {
    if d == 0 || !d.is_multiple_of(2) || l == 0 || q < d / 2 + l {
        return Err(Error::Config(format!(
            "totally_geodesic_plane: need even d > 0, l > 0 and q >= d/2 + l (got {d},{l},{q})"
        )));
    }
    let mut comps = vec!["0".to_string(); 2 * q];
    for (i, c) in comps.iter_mut().enumerate().take(d) {
        *c = format!("u{}", i + 1);
    }
    for j in 0..l {
        comps[d + 2 * j] = format!("u{}", d + j + 1);
    }
    let chart = build_chart(&comps, vec![(LO, HI); d + l], d, l)?;
    let zero = |q| Expected::constant(q, 0.0, "totally geodesic");
    Ok(CatalogEntry {
        name: "totally_geodesic_plane",
        params: vec![d.to_string(), l.to_string(), q.to_string()],
        chart,
        ambient: AmbientSpace::flat(q),
        doc: format!(
            "affine plane C^{} + R^{l} in C^{q}; every invariant vanishes",
            d / 2
        ),
        expected: vec![
            zero(Quantity::Scalar),
            zero(Quantity::MixedScalar),
            zero(Quantity::MeanCurvatureSq),
            zero(Quantity::MeanCurvatureDSq),
        ],
    })
}

/// The complex curve `z -> (z, z^2)` times a unit circle, in `C^3`.
pub fn holomorphic_product() -> Result<CatalogEntry> {
    let comps: Vec<String> = ["u1", "u2", "u1^2 - u2^2", "2*u1*u2", "cos(u3)", "sin(u3)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let chart = build_chart(&comps, vec![(LO, HI); 3], 2, 1)?;
    // graph of f(z) = z^2: metric (1 + |f'|^2)|dz|^2, K = -2|f''|^2 / (1 + |f'|^2)^3
    let gauss = |u: &[f64]| -8.0 / (1.0 + 4.0 * (u[0] * u[0] + u[1] * u[1])).powi(3);
    Ok(CatalogEntry {
        name: "holomorphic_product",
        params: Vec::new(),
        chart,
        ambient: AmbientSpace::flat(3),
        doc: "graph of z^2 in C^2 times a unit circle in C; D is the complex curve, so the chart is D-minimal".into(),
        expected: vec![
            Expected::constant(Quantity::MeanCurvatureDSq, 0.0, "complex curves are minimal"),
            Expected::constant(Quantity::MeanCurvatureSq, 1.0, "unit circle"),
            Expected::constant(Quantity::MixedScalar, 0.0, "Riemannian product with a flat factor"),
            Expected {
                quantity: Quantity::ScalarD,
                reason: "twice the Gauss curvature of the graph of z^2",
                value: Box::new(move |u| 2.0 * gauss(u)),
            },
        ],
    })
}

/// Real ellipsoid `sum (x_i / a_i)^2 = 1` in `C^q`, with an even number
/// `2q` of semi-axes: a real hypersurface, umbilic only when all axes agree.
pub fn ellipsoid(axes: &[f64]) -> Result<CatalogEntry> {
    if axes.len() < 4 || !axes.len().is_multiple_of(2) || axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config(
            "ellipsoid: need an even number (>= 4) of positive semi-axes".into(),
        ));
    }
    let n = axes.len() - 1;
    let q = axes.len() / 2;
    let comps: Vec<String> = hyperspherical(n, 1)
        .into_iter()
        .zip(axes)
        .map(|(c, a)| format!("{a:?}*{c}"))
        .collect();
    let chart = build_chart(&comps, vec![(LO, HI); n], n - 1, 1)?;
    Ok(CatalogEntry {
        name: "ellipsoid",
        params: axes.iter().map(|a| format!("{a:?}")).collect(),
        chart,
        ambient: AmbientSpace::flat(q),
        doc: format!(
            "ellipsoid with semi-axes {axes:?} in C^{q}; generic non-umbilic real hypersurface"
        ),
        expected: Vec::new(),
    })
}

/// Resolves `name` or `name:p1,p2,...`.
pub fn lookup(spec: &str) -> Result<CatalogEntry> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), p.trim()),
        None => (spec.trim(), ""),
    };
    let ints = || -> Result<Vec<usize>> {
        params
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("{name}: bad integer parameter `{s}`")))
            })
            .collect()
    };
    let arity = |v: &[usize], k: usize| -> Result<()> {
        if v.len() != k {
            return Err(Error::Config(format!(
                "{name}: expected {k} parameters, got {}",
                v.len()
            )));
        }
        Ok(())
    };
    match name {
        "sphere_in_Cq" => {
            let p = ints()?;
            arity(&p, 3)?;
            sphere_in_cq(p[0], p[1], p[2])
        }
        "product_sphere_chart" => {
            let p = ints()?;
            arity(&p, 3)?;
            product_sphere_chart(p[0], p[1], p[2])
        }
        "flat_torus" => {
            let p = ints()?;
            arity(&p, 1)?;
            flat_torus(p[0])
        }
        "totally_geodesic_plane" => {
            let p = ints()?;
            arity(&p, 3)?;
            totally_geodesic_plane(p[0], p[1], p[2])
        }
        "holomorphic_product" => {
            arity(&ints()?, 0)?;
            holomorphic_product()
        }
        "ellipsoid" => {
            let axes = params
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("ellipsoid: bad semi-axis `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            ellipsoid(&axes)
        }
        _ => Err(Error::Config(format!("unknown catalog chart `{name}`"))),
    }
}

/// The default entries, one per family.
pub fn catalog() -> Vec<CatalogEntry> {
    [
        "sphere_in_Cq:2,1,2",
        "sphere_in_Cq:2,2,3",
        "sphere_in_Cq:4,1,3",
        "product_sphere_chart:2,2,3",
        "flat_torus:2",
        "totally_geodesic_plane:2,1,2",
        "holomorphic_product",
        "ellipsoid:1.0,1.3,0.8,1.1",
        "ellipsoid:1.0,1.2,0.9,1.1,0.8,1.3",
    ]
    .iter()
    .map(|s| lookup(s).expect("built-in catalog entry"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ToleranceConfig;
    use crate::geometry::point_geometry;

    #[test]
    fn entries_have_declared_split_and_documented_values() {
        let tol = ToleranceConfig::default();
        for e in catalog() {
            for u in e.chart.random_points(5, 11) {
                let g = point_geometry(&e.ambient, &e.chart, &u, &tol)
                    .unwrap_or_else(|err| panic!("{}: {err}", e.spec()));
                assert_eq!((g.d, g.l), (e.chart.declared_d(), e.chart.declared_l()));
                for x in &e.expected {
                    let got = x.quantity.evaluate(&g);
                    let want = x.value_at(&u);
                    assert!(
                        (got - want).abs() < 1e-8,
                        "{} {}: {got} vs {want}",
                        e.spec(),
                        x.quantity.name()
                    );
                }
            }
        }
    }

    #[test]
    fn lookup_rejects_inconsistent_sphere_types() {
        assert!(lookup("sphere_in_Cq:2,1,3").is_err());
        assert!(lookup("sphere_in_Cq:3,1,2").is_err());
        assert!(lookup("product_sphere_chart:2,1,2").is_err());
        assert!(lookup("no_such_chart").is_err());
        assert!(lookup("flat_torus:2,3").is_err());
    }

    #[test]
    fn spec_round_trips() {
        for e in catalog() {
            assert_eq!(lookup(&e.spec()).unwrap().spec(), e.spec());
        }
    }
}
