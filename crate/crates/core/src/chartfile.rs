//! Line-oriented text format for charts.
//!
//! ```text
//! # unit 3-sphere
//! ambient flat q=2
//! dims d=2 l=1
//! domain u1 0.3 1.2
//! domain u2 0.3 1.2
//! domain u3 0.3 1.2
//! component cos(u1)
//! component sin(u1)*cos(u2)
//! component sin(u1)*sin(u2)*cos(u3)
//! component sin(u1)*sin(u2)*sin(u3)
//! ```
//!
//! `ambient holomorphic q=<int> c=<float>` selects the constant holomorphic
//! sectional curvature model.

use std::fmt::Write as _;
use std::path::Path;

use crate::ambient::{AmbientSpace, CurvatureModel};
use crate::chart::Chart;
use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::geometry::point_geometry;

struct Ctx<'a> {
    path: &'a str,
}

impl Ctx<'_> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::ChartFile {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }
}

/// Splits a line into whitespace-separated words with 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn key_value<'a>(
    ctx: &Ctx,
    line: usize,
    (col, word): (usize, &'a str),
    key: &str,
) -> Result<&'a str> {
    match word.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(ctx.err(
            line,
            col,
            format!("expected `{key}=<value>`, found `{word}`"),
        )),
    }
}

fn parse_num<T: std::str::FromStr>(
    ctx: &Ctx,
    line: usize,
    col: usize,
    s: &str,
    what: &str,
) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| ctx.err(line, col, format!("invalid {what} `{s}`")))
}

/// Parses chart file text; `path` only labels errors.
pub fn parse_chart_file(text: &str, path: &str) -> Result<(Chart, AmbientSpace)> {
    let ctx = Ctx { path };
    let mut ambient: Option<AmbientSpace> = None;
    let mut dims: Option<(usize, usize)> = None;
    let mut domain: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut components: Vec<(usize, usize, &str)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let w = words(content);
        let Some(&(col, keyword)) = w.first() else {
            continue;
        };
        match keyword {
            "ambient" => {
                if ambient.is_some() {
                    return Err(ctx.err(line_no, col, "duplicate `ambient` line"));
                }
                let Some(&(kcol, kind)) = w.get(1) else {
                    return Err(ctx.err(line_no, col + keyword.len(), "missing ambient kind"));
                };
                let q_word = w
                    .get(2)
                    .copied()
                    .ok_or_else(|| ctx.err(line_no, kcol + kind.len(), "missing `q=<int>`"))?;
                let q: usize = parse_num(
                    &ctx,
                    line_no,
                    q_word.0,
                    key_value(&ctx, line_no, q_word, "q")?,
                    "q",
                )?;
                if q == 0 {
                    return Err(ctx.err(line_no, q_word.0, "q must be positive"));
                }
                let expected_len = match kind {
                    "flat" => {
                        ambient = Some(AmbientSpace::flat(q));
                        3
                    }
                    "holomorphic" => {
                        let c_word = w.get(3).copied().ok_or_else(|| {
                            ctx.err(line_no, q_word.0 + q_word.1.len(), "missing `c=<float>`")
                        })?;
                        let c: f64 = parse_num(
                            &ctx,
                            line_no,
                            c_word.0,
                            key_value(&ctx, line_no, c_word, "c")?,
                            "c",
                        )?;
                        if !c.is_finite() {
                            return Err(ctx.err(line_no, c_word.0, "c must be finite"));
                        }
                        ambient = Some(AmbientSpace::const_holomorphic(q, c));
                        4
                    }
                    other => {
                        return Err(ctx.err(
                            line_no,
                            kcol,
                            format!(
                                "unknown ambient kind `{other}` (expected flat or holomorphic)"
                            ),
                        ))
                    }
                };
                if let Some(&(xcol, extra)) = w.get(expected_len) {
                    return Err(ctx.err(line_no, xcol, format!("unexpected `{extra}`")));
                }
            }
            "dims" => {
                if dims.is_some() {
                    return Err(ctx.err(line_no, col, "duplicate `dims` line"));
                }
                if w.len() != 3 {
                    return Err(ctx.err(line_no, col, "expected `dims d=<int> l=<int>`"));
                }
                let d = parse_num(
                    &ctx,
                    line_no,
                    w[1].0,
                    key_value(&ctx, line_no, w[1], "d")?,
                    "d",
                )?;
                let l = parse_num(
                    &ctx,
                    line_no,
                    w[2].0,
                    key_value(&ctx, line_no, w[2], "l")?,
                    "l",
                )?;
                dims = Some((d, l));
            }
            "domain" => {
                if w.len() != 4 {
                    return Err(ctx.err(line_no, col, "expected `domain u<i> <lo> <hi>`"));
                }
                let (vcol, var) = w[1];
                let index: usize = var
                    .strip_prefix('u')
                    .and_then(|s| s.parse().ok())
                    .filter(|i| *i >= 1)
                    .ok_or_else(|| ctx.err(line_no, vcol, format!("invalid variable `{var}`")))?;
                let lo: f64 = parse_num(&ctx, line_no, w[2].0, w[2].1, "lower bound")?;
                let hi: f64 = parse_num(&ctx, line_no, w[3].0, w[3].1, "upper bound")?;
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(ctx.err(
                        line_no,
                        w[2].0,
                        format!("empty or unbounded interval [{lo}, {hi}]"),
                    ));
                }
                if domain.iter().any(|(i, ..)| *i == index) {
                    return Err(ctx.err(line_no, vcol, format!("duplicate domain for `{var}`")));
                }
                domain.push((index, line_no, lo, hi));
            }
            "component" => {
                let start = col - 1 + keyword.len();
                let rest = &content[start..];
                let trimmed = rest.trim_start();
                if trimmed.trim().is_empty() {
                    return Err(ctx.err(line_no, start + 1, "missing expression"));
                }
                let offset = start + (rest.len() - trimmed.len());
                components.push((line_no, offset + 1, trimmed.trim_end()));
            }
            other => return Err(ctx.err(line_no, col, format!("unknown keyword `{other}`"))),
        }
    }

    let end = last_line.max(1);
    let ambient = ambient.ok_or_else(|| ctx.err(end, 1, "missing `ambient` line"))?;
    let (d, l) = dims.ok_or_else(|| ctx.err(end, 1, "missing `dims` line"))?;
    let m = domain.len();
    domain.sort_by_key(|(i, ..)| *i);
    for (expect, (i, line, ..)) in domain.iter().enumerate() {
        if *i != expect + 1 {
            return Err(ctx.err(
                *line,
                1,
                format!("domain variables must be u1..u{m} without gaps"),
            ));
        }
    }
    if d + l != m {
        return Err(ctx.err(
            end,
            1,
            format!("dims d+l={} but {m} domain variables", d + l),
        ));
    }
    if components.len() != ambient.dim() {
        return Err(ctx.err(
            end,
            1,
            format!(
                "ambient C^{} needs {} components, found {}",
                ambient.complex_dim(),
                ambient.dim(),
                components.len()
            ),
        ));
    }
    let mut exprs = Vec::with_capacity(components.len());
    for (line, col, src) in components {
        let e = parse_expression(src, m).map_err(|err| {
            let at = col + err.offset().unwrap_or(0);
            ctx.err(line, at, err.to_string())
        })?;
        exprs.push(e);
    }
    let bounds = domain.iter().map(|(_, _, lo, hi)| (*lo, *hi)).collect();
    let chart = Chart::new(exprs, bounds, d, l)?;
    Ok((chart, ambient))
}

/// Reads a chart file and validates the declared CR type at the center of
/// the parameter box.
pub fn load_chart_file(path: &Path, tol: &ToleranceConfig) -> Result<(Chart, AmbientSpace)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let (chart, ambient) = parse_chart_file(&text, &path.display().to_string())?;
    point_geometry(&ambient, &chart, &chart.center(), tol)?;
    Ok((chart, ambient))
}

/// Serializes a chart in the format read by [`parse_chart_file`].
pub fn emit_chart_file(chart: &Chart, ambient: &AmbientSpace, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    match ambient.model() {
        CurvatureModel::Flat => {
            let _ = writeln!(out, "ambient flat q={}", ambient.complex_dim());
        }
        CurvatureModel::ConstHolomorphic { c } => {
            let _ = writeln!(
                out,
                "ambient holomorphic q={} c={c:?}",
                ambient.complex_dim()
            );
        }
    }
    let _ = writeln!(
        out,
        "dims d={} l={}",
        chart.declared_d(),
        chart.declared_l()
    );
    for (i, (lo, hi)) in chart.domain().iter().enumerate() {
        let _ = writeln!(out, "domain u{} {lo:?} {hi:?}", i + 1);
    }
    for e in chart.components() {
        let _ = writeln!(out, "component {e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;

    const SPHERE: &str = "# unit 3-sphere\nambient flat q=2\ndims d=2 l=1\ndomain u1 0.3 1.2\ndomain u2 0.3 1.2\ndomain u3 0.3 1.2\ncomponent cos(u1)\ncomponent sin(u1)*cos(u2)\ncomponent sin(u1)*sin(u2)*cos(u3)\ncomponent sin(u1)*sin(u2)*sin(u3)\n";

    fn file_error(text: &str) -> (usize, usize, String) {
        match parse_chart_file(text, "t.chart") {
            Err(Error::ChartFile {
                line,
                column,
                message,
                ..
            }) => (line, column, message),
            other => panic!("expected a chart file error, got {other:?}"),
        }
    }

    #[test]
    fn sphere_file_loads_with_detected_split() {
        let (chart, amb) = parse_chart_file(SPHERE, "s.chart").unwrap();
        let g = point_geometry(&amb, &chart, &chart.center(), &ToleranceConfig::default()).unwrap();
        assert_eq!((g.d, g.l), (2, 1));
    }

    #[test]
    fn missing_q_is_a_syntax_error() {
        let (line, _, msg) = file_error(&SPHERE.replace("ambient flat q=2", "ambient flat"));
        assert_eq!(line, 2);
        assert!(msg.contains("q="), "{msg}");
    }

    #[test]
    fn expression_errors_point_into_the_line() {
        let (line, column, _) =
            file_error(&SPHERE.replace("component cos(u1)", "component cos(u1) + u9"));
        assert_eq!(line, 7);
        assert_eq!(column, 21);
    }

    #[test]
    fn wrong_declared_type_is_a_split_error() {
        let dir = std::env::temp_dir().join(format!("crcurv-chartfile-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.chart");
        std::fs::write(&p, SPHERE.replace("dims d=2 l=1", "dims d=4 l=-1")).unwrap();
        assert!(matches!(
            load_chart_file(&p, &ToleranceConfig::default()),
            Err(Error::ChartFile { .. })
        ));
        let s5 = crate::catalog::lookup("sphere_in_Cq:4,1,3").unwrap();
        let text =
            emit_chart_file(&s5.chart, &s5.ambient, None).replace("dims d=4 l=1", "dims d=2 l=3");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(
            load_chart_file(&p, &ToleranceConfig::default()),
            Err(Error::CrSplit(_))
        ));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn catalog_round_trips_through_text() {
        for e in catalog() {
            let text = emit_chart_file(&e.chart, &e.ambient, Some(&e.doc));
            let (chart, amb) = parse_chart_file(&text, "x").unwrap();
            assert_eq!(chart, e.chart, "{}", e.spec());
            assert_eq!(amb.dim(), e.ambient.dim());
        }
    }

    #[test]
    fn unknown_keyword_reports_column() {
        let (line, column, _) = file_error(&format!("{SPHERE}  bogus 1\n"));
        assert_eq!((line, column), (11, 3));
    }
}
