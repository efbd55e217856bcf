//! Pointwise extrinsic and intrinsic geometry of a chart inside a model
//! ambient space.
//!
//! All tensors of a [`PointGeom`] are expressed in the *adapted* orthonormal
//! frame `f_0, ..., f_{m-1}`: the first `d` vectors span `D` and come in
//! pairs `(X, phi X)`, the remaining `l` span `D^perp`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::ambient::AmbientSpace;
use crate::chart::{columns, Chart};
use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::linalg::{
    axpy, dot, gram_schmidt, norm, orthogonalize, orthonormality_residual, scaled,
    upper_triangular_inverse,
};
use crate::tensor::CurvatureTensor;

/// Splitting `TM = D + D^perp` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CrSplit {
    /// Orthonormal basis of `D`, ordered `X_1, phi X_1, X_2, phi X_2, ...`,
    /// as coefficient vectors in the input tangent frame.
    pub d_coeffs: Vec<Vec<f64>>,
    pub perp_coeffs: Vec<Vec<f64>>,
    pub d_frame: Vec<Vec<f64>>,
    pub perp_frame: Vec<Vec<f64>>,
    /// `phi` on `D` in the `d_frame` basis, row-major `d x d`:
    /// `phi[a][b] = <f_a, J f_b>`.
    pub phi: Vec<f64>,
    /// Singular values of the tangential part of `J`, descending.
    pub singular_values: Vec<f64>,
    /// `max |phi^2 + I|` on `D`.
    pub phi_residual: f64,
    /// `max |<X, J Z>|` over `X` in `D`, `Z` in `D^perp`.
    pub mixing_residual: f64,
    /// Norm of the tangential part of `J` restricted to `D^perp`; zero
    /// exactly when `J D^perp` is normal (a totally real complement).
    pub perp_tangential: f64,
}

impl CrSplit {
    pub fn d(&self) -> usize {
        self.d_frame.len()
    }

    pub fn l(&self) -> usize {
        self.perp_frame.len()
    }

    pub fn perp_totally_real(&self, tol: &ToleranceConfig) -> bool {
        self.perp_tangential <= tol.phi
    }
}

/// Splits the tangent space spanned by the orthonormal `tangent` frame into
/// the maximal `J`-invariant subspace `D` and its complement.
///
/// The singular values of the tangential part of `J` that lie within
/// `tol.cr` of 1 determine `D`.
pub fn cr_split(
    amb: &AmbientSpace,
    tangent: &[Vec<f64>],
    declared_d: Option<usize>,
    tol: &ToleranceConfig,
) -> Result<CrSplit> {
    let m = tangent.len();
    let residual = orthonormality_residual(tangent);
    if residual > tol.orthonormality {
        return Err(Error::NonOrthonormalFrame { residual });
    }
    let jt: Vec<Vec<f64>> = tangent.iter().map(|e| amb.apply_j(e)).collect();
    // a[r][c] = <e_r, J e_c>
    let a = DMatrix::from_fn(m, m, |r, c| dot(&tangent[r], &jt[c]));
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .total_cmp(&eig.eigenvalues[x])
            .then(x.cmp(&y))
    });
    let singular_values: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0).sqrt())
        .collect();
    let cut = 1.0 - tol.cr;
    let d = singular_values.iter().filter(|s| **s >= cut).count();
    if d == 0 {
        return Err(Error::CrSplit(format!(
            "no J-invariant directions (largest singular value {:.6})",
            singular_values.first().copied().unwrap_or(0.0)
        )));
    }
    if d == m {
        return Err(Error::CrSplit(
            "tangent space is J-invariant; D^perp is trivial".into(),
        ));
    }
    if d % 2 != 0 {
        return Err(Error::CrSplit(format!("odd J-invariant dimension {d}")));
    }
    if let Some(dd) = declared_d {
        if dd != d {
            return Err(Error::CrSplit(format!("detected d={d}, declared d={dd}")));
        }
    }
    let eigvec =
        |k: usize| -> Vec<f64> { eig.eigenvectors.column(order[k]).iter().copied().collect() };
    let d_space: Vec<Vec<f64>> = (0..d).map(eigvec).collect();
    let perp_space: Vec<Vec<f64>> = (d..m).map(eigvec).collect();
    let apply_a = |v: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|r| (0..m).map(|c| a[(r, c)] * v[c]).sum())
            .collect()
    };

    // J-adapted basis of D: pick the coordinate direction with the largest
    // component in D, then its phi-image, and repeat on the remainder.
    let mut d_coeffs: Vec<Vec<f64>> = Vec::with_capacity(d);
    while d_coeffs.len() < d {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for i in 0..m {
            let mut v = project(&d_space, &crate::linalg::unit(m, i));
            orthogonalize(&mut v, &d_coeffs);
            let n = norm(&v);
            if best.as_ref().is_none_or(|(_, bn)| n > *bn) {
                best = Some((v, n));
            }
        }
        let (v, n) = best.expect("m > 0");
        let x = scaled(&v, 1.0 / n);
        let mut y = project(&d_space, &apply_a(&x));
        orthogonalize(&mut y, &d_coeffs);
        orthogonalize(&mut y, std::slice::from_ref(&x));
        let ny = norm(&y);
        if ny < 0.5 {
            return Err(Error::CrSplit(format!(
                "phi degenerates on D (|phi X| = {ny:.3e})"
            )));
        }
        d_coeffs.push(x);
        d_coeffs.push(scaled(&y, 1.0 / ny));
    }
    let mut perp_coeffs: Vec<Vec<f64>> = Vec::with_capacity(m - d);
    while perp_coeffs.len() < m - d {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for i in 0..m {
            let mut v = project(&perp_space, &crate::linalg::unit(m, i));
            orthogonalize(&mut v, &perp_coeffs);
            let n = norm(&v);
            if best.as_ref().is_none_or(|(_, bn)| n > *bn) {
                best = Some((v, n));
            }
        }
        let (v, n) = best.expect("m > 0");
        perp_coeffs.push(scaled(&v, 1.0 / n));
    }

    let to_ambient = |c: &Vec<f64>| -> Vec<f64> {
        let mut out = vec![0.0; amb.dim()];
        for (e, ci) in tangent.iter().zip(c) {
            axpy(*ci, e, &mut out);
        }
        out
    };
    let d_frame: Vec<Vec<f64>> = d_coeffs.iter().map(to_ambient).collect();
    let perp_frame: Vec<Vec<f64>> = perp_coeffs.iter().map(to_ambient).collect();
    let jd: Vec<Vec<f64>> = d_frame.iter().map(|f| amb.apply_j(f)).collect();
    let jp: Vec<Vec<f64>> = perp_frame.iter().map(|f| amb.apply_j(f)).collect();

    let mut phi = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            phi[r * d + c] = dot(&d_frame[r], &jd[c]);
        }
    }
    let mut phi_residual = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let sq: f64 = (0..d).map(|k| phi[r * d + k] * phi[k * d + c]).sum();
            let id = if r == c { 1.0 } else { 0.0 };
            phi_residual = phi_residual.max((sq + id).abs());
        }
    }
    if phi_residual > tol.phi {
        return Err(Error::CrSplit(format!(
            "phi^2 + I residual {phi_residual:.3e} on D exceeds {:.1e}",
            tol.phi
        )));
    }
    let mut mixing_residual = 0.0f64;
    for x in &d_frame {
        for jz in &jp {
            mixing_residual = mixing_residual.max(dot(x, jz).abs());
        }
    }
    let mut perp_tangential = 0.0f64;
    for jz in &jp {
        let t: f64 = tangent.iter().map(|e| dot(e, jz).powi(2)).sum();
        perp_tangential = perp_tangential.max(t.sqrt());
    }

    Ok(CrSplit {
        d_coeffs,
        perp_coeffs,
        d_frame,
        perp_frame,
        phi,
        singular_values,
        phi_residual,
        mixing_residual,
        perp_tangential,
    })
}

fn project(space: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for b in space {
        axpy(dot(b, v), b, &mut out);
    }
    out
}

/// First- and second-order geometry of the immersion at one parameter point.
#[derive(Debug, Clone)]
pub struct PointGeom {
    pub u: Vec<f64>,
    pub position: Vec<f64>,
    pub ambient: AmbientSpace,
    /// Gram-Schmidt frame of the Jacobian columns.
    pub tangent: Vec<Vec<f64>>,
    /// Adapted frame, `D` first (ambient coordinates).
    pub frame: Vec<Vec<f64>>,
    /// Adapted frame as parameter-space vectors: `frame[a] = dF(param_frame[a])`.
    pub param_frame: Vec<Vec<f64>>,
    pub normal: Vec<Vec<f64>>,
    pub d: usize,
    pub l: usize,
    /// `h(f_a, f_b)` as ambient vectors, row-major `m x m`.
    pub h: Vec<Vec<f64>>,
    /// Induced curvature in the adapted frame.
    pub curvature: CurvatureTensor,
    /// Ambient curvature restricted to the adapted frame.
    pub ambient_curvature: CurvatureTensor,
    /// `phi` on `D` (row-major `d x d`) in the first `d` adapted vectors.
    pub phi: Vec<f64>,
    pub split: CrSplit,
    pub mean_curvature: Vec<f64>,
    pub mean_curvature_d: Vec<f64>,
    pub mean_curvature_perp: Vec<f64>,
    pub sigma_min: f64,
}

impl PointGeom {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// `h(f_a, f_b)`.
    pub fn h_at(&self, a: usize, b: usize) -> &[f64] {
        &self.h[a * self.dim() + b]
    }

    /// `h(X, Y)` for `X`, `Y` given by coefficients in the first `x.len()`
    /// (resp. `y.len()`) adapted vectors.
    pub fn h_coords(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient.dim()];
        for (a, xa) in x.iter().enumerate() {
            if *xa == 0.0 {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                axpy(xa * yb, self.h_at(a, b), &mut out);
            }
        }
        out
    }

    /// Coefficients of an ambient tangent vector in the adapted frame.
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|f| dot(f, v)).collect()
    }

    /// Curvature restricted to `D`, in the adapted `D` basis.
    pub fn curvature_on_d(&self) -> CurvatureTensor {
        restrict_leading(&self.curvature, self.d)
    }

    /// Second fundamental form restricted to `D`, row-major `d x d`.
    pub fn h_on_d(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.d * self.d);
        for a in 0..self.d {
            for b in 0..self.d {
                out.push(self.h_at(a, b).to_vec());
            }
        }
        out
    }
}

/// Components of `r` on its first `k` basis vectors.
pub fn restrict_leading(r: &CurvatureTensor, k: usize) -> CurvatureTensor {
    CurvatureTensor::from_fn(k, |a, b, c, d| r.get(a, b, c, d))
}

/// Evaluates the full pointwise geometry of `chart` at `u`.
///
/// The second fundamental form is the normal part of the ambient second
/// derivative, which is the Levi-Civita one for the flat model. For the
/// curved model the chart coordinates are read as normal coordinates.
pub fn point_geometry(
    amb: &AmbientSpace,
    chart: &Chart,
    u: &[f64],
    tol: &ToleranceConfig,
) -> Result<PointGeom> {
    if chart.ambient_dim() != amb.dim() {
        return Err(Error::Dimension {
            expected: amb.dim(),
            found: chart.ambient_dim(),
        });
    }
    let m = chart.param_dim();
    let n = amb.dim();
    let jets = chart.jets(u)?;
    let position: Vec<f64> = jets.iter().map(|j| j.value).collect();
    let cols = columns(&jets, m);

    let jac = DMatrix::from_fn(n, m, |r, c| cols[c][r]);
    let sigma_min = jac
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(sigma_min > tol.rank) {
        return Err(Error::Immersion {
            point: u.to_vec(),
            sigma_min,
            tol: tol.rank,
        });
    }
    let (tangent, r) = gram_schmidt(&cols, 0.0).map_err(|_| Error::Immersion {
        point: u.to_vec(),
        sigma_min,
        tol: tol.rank,
    })?;
    let t = upper_triangular_inverse(&r, m);
    let split = cr_split(amb, &tangent, Some(chart.declared_d()), tol)?;
    let d = split.d();
    if split.l() != chart.declared_l() {
        return Err(Error::CrSplit(format!(
            "detected l={}, declared l={}",
            split.l(),
            chart.declared_l()
        )));
    }

    let coeffs: Vec<Vec<f64>> = split
        .d_coeffs
        .iter()
        .chain(&split.perp_coeffs)
        .cloned()
        .collect();
    let frame: Vec<Vec<f64>> = split
        .d_frame
        .iter()
        .chain(&split.perp_frame)
        .cloned()
        .collect();
    // e_a = sum_i T_ia dF_i, and f = sum_a c_a e_a
    let param_frame: Vec<Vec<f64>> = coeffs
        .iter()
        .map(|c| {
            (0..m)
                .map(|i| (0..m).map(|a| t[i * m + a] * c[a]).sum())
                .collect()
        })
        .collect();
    let normal = crate::linalg::complete_basis(&tangent, n);
    let residual = {
        let mut all = frame.clone();
        all.extend(normal.iter().cloned());
        orthonormality_residual(&all)
    };
    if residual > tol.orthonormality {
        return Err(Error::NonOrthonormalFrame { residual });
    }

    let hess: Vec<Vec<f64>> = jets.iter().map(|j| j.hessian_matrix()).collect();
    let mut h = vec![Vec::new(); m * m];
    for a in 0..m {
        for b in a..m {
            let (wa, wb) = (&param_frame[a], &param_frame[b]);
            let second: Vec<f64> = hess
                .iter()
                .map(|hk| {
                    let mut s = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            s += wa[i] * wb[j] * hk[i * m + j];
                        }
                    }
                    s
                })
                .collect();
            let mut v = vec![0.0; n];
            for nu in &normal {
                axpy(dot(nu, &second), nu, &mut v);
            }
            h[a * m + b] = v.clone();
            h[b * m + a] = v;
        }
    }

    let ambient_curvature = amb.tensor_on(&frame);
    let curvature = ambient_curvature.plus(&CurvatureTensor::from_second_fundamental_form(m, &h));

    let trace = |range: std::ops::Range<usize>| {
        let mut out = vec![0.0; n];
        for a in range {
            axpy(1.0, &h[a * m + a], &mut out);
        }
        out
    };
    let mean_curvature = trace(0..m);
    let mean_curvature_d = trace(0..d);
    let mean_curvature_perp = trace(d..m);
    let phi = split.phi.clone();

    Ok(PointGeom {
        u: u.to_vec(),
        position,
        ambient: amb.clone(),
        tangent,
        frame,
        param_frame,
        normal,
        d,
        l: m - d,
        h,
        curvature,
        ambient_curvature,
        phi,
        split,
        mean_curvature,
        mean_curvature_d,
        mean_curvature_perp,
        sigma_min,
    })
}

/// `H_V = sum_i h(v_i, v_i)` for an orthonormal family of tangent vectors
/// given in ambient coordinates.
pub fn mean_curvature_vector(
    geom: &PointGeom,
    v_frame: &[Vec<f64>],
    tol: &ToleranceConfig,
) -> Result<Vec<f64>> {
    let residual = orthonormality_residual(v_frame);
    if residual > tol.orthonormality {
        return Err(Error::NonOrthonormalFrame { residual });
    }
    let mut out = vec![0.0; geom.ambient.dim()];
    for v in v_frame {
        let x = geom.coords(v);
        let tangential = norm(&x);
        if (tangential - 1.0).abs() > tol.orthonormality.max(1e-9) {
            return Err(Error::NonOrthonormalFrame {
                residual: (tangential - 1.0).abs(),
            });
        }
        axpy(1.0, &geom.h_coords(&x, &x), &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn chart(src: &[&str], domain: Vec<(f64, f64)>, d: usize, l: usize) -> Chart {
        let m = domain.len();
        Chart::new(
            src.iter()
                .map(|s| parse_expression(s, m).unwrap())
                .collect(),
            domain,
            d,
            l,
        )
        .unwrap()
    }

    fn s3() -> Chart {
        chart(
            &[
                "cos(u1)",
                "sin(u1)*cos(u2)",
                "sin(u1)*sin(u2)*cos(u3)",
                "sin(u1)*sin(u2)*sin(u3)",
            ],
            vec![(0.3, 1.2), (0.3, 1.2), (0.0, 6.0)],
            2,
            1,
        )
    }

    #[test]
    fn sphere_s3_geometry() {
        let amb = AmbientSpace::flat(2);
        let tol = ToleranceConfig::default();
        for u in s3().random_points(5, 1) {
            let g = point_geometry(&amb, &s3(), &u, &tol).unwrap();
            assert!((dot(&g.mean_curvature, &g.mean_curvature) - 9.0).abs() < 1e-10);
            for a in 0..3 {
                for b in 0..3 {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((norm(g.h_at(a, b)) - expect).abs() < 1e-10);
                }
            }
            assert!(g.split.phi_residual < 1e-12);
            assert!(g.split.perp_totally_real(&tol));
            assert!(g.curvature.symmetry_residual().max() < 1e-12);
            let x = crate::linalg::unit(3, 0);
            let y = crate::linalg::unit(3, 2);
            assert!((g.curvature.sectional(&x, &y) - 1.0).abs() < 1e-10);
            let hv = mean_curvature_vector(&g, &g.frame[..1], &tol).unwrap();
            assert!((norm(&hv) - 1.0).abs() < 1e-10);
            // phi pairs the adapted D basis
            assert!((g.phi[2] - 1.0).abs() < 1e-12 || (g.phi[2] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn split_rejects_complex_and_real_planes() {
        let amb = AmbientSpace::flat(2);
        let tol = ToleranceConfig::default();
        let complex_line = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]];
        assert!(matches!(
            cr_split(&amb, &complex_line, None, &tol),
            Err(Error::CrSplit(_))
        ));
        let real_plane = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]];
        assert!(matches!(
            cr_split(&amb, &real_plane, None, &tol),
            Err(Error::CrSplit(_))
        ));
    }

    #[test]
    fn declared_dimension_mismatch() {
        let amb = AmbientSpace::flat(2);
        let tol = ToleranceConfig::default();
        let e: Vec<Vec<f64>> = (0..3).map(|i| crate::linalg::unit(4, i)).collect();
        assert!(cr_split(&amb, &e, Some(2), &tol).is_ok());
        assert!(cr_split(&amb, &e, Some(4), &tol).is_err());
    }

    #[test]
    fn rank_loss_is_reported() {
        let amb = AmbientSpace::flat(2);
        let c = chart(&["u1*u1", "u2", "u3", "0"], vec![(-1.0, 1.0); 3], 2, 1);
        let err =
            point_geometry(&amb, &c, &[0.0, 0.1, 0.2], &ToleranceConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Immersion { .. }));
    }
}
