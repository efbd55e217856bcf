//! Intrinsic curvature of the induced metric by finite differences.
//!
//! Uses only first derivatives of the immersion: the metric `g_ij` comes from
//! the Jacobian, its derivatives (for the Christoffel symbols) and the
//! derivatives of the Christoffel symbols are central differences. This is
//! independent of the second fundamental form route in
//! [`crate::geometry::point_geometry`].

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ExprError;
use crate::linalg::dot;
use crate::tensor::CurvatureTensor;

pub const DEFAULT_STEP: f64 = 1e-4;

/// Curvature `R(d_i, d_j, d_k, d_l)` in the coordinate basis of the chart.
#[derive(Debug, Clone)]
pub struct CoordinateCurvature {
    pub tensor: CurvatureTensor,
    /// Induced metric at the point, row-major `m x m`.
    pub metric: Vec<f64>,
}

impl CoordinateCurvature {
    /// Components on parameter-space vectors, e.g. the adapted frame of a
    /// [`crate::geometry::PointGeom`].
    pub fn in_frame(&self, param_frame: &[Vec<f64>]) -> CurvatureTensor {
        self.tensor.restrict(param_frame)
    }
}

pub fn intrinsic_curvature_fd(chart: &Chart, u: &[f64], step: f64) -> Result<CoordinateCurvature> {
    let m = chart.param_dim();
    if u.len() != m {
        return Err(Error::Dimension {
            expected: m,
            found: u.len(),
        });
    }
    for (i, (x, (lo, hi))) in u.iter().zip(chart.domain()).enumerate() {
        if x - 2.0 * step < *lo || x + 2.0 * step > *hi {
            return Err(Error::Expr(ExprError::Domain(format!(
                "finite-difference stencil leaves the domain along u{}",
                i + 1
            ))));
        }
    }
    let metric = |p: &[f64]| -> Result<Vec<f64>> {
        let cols = chart.jacobian_columns(p)?;
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = dot(&cols[i], &cols[j]);
            }
        }
        Ok(g)
    };
    let shifted = |p: &[f64], k: usize, t: f64| -> Vec<f64> {
        let mut q = p.to_vec();
        q[k] += t;
        q
    };
    // Gamma^l_ij, stored [l][i][j]
    let christoffel = |p: &[f64]| -> Result<Vec<f64>> {
        let g = metric(p)?;
        let mut dg = vec![0.0; m * m * m]; // [k][i][j] = d_k g_ij
        for k in 0..m {
            let gp = metric(&shifted(p, k, step))?;
            let gm = metric(&shifted(p, k, -step))?;
            for t in 0..m * m {
                dg[k * m * m + t] = (gp[t] - gm[t]) / (2.0 * step);
            }
        }
        let ginv = invert(&g, m)?;
        let mut gamma = vec![0.0; m * m * m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    for r in 0..m {
                        let first = dg[i * m * m + r * m + j] + dg[j * m * m + r * m + i]
                            - dg[r * m * m + i * m + j];
                        s += ginv[l * m + r] * first;
                    }
                    gamma[(l * m + i) * m + j] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    };
    let gamma = christoffel(u)?;
    let mut dgamma = vec![0.0; m * m * m * m]; // [k][l][i][j]
    for k in 0..m {
        let gp = christoffel(&shifted(u, k, step))?;
        let gm = christoffel(&shifted(u, k, -step))?;
        for t in 0..m * m * m {
            dgamma[k * m * m * m + t] = (gp[t] - gm[t]) / (2.0 * step);
        }
    }
    let gam = |l: usize, i: usize, j: usize| gamma[(l * m + i) * m + j];
    let dgam = |k: usize, l: usize, i: usize, j: usize| dgamma[((k * m + l) * m + i) * m + j];
    // R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_ir G^r_jk - G^l_jr G^r_ik
    let mut up = vec![0.0; m * m * m * m]; // [l][i][j][k]
    for l in 0..m {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let mut v = dgam(i, l, j, k) - dgam(j, l, i, k);
                    for r in 0..m {
                        v += gam(l, i, r) * gam(r, j, k) - gam(l, j, r) * gam(r, i, k);
                    }
                    up[((l * m + i) * m + j) * m + k] = v;
                }
            }
        }
    }
    let g = metric(u)?;
    let tensor = CurvatureTensor::from_fn(m, |i, j, k, w| {
        (0..m)
            .map(|l| g[w * m + l] * up[((l * m + i) * m + j) * m + k])
            .sum()
    });
    Ok(CoordinateCurvature { tensor, metric: g })
}

fn invert(g: &[f64], m: usize) -> Result<Vec<f64>> {
    let mat = nalgebra::DMatrix::from_row_slice(m, m, g);
    let inv = mat.try_inverse().ok_or_else(|| Error::Immersion {
        point: Vec::new(),
        sigma_min: 0.0,
        tol: 0.0,
    })?;
    Ok((0..m * m).map(|t| inv[(t / m, t % m)]).collect())
}
