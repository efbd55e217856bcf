//! Model ambient spaces: `C^q` with its flat metric, or a complex space form
//! of constant holomorphic sectional curvature `4c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec};
use crate::tensor::{standard_complex_structure, CurvatureTensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureModel {
    Flat,
    ConstHolomorphic { c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSpace {
    q: usize,
    j: Vec<f64>,
    model: CurvatureModel,
}

impl AmbientSpace {
    pub fn flat(q: usize) -> Self {
        assert!(q >= 1, "complex dimension must be positive");
        AmbientSpace {
            q,
            j: standard_complex_structure(2 * q),
            model: CurvatureModel::Flat,
        }
    }

    pub fn const_holomorphic(q: usize, c: f64) -> Self {
        assert!(q >= 1, "complex dimension must be positive");
        AmbientSpace {
            q,
            j: standard_complex_structure(2 * q),
            model: CurvatureModel::ConstHolomorphic { c },
        }
    }

    pub fn complex_dim(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        2 * self.q
    }

    pub fn model(&self) -> CurvatureModel {
        self.model
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.model, CurvatureModel::Flat)
    }

    /// `J` as a row-major `2q x 2q` matrix.
    pub fn complex_structure(&self) -> &[f64] {
        &self.j
    }

    pub fn apply_j(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.j, self.dim(), self.dim(), v)
    }

    /// `<R(X, Y) Z, W>`.
    pub fn curvature(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        let n = self.dim();
        for v in [x, y, z, w] {
            if v.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        let c = match self.model {
            CurvatureModel::Flat => return Ok(0.0),
            CurvatureModel::ConstHolomorphic { c } => c,
        };
        let (jx, jy, jz) = (self.apply_j(x), self.apply_j(y), self.apply_j(z));
        Ok(
            c * (dot(y, z) * dot(x, w) - dot(x, z) * dot(y, w) + dot(&jy, z) * dot(&jx, w)
                - dot(&jx, z) * dot(&jy, w)
                - 2.0 * dot(&jx, y) * dot(&jz, w)),
        )
    }

    /// Components `R(f_a, f_b, f_c, f_d)` for a family of ambient vectors.
    pub fn tensor_on(&self, frame: &[Vec<f64>]) -> CurvatureTensor {
        let k = frame.len();
        let c = match self.model {
            CurvatureModel::Flat => return CurvatureTensor::zeros(k),
            CurvatureModel::ConstHolomorphic { c } => c,
        };
        let jf: Vec<Vec<f64>> = frame.iter().map(|f| self.apply_j(f)).collect();
        let mut g = vec![0.0; k * k];
        let mut om = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                g[a * k + b] = dot(&frame[a], &frame[b]);
                om[a * k + b] = dot(&jf[a], &frame[b]);
            }
        }
        let g = |a: usize, b: usize| g[a * k + b];
        let o = |a: usize, b: usize| om[a * k + b];
        CurvatureTensor::from_fn(k, |a, b, cc, d| {
            c * (g(b, cc) * g(a, d) - g(a, cc) * g(b, d) + o(b, cc) * o(a, d)
                - o(a, cc) * o(b, d)
                - 2.0 * o(a, b) * o(cc, d))
        })
    }

    /// Components in the coordinate basis of `R^{2q}`.
    pub fn tensor(&self) -> CurvatureTensor {
        let n = self.dim();
        let basis: Vec<Vec<f64>> = (0..n).map(|i| crate::linalg::unit(n, i)).collect();
        self.tensor_on(&basis)
    }

    /// Exact supremum of the sectional curvature over all planes.
    pub fn sectional_upper_bound(&self) -> f64 {
        match self.model {
            CurvatureModel::Flat => 0.0,
            CurvatureModel::ConstHolomorphic { c } => c.max(4.0 * c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit;

    #[test]
    fn complex_structure_is_orthogonal_and_squares_to_minus_one() {
        for q in 1..4 {
            let amb = AmbientSpace::flat(q);
            let n = amb.dim();
            let j = amb.complex_structure();
            for a in 0..n {
                for b in 0..n {
                    let jj: f64 = (0..n).map(|k| j[a * n + k] * j[k * n + b]).sum();
                    let jtj: f64 = (0..n).map(|k| j[k * n + a] * j[k * n + b]).sum();
                    let id = if a == b { 1.0 } else { 0.0 };
                    assert!((jj + id).abs() < 1e-12);
                    assert!((jtj - id).abs() < 1e-12);
                }
            }
        }
        let j = AmbientSpace::flat(1).complex_structure().to_vec();
        assert_eq!(j, vec![0.0, -1.0, 1.0, 0.0]);
    }

    #[test]
    fn flat_model_vanishes() {
        let amb = AmbientSpace::flat(3);
        let v = [0.3, 1.0, -2.0, 0.5, 0.1, 7.0];
        assert_eq!(amb.curvature(&v, &v, &v, &v).unwrap(), 0.0);
        assert!(amb.curvature(&v[..4], &v, &v, &v).is_err());
        assert_eq!(amb.tensor().max_abs(), 0.0);
    }

    #[test]
    fn space_form_values() {
        let amb = AmbientSpace::const_holomorphic(2, 1.0);
        let (x, y) = (unit(4, 0), unit(4, 2));
        assert!((amb.curvature(&x, &y, &y, &x).unwrap() - 1.0).abs() < 1e-15);
        let jx = amb.apply_j(&x);
        assert!((amb.curvature(&x, &jx, &jx, &x).unwrap() - 4.0).abs() < 1e-15);
        // two orthogonal complex lines: R(X, JX, JY, Y) = 2c
        let jy = amb.apply_j(&y);
        assert!((amb.curvature(&x, &jx, &jy, &y).unwrap() - 2.0).abs() < 1e-15);
        let t = amb.tensor();
        assert!(t.symmetry_residual().max() < 1e-15);
        assert!(t.kahler_residual(amb.complex_structure()) < 1e-15);
        let zero = AmbientSpace::const_holomorphic(2, 0.0);
        assert_eq!(zero.tensor().max_abs(), 0.0);
    }
}
