//! Parametric immersions `u -> F(u)` given by component expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprError};
use crate::jet::Jet2;

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    components: Vec<Expr>,
    domain: Vec<(f64, f64)>,
    d: usize,
    l: usize,
}

impl Chart {
    /// `components` are the ambient coordinates of `F`; the parameter count is
    /// `domain.len()` and must equal `d + l`.
    pub fn new(components: Vec<Expr>, domain: Vec<(f64, f64)>, d: usize, l: usize) -> Result<Self> {
        let m = domain.len();
        if d == 0 || l == 0 {
            return Err(Error::CrSplit(format!(
                "declared dimensions d={d}, l={l} must both be positive"
            )));
        }
        if d + l != m {
            return Err(Error::Dimension {
                expected: d + l,
                found: m,
            });
        }
        if !components.len().is_multiple_of(2) || components.len() <= m {
            return Err(Error::Config(format!(
                "need an even number of components exceeding {m}, got {}",
                components.len()
            )));
        }
        for e in &components {
            if e.arity() > m {
                return Err(Error::Expr(ExprError::UnknownIdentifier {
                    name: format!("u{}", e.arity()),
                    offset: 0,
                }));
            }
        }
        for &(lo, hi) in &domain {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!(
                    "invalid domain interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(Chart {
            components,
            domain,
            d,
            l,
        })
    }

    pub fn param_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn declared_d(&self) -> usize {
        self.d
    }

    pub fn declared_l(&self) -> usize {
        self.l
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.domain.len()
            && u.iter()
                .zip(&self.domain)
                .all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_point(u)?;
        Ok(self
            .components
            .iter()
            .map(|e| e.eval(u))
            .collect::<std::result::Result<_, _>>()?)
    }

    pub fn jets(&self, u: &[f64]) -> Result<Vec<Jet2>> {
        self.check_point(u)?;
        Ok(self
            .components
            .iter()
            .map(|e| e.eval_jet2(u))
            .collect::<std::result::Result<_, _>>()?)
    }

    /// Columns `dF/du_i`, each of ambient length.
    pub fn jacobian_columns(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        let jets = self.jets(u)?;
        Ok(columns(&jets, self.param_dim()))
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.param_dim() {
            return Err(Error::Dimension {
                expected: self.param_dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    /// `count` points drawn uniformly from the domain box, deterministic in `seed`.
    pub fn random_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.domain
                    .iter()
                    .map(|&(a, b)| a + (b - a) * rng.random::<f64>())
                    .collect()
            })
            .collect()
    }

    /// Cell-centred tensor grid with `per_axis` points along every parameter.
    pub fn grid_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let m = self.param_dim();
        let total = per_axis.pow(m as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; m];
                for i in (0..m).rev() {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    let (a, b) = self.domain[i];
                    p[i] = a + (b - a) * (k as f64 + 0.5) / per_axis as f64;
                }
                p
            })
            .collect()
    }
}

pub(crate) fn columns(jets: &[Jet2], m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| jets.iter().map(|j| j.grad[i]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn torus() -> Chart {
        let comps = ["cos(u1)", "sin(u1)", "cos(u2)", "sin(u2)"]
            .iter()
            .map(|s| parse_expression(s, 2).unwrap())
            .collect();
        Chart::new(comps, vec![(0.0, 1.0), (0.0, 1.0)], 1, 1).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_in_box() {
        let c = torus();
        let a = c.random_points(20, 5);
        assert_eq!(a, c.random_points(20, 5));
        assert!(a.iter().all(|p| c.contains(p)));
        let g = c.grid_points(3);
        assert_eq!(g.len(), 9);
        assert!((g[0][0] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn jacobian_of_torus() {
        let cols = torus().jacobian_columns(&[0.0, 0.0]).unwrap();
        assert_eq!(cols[0], vec![-0.0, 1.0, 0.0, 0.0]);
        assert_eq!(cols[1], vec![0.0, 0.0, -0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_declarations() {
        let comps: Vec<Expr> = ["u1", "u2", "0", "0"]
            .iter()
            .map(|s| parse_expression(s, 2).unwrap())
            .collect();
        assert!(Chart::new(comps.clone(), vec![(0.0, 1.0); 2], 2, 0).is_err());
        assert!(Chart::new(comps.clone(), vec![(0.0, 1.0); 2], 2, 1).is_err());
        assert!(Chart::new(comps[..2].to_vec(), vec![(0.0, 1.0); 2], 1, 1).is_err());
    }
}
