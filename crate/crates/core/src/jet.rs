//! Second-order forward-mode jets.

/// Value, gradient and Hessian of a scalar function of `m` variables.
///
/// The Hessian is kept as its upper triangle in row-major order, so symmetry
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, m: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; m],
            hess: vec![0.0; m * (m + 1) / 2],
        }
    }

    /// The coordinate function `u_index`, evaluated at `value`.
    pub fn variable(value: f64, index: usize, m: usize) -> Self {
        let mut j = Self::constant(value, m);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[tri_offset(i, j, self.dim())]
    }

    /// Dense symmetric Hessian, row-major.
    pub fn hessian_matrix(&self) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.hessian(i, j);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|x| x.is_finite())
            && self.hess.iter().all(|x| x.is_finite())
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.value *= s;
        self.grad.iter_mut().for_each(|g| *g *= s);
        self.hess.iter_mut().for_each(|h| *h *= s);
        self
    }

    pub fn add(&self, other: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a + b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a - b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a - b),
        }
    }

    pub fn mul(&self, other: &Jet2) -> Jet2 {
        let m = self.dim();
        let (f, g) = (self.value, other.value);
        let grad = zip_with(&self.grad, &other.grad, |a, b| a * g + f * b);
        let mut hess = vec![0.0; self.hess.len()];
        for i in 0..m {
            for j in i..m {
                let k = tri_offset(i, j, m);
                hess[k] = self.hess[k] * g
                    + f * other.hess[k]
                    + self.grad[i] * other.grad[j]
                    + self.grad[j] * other.grad[i];
            }
        }
        Jet2 {
            value: f * g,
            grad,
            hess,
        }
    }

    pub fn div(&self, other: &Jet2) -> Jet2 {
        let g = other.value;
        let recip = other.chain(1.0 / g, -1.0 / (g * g), 2.0 / (g * g * g));
        self.mul(&recip)
    }

    pub fn powi(&self, n: i32) -> Jet2 {
        if n == 0 {
            return Jet2::constant(1.0, self.dim());
        }
        let x = self.value;
        let nf = n as f64;
        let d1 = nf * x.powi(n - 1);
        let d2 = if n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * x.powi(n - 2)
        };
        self.chain(x.powi(n), d1, d2)
    }

    /// Composes a scalar function with value `f0`, first derivative `f1`
    /// and second derivative `f2` (all at `self.value`) onto this jet.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let m = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; self.hess.len()];
        for i in 0..m {
            for j in i..m {
                let k = tri_offset(i, j, m);
                hess[k] = f1 * self.hess[k] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }
}

#[inline]
fn tri_offset(i: usize, j: usize, m: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i hold m, m-1, ..., m-i+1 entries
    i * (2 * m + 1 - i) / 2 + (j - i)
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    #[test]
    fn offsets_cover_upper_triangle() {
        for m in 1..6 {
            let mut seen = vec![false; m * (m + 1) / 2];
            for i in 0..m {
                for j in i..m {
                    let k = tri_offset(i, j, m);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(k, tri_offset(j, i, m));
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn product_rule() {
        let e = parse_expression("u1*u2", 2).unwrap();
        let j = e.eval_jet2(&[3.0, 5.0]).unwrap();
        assert_eq!(j.value, 15.0);
        assert_eq!(j.grad, vec![5.0, 3.0]);
        assert_eq!(j.hessian(0, 1), 1.0);
        assert_eq!(j.hessian(1, 0), 1.0);
        assert_eq!(j.hessian(0, 0), 0.0);
    }

    #[test]
    fn sine_at_origin() {
        let e = parse_expression("sin(u1)", 1).unwrap();
        let j = e.eval_jet2(&[0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad, vec![1.0]);
        assert_eq!(j.hessian(0, 0), -0.0);
    }

    fn central(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn gaussian_bump_matches_central_differences() {
        let e = parse_expression("exp(u1^2)", 1).unwrap();
        let x = 0.7;
        let j = e.eval_jet2(&[x]).unwrap();
        let f = |t: f64| e.eval(&[t]).unwrap();
        let (d1, d2) = central(&f, x, 1e-4);
        assert!(((j.grad[0] - d1) / d1).abs() <= 1e-5);
        assert!(((j.hessian(0, 0) - d2) / d2).abs() <= 1e-5);
        // closed form: f' = 2x e^{x^2}, f'' = (2 + 4x^2) e^{x^2}
        let ex = (x * x).exp();
        assert!((j.grad[0] - 2.0 * x * ex).abs() < 1e-14);
        assert!((j.hessian(0, 0) - (2.0 + 4.0 * x * x) * ex).abs() < 1e-13);
    }

    #[test]
    fn quotient_and_powers() {
        let e = parse_expression("u1 / u2 + u2^-2 + sqrt(u1)", 2).unwrap();
        let (a, b) = (1.3, 0.6);
        let j = e.eval_jet2(&[a, b]).unwrap();
        let exact_grad = [1.0 / b + 0.5 / a.sqrt(), -a / (b * b) - 2.0 / b.powi(3)];
        assert!((j.grad[0] - exact_grad[0]).abs() < 1e-13);
        assert!((j.grad[1] - exact_grad[1]).abs() < 1e-13);
        assert!((j.hessian(0, 1) + 1.0 / (b * b)).abs() < 1e-13);
        assert!((j.hessian(1, 1) - (2.0 * a / b.powi(3) + 6.0 / b.powi(4))).abs() < 1e-12);
        assert!((j.hessian(0, 0) + 0.25 * a.powf(-1.5)).abs() < 1e-13);
    }
}
