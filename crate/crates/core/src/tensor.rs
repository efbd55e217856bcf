//! Algebraic curvature tensors on a finite-dimensional inner product space.
//!
//! Convention used everywhere in this crate:
//!
//! ```text
//! R(X, Y, Z, W) = <R(X, Y) Z, W>,   K(X, Y) = R(X, Y, Y, X)
//! ```
//!
//! so the unit round sphere has `K = +1`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    data: Vec<f64>,
}

/// Worst violation of each algebraic curvature identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryResidual {
    pub antisym_first: f64,
    pub antisym_last: f64,
    pub pair_swap: f64,
    pub bianchi: f64,
}

impl SymmetryResidual {
    pub fn max(&self) -> f64 {
        self.antisym_first
            .max(self.antisym_last)
            .max(self.pair_swap)
            .max(self.bianchi)
    }
}

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        CurvatureTensor {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        t.data[((a * dim + b) * dim + c) * dim + d] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    /// `K = c` on every plane.
    pub fn constant_curvature(dim: usize, c: f64) -> Self {
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        Self::from_fn(dim, |a, b, e, d| {
            c * (delta(b, e) * delta(a, d) - delta(a, e) * delta(b, d))
        })
    }

    /// `R(X,Y,Z,W) = A(X,W) A(Y,Z) - A(X,Z) A(Y,W)` for a symmetric `A` (row-major).
    pub fn gauss_type(dim: usize, a: &[f64]) -> Self {
        let at = |i: usize, j: usize| a[i * dim + j];
        Self::from_fn(dim, |x, y, z, w| at(x, w) * at(y, z) - at(x, z) * at(y, w))
    }

    /// Curvature produced through the Gauss equation by a symmetric,
    /// vector-valued bilinear form `h[i * dim + j]`:
    /// `R(X,Y,Z,W) = <h(Y,Z), h(X,W)> - <h(X,Z), h(Y,W)>`.
    pub fn from_second_fundamental_form(dim: usize, h: &[Vec<f64>]) -> Self {
        let hh = |i: usize, j: usize| &h[i * dim + j];
        Self::from_fn(dim, |x, y, z, w| {
            dot(hh(y, z), hh(x, w)) - dot(hh(x, z), hh(y, w))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let n = self.dim;
        self.data[((a * n + b) * n + c) * n + d] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn eval(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if y[b] == 0.0 {
                    continue;
                }
                let xy = x[a] * y[b];
                for c in 0..n {
                    if z[c] == 0.0 {
                        continue;
                    }
                    let base = ((a * n + b) * n + c) * n;
                    let row = &self.data[base..base + n];
                    total += xy * z[c] * dot(row, w);
                }
            }
        }
        total
    }

    /// Unnormalized sectional curvature `R(X,Y,Y,X)`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval(x, y, y, x)
    }

    /// Components in a new family of vectors given in the current coordinates.
    pub fn restrict(&self, frame: &[Vec<f64>]) -> CurvatureTensor {
        let n = self.dim;
        let k = frame.len();
        // contract one slot at a time: n^4 -> k n^3 -> k^2 n^2 -> ...
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for slot in 0..4 {
            let mut next_dims = dims;
            next_dims[slot] = k;
            let total: usize = next_dims.iter().product();
            let mut next = vec![0.0; total];
            let stride_in = |d: &[usize; 4], s: usize| d[s + 1..].iter().product::<usize>();
            let outer: usize = dims[..slot].iter().product();
            let inner = stride_in(&dims, slot);
            for o in 0..outer {
                for (f, v) in frame.iter().enumerate() {
                    for (i, vi) in v.iter().enumerate() {
                        if *vi == 0.0 {
                            continue;
                        }
                        let src = (o * dims[slot] + i) * inner;
                        let dst = (o * k + f) * inner;
                        for t in 0..inner {
                            next[dst + t] += vi * cur[src + t];
                        }
                    }
                }
            }
            cur = next;
            dims = next_dims;
        }
        CurvatureTensor { dim: k, data: cur }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CurvatureTensor {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn plus(&self, other: &CurvatureTensor) -> Self {
        assert_eq!(self.dim, other.dim);
        CurvatureTensor {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &CurvatureTensor) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn symmetry_residual(&self) -> SymmetryResidual {
        let n = self.dim;
        let mut r = SymmetryResidual {
            antisym_first: 0.0,
            antisym_last: 0.0,
            pair_swap: 0.0,
            bianchi: 0.0,
        };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, c, d);
                        r.antisym_first = r.antisym_first.max((v + self.get(b, a, c, d)).abs());
                        r.antisym_last = r.antisym_last.max((v + self.get(a, b, d, c)).abs());
                        r.pair_swap = r.pair_swap.max((v - self.get(c, d, a, b)).abs());
                        let cyc = v + self.get(b, c, a, d) + self.get(c, a, b, d);
                        r.bianchi = r.bianchi.max(cyc.abs());
                    }
                }
            }
        }
        r
    }

    /// Worst `|R(JX,JY,Z,W) - R(X,Y,Z,W)|` over basis vectors, for a
    /// row-major orthogonal `j`.
    pub fn kahler_residual(&self, j: &[f64]) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut lhs = 0.0;
                        for p in 0..n {
                            let jpa = j[p * n + a];
                            if jpa == 0.0 {
                                continue;
                            }
                            for q in 0..n {
                                lhs += jpa * j[q * n + b] * self.get(p, q, c, d);
                            }
                        }
                        worst = worst.max((lhs - self.get(a, b, c, d)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Images `J e_i` as vectors, for a row-major `n x n` matrix.
pub fn jcols(j: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|r| j[r * n + i]).collect())
        .collect()
}

/// The standard complex structure on `R^{2p}` pairing coordinate `2i` with
/// `2i + 1` (zero-based): `J e_{2i} = e_{2i+1}`, `J e_{2i+1} = -e_{2i}`.
pub fn standard_complex_structure(dim: usize) -> Vec<f64> {
    assert!(dim.is_multiple_of(2), "complex structure needs even dimension");
    let mut j = vec![0.0; dim * dim];
    for i in 0..dim / 2 {
        j[(2 * i + 1) * dim + 2 * i] = 1.0;
        j[(2 * i) * dim + 2 * i + 1] = -1.0;
    }
    j
}

/// Quadratic lift of the sectional curvature.
///
/// With `s(u)_{il} = w_{il} u_i u_l` over `i <= l` (`w = 1` on the diagonal,
/// `2` off it), `K(u, v) = s(u)^T M s(v)` for the symmetric matrix `M` built
/// from `R` symmetrized in its outer and inner index pairs. Evaluating a
/// tuple of `s` vectors then costs `O(s n^2 + s^2 n)` with `n = d(d+1)/2`.
#[derive(Debug, Clone)]
pub struct SectionalForm {
    dim: usize,
    pairs: usize,
    matrix: Vec<f64>,
}

impl SectionalForm {
    pub fn new(r: &CurvatureTensor) -> Self {
        let d = r.dim();
        let pairs = d * (d + 1) / 2;
        let idx = pair_indices(d);
        let mut matrix = vec![0.0; pairs * pairs];
        for (p, &(i, l)) in idx.iter().enumerate() {
            for (q, &(j, k)) in idx.iter().enumerate() {
                matrix[p * pairs + q] = 0.25
                    * (r.get(i, j, k, l)
                        + r.get(l, j, k, i)
                        + r.get(i, k, j, l)
                        + r.get(l, k, j, i));
            }
        }
        SectionalForm {
            dim: d,
            pairs,
            matrix,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// `s(u)` written into `out` (length `pairs`).
    #[inline]
    pub fn lift_into(&self, u: &[f64], out: &mut [f64]) {
        lift_into(self.dim, u, out);
    }

    /// `M s` written into `out`.
    #[inline]
    pub fn apply_into(&self, s: &[f64], out: &mut [f64]) {
        let n = self.pairs;
        for (p, o) in out.iter_mut().enumerate() {
            *o = dot(&self.matrix[p * n..(p + 1) * n], s);
        }
    }

    /// `a^T M b` for lifted vectors `a`, `b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.pairs;
        let mut total = 0.0;
        for (p, ap) in a.iter().enumerate() {
            if *ap != 0.0 {
                total += ap * dot(&self.matrix[p * n..(p + 1) * n], b);
            }
        }
        total
    }

    pub fn sectional(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut su = vec![0.0; self.pairs];
        let mut sv = vec![0.0; self.pairs];
        let mut mv = vec![0.0; self.pairs];
        self.lift_into(u, &mut su);
        self.lift_into(v, &mut sv);
        self.apply_into(&sv, &mut mv);
        dot(&su, &mv)
    }
}

/// `(i, l)` with `i <= l`, in the order used by [`lift_into`].
pub fn pair_indices(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for l in i..d {
            out.push((i, l));
        }
    }
    out
}

#[inline]
pub fn lift_into(d: usize, u: &[f64], out: &mut [f64]) {
    let mut p = 0;
    for i in 0..d {
        out[p] = u[i] * u[i];
        p += 1;
        let two_ui = 2.0 * u[i];
        for l in i + 1..d {
            out[p] = two_ui * u[l];
            p += 1;
        }
    }
}

/// Random tensor generators for tests and certification campaigns.
pub mod random {
    use super::*;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }

    pub fn symmetric_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = gaussian(rng);
                a[i * dim + j] = v;
                a[j * dim + i] = v;
            }
        }
        a
    }

    /// Sum of three Gauss-type tensors with random symmetric factors and
    /// random signs. Every identity of an algebraic curvature tensor holds.
    pub fn algebraic<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CurvatureTensor {
        let mut t = CurvatureTensor::zeros(dim);
        for _ in 0..3 {
            let a = symmetric_matrix(dim, rng);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            t = t.plus(&CurvatureTensor::gauss_type(dim, &a).scaled(sign * 0.5));
        }
        t
    }

    /// Tensor with nonnegative sectional curvature on every plane
    /// (Gauss-type terms of positive semidefinite factors).
    pub fn nonnegative<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CurvatureTensor {
        let mut t = CurvatureTensor::zeros(dim);
        for _ in 0..3 {
            let b: Vec<f64> = (0..dim * dim).map(|_| gaussian(rng)).collect();
            let mut a = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    a[i * dim + j] = (0..dim)
                        .map(|k| b[i * dim + k] * b[j * dim + k])
                        .sum::<f64>()
                        / dim as f64;
                }
            }
            t = t.plus(&CurvatureTensor::gauss_type(dim, &a));
        }
        t
    }

    /// Constant holomorphic sectional curvature `4c` model tensor for the
    /// standard complex structure.
    pub fn complex_space_form(dim: usize, c: f64) -> CurvatureTensor {
        let j = standard_complex_structure(dim);
        // omega[a][b] = <J e_a, e_b> = j[b][a]
        let om = |a: usize, b: usize| j[b * dim + a];
        let g = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        CurvatureTensor::from_fn(dim, |a, b, cc, d| {
            c * (g(b, cc) * g(a, d) - g(a, cc) * g(b, d) + om(b, cc) * om(a, d)
                - om(a, cc) * om(b, d)
                - 2.0 * om(a, b) * om(cc, d))
        })
    }

    /// Random tensor with all algebraic curvature identities plus
    /// `R(JX, JY, Z, W) = R(X, Y, Z, W)` for the standard `J` on `R^dim`.
    ///
    /// Built from the Gauss equation of complex-bilinear forms
    /// `h(z, w) = z^T S w` (`S` complex symmetric), which satisfy
    /// `h(JX, Y) = i h(X, Y)`, plus a complex space form term.
    pub fn kahler<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CurvatureTensor {
        assert!(dim.is_multiple_of(2));
        let p = dim / 2;
        let mut t = complex_space_form(dim, 0.5 * gaussian(rng));
        for _ in 0..2 {
            let mut s_re = vec![0.0; p * p];
            let mut s_im = vec![0.0; p * p];
            for a in 0..p {
                for b in a..p {
                    let (re, im) = (gaussian(rng), gaussian(rng));
                    s_re[a * p + b] = re;
                    s_re[b * p + a] = re;
                    s_im[a * p + b] = im;
                    s_im[b * p + a] = im;
                }
            }
            // basis vector e_i is the complex number iota_i in slot i / 2
            let iota = |i: usize| if i.is_multiple_of(2) { (1.0, 0.0) } else { (0.0, 1.0) };
            let mut h = vec![Vec::new(); dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    let (sr, si) = (s_re[(i / 2) * p + j / 2], s_im[(i / 2) * p + j / 2]);
                    let (ar, ai) = iota(i);
                    let (br, bi) = iota(j);
                    let (pr, pi) = (ar * br - ai * bi, ar * bi + ai * br);
                    h[i * dim + j] = vec![sr * pr - si * pi, sr * pi + si * pr];
                }
            }
            let sign = if rng.random::<bool>() { 0.5 } else { -0.5 };
            t = t.plus(&CurvatureTensor::from_second_fundamental_form(dim, &h).scaled(sign));
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_curvature_sectional() {
        let r = CurvatureTensor::constant_curvature(3, 2.0);
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 0.6, 0.8];
        assert!((r.sectional(&x, &y) - 2.0).abs() < 1e-15);
        assert!(r.symmetry_residual().max() < 1e-15);
    }

    #[test]
    fn generators_are_algebraic_curvature_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 4, 6] {
            assert!(random::algebraic(dim, &mut rng).symmetry_residual().max() < 1e-12);
            assert!(random::nonnegative(dim, &mut rng).symmetry_residual().max() < 1e-12);
            let k = random::kahler(dim, &mut rng);
            assert!(k.symmetry_residual().max() < 1e-12);
            let j = standard_complex_structure(dim);
            let jv = jcols(&j, dim);
            // R(Ja, Jb, c, d) = R(a, b, c, d)
            for a in 0..dim {
                for b in 0..dim {
                    for c in 0..dim {
                        for d in 0..dim {
                            let e = |i: usize| crate::linalg::unit(dim, i);
                            let lhs = k.eval(&jv[a], &jv[b], &e(c), &e(d));
                            assert!((lhs - k.get(a, b, c, d)).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn space_form_holomorphic_and_totally_real() {
        let r = random::complex_space_form(4, 1.0);
        let e = |i: usize| crate::linalg::unit(4, i);
        // e0 and J e0 = e1 span a complex line
        assert!((r.sectional(&e(0), &e(1)) - 4.0).abs() < 1e-15);
        // e0, e2 are totally real
        assert!((r.sectional(&e(0), &e(2)) - 1.0).abs() < 1e-15);
        assert!(r.symmetry_residual().max() < 1e-15);
    }

    #[test]
    fn restrict_matches_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random::algebraic(4, &mut rng);
        let frame = vec![
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.1, -0.7, 0.2, 0.3],
            vec![1.0, 0.0, -2.0, 0.25],
        ];
        let t = r.restrict(&frame);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let direct = r.eval(&frame[a], &frame[b], &frame[c], &frame[d]);
                        assert!((t.get(a, b, c, d) - direct).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sectional_form_agrees_with_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 3, 5] {
            let r = random::algebraic(dim, &mut rng);
            let form = SectionalForm::new(&r);
            let u: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.7).sin()).collect();
            let v: Vec<f64> = (0..dim).map(|i| (i as f64 * 1.3 + 0.2).cos()).collect();
            assert!((form.sectional(&u, &v) - r.sectional(&u, &v)).abs() < 1e-12);
        }
    }
}
