//! Tuples of mutually orthogonal subspaces and their extremization.
//!
//! Two feasible sets are handled:
//!
//! * flags: `k` blocks of orthonormal columns in `R^d` with sizes
//!   `n_1, ..., n_k`, stored as a `d x s` matrix of columns;
//! * plane tuples: `k` unit vectors `X_i` such that the planes
//!   `span(X_i, phi X_i)` are mutually orthogonal.
//!
//! The optimizer is a restarted cyclic coordinate ascent over Givens
//! rotations. Plane tuples are rotated by unitary Givens rotations (which
//! commute with `phi`) and re-orthogonalized after every accepted step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, orthonormality_residual, scaled};

/// Scalar function of a block-orthonormal family of columns.
pub trait Objective {
    fn eval(&self, cols: &[Vec<f64>], sizes: &[usize]) -> f64;

    /// Total degree when the objective is a polynomial in the column
    /// entries. Along a Givens orbit it is then a trigonometric polynomial
    /// of that degree, which the line search exploits.
    fn degree(&self) -> Option<usize> {
        None
    }
}

impl<F: Fn(&[Vec<f64>], &[usize]) -> f64> Objective for F {
    fn eval(&self, cols: &[Vec<f64>], sizes: &[usize]) -> f64 {
        self(cols, sizes)
    }
}

/// Wraps a closure known to be a polynomial of the given degree.
pub struct Polynomial<F> {
    pub degree: usize,
    pub f: F,
}

impl<F: Fn(&[Vec<f64>], &[usize]) -> f64> Objective for Polynomial<F> {
    fn eval(&self, cols: &[Vec<f64>], sizes: &[usize]) -> f64 {
        (self.f)(cols, sizes)
    }

    fn degree(&self) -> Option<usize> {
        Some(self.degree)
    }
}

struct Negated<'a, O: ?Sized>(&'a O);

impl<O: Objective + ?Sized> Objective for Negated<'_, O> {
    fn eval(&self, cols: &[Vec<f64>], sizes: &[usize]) -> f64 {
        -self.0.eval(cols, sizes)
    }

    fn degree(&self) -> Option<usize> {
        self.0.degree()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// A restart stops once a full sweep improves by less than this.
    pub floor: f64,
    pub seed: u64,
    /// Bracket tolerance of the golden-section line search.
    pub line_tol: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            restarts: 16,
            max_sweeps: 200,
            floor: 1e-10,
            seed: 0,
            line_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceTuple {
    pub sizes: Vec<usize>,
    /// Orthonormal columns in `R^d`, block after block.
    pub cols: Vec<Vec<f64>>,
}

impl SubspaceTuple {
    pub fn new(sizes: Vec<usize>, cols: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let d = cols.first().map_or(0, |c| c.len());
        validate_sizes(d, &sizes)?;
        if cols.len() != sizes.iter().sum::<usize>() || cols.iter().any(|c| c.len() != d) {
            return Err(Error::Dimension {
                expected: sizes.iter().sum(),
                found: cols.len(),
            });
        }
        let residual = orthonormality_residual(&cols);
        if residual > tol {
            return Err(Error::NonOrthonormalFrame { residual });
        }
        Ok(SubspaceTuple { sizes, cols })
    }

    pub fn d(&self) -> usize {
        self.cols.first().map_or(0, |c| c.len())
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn blocks(&self) -> Vec<&[Vec<f64>]> {
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut start = 0;
        for &n in &self.sizes {
            out.push(&self.cols[start..start + n]);
            start += n;
        }
        out
    }
}

/// `k` mutually orthogonal `phi`-invariant planes `span(X_i, phi X_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneTuple {
    pub vectors: Vec<Vec<f64>>,
    /// `phi X_i`.
    pub images: Vec<Vec<f64>>,
}

impl PlaneTuple {
    /// Columns `X_1, phi X_1, X_2, phi X_2, ...` with sizes `(2, ..., 2)`.
    pub fn as_flag(&self) -> SubspaceTuple {
        let mut cols = Vec::with_capacity(2 * self.vectors.len());
        for (x, y) in self.vectors.iter().zip(&self.images) {
            cols.push(x.clone());
            cols.push(y.clone());
        }
        SubspaceTuple {
            sizes: vec![2; self.vectors.len()],
            cols,
        }
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult<T> {
    pub value: f64,
    pub maximizer: T,
    pub restarts: usize,
    pub sweeps: usize,
    pub oracle_gap: Option<f64>,
}

pub fn validate_sizes(d: usize, sizes: &[usize]) -> Result<()> {
    let err = |reason: &str| Error::BlockSize {
        sizes: sizes.to_vec(),
        dim: d,
        reason: reason.to_string(),
    };
    if sizes.is_empty() {
        return Err(err("at least one block is required"));
    }
    if sizes.contains(&0) {
        return Err(err("blocks must be nonempty"));
    }
    if sizes.iter().sum::<usize>() > d {
        return Err(err("total size exceeds the dimension"));
    }
    Ok(())
}

fn validate_planes(d: usize, k: usize) -> Result<()> {
    if k == 0 || 2 * k > d {
        return Err(Error::BlockSize {
            sizes: vec![2; k],
            dim: d,
            reason: "need 1 <= k and 2k <= d".into(),
        });
    }
    Ok(())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of restart `index`; depends only on `(seed, index)` so that runs
/// with more restarts extend runs with fewer.
pub fn restart_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64 + 1))
}

fn gaussian_columns(rng: &mut ChaCha8Rng, d: usize, s: usize) -> Vec<Vec<f64>> {
    (0..s)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

/// Orthonormalizes columns in place (modified Gram-Schmidt, two passes).
/// Returns the smallest pivot met.
fn orthonormalize(cols: &mut [Vec<f64>]) -> f64 {
    let mut min_pivot = f64::INFINITY;
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let p = dot(v, q);
                axpy(-p, q, v);
            }
        }
        let n = norm(v);
        min_pivot = min_pivot.min(n);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
    }
    min_pivot
}

/// First `s` columns of a Haar-distributed orthogonal `d x d` matrix.
pub fn random_subspace_tuple(d: usize, sizes: &[usize], seed: u64) -> Result<SubspaceTuple> {
    validate_sizes(d, sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(haar_tuple(&mut rng, d, sizes))
}

fn haar_tuple(rng: &mut ChaCha8Rng, d: usize, sizes: &[usize]) -> SubspaceTuple {
    let s = sizes.iter().sum();
    loop {
        let mut cols = gaussian_columns(rng, d, s);
        if orthonormalize(&mut cols) > 1e-8 {
            return SubspaceTuple {
                sizes: sizes.to_vec(),
                cols,
            };
        }
    }
}

fn axis_tuple(d: usize, sizes: &[usize]) -> SubspaceTuple {
    let s: usize = sizes.iter().sum();
    SubspaceTuple {
        sizes: sizes.to_vec(),
        cols: (0..s).map(|i| crate::linalg::unit(d, i)).collect(),
    }
}

/// Orthonormal basis `b_0, phi b_0, b_1, phi b_1, ...` of `R^d` for a
/// skew orthogonal `phi` (row-major), in which `phi` is the standard
/// complex structure.
pub fn phi_adapted_basis(phi: &[f64], d: usize) -> Result<Vec<Vec<f64>>> {
    if !d.is_multiple_of(2) || phi.len() != d * d {
        return Err(Error::Dimension {
            expected: d * d,
            found: phi.len(),
        });
    }
    let mut residual = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let sq: f64 = (0..d).map(|k| phi[r * d + k] * phi[k * d + c]).sum();
            let id = if r == c { 1.0 } else { 0.0 };
            residual = residual.max((sq + id).abs());
            residual = residual.max((phi[r * d + c] + phi[c * d + r]).abs());
        }
    }
    if residual > 1e-8 {
        return Err(Error::NotJInvariant { residual });
    }
    let apply = |v: &[f64]| crate::linalg::mat_vec(phi, d, d, v);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for i in 0..d {
            let mut v = crate::linalg::unit(d, i);
            crate::linalg::orthogonalize(&mut v, &basis);
            let n = norm(&v);
            if best.as_ref().is_none_or(|(_, bn)| n > *bn) {
                best = Some((v, n));
            }
        }
        let (v, n) = best.expect("d > 0");
        let x = scaled(&v, 1.0 / n);
        let mut y = apply(&x);
        crate::linalg::orthogonalize(&mut y, &basis);
        let ny = norm(&y);
        basis.push(x);
        basis.push(scaled(&y, 1.0 / ny));
    }
    Ok(basis)
}

/// State of a plane tuple: `k` vectors in the coordinates of a
/// `phi`-adapted basis, where `phi` acts as the standard complex structure.
struct PlaneSpace<'a> {
    d: usize,
    k: usize,
    phi: &'a [f64],
    basis: Vec<Vec<f64>>,
}

impl PlaneSpace<'_> {
    fn to_tuple(&self, z: &[Vec<f64>]) -> PlaneTuple {
        let vectors: Vec<Vec<f64>> = z
            .iter()
            .map(|x| crate::linalg::combine(&self.basis, x))
            .collect();
        let images = vectors
            .iter()
            .map(|x| crate::linalg::mat_vec(self.phi, self.d, self.d, x))
            .collect();
        PlaneTuple { vectors, images }
    }

    fn expanded(&self, z: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let t = self.to_tuple(z);
        let mut cols = Vec::with_capacity(2 * z.len());
        for (x, y) in t.vectors.into_iter().zip(t.images) {
            cols.push(x);
            cols.push(y);
        }
        cols
    }
}

/// Standard complex structure applied to a real vector `(re_0, im_0, ...)`.
fn j_std(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in 0..v.len() / 2 {
        out[2 * i] = -v[2 * i + 1];
        out[2 * i + 1] = v[2 * i];
    }
    out
}

/// Gram-Schmidt over `(X_1, J X_1, X_2, J X_2, ...)`, keeping only the `X_i`.
fn orthonormalize_planes(z: &mut [Vec<f64>]) -> f64 {
    let mut min_pivot = f64::INFINITY;
    let mut done: Vec<Vec<f64>> = Vec::with_capacity(2 * z.len());
    for x in z.iter_mut() {
        for _ in 0..2 {
            for q in &done {
                let p = dot(x, q);
                axpy(-p, q, x);
            }
        }
        let n = norm(x);
        min_pivot = min_pivot.min(n);
        if n > 0.0 {
            x.iter_mut().for_each(|v| *v /= n);
        }
        done.push(x.clone());
        done.push(j_std(x));
    }
    min_pivot
}

fn haar_planes(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<Vec<f64>> {
    loop {
        let mut z = gaussian_columns(rng, d, k);
        if orthonormalize_planes(&mut z) > 1e-8 {
            return z;
        }
    }
}

/// A rotation move of the coordinate ascent.
#[derive(Clone, Copy)]
enum Move {
    /// Real rotation of rows `p`, `q`.
    Real(usize, usize),
    /// Unitary rotation of complex coordinates `a`, `b`; `imaginary`
    /// selects `[[c, i s], [i s, c]]` instead of `[[c, -s], [s, c]]`.
    Unitary(usize, usize, bool),
    /// Phase rotation `z_a' = e^{i theta} z_a` of one complex coordinate.
    Phase(usize),
}

fn apply_move(mv: Move, cols: &[Vec<f64>], theta: f64, out: &mut [Vec<f64>]) {
    let (s, c) = theta.sin_cos();
    for (src, dst) in cols.iter().zip(out.iter_mut()) {
        dst.copy_from_slice(src);
        match mv {
            Move::Real(p, q) => {
                let (xp, xq) = (src[p], src[q]);
                dst[p] = c * xp - s * xq;
                dst[q] = s * xp + c * xq;
            }
            Move::Unitary(a, b, false) => {
                for off in 0..2 {
                    let (xa, xb) = (src[2 * a + off], src[2 * b + off]);
                    dst[2 * a + off] = c * xa - s * xb;
                    dst[2 * b + off] = s * xa + c * xb;
                }
            }
            Move::Phase(a) => {
                let (re, im) = (src[2 * a], src[2 * a + 1]);
                dst[2 * a] = c * re - s * im;
                dst[2 * a + 1] = s * re + c * im;
            }
            Move::Unitary(a, b, true) => {
                // z_a' = c z_a + i s z_b, z_b' = i s z_a + c z_b
                let (ar, ai, br, bi) = (src[2 * a], src[2 * a + 1], src[2 * b], src[2 * b + 1]);
                dst[2 * a] = c * ar - s * bi;
                dst[2 * a + 1] = c * ai + s * br;
                dst[2 * b] = c * br - s * ai;
                dst[2 * b + 1] = c * bi + s * ar;
            }
        }
    }
}

/// Maximizes `g` on `[lo, hi]` by golden-section search.
fn golden_section(mut g: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

struct Evaluator<'a, O: ?Sized> {
    obj: &'a O,
    sizes: Vec<usize>,
    lo: f64,
    hi: f64,
    count: usize,
}

impl<O: Objective + ?Sized> Evaluator<'_, O> {
    fn eval(&mut self, cols: &[Vec<f64>]) -> Result<f64> {
        let v = self.obj.eval(cols, &self.sizes);
        if !v.is_finite() {
            return Err(Error::Objective(v));
        }
        self.lo = self.lo.min(v);
        self.hi = self.hi.max(v);
        self.count += 1;
        Ok(v)
    }
}

/// Feasible set abstraction shared by the flag and plane optimizers.
trait Space {
    fn moves(&self) -> Vec<Move>;
    /// Columns passed to the objective.
    fn objective_cols(&self, state: &[Vec<f64>]) -> Vec<Vec<f64>>;
    fn retract(&self, state: &mut [Vec<f64>]) -> Result<()>;
    fn start(&self, restart: usize, seed: u64) -> Vec<Vec<f64>>;
}

struct FlagSpace {
    d: usize,
    sizes: Vec<usize>,
}

impl Space for FlagSpace {
    fn moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        for p in 0..self.d {
            for q in p + 1..self.d {
                out.push(Move::Real(p, q));
            }
        }
        out
    }

    fn objective_cols(&self, state: &[Vec<f64>]) -> Vec<Vec<f64>> {
        state.to_vec()
    }

    fn retract(&self, state: &mut [Vec<f64>]) -> Result<()> {
        let pivot = orthonormalize(state);
        if pivot < 1e-12 {
            return Err(Error::Feasibility { pivot });
        }
        Ok(())
    }

    fn start(&self, restart: usize, seed: u64) -> Vec<Vec<f64>> {
        if restart == 0 {
            axis_tuple(self.d, &self.sizes).cols
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(seed, restart));
            haar_tuple(&mut rng, self.d, &self.sizes).cols
        }
    }
}

impl Space for PlaneSpace<'_> {
    fn moves(&self) -> Vec<Move> {
        let p = self.d / 2;
        let mut out: Vec<Move> = (0..p).map(Move::Phase).collect();
        for a in 0..p {
            for b in a + 1..p {
                out.push(Move::Unitary(a, b, false));
                out.push(Move::Unitary(a, b, true));
            }
        }
        out
    }

    fn objective_cols(&self, state: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.expanded(state)
    }

    fn retract(&self, state: &mut [Vec<f64>]) -> Result<()> {
        let pivot = orthonormalize_planes(state);
        if pivot < 1e-12 {
            return Err(Error::Feasibility { pivot });
        }
        Ok(())
    }

    fn start(&self, restart: usize, seed: u64) -> Vec<Vec<f64>> {
        let k = self.k;
        if restart == 0 {
            (0..k).map(|i| crate::linalg::unit(self.d, 2 * i)).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(seed, restart));
            haar_planes(&mut rng, self.d, k)
        }
    }
}

/// Line search along one move, returning the best angle and its value.
fn line_search<O: Objective + ?Sized>(
    ev: &mut Evaluator<'_, O>,
    space: &dyn Space,
    state: &[Vec<f64>],
    mv: Move,
    current: f64,
    tol: f64,
    scratch: &mut Vec<Vec<f64>>,
) -> Result<(f64, f64)> {
    let pi = std::f64::consts::PI;
    let degree = ev.obj.degree();
    let mut value_at = |theta: f64, scratch: &mut Vec<Vec<f64>>| -> Result<f64> {
        apply_move(mv, state, theta, scratch);
        let cols = space.objective_cols(scratch);
        ev.eval(&cols)
    };
    let (theta, _) = match degree {
        Some(deg) => {
            // exact trigonometric interpolant of degree `deg`
            let n = 2 * deg + 1;
            let mut samples = Vec::with_capacity(n);
            samples.push(current);
            for j in 1..n {
                samples.push(value_at(2.0 * pi * j as f64 / n as f64, scratch)?);
            }
            let mut a = vec![0.0; deg + 1];
            let mut b = vec![0.0; deg + 1];
            for (j, f) in samples.iter().enumerate() {
                let t = 2.0 * pi * j as f64 / n as f64;
                for m in 0..=deg {
                    let (s, c) = (m as f64 * t).sin_cos();
                    a[m] += f * c;
                    b[m] += f * s;
                }
            }
            a[0] /= n as f64;
            for m in 1..=deg {
                a[m] *= 2.0 / n as f64;
                b[m] *= 2.0 / n as f64;
            }
            let g = |t: f64| {
                let mut v = a[0];
                for m in 1..=deg {
                    let (s, c) = (m as f64 * t).sin_cos();
                    v += a[m] * c + b[m] * s;
                }
                v
            };
            let grid = 16 * deg;
            let h = 2.0 * pi / grid as f64;
            let mut best = (0.0, g(0.0));
            for i in 1..grid {
                let t = -pi + h * i as f64;
                let v = g(t);
                if v > best.1 {
                    best = (t, v);
                }
            }
            golden_section(g, best.0 - h, best.0 + h, tol)
        }
        None => {
            let grid = 24;
            let h = 2.0 * pi / grid as f64;
            let mut best = (0.0, current);
            for i in 1..grid {
                let t = -pi + h * i as f64;
                let v = value_at(t, scratch)?;
                if v > best.1 {
                    best = (t, v);
                }
            }
            let mut err = None;
            let r = golden_section(
                |t| match value_at(t, scratch) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::NEG_INFINITY
                    }
                },
                best.0 - h,
                best.0 + h,
                tol,
            );
            if let Some(e) = err {
                return Err(e);
            }
            r
        }
    };
    let mut theta = theta;
    if theta > pi {
        theta -= 2.0 * pi;
    } else if theta <= -pi {
        theta += 2.0 * pi;
    }
    let v = value_at(theta, scratch)?;
    Ok((theta, v))
}

fn ascend<O: Objective + ?Sized>(
    obj: &O,
    space: &dyn Space,
    sizes: Vec<usize>,
    cfg: &OptConfig,
) -> Result<(f64, Vec<Vec<f64>>, usize, usize)> {
    let moves = space.moves();
    let mut ev = Evaluator {
        obj,
        sizes,
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
        count: 0,
    };
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut restarts_used = 0;
    let mut total_sweeps = 0;
    for restart in 0..cfg.restarts.max(1) {
        restarts_used += 1;
        let mut state = space.start(restart, cfg.seed);
        let mut value = ev.eval(&space.objective_cols(&state))?;
        let mut scratch = state.clone();
        for _ in 0..cfg.max_sweeps.max(1) {
            total_sweeps += 1;
            let start_value = value;
            for &mv in &moves {
                let (theta, v) = line_search(
                    &mut ev,
                    space,
                    &state,
                    mv,
                    value,
                    cfg.line_tol,
                    &mut scratch,
                )?;
                if v > value {
                    apply_move(mv, &state, theta, &mut scratch);
                    std::mem::swap(&mut state, &mut scratch);
                    space.retract(&mut state)?;
                    value = ev.eval(&space.objective_cols(&state))?;
                }
            }
            if ev.hi - ev.lo <= cfg.floor || value - start_value < cfg.floor {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, state));
        }
        if restart == 0 && ev.hi - ev.lo <= cfg.floor {
            break;
        }
    }
    let (value, state) = best.expect("at least one restart");
    Ok((value, state, restarts_used, total_sweeps))
}

/// Maximum of `obj` over flags with block sizes `sizes` in `R^d`.
pub fn maximize_over_flags<O: Objective + ?Sized>(
    obj: &O,
    d: usize,
    sizes: &[usize],
    cfg: &OptConfig,
) -> Result<OptResult<SubspaceTuple>> {
    validate_sizes(d, sizes)?;
    let space = FlagSpace {
        d,
        sizes: sizes.to_vec(),
    };
    let (value, cols, restarts, sweeps) = ascend(obj, &space, sizes.to_vec(), cfg)?;
    Ok(OptResult {
        value,
        maximizer: SubspaceTuple {
            sizes: sizes.to_vec(),
            cols,
        },
        restarts,
        sweeps,
        oracle_gap: None,
    })
}

/// Minimum of `obj`, computed as the negated maximum of `-obj`.
pub fn minimize_over_flags<O: Objective + ?Sized>(
    obj: &O,
    d: usize,
    sizes: &[usize],
    cfg: &OptConfig,
) -> Result<OptResult<SubspaceTuple>> {
    let mut r = maximize_over_flags(&Negated(obj), d, sizes, cfg)?;
    r.value = -r.value;
    Ok(r)
}

/// Maximum of `obj` over tuples of `k` mutually orthogonal `phi`-invariant
/// planes. The objective receives the columns `X_1, phi X_1, ...` with block
/// sizes `(2, ..., 2)`.
pub fn maximize_over_plane_tuples<O: Objective + ?Sized>(
    obj: &O,
    d: usize,
    k: usize,
    phi: &[f64],
    cfg: &OptConfig,
) -> Result<OptResult<PlaneTuple>> {
    validate_planes(d, k)?;
    let space = PlaneSpace {
        d,
        k,
        phi,
        basis: phi_adapted_basis(phi, d)?,
    };
    let (value, z, restarts, sweeps) = ascend(obj, &space, vec![2; k], cfg)?;
    Ok(OptResult {
        value,
        maximizer: space.to_tuple(&z),
        restarts,
        sweeps,
        oracle_gap: None,
    })
}

pub fn minimize_over_plane_tuples<O: Objective + ?Sized>(
    obj: &O,
    d: usize,
    k: usize,
    phi: &[f64],
    cfg: &OptConfig,
) -> Result<OptResult<PlaneTuple>> {
    let mut r = maximize_over_plane_tuples(&Negated(obj), d, k, phi, cfg)?;
    r.value = -r.value;
    Ok(r)
}

/// A random plane tuple, Haar-distributed over unitary frames.
pub fn random_plane_tuple(phi: &[f64], d: usize, k: usize, seed: u64) -> Result<PlaneTuple> {
    validate_planes(d, k)?;
    let space = PlaneSpace {
        d,
        k,
        phi,
        basis: phi_adapted_basis(phi, d)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(space.to_tuple(&haar_planes(&mut rng, d, k)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Number of best (and worst) samples refined by local ascent; zero
    /// disables the refinement.
    pub polish_starts: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            samples: 10_000,
            seed: 0,
            polish_starts: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub max: f64,
    pub min: f64,
    /// Extremes over the raw samples only (before refinement).
    pub sample_max: f64,
    pub sample_min: f64,
    pub evaluations: usize,
}

/// Sampling oracle over flags: Haar samples plus all coordinate-aligned
/// flags, optionally refined by projected finite-difference gradient ascent.
pub fn brute_force_flags<O: Objective + ?Sized>(
    obj: &O,
    d: usize,
    sizes: &[usize],
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    validate_sizes(d, sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut candidates: Vec<Vec<Vec<f64>>> = axis_aligned_flags(d, sizes);
    for _ in 0..cfg.samples {
        candidates.push(haar_tuple(&mut rng, d, sizes).cols);
    }
    let retract = |c: &mut Vec<Vec<f64>>| {
        orthonormalize(c);
    };
    run_oracle(obj, sizes, candidates, cfg, &|c| c.to_vec(), &retract)
}

/// Sampling oracle over plane tuples.
pub fn brute_force_planes<O: Objective + ?Sized>(
    obj: &O,
    d: usize,
    k: usize,
    phi: &[f64],
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    validate_planes(d, k)?;
    let space = PlaneSpace {
        d,
        k,
        phi,
        basis: phi_adapted_basis(phi, d)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut candidates: Vec<Vec<Vec<f64>>> = Vec::new();
    for axes in combinations(d / 2, k) {
        candidates.push(
            axes.iter()
                .map(|&a| crate::linalg::unit(d, 2 * a))
                .collect(),
        );
    }
    for _ in 0..cfg.samples {
        candidates.push(haar_planes(&mut rng, d, k));
    }
    let retract = |z: &mut Vec<Vec<f64>>| {
        orthonormalize_planes(z);
    };
    run_oracle(
        obj,
        &vec![2; k],
        candidates,
        cfg,
        &|z| space.expanded(z),
        &retract,
    )
}

fn run_oracle<O: Objective + ?Sized>(
    obj: &O,
    sizes: &[usize],
    candidates: Vec<Vec<Vec<f64>>>,
    cfg: &OracleConfig,
    expand: &dyn Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
    retract: &dyn Fn(&mut Vec<Vec<f64>>),
) -> Result<OracleResult> {
    let f = |z: &[Vec<f64>]| -> Result<f64> {
        let v = obj.eval(&expand(z), sizes);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Objective(v))
        }
    };
    let mut values = Vec::with_capacity(candidates.len());
    for c in &candidates {
        values.push(f(c)?);
    }
    let mut evaluations = values.len();
    let sample_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sample_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut max, mut min) = (sample_max, sample_min);
    if cfg.polish_starts > 0 {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        for &i in order.iter().take(cfg.polish_starts) {
            let (v, n) = polish(&f, candidates[i].clone(), values[i], 1.0, retract)?;
            evaluations += n;
            max = max.max(v);
        }
        for &i in order.iter().rev().take(cfg.polish_starts) {
            let (v, n) = polish(&f, candidates[i].clone(), values[i], -1.0, retract)?;
            evaluations += n;
            min = min.min(v);
        }
    }
    Ok(OracleResult {
        max,
        min,
        sample_max,
        sample_min,
        evaluations,
    })
}

/// Finite-difference gradient ascent of `sign * f` with retraction and
/// Armijo backtracking. Returns the final value of `f`.
fn polish(
    f: &dyn Fn(&[Vec<f64>]) -> Result<f64>,
    mut z: Vec<Vec<f64>>,
    start: f64,
    sign: f64,
    retract: &dyn Fn(&mut Vec<Vec<f64>>),
) -> Result<(f64, usize)> {
    let h = 1e-6;
    let mut value = sign * start;
    let mut step = 0.1;
    let mut evals = 0;
    for _ in 0..400 {
        let mut grad: Vec<Vec<f64>> = z.iter().map(|c| vec![0.0; c.len()]).collect();
        for j in 0..z.len() {
            for i in 0..z[j].len() {
                let mut zp = z.clone();
                zp[j][i] += h;
                retract(&mut zp);
                let mut zm = z.clone();
                zm[j][i] -= h;
                retract(&mut zm);
                grad[j][i] = sign * (f(&zp)? - f(&zm)?) / (2.0 * h);
                evals += 2;
            }
        }
        let g2: f64 = grad.iter().map(|g| dot(g, g)).sum();
        if g2 < 1e-24 {
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let mut trial = z.clone();
            for (t, g) in trial.iter_mut().zip(&grad) {
                axpy(step, g, t);
            }
            retract(&mut trial);
            let v = sign * f(&trial)?;
            evals += 1;
            if v >= value + 1e-4 * step * g2 {
                z = trial;
                let gain = v - value;
                value = v;
                step *= 2.0;
                accepted = true;
                if gain < 1e-15 {
                    return Ok((sign * value, evals));
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((sign * value, evals))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Every flag whose columns are distinct coordinate axes, up to the order of
/// axes inside a block.
fn axis_aligned_flags(d: usize, sizes: &[usize]) -> Vec<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    fn rec(
        d: usize,
        sizes: &[usize],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<f64>>>,
    ) {
        let Some((&n, rest)) = sizes.split_first() else {
            out.push(cur.iter().map(|&i| crate::linalg::unit(d, i)).collect());
            return;
        };
        let free: Vec<usize> = (0..d).filter(|&i| !used[i]).collect();
        for combo in combinations(free.len(), n) {
            let picked: Vec<usize> = combo.iter().map(|&c| free[c]).collect();
            for &p in &picked {
                used[p] = true;
                cur.push(p);
            }
            rec(d, rest, used, cur, out);
            for &p in &picked {
                used[p] = false;
                cur.pop();
            }
        }
    }
    rec(d, sizes, &mut vec![false; d], &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_tuples_are_deterministic_and_orthonormal() {
        let a = random_subspace_tuple(4, &[2, 2], 0).unwrap();
        assert_eq!(a, random_subspace_tuple(4, &[2, 2], 0).unwrap());
        assert!(orthonormality_residual(&a.cols) < 1e-14);
        assert!(matches!(
            random_subspace_tuple(3, &[2, 2], 0),
            Err(Error::BlockSize { .. })
        ));
    }

    #[test]
    fn haar_first_coordinate_moment() {
        // E[<col_1, e_1>^2] = 1/d for a uniformly distributed unit vector
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut sum = 0.0;
        let mut cross = 0.0;
        for _ in 0..n {
            let t = haar_tuple(&mut rng, d, &[1, 1]);
            sum += t.cols[0][0].powi(2);
            cross += (t.cols[0][0] * t.cols[1][0]).powi(2);
        }
        assert!((sum / n as f64 - 1.0 / 3.0).abs() < 0.02);
        // E[x_1^2 y_1^2] = 1 / (d (d + 2)) for the first two Haar columns
        assert!((cross / n as f64 - 1.0 / 15.0).abs() < 0.01);
    }

    #[test]
    fn trivial_objective_stops_after_one_sweep() {
        let zero = |_: &[Vec<f64>], _: &[usize]| 0.0;
        let r = maximize_over_flags(&zero, 4, &[1, 1], &OptConfig::default()).unwrap();
        assert_eq!((r.value, r.restarts, r.sweeps), (0.0, 1, 1));
    }

    #[test]
    fn nonfinite_objective_is_an_error() {
        let bad = |_: &[Vec<f64>], _: &[usize]| f64::NAN;
        assert!(matches!(
            maximize_over_flags(&bad, 3, &[1], &OptConfig::default()),
            Err(Error::Objective(_))
        ));
    }

    #[test]
    fn quadratic_form_maximum_is_top_eigenvalue() {
        // v^T A v over unit vectors, A = diag(1, 3, 2) rotated
        let a = [1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0];
        let f = |c: &[Vec<f64>], _: &[usize]| {
            let v = &c[0];
            dot(v, &crate::linalg::mat_vec(&a, 3, 3, v))
        };
        let generic = maximize_over_flags(&f, 3, &[1], &OptConfig::default()).unwrap();
        assert!((generic.value - 3.0).abs() < 1e-12);
        let poly = Polynomial { degree: 2, f };
        let exact = maximize_over_flags(&poly, 3, &[1], &OptConfig::default()).unwrap();
        assert!((exact.value - 3.0).abs() < 1e-12);
        let low = minimize_over_flags(&poly, 3, &[1], &OptConfig::default()).unwrap();
        assert!((low.value - 1.0).abs() < 1e-12);
        let oracle = brute_force_flags(
            &poly,
            3,
            &[1],
            &OracleConfig {
                samples: 200,
                seed: 1,
                polish_starts: 2,
            },
        )
        .unwrap();
        assert!((oracle.max - 3.0).abs() < 1e-9 && (oracle.min - 1.0).abs() < 1e-9);
    }

    #[test]
    fn plane_tuples_stay_feasible() {
        let phi = crate::tensor::standard_complex_structure(6);
        let t = random_plane_tuple(&phi, 6, 3, 4).unwrap();
        let flag = t.as_flag();
        assert!(orthonormality_residual(&flag.cols) < 1e-13);
        // maximize the weight of X_1 on the first complex line
        let f =
            |c: &[Vec<f64>], _: &[usize]| c[0][0].powi(2) + c[0][1].powi(2) + 0.5 * c[2][2].powi(2);
        let r = maximize_over_plane_tuples(
            &Polynomial { degree: 2, f },
            6,
            2,
            &phi,
            &OptConfig::default(),
        )
        .unwrap();
        assert!((r.value - 1.5).abs() < 1e-10, "{}", r.value);
        assert!(orthonormality_residual(&r.maximizer.as_flag().cols) < 1e-12);
        assert!(matches!(
            maximize_over_plane_tuples(&f, 6, 4, &phi, &OptConfig::default()),
            Err(Error::BlockSize { .. })
        ));
    }

    #[test]
    fn axis_flags_enumeration() {
        // d=3, sizes (1,1): ordered pairs of distinct axes
        assert_eq!(axis_aligned_flags(3, &[1, 1]).len(), 6);
        // d=4, sizes (2,2): choose 2 then the remaining 2
        assert_eq!(axis_aligned_flags(4, &[2, 2]).len(), 6);
        assert_eq!(combinations(4, 2).len(), 6);
    }
}
