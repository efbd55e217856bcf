//! Curvature invariants of a complex distribution at one point.
//!
//! Every function takes a curvature tensor expressed in an orthonormal basis
//! of `D` (so its dimension is `d`), plus the matrix of `phi` in that basis
//! where planes are involved.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, orthonormality_residual};
use crate::subspace::{
    brute_force_flags, brute_force_planes, maximize_over_flags, maximize_over_plane_tuples,
    minimize_over_flags, minimize_over_plane_tuples, validate_sizes, Objective, OptConfig,
    OracleConfig, PlaneTuple, SubspaceTuple,
};
use crate::tensor::{lift_into, CurvatureTensor, SectionalForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// Optimizer settings plus the optional sampling certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantConfig {
    pub opt: OptConfig,
    /// Oracle samples used to attach a certification gap; zero disables it.
    pub certify_samples: usize,
    /// Largest dimension for which the certification is attempted.
    pub certify_max_dim: usize,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        InvariantConfig {
            opt: OptConfig::default(),
            certify_samples: 0,
            certify_max_dim: 6,
        }
    }
}

impl InvariantConfig {
    fn oracle(&self, d: usize) -> Option<OracleConfig> {
        (self.certify_samples > 0 && d <= self.certify_max_dim).then_some(OracleConfig {
            samples: self.certify_samples,
            seed: self.opt.seed ^ 0x05ee_d0f0_ac1e,
            polish_starts: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attainer {
    Flag(SubspaceTuple),
    Planes(PlaneTuple),
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantValue {
    pub value: f64,
    /// Block sizes of the attaining configuration.
    pub sizes: Vec<usize>,
    pub attainer: Attainer,
    /// Optimizer value minus the oracle extreme, signed so that a negative
    /// gap means the oracle found a better point.
    pub gap: Option<f64>,
    pub restarts: usize,
}

impl InvariantValue {
    fn closed(value: f64, sizes: Vec<usize>) -> Self {
        InvariantValue {
            value,
            sizes,
            attainer: Attainer::Closed,
            gap: None,
            restarts: 0,
        }
    }
}

/// `S_m(V_1, ..., V_k) = sum_{i<j} sum_{a in V_i, b in V_j} K(e_a, e_b)`,
/// scaled by `scale`, evaluated through the lifted sectional form.
pub struct MutualCurvature<'a> {
    pub form: &'a SectionalForm,
    pub scale: f64,
}

impl Objective for MutualCurvature<'_> {
    fn eval(&self, cols: &[Vec<f64>], sizes: &[usize]) -> f64 {
        let lifted = block_lifts(self.form, cols, sizes);
        let n = self.form.pairs();
        let mut mapped = vec![0.0; n];
        let mut total = 0.0;
        for j in 1..lifted.len() {
            self.form.apply_into(&lifted[j], &mut mapped);
            for li in &lifted[..j] {
                total += dot(li, &mapped);
            }
        }
        self.scale * total
    }

    fn degree(&self) -> Option<usize> {
        Some(4)
    }
}

/// `sum_i tau(V_i)`.
pub struct BlockTauSum<'a> {
    pub form: &'a SectionalForm,
}

impl Objective for BlockTauSum<'_> {
    fn eval(&self, cols: &[Vec<f64>], sizes: &[usize]) -> f64 {
        block_lifts(self.form, cols, sizes)
            .iter()
            .map(|l| self.form.bilinear(l, l))
            .sum()
    }

    fn degree(&self) -> Option<usize> {
        Some(4)
    }
}

/// `|H_V|^2 = |sum_{v in V} h(v, v)|^2` over a single block.
pub struct MeanCurvatureNormSq {
    d: usize,
    /// `h(e_i, e_l)` for `i <= l` in lift order.
    pairs: Vec<Vec<f64>>,
}

impl MeanCurvatureNormSq {
    /// `h` is row-major `d x d` (vectors of any common length).
    pub fn new(d: usize, h: &[Vec<f64>]) -> Self {
        let pairs = crate::tensor::pair_indices(d)
            .into_iter()
            .map(|(i, l)| h[i * d + l].clone())
            .collect();
        MeanCurvatureNormSq { d, pairs }
    }

    pub fn mean_curvature(&self, cols: &[Vec<f64>]) -> Vec<f64> {
        let n = self.pairs.len();
        let mut total = vec![0.0; n];
        let mut buf = vec![0.0; n];
        for c in cols {
            lift_into(self.d, c, &mut buf);
            crate::linalg::axpy(1.0, &buf, &mut total);
        }
        let len = self.pairs.first().map_or(0, |p| p.len());
        let mut out = vec![0.0; len];
        for (w, h) in total.iter().zip(&self.pairs) {
            crate::linalg::axpy(*w, h, &mut out);
        }
        out
    }
}

impl Objective for MeanCurvatureNormSq {
    fn eval(&self, cols: &[Vec<f64>], _sizes: &[usize]) -> f64 {
        let h = self.mean_curvature(cols);
        dot(&h, &h)
    }

    fn degree(&self) -> Option<usize> {
        Some(4)
    }
}

fn block_lifts(form: &SectionalForm, cols: &[Vec<f64>], sizes: &[usize]) -> Vec<Vec<f64>> {
    let n = form.pairs();
    let mut buf = vec![0.0; n];
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &size in sizes {
        let mut acc = vec![0.0; n];
        for c in &cols[start..start + size] {
            form.lift_into(c, &mut buf);
            crate::linalg::axpy(1.0, &buf, &mut acc);
        }
        out.push(acc);
        start += size;
    }
    out
}

fn check_frame(frame: &[Vec<f64>], dim: usize) -> Result<()> {
    if let Some(v) = frame.iter().find(|v| v.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            found: v.len(),
        });
    }
    let residual = orthonormality_residual(frame);
    if residual > 1e-10 {
        return Err(Error::NonOrthonormalFrame { residual });
    }
    Ok(())
}

/// `tau(V) = sum_{a != b} K(e_a, e_b)` over an orthonormal frame of `V`.
pub fn tau_subspace(r: &CurvatureTensor, frame: &[Vec<f64>]) -> Result<f64> {
    check_frame(frame, r.dim())?;
    let mut total = 0.0;
    for (a, x) in frame.iter().enumerate() {
        for (b, y) in frame.iter().enumerate() {
            if a != b {
                total += r.sectional(x, y);
            }
        }
    }
    Ok(total)
}

/// `tau` of the whole space, straight from the components.
pub fn tau_full(r: &CurvatureTensor) -> f64 {
    let n = r.dim();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                total += r.get(a, b, b, a);
            }
        }
    }
    total
}

/// Mutual curvature of the blocks of `tuple`, by direct tensor evaluation.
pub fn mutual_curvature(r: &CurvatureTensor, tuple: &SubspaceTuple) -> Result<f64> {
    if tuple.k() < 2 {
        return Err(Error::BlockSize {
            sizes: tuple.sizes.clone(),
            dim: tuple.d(),
            reason: "mutual curvature needs at least two blocks".into(),
        });
    }
    check_frame(&tuple.cols, r.dim())?;
    let blocks = tuple.blocks();
    let mut total = 0.0;
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            for x in blocks[i] {
                for y in blocks[j] {
                    total += r.sectional(x, y);
                }
            }
        }
    }
    Ok(total)
}

/// `sum_{a < d <= b} K(e_a, e_b)` for a tensor whose first `d` basis vectors
/// span `D` and the rest `D^perp`.
pub fn mixed_scalar_curvature(r: &CurvatureTensor, d: usize) -> f64 {
    let m = r.dim();
    let mut total = 0.0;
    for a in 0..d {
        for b in d..m {
            total += r.get(a, b, b, a);
        }
    }
    total
}

fn plane_residual(phi: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let px = crate::linalg::mat_vec(phi, n, n, x);
    let ppx = crate::linalg::mat_vec(phi, n, n, &px);
    let mut res = (dot(x, x) - 1.0).abs().max((dot(&px, &px) - 1.0).abs());
    res = res.max(dot(x, &px).abs());
    for (a, b) in ppx.iter().zip(x) {
        res = res.max((a + b).abs());
    }
    res
}

/// Bisectional curvature of the planes `span(X, phi X)` and `span(Y, phi Y)`:
/// half the mutual curvature of the two planes,
/// `(K(X,Y) + K(X,phi Y) + K(phi X,Y) + K(phi X,phi Y)) / 2`.
///
/// For tensors with `R(phi., phi., ., .) = R` this equals
/// [`goldberg_kobayashi`]; unlike that expression it depends only on the
/// two planes for every algebraic curvature tensor.
pub fn bisectional_curvature(
    r: &CurvatureTensor,
    phi: &[f64],
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let n = r.dim();
    for v in [x, y] {
        let residual = plane_residual(phi, v);
        if residual > 1e-8 {
            return Err(Error::NotJInvariant { residual });
        }
    }
    let px = crate::linalg::mat_vec(phi, n, n, x);
    let py = crate::linalg::mat_vec(phi, n, n, y);
    Ok(0.5
        * (r.sectional(x, y) + r.sectional(x, &py) + r.sectional(&px, y) + r.sectional(&px, &py)))
}

/// `R(X, phi X, phi Y, Y)`.
pub fn goldberg_kobayashi(r: &CurvatureTensor, phi: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = r.dim();
    let px = crate::linalg::mat_vec(phi, n, n, x);
    let py = crate::linalg::mat_vec(phi, n, n, y);
    r.eval(x, &px, &py, y)
}

/// `S_h(sigma_1, ..., sigma_k) = sum_{i<j} K_h(sigma_i, sigma_j)`.
pub fn s_h(r: &CurvatureTensor, phi: &[f64], planes: &PlaneTuple) -> Result<f64> {
    if planes.k() < 2 {
        return Err(Error::BlockSize {
            sizes: vec![2; planes.k()],
            dim: r.dim(),
            reason: "S_h needs at least two planes".into(),
        });
    }
    let mut total = 0.0;
    for i in 0..planes.k() {
        for j in i + 1..planes.k() {
            total += bisectional_curvature(r, phi, &planes.vectors[i], &planes.vectors[j])?;
        }
    }
    Ok(total)
}

fn certify_flags<O: Objective>(
    obj: &O,
    d: usize,
    sizes: &[usize],
    value: f64,
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<Option<f64>> {
    let Some(ocfg) = cfg.oracle(d) else {
        return Ok(None);
    };
    let o = brute_force_flags(obj, d, sizes, &ocfg)?;
    Ok(Some(match sign {
        Sign::Plus => value - o.max,
        Sign::Minus => o.min - value,
    }))
}

fn extremize_flags<O: Objective>(
    obj: &O,
    d: usize,
    sizes: &[usize],
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    let r = match sign {
        Sign::Plus => maximize_over_flags(obj, d, sizes, &cfg.opt)?,
        Sign::Minus => minimize_over_flags(obj, d, sizes, &cfg.opt)?,
    };
    let gap = certify_flags(obj, d, sizes, r.value, sign, cfg)?;
    Ok(InvariantValue {
        value: r.value,
        sizes: sizes.to_vec(),
        attainer: Attainer::Flag(r.maximizer),
        gap,
        restarts: r.restarts,
    })
}

/// `(delta_D, hat delta_D)` for block sizes `sizes` (empty for `k = 0`).
pub fn chen_delta(
    r: &CurvatureTensor,
    sizes: &[usize],
    cfg: &InvariantConfig,
) -> Result<(InvariantValue, InvariantValue)> {
    let d = r.dim();
    let tau = tau_full(r);
    if sizes.is_empty() {
        return Ok((
            InvariantValue::closed(0.5 * tau, Vec::new()),
            InvariantValue::closed(0.5 * tau, Vec::new()),
        ));
    }
    validate_sizes(d, sizes)?;
    let form = SectionalForm::new(r);
    let obj = BlockTauSum { form: &form };
    let low = extremize_flags(&obj, d, sizes, Sign::Minus, cfg)?;
    let high = extremize_flags(&obj, d, sizes, Sign::Plus, cfg)?;
    let delta = InvariantValue {
        value: 0.5 * (tau - low.value),
        gap: low.gap,
        ..low
    };
    let delta_hat = InvariantValue {
        value: 0.5 * (tau - high.value),
        gap: high.gap,
        ..high
    };
    Ok((delta, delta_hat))
}

fn require_two_blocks(d: usize, sizes: &[usize]) -> Result<()> {
    validate_sizes(d, sizes)?;
    if sizes.len() < 2 {
        return Err(Error::BlockSize {
            sizes: sizes.to_vec(),
            dim: d,
            reason: "need at least two blocks".into(),
        });
    }
    Ok(())
}

/// `delta^+_m` (max) or `delta^-_m` (min) of the mutual curvature.
pub fn delta_m(
    r: &CurvatureTensor,
    sizes: &[usize],
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    let d = r.dim();
    require_two_blocks(d, sizes)?;
    let form = SectionalForm::new(r);
    extremize_flags(
        &MutualCurvature {
            form: &form,
            scale: 1.0,
        },
        d,
        sizes,
        sign,
        cfg,
    )
}

/// Non-decreasing tuples of `k` positive integers with sum in `sums`.
pub fn partitions(k: usize, min_sum: usize, max_sum: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(
        k: usize,
        lo: usize,
        left: usize,
        min_left: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            if min_left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let slots = k - cur.len();
        for n in lo..=left {
            if n * slots > left {
                break;
            }
            cur.push(n);
            rec(k, n, left - n, min_left.saturating_sub(n), cur, out);
            cur.pop();
        }
    }
    if k > 0 {
        rec(k, 1, max_sum, min_sum, &mut Vec::new(), &mut out);
    }
    out
}

/// Extremum of `delta^{+/-}_m(n_1, ..., n_k)` over all non-decreasing
/// `k`-tuples with `sum n_i <= d`.
pub fn delta_m_aggregate(
    r: &CurvatureTensor,
    k: usize,
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    delta_m_over(r, &partitions(k, 0, r.dim()), k, sign, cfg)
}

/// Same as [`delta_m_aggregate`] restricted to `sum n_i = s`.
pub fn delta_m_with_sum(
    r: &CurvatureTensor,
    k: usize,
    s: usize,
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    delta_m_over(r, &partitions(k, s, s), k, sign, cfg)
}

fn delta_m_over(
    r: &CurvatureTensor,
    parts: &[Vec<usize>],
    k: usize,
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    if k < 2 || parts.is_empty() {
        return Err(Error::BlockSize {
            sizes: vec![1; k],
            dim: r.dim(),
            reason: "need 2 <= k and k blocks fitting in the dimension".into(),
        });
    }
    let mut best: Option<InvariantValue> = None;
    for p in parts {
        let v = delta_m(r, p, sign, cfg)?;
        let better = match (&best, sign) {
            (None, _) => true,
            (Some(b), Sign::Plus) => v.value > b.value,
            (Some(b), Sign::Minus) => v.value < b.value,
        };
        if better {
            best = Some(v);
        }
    }
    Ok(best.expect("nonempty"))
}

/// `delta^{+/-}_h(k)`: extremum of `S_h` over `k` mutually orthogonal
/// `phi`-invariant planes.
pub fn delta_h(
    r: &CurvatureTensor,
    phi: &[f64],
    k: usize,
    sign: Sign,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    let d = r.dim();
    if k < 2 || 2 * k > d {
        return Err(Error::BlockSize {
            sizes: vec![2; k],
            dim: d,
            reason: "need 2 <= k <= d/2".into(),
        });
    }
    let form = SectionalForm::new(r);
    let obj = MutualCurvature {
        form: &form,
        scale: 0.5,
    };
    let res = match sign {
        Sign::Plus => maximize_over_plane_tuples(&obj, d, k, phi, &cfg.opt)?,
        Sign::Minus => minimize_over_plane_tuples(&obj, d, k, phi, &cfg.opt)?,
    };
    let gap = match cfg.oracle(d) {
        Some(ocfg) => {
            let o = brute_force_planes(&obj, d, k, phi, &ocfg)?;
            Some(match sign {
                Sign::Plus => res.value - o.max,
                Sign::Minus => o.min - res.value,
            })
        }
        None => None,
    };
    Ok(InvariantValue {
        value: res.value,
        sizes: vec![2; k],
        attainer: Attainer::Planes(res.maximizer),
        gap,
        restarts: res.restarts,
    })
}

/// `max |H_V|` over `s`-dimensional subspaces `V`, for `h` given on an
/// orthonormal basis (row-major `d x d` of normal vectors).
pub fn script_h(
    h: &[Vec<f64>],
    d: usize,
    s: usize,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    validate_sizes(d, &[s])?;
    let obj = MeanCurvatureNormSq::new(d, h);
    if s == d {
        let cols: Vec<Vec<f64>> = (0..d).map(|i| crate::linalg::unit(d, i)).collect();
        let v = obj.eval(&cols, &[d]).sqrt();
        return Ok(InvariantValue::closed(v, vec![d]));
    }
    let mut v = extremize_flags(&obj, d, &[s], Sign::Plus, cfg)?;
    v.value = v.value.max(0.0).sqrt();
    Ok(v)
}

/// `Delta_m(n_1, ..., n_k) = 2k / (k - 1) * delta^+_m(n_1, ..., n_k)`.
pub fn normalized_delta(
    r: &CurvatureTensor,
    sizes: &[usize],
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    let k = sizes.len() as f64;
    let mut v = delta_m(r, sizes, Sign::Plus, cfg)?;
    v.value *= 2.0 * k / (k - 1.0);
    v.gap = v.gap.map(|g| g * 2.0 * k / (k - 1.0));
    Ok(v)
}

/// Maximum of [`normalized_delta`] over all tuples with `k >= 2` and
/// `sum n_i = s`.
pub fn normalized_delta_bar(
    r: &CurvatureTensor,
    s: usize,
    cfg: &InvariantConfig,
) -> Result<InvariantValue> {
    if s < 2 || s > r.dim() {
        return Err(Error::BlockSize {
            sizes: vec![s],
            dim: r.dim(),
            reason: "need 2 <= s <= d".into(),
        });
    }
    let mut best: Option<InvariantValue> = None;
    for k in 2..=s {
        for p in partitions(k, s, s) {
            let v = normalized_delta(r, &p, cfg)?;
            if best.as_ref().is_none_or(|b| v.value > b.value) {
                best = Some(v);
            }
        }
    }
    Ok(best.expect("s >= 2 has a partition"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::random_subspace_tuple;
    use crate::tensor::{random, standard_complex_structure};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> InvariantConfig {
        InvariantConfig::default()
    }

    #[test]
    fn partitions_enumerate_non_decreasing_tuples() {
        assert_eq!(
            partitions(2, 0, 4),
            vec![vec![1, 1], vec![1, 2], vec![1, 3], vec![2, 2]]
        );
        assert_eq!(partitions(3, 4, 4), vec![vec![1, 1, 2]]);
        assert!(partitions(3, 0, 2).is_empty());
    }

    #[test]
    fn constant_curvature_closed_forms() {
        let r = CurvatureTensor::constant_curvature(4, 1.0);
        assert!((tau_full(&r) - 12.0).abs() < 1e-12);
        let agg = delta_m_aggregate(&r, 2, Sign::Plus, &cfg()).unwrap();
        assert!((agg.value - 4.0).abs() < 1e-10);
        let (delta, hat) = chen_delta(&r, &[2, 2], &cfg()).unwrap();
        // [d(d-1) - sum n_i(n_i - 1)] / 2 = (12 - 4) / 2
        assert!((delta.value - 4.0).abs() < 1e-10 && (hat.value - 4.0).abs() < 1e-10);
        let nd = normalized_delta(&r, &[1, 1], &cfg()).unwrap();
        assert!((nd.value - 4.0).abs() < 1e-10);
        let flat = CurvatureTensor::zeros(4);
        assert_eq!(
            delta_m(&flat, &[1, 1], Sign::Plus, &cfg()).unwrap().value,
            0.0
        );
    }

    #[test]
    fn space_form_bisectional_values() {
        let r = random::complex_space_form(4, 0.5);
        let phi = standard_complex_structure(4);
        let e = |i| crate::linalg::unit(4, i);
        assert!((bisectional_curvature(&r, &phi, &e(0), &e(2)).unwrap() - 1.0).abs() < 1e-14);
        assert!((bisectional_curvature(&r, &phi, &e(0), &e(0)).unwrap() - 2.0).abs() < 1e-14);
        assert!((goldberg_kobayashi(&r, &phi, &e(0), &e(2)) - 1.0).abs() < 1e-14);
        let v = delta_h(&r, &phi, 2, Sign::Plus, &cfg()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-10);
        assert!(matches!(
            bisectional_curvature(&r, &phi, &[1.0, 1.0, 0.0, 0.0], &e(2)),
            Err(Error::NotJInvariant { .. })
        ));
    }

    #[test]
    fn lifted_and_direct_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random::algebraic(5, &mut rng);
        let form = SectionalForm::new(&r);
        let t = random_subspace_tuple(5, &[2, 1, 2], 3).unwrap();
        let direct = mutual_curvature(&r, &t).unwrap();
        let lifted = MutualCurvature {
            form: &form,
            scale: 1.0,
        }
        .eval(&t.cols, &t.sizes);
        assert!((direct - lifted).abs() < 1e-12);
        let tau_direct: f64 = t
            .blocks()
            .iter()
            .map(|b| tau_subspace(&r, b).unwrap())
            .sum();
        let tau_lifted = BlockTauSum { form: &form }.eval(&t.cols, &t.sizes);
        assert!((tau_direct - tau_lifted).abs() < 1e-12);
    }

    #[test]
    fn script_h_full_dimension_is_trace() {
        // h = identity times a fixed normal vector
        let d = 3;
        let h: Vec<Vec<f64>> = (0..d * d)
            .map(|t| {
                if t / d == t % d {
                    vec![0.0, 1.0]
                } else {
                    vec![0.0, 0.0]
                }
            })
            .collect();
        assert!((script_h(&h, d, 3, &cfg()).unwrap().value - 3.0).abs() < 1e-14);
        assert!((script_h(&h, d, 2, &cfg()).unwrap().value - 2.0).abs() < 1e-10);
    }
}
