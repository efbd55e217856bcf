//! Small dense vector helpers used throughout the crate.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

/// Largest deviation of the Gram matrix of `vectors` from the identity.
pub fn orthonormality_residual(vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

/// Removes from `v` its components along the orthonormal `basis`, twice
/// (classical Gram-Schmidt with one re-orthogonalization pass). Returns the
/// accumulated projection coefficients.
pub fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, b) in coeffs.iter_mut().zip(basis) {
            let p = dot(v, b);
            axpy(-p, b, v);
            *c += p;
        }
    }
    coeffs
}

/// Gram-Schmidt factorization of the columns `cols = Q R`.
///
/// Returns the orthonormal columns `Q` and the upper-triangular `R` (row-major,
/// `k x k`). Fails with the offending pivot when a column is (numerically)
/// dependent on its predecessors.
pub fn gram_schmidt(cols: &[Vec<f64>], min_pivot: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>), f64> {
    let k = cols.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![0.0; k * k];
    for (j, col) in cols.iter().enumerate() {
        let mut v = col.clone();
        let coeffs = orthogonalize(&mut v, &q);
        for (i, c) in coeffs.iter().enumerate() {
            r[i * k + j] = *c;
        }
        let n = norm(&v);
        if !(n > min_pivot) {
            return Err(n);
        }
        r[j * k + j] = n;
        q.push(scaled(&v, 1.0 / n));
    }
    Ok((q, r))
}

/// Inverse of an upper-triangular row-major `k x k` matrix.
pub fn upper_triangular_inverse(r: &[f64], k: usize) -> Vec<f64> {
    let mut inv = vec![0.0; k * k];
    for j in 0..k {
        inv[j * k + j] = 1.0 / r[j * k + j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for l in i + 1..=j {
                s += r[i * k + l] * inv[l * k + j];
            }
            inv[i * k + j] = -s / r[i * k + i];
        }
    }
    inv
}

/// Extends the orthonormal `frame` to an orthonormal basis of `R^dim` by
/// pivoted Gram-Schmidt over the coordinate axes: at every step the axis
/// with the largest residual is taken, ties going to the lowest index.
pub fn complete_basis(frame: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = frame.to_vec();
    let mut added = Vec::new();
    let mut used = vec![false; dim];
    while all.len() < dim {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut v = unit(dim, i);
            orthogonalize(&mut v, &all);
            let n = norm(&v);
            if best.as_ref().is_none_or(|(_, _, bn)| n > *bn) {
                best = Some((i, v, n));
            }
        }
        let (i, v, n) = best.expect("coordinate axes span the space");
        used[i] = true;
        let v = scaled(&v, 1.0 / n);
        all.push(v.clone());
        added.push(v);
    }
    added
}

/// Row-major matrix-vector product for an `rows x cols` matrix.
pub fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows)
        .map(|i| dot(&a[i * cols..(i + 1) * cols], x))
        .collect()
}

/// Linear combination `sum_i coeffs[i] * vectors[i]`.
pub fn combine(vectors: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let dim = vectors.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; dim];
    for (v, c) in vectors.iter().zip(coeffs) {
        axpy(*c, v, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs_columns() {
        let cols = vec![vec![1.0, 2.0, 0.5], vec![0.3, -1.0, 2.0]];
        let (q, r) = gram_schmidt(&cols, 1e-12).unwrap();
        assert!(orthonormality_residual(&q) < 1e-15);
        for j in 0..2 {
            let rebuilt = combine(&q, &[r[j], r[2 + j]]);
            for (a, b) in rebuilt.iter().zip(&cols[j]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        let inv = upper_triangular_inverse(&r, 2);
        assert!((r[0] * inv[0] - 1.0).abs() < 1e-15);
        assert!((r[0] * inv[1] + r[1] * inv[3]).abs() < 1e-15);
    }

    #[test]
    fn dependent_columns_fail() {
        let cols = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(gram_schmidt(&cols, 1e-12).is_err());
    }

    #[test]
    fn completion_is_orthonormal_and_deterministic() {
        let s = 0.5f64.sqrt();
        let frame = vec![vec![s, s, 0.0, 0.0]];
        let rest = complete_basis(&frame, 4);
        assert_eq!(rest.len(), 3);
        let mut all = frame.clone();
        all.extend(rest.clone());
        assert!(orthonormality_residual(&all) < 1e-14);
        assert_eq!(rest, complete_basis(&frame, 4));
    }
}
