//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DMatrixViewMut, DVector};

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Orthonormal basis of `{x : a x = 0}`, cut at `rel_tol * sigma_max`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let cols = a.ncols();
    if cols == 0 {
        return Vec::new();
    }
    let rows = a.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sigma_max = svd.singular_values.max();
    let cut = rel_tol * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| sigma_max == 0.0 || s <= cut)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect()
}

/// Orthonormal basis of the column span of `vectors`, cut at `rel_tol * sigma_max`.
pub fn orthonormal_span(vectors: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * sigma_max)
        .map(|(i, _)| u.column(i).into_owned())
        .collect()
}

/// Orthonormal basis of the Euclidean complement of the span of `vectors`,
/// from Householder reflections. A vector whose residual against the earlier
/// ones is at most `rel_tol` times its norm adds no reflector.
pub fn orthonormal_complement(vectors: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    let Some(dim) = vectors.first().map(|v| v.len()) else {
        return Vec::new();
    };
    // Each reflector acts on coordinates `row..dim`.
    let mut reflectors: Vec<(usize, DVector<f64>)> = Vec::new();
    let apply = |reflectors: &[(usize, DVector<f64>)], x: &mut DVector<f64>, forward: bool| {
        let mut go = |(row, v): &(usize, DVector<f64>)| {
            let c = 2.0 * v.dot(&x.rows(*row, dim - row));
            x.rows_mut(*row, dim - row).axpy(-c, v, 1.0);
        };
        if forward {
            reflectors.iter().for_each(&mut go);
        } else {
            reflectors.iter().rev().for_each(&mut go);
        }
    };
    for v in vectors {
        let row = reflectors.len();
        if row == dim {
            break;
        }
        let mut x = v.clone();
        apply(&reflectors, &mut x, true);
        let tail = x.rows(row, dim - row).into_owned();
        let norm = tail.norm();
        if norm <= rel_tol * v.norm() || norm == 0.0 {
            continue;
        }
        let mut h = tail;
        h[0] += norm.copysign(h[0]);
        let hn = h.norm();
        reflectors.push((row, h / hn));
    }
    (reflectors.len()..dim)
        .map(|j| {
            let mut e = DVector::zeros(dim);
            e[j] = 1.0;
            apply(&reflectors, &mut e, false);
            e
        })
        .collect()
}

/// [`orthonormal_complement`] of two vectors, written into the columns of
/// `out` (`d x (d - 2)`). Returns false if the pair is numerically dependent.
pub fn complement_of_pair(a: &[f64], b: &[f64], rel_tol: f64, mut out: DMatrixViewMut<f64>) -> bool {
    let d = a.len();
    let reflector = |x: &mut [f64], scale: f64| {
        let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm <= rel_tol * scale || norm == 0.0 {
            return false;
        }
        x[0] += norm.copysign(x[0]);
        let hn = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        x.iter_mut().for_each(|t| *t /= hn);
        true
    };
    let reflect = |v: &[f64], x: &mut [f64]| {
        let c = 2.0 * v.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>();
        v.iter().zip(x.iter_mut()).for_each(|(p, q)| *q -= c * p);
    };
    let norm = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut v1 = a.to_vec();
    if !reflector(&mut v1, norm(a)) {
        return false;
    }
    let mut v2 = b.to_vec();
    reflect(&v1, &mut v2);
    let mut v2 = v2.split_off(1);
    if !reflector(&mut v2, norm(b)) {
        return false;
    }
    for j in 2..d {
        let mut col = out.column_mut(j - 2);
        col.fill(0.0);
        col[j] = 1.0;
        let e = col.as_mut_slice();
        reflect(&v2, &mut e[1..]);
        reflect(&v1, e);
    }
    true
}

/// Numerical rank of the column set at relative tolerance.
pub fn rank(vectors: &[DVector<f64>], rel_tol: f64) -> usize {
    orthonormal_span(vectors, rel_tol).len()
}

/// Component of `v` orthogonal to the orthonormal set `basis`, two passes of
/// modified Gram-Schmidt.
pub fn reject(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&r);
            r.axpy(-c, b, 1.0);
        }
    }
    r
}

/// Eigenvalues of a general real square matrix.
/// Repeated eigenvalues can stall the QR iteration at machine precision, so
/// the convergence threshold is relaxed step by step.
pub fn eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    [f64::EPSILON, 1e-14, 1e-12].iter().find_map(|&eps| {
        m.clone().try_schur(eps, 10_000).map(|s| s.complex_eigenvalues().iter().copied().collect())
    })
}

/// Real eigenvalues (imaginary part at most `imag_tol * max(1, |z|)`), deduplicated
/// within `merge_tol` relative.
pub fn real_eigenvalues(m: &DMatrix<f64>, imag_tol: f64, merge_tol: f64) -> Vec<f64> {
    let Some(eigs) = eigenvalues(m) else {
        return Vec::new();
    };
    let mut reals: Vec<f64> = eigs
        .iter()
        .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
        .map(|z| z.re)
        .collect();
    reals.sort_by(|a, b| a.total_cmp(b));
    // A multiple eigenvalue of a non-normal matrix splits far beyond round-off,
    // but the mean of its cluster stays accurate.
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for r in reals {
        match clusters.last_mut() {
            Some((sum, k)) if (r - *sum / *k as f64).abs() <= merge_tol * r.abs().max(1.0) => {
                *sum += r;
                *k += 1;
            }
            _ => clusters.push((r, 1)),
        }
    }
    clusters.into_iter().map(|(sum, k)| sum / k as f64).collect()
}

pub fn normalized(v: &DVector<f64>) -> Option<DVector<f64>> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v / n)
}
