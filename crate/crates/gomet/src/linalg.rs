//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Orthonormal basis of the (right) null space of `a`, i.e. all `x` with
/// `a x = 0` up to `cutoff` relative to the largest singular value.
///
/// The matrix is padded with zero rows when it is wider than tall so that
/// the thin SVD still carries a full set of right singular vectors.
pub fn nullspace(a: &DMatrix<f64>, cutoff: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Vec::new();
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    // Absolute floor of 1: constraint matrices in this crate are built from
    // O(1) structure constants, so anything below cutoff is numerical dust
    // even when the whole matrix is dust.
    let threshold = cutoff * smax.max(1.0);
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= threshold {
            basis.push(v_t.row(i).transpose());
        }
    }
    basis
}

/// Minimal-norm least-squares solution of `a x = b` together with the
/// residual norm `|a x - b|`.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let eps = if smax > 0.0 { cutoff * smax } else { cutoff };
    let x = svd
        .solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Gram–Schmidt under the weighted inner product `<x, y> = sum_k w_k x_k y_k`.
///
/// Vectors whose residual after projection falls below `tol` (relative to
/// their original weighted norm, with an absolute floor) are dropped.
pub fn gram_schmidt_weighted(
    vectors: &[DVector<f64>],
    weights: &DVector<f64>,
    tol: f64,
) -> Vec<DVector<f64>> {
    let dot = |x: &DVector<f64>, y: &DVector<f64>| -> f64 {
        x.iter()
            .zip(y.iter())
            .zip(weights.iter())
            .map(|((&xi, &yi), &w)| w * xi * yi)
            .sum()
    };
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let original = dot(v, v).sqrt();
        if original <= tol {
            continue;
        }
        let mut r = v.clone();
        // Two passes of classical GS for numerical stability.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                r -= b * c;
            }
        }
        let norm = dot(&r, &r).sqrt();
        if norm > tol * original.max(1.0) {
            r /= norm;
            basis.push(r);
        }
    }
    basis
}

/// Plain (unit-weight) Gram–Schmidt.
pub fn gram_schmidt(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let weights = DVector::from_element(
        vectors.first().map(|v| v.len()).unwrap_or(0),
        1.0,
    );
    gram_schmidt_weighted(vectors, &weights, tol)
}

/// Splits the (ascending) eigenvalues of a symmetric matrix into clusters
/// separated by gaps larger than `cluster_tol`, returning index groups.
///
/// Returns `Err((gap, position))` when a gap falls into the ambiguous band
/// around the tolerance where clustering cannot be decided reliably.
pub fn cluster_eigenvalues(
    values: &[f64],
    cluster_tol: f64,
) -> std::result::Result<Vec<Vec<usize>>, (f64, usize)> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    // Ambiguity band: gaps within a factor 10 of the tolerance on either
    // side cannot be classified as "same cluster" or "distinct cluster".
    for w in order.windows(2) {
        let gap = (values[w[1]] - values[w[0]]).abs();
        if gap > cluster_tol / 10.0 && gap < cluster_tol * 10.0 {
            return Err((gap, w[0]));
        }
    }
    let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
    for w in order.windows(2) {
        let gap = (values[w[1]] - values[w[0]]).abs();
        if gap > cluster_tol {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(w[1]);
    }
    Ok(clusters)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations: `a = V D Vᵀ`
/// with orthonormal `V`. Quadratically convergent and accurate on matrices
/// with degenerate eigenvalue clusters, where one-shot tridiagonal solvers
/// can return eigenvectors that mix across close eigenspaces.
pub fn sym_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let mpq = m[(p, q)];
                if mpq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * mpq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (DVector::from_fn(n, |i, _| m[(i, i)]), v)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn sym_min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let (values, _) = sym_eigen(a);
    values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Orthonormal projector residual: `|(I - B Bᵀ) v|` for orthonormal columns `B`.
pub fn off_span_norm(basis: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v - basis * (basis.transpose() * v)).norm()
}

/// Frobenius norm of the commutator `a b - b a`.
pub fn commutator_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b - b * a).norm()
}
