//! Vector-level helpers over flattened matrices: Gram-Schmidt, least squares
//! and null spaces. Subspaces of matrices are handled as subspaces of ℝ^(n²)
//! under the trace pairing, which coincides with the Euclidean dot product of
//! the row-major entries.

use crate::matcore::{jacobi, RealMatrix};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Vectors whose residual falls below `rel_tol` times their own length (or
/// below an absolute floor) are treated as dependent and skipped. Returns the
/// orthonormal basis together with the indices of the inputs that were kept.
pub(crate) fn orthonormalize(vectors: &[Vec<f64>], rel_tol: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let original = norm(v);
        if original <= 1e-14 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&r, b);
                axpy(&mut r, -d, b);
            }
        }
        let len = norm(&r);
        if len > rel_tol * original && len > 1e-13 {
            basis.push(r.into_iter().map(|x| x / len).collect());
            kept.push(idx);
        }
    }
    (basis, kept)
}

/// Minimum-norm least-squares solution of `Σ c_k columns[k] ≈ rhs`, through a
/// spectrally truncated pseudo-inverse of the normal matrix. Returns the
/// coefficients and the Euclidean residual.
pub(crate) fn lstsq(columns: &[Vec<f64>], rhs: &[f64]) -> (Vec<f64>, f64) {
    let d = columns.len();
    if d == 0 {
        return (Vec::new(), norm(rhs));
    }
    let normal = gram_matrix(columns);
    let atb: Vec<f64> = columns.iter().map(|c| dot(c, rhs)).collect();
    let eig = jacobi(&normal, 200).expect("Jacobi converges on Gram matrices");
    let cutoff = eig.max().abs() * 1e-24;
    let mut coeffs = vec![0.0; d];
    for k in 0..d {
        let lam = eig.values[k];
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        let v = eig.vector(k);
        let w = dot(&v, &atb) / lam;
        axpy(&mut coeffs, w, &v);
    }
    // one step of iterative refinement
    let mut r = rhs.to_vec();
    for (c, col) in coeffs.iter().zip(columns) {
        axpy(&mut r, -c, col);
    }
    let atr: Vec<f64> = columns.iter().map(|c| dot(c, &r)).collect();
    for k in 0..d {
        let lam = eig.values[k];
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        let v = eig.vector(k);
        let w = dot(&v, &atr) / lam;
        axpy(&mut coeffs, w, &v);
    }
    let mut r = rhs.to_vec();
    for (c, col) in coeffs.iter().zip(columns) {
        axpy(&mut r, -c, col);
    }
    (coeffs, norm(&r))
}

/// Orthonormal basis of `{c : Σ c_k columns[k] = 0}`, with singular values
/// below `sv_tol` counted as zero.
pub(crate) fn null_space(columns: &[Vec<f64>], sv_tol: f64) -> Vec<Vec<f64>> {
    let d = columns.len();
    if d == 0 {
        return Vec::new();
    }
    let eig = jacobi(&gram_matrix(columns), 200).expect("Jacobi converges on Gram matrices");
    (0..d)
        .filter(|&k| eig.values[k] <= sv_tol * sv_tol)
        .map(|k| eig.vector(k))
        .collect()
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a pivot is not positive.
pub(crate) fn cholesky(m: &RealMatrix) -> Option<RealMatrix> {
    let n = m.dim();
    let mut l = RealMatrix::zeros(n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` for a Cholesky factor `L`.
pub(crate) fn cholesky_solve(l: &RealMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.dim();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

pub(crate) fn cholesky_inverse(l: &RealMatrix) -> RealMatrix {
    let n = l.dim();
    let mut inv = RealMatrix::zeros(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = cholesky_solve(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv
}

pub(crate) fn gram_matrix(columns: &[Vec<f64>]) -> RealMatrix {
    let d = columns.len();
    let mut g = RealMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let v = dot(&columns[i], &columns[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

pub(crate) fn flatten(m: &RealMatrix) -> Vec<f64> {
    m.entries().to_vec()
}

pub(crate) fn unflatten(dim: usize, v: Vec<f64>) -> RealMatrix {
    RealMatrix::new(dim, v).expect("finite entries of correct length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_systems() {
        let m = RealMatrix::from_rows(&[[4.0, 2.0, 0.0], [2.0, 3.0, 1.0], [0.0, 1.0, 2.0]]);
        let l = cholesky(&m).unwrap();
        assert!(l.matmul(&l.transpose()).max_abs_diff(&m) < 1e-14);
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        let back = m.mul_vec(&x);
        for (b, want) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - want).abs() < 1e-13);
        }
        assert!(cholesky_inverse(&l).matmul(&m).max_abs_diff(&RealMatrix::identity(3)) < 1e-13);
        assert!(cholesky(&RealMatrix::diag(&[1.0, -1.0])).is_none());
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let vs = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]];
        let (basis, kept) = orthonormalize(&vs, 1e-9);
        assert_eq!(kept, vec![0, 2]);
        assert!((dot(&basis[0], &basis[1])).abs() < 1e-15);
    }

    #[test]
    fn lstsq_recovers_consistent_systems() {
        let cols = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 1.0]];
        let rhs = vec![2.0, 5.0, 3.0];
        let (c, res) = lstsq(&cols, &rhs);
        assert!(res < 1e-12);
        let mut rebuilt = vec![0.0; 3];
        for (ck, col) in c.iter().zip(&cols) {
            axpy(&mut rebuilt, *ck, col);
        }
        assert!(rebuilt.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-12));
        let ns = null_space(&cols, 1e-8);
        assert_eq!(ns.len(), 1);
    }
}
