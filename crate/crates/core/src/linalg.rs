//! Small dense linear-algebra kernels shared by the verification modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix.
/// The input is symmetrized first.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if m.iter().any(|x| !x.is_finite()) {
        return (vec![f64::NAN; n], DMatrix::from_element(n, n, f64::NAN));
    }
    let s = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Generalized symmetric problem `A v = μ G v` with `G` positive definite.
/// Returns eigenvalues ascending and `G`-orthonormal eigenvectors.
pub fn gen_sym_eigen(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let w = inv_sqrt_spd(g)?;
    let (vals, vecs) = sym_eigen(&(&w * a * &w));
    Some((vals, w * vecs))
}

/// `G^{-1/2}` for symmetric positive definite `G`.
pub fn inv_sqrt_spd(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen(g);
    if vals.first().copied().unwrap_or(0.0) <= 0.0 {
        return None;
    }
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|v| 1.0 / v.sqrt())));
    Some(&vecs * d * vecs.transpose())
}

/// Orthonormal basis (columns) of the null space of `m`, using the
/// singular-value threshold `tol` relative to `max(1, σ_max)`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    // Pad wide matrices with zero rows so the SVD yields a full right basis.
    let rows = m.nrows().max(cols);
    let mut a = DMatrix::zeros(rows, cols);
    a.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max).max(1.0);
    let keep: Vec<usize> = (0..cols).filter(|&i| svd.singular_values[i] <= tol * smax).collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| vt[(keep[c], r)])
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.iter().any(|x| !x.is_finite()) {
        return vec![f64::NAN; m.nrows().min(m.ncols())];
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with threshold relative to the largest singular value.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Orthonormalizes the columns of `m` under the Gram form `metric`
/// (modified Gram–Schmidt), dropping columns whose residual norm falls below
/// `tol`.
pub fn gram_schmidt(m: &DMatrix<f64>, metric: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in 0..m.ncols() {
        let mut v = m.column(c).into_owned();
        for _ in 0..2 {
            for q in &out {
                let proj = (q.transpose() * metric * &v)[0];
                v -= q * proj;
            }
        }
        let n2 = (v.transpose() * metric * &v)[0];
        if n2 > tol * tol {
            out.push(v / n2.sqrt());
        }
    }
    if out.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    DMatrix::from_columns(&out)
}

/// Groups sorted values into clusters whose consecutive gaps are ≤ `tol`.
/// Returns `(mean, indices)` per cluster.
pub fn cluster(sorted: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        match out.last_mut() {
            Some((_, idx)) if (v - sorted[*idx.last().unwrap()]).abs() <= tol => idx.push(i),
            _ => out.push((v, vec![i])),
        }
    }
    for (mean, idx) in out.iter_mut() {
        *mean = idx.iter().map(|&i| sorted[i]).sum::<f64>() / idx.len() as f64;
    }
    out
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let n = null_space(&m, 1e-9);
        assert_eq!(n.ncols(), 2);
        assert!(frobenius(&(&m * &n)) < 1e-12);
    }

    #[test]
    fn clusters_merge_close_values() {
        let c = cluster(&[0.0, 1e-9, 0.375, 0.375 + 1e-9, 1.0], 1e-7);
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].1, vec![2, 3]);
    }

    #[test]
    fn generalized_eigen_is_g_orthonormal() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, -1.0]);
        let (vals, v) = gen_sym_eigen(&a, &g).unwrap();
        let id = v.transpose() * &g * &v;
        assert!(frobenius(&(id - DMatrix::identity(2, 2))) < 1e-12);
        for (k, lam) in vals.iter().enumerate() {
            let r = &a * v.column(k) - &g * v.column(k) * *lam;
            assert!(r.norm() < 1e-12);
        }
    }
}
