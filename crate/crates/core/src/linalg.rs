//! Dense linear-algebra helpers built on SVD and symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector};

/// Default relative rank tolerance for exact-algebra matrices.
pub const RANK_TOL: f64 = 1e-9;

/// Singular values in descending order with the matching right singular vectors as
/// columns of a square matrix (full basis of the domain, including the null space).
pub fn right_singular(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let values = order.iter().map(|&i| s[i]).collect();
    let v = DMatrix::from_fn(n, n, |r, c| vt[(order[c], r)]);
    (values, v)
}

fn split_at_tol(values: &[f64], abs_tol: f64) -> usize {
    values.iter().filter(|&&s| s > abs_tol).count()
}

/// Orthonormal basis (columns) of `ker a`, treating singular values `<= rel * sigma_max` as zero.
pub fn null_space(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let (values, _) = right_singular(a);
    let smax = values.first().copied().unwrap_or(0.0);
    null_space_abs(a, rel * smax)
}

/// Orthonormal basis of `ker a` with an absolute singular-value cutoff.
pub fn null_space_abs(a: &DMatrix<f64>, abs_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let (values, v) = right_singular(a);
    let rank = split_at_tol(&values, abs_tol);
    v.columns(rank, n - rank).into_owned()
}

/// Orthonormal basis of the column space of `a`.
pub fn range_basis(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let (values, u) = right_singular(&a.transpose());
    let smax = values.first().copied().unwrap_or(0.0);
    let rank = split_at_tol(&values, rel * smax);
    u.columns(0, rank).into_owned()
}

pub fn rank(a: &DMatrix<f64>, rel: f64) -> usize {
    let (values, _) = right_singular(&a.transpose());
    let smax = values.first().copied().unwrap_or(0.0);
    split_at_tol(&values, rel * smax)
}

/// Orthonormal basis of the Euclidean orthogonal complement of the span of `basis` in R^n.
pub fn orthogonal_complement(basis: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    let q = range_basis(basis, RANK_TOL);
    null_space_abs(&q.transpose(), 0.5)
}

/// Orthonormal basis of the intersection of two column spans.
pub fn intersection(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let qa = range_basis(a, RANK_TOL);
    let qb = range_basis(b, RANK_TOL);
    let mut stacked = DMatrix::zeros(n, qa.ncols() + qb.ncols());
    stacked.view_mut((0, 0), (n, qa.ncols())).copy_from(&qa);
    stacked
        .view_mut((0, qa.ncols()), (n, qb.ncols()))
        .copy_from(&(-&qb));
    let coeffs = null_space_abs(&stacked, rel.max(1e-12));
    let part = &qa * coeffs.rows(0, qa.ncols());
    range_basis(&part, RANK_TOL)
}

/// Principal angles (radians, ascending) between two column spans.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let qa = range_basis(a, RANK_TOL);
    let qb = range_basis(b, RANK_TOL);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return Vec::new();
    }
    let c = qa.transpose() * qb;
    let mut s: Vec<f64> = c.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.iter().map(|v| v.clamp(-1.0, 1.0).acos()).collect()
}

/// Subspace equality test: same dimension and largest principal angle below `angle_tol`.
pub fn same_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>, angle_tol: f64) -> bool {
    let ra = rank(a, RANK_TOL);
    let rb = rank(b, RANK_TOL);
    if ra != rb {
        return false;
    }
    if ra == 0 {
        return true;
    }
    principal_angles(a, b).iter().all(|&t| t < angle_tol)
}

/// Eigenvalues (ascending) and eigenvectors of the symmetric part of `m`.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).0
}

/// Largest absolute entry, used as a cheap matrix scale.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm.
pub fn norm2(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0_f64, |a, &b| a.max(b))
}

/// Re-expresses `basis` so that its columns are orthonormal for the SPD Gram matrix `g`.
pub fn orthonormalize_with(basis: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if basis.ncols() == 0 {
        return Some(basis.clone());
    }
    let gram = basis.transpose() * g * basis;
    let gram = (&gram + gram.transpose()) * 0.5;
    let chol = gram.cholesky()?;
    let l = chol.l();
    let linv_t = l.transpose().try_inverse()?;
    Some(basis * linv_t)
}

/// Solves `a x = b` for symmetric positive-definite `a`, falling back to LU.
pub fn solve_spd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    if let Some(ch) = sym.clone().cholesky() {
        return Some(ch.solve(b));
    }
    sym.lu().solve(b)
}

pub fn hstack(blocks: &[&DMatrix<f64>], nrows: usize) -> DMatrix<f64> {
    let ncols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut c = 0;
    for b in blocks {
        if b.ncols() > 0 {
            out.view_mut((0, c), (nrows, b.ncols())).copy_from(*b);
        }
        c += b.ncols();
    }
    out
}

pub fn column_matrix(cols: &[DVector<f64>], nrows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Positive/negative inertia counts with `tol` as the zero band.
pub fn inertia(eigs: &[f64], tol: f64) -> (usize, usize, usize) {
    let pos = eigs.iter().filter(|&&e| e > tol).count();
    let neg = eigs.iter().filter(|&&e| e < -tol).count();
    (pos, neg, eigs.len() - pos - neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&a, RANK_TOL);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-14);
    }

    #[test]
    fn intersection_of_planes() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let i = intersection(&a, &b, 1e-9);
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principal_angle_between_lines() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let t = principal_angles(&a, &b);
        assert!((t[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn complement_and_orthonormalization() {
        let b = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let c = orthogonal_complement(&b, 3);
        assert_eq!(c.ncols(), 2);
        assert!((b.transpose() * &c).norm() < 1e-13);
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 5.0]));
        let o = orthonormalize_with(&c, &g).unwrap();
        assert!((o.transpose() * &g * &o - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
