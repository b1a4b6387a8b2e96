//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Removes from `v` its components along the orthonormal `basis`, twice
/// (classical "twice is enough" reorthogonalization).
pub fn orthogonalize_against(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(v);
            v.axpy(-c, q, 1.0);
        }
    }
}

/// Modified Gram-Schmidt with a reorthogonalization pass over the columns of
/// `a`. Returns `None` if a column collapses below `rel_tol` times its
/// original norm.
pub fn gram_schmidt(a: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(a.ncols());
    for j in 0..a.ncols() {
        let orig = a.column(j).into_owned();
        let scale = orig.norm();
        let mut v = orig;
        orthogonalize_against(&mut v, &cols);
        let n = v.norm();
        if !(n > rel_tol * scale) || n == 0.0 {
            return None;
        }
        cols.push(v / n);
    }
    Some(DMatrix::from_columns(&cols))
}

/// Completes the orthonormal columns `q` (n×k) to a basis of Rⁿ by
/// orthonormalizing the standard basis vectors in index order and dropping
/// those whose residual norm is below `drop_tol`.
pub fn orthonormal_complement(q: &DMatrix<f64>, drop_tol: f64) -> DMatrix<f64> {
    let n = q.nrows();
    let want = n - q.ncols();
    let mut basis: Vec<DVector<f64>> = (0..q.ncols()).map(|j| q.column(j).into_owned()).collect();
    let mut out = Vec::with_capacity(want);
    for k in 0..n {
        if out.len() == want {
            break;
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        orthogonalize_against(&mut v, &basis);
        let norm = v.norm();
        if norm > drop_tol {
            let v = v / norm;
            basis.push(v.clone());
            out.push(v);
        }
    }
    if out.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&x| x > rel_tol * max).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the kernel of `a`: right singular vectors whose
/// singular value is at most `rel_tol` times the largest (all of them when
/// `a` vanishes).
pub fn kernel_basis(a: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let q = a.ncols();
    if q == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the SVD returns a full set of right vectors.
    let rows = a.nrows().max(q);
    let mut padded = DMatrix::zeros(rows, q);
    padded.view_mut((0, 0), (a.nrows(), q)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sv = &svd.singular_values;
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let mut idx: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= rel_tol * max).collect();
    idx.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]).then(i.cmp(&j)));
    idx.into_iter().map(|i| v_t.row(i).transpose()).collect()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 1.0, 1.0, 1e-3]);
        let q = gram_schmidt(&a, 1e-12).unwrap();
        let g = q.transpose() * &q;
        assert!((g - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn gram_schmidt_detects_dependence() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        assert!(gram_schmidt(&a, 1e-10).is_none());
    }

    #[test]
    fn complement_prefers_low_index_basis_vectors() {
        let q = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let c = orthonormal_complement(&q, 1e-8);
        assert_eq!(c.ncols(), 2);
        assert_eq!(c.column(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(c.column(1).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn kernel_of_wide_and_zero_maps() {
        let a = DMatrix::from_row_slice(1, 3, &[0.0, 2.0, 0.0]);
        let k = kernel_basis(&a, 1e-8);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(v[1].abs() < 1e-14);
        }
        assert_eq!(kernel_basis(&DMatrix::zeros(3, 2), 1e-8).len(), 2);
        assert_eq!(numerical_rank(&DMatrix::zeros(2, 2), 1e-8), 0);
    }
}
