//! Small dense linear-algebra helpers on top of nalgebra for the `M x M`
//! matrices of the pipeline (whiteners, demixing and mixing matrices).

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2};

use crate::{IcaError, Result};

pub(crate) fn to_na(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub(crate) fn determinant(a: ArrayView2<'_, f64>) -> f64 {
    to_na(a).determinant()
}

pub(crate) fn inverse(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let m = to_na(a);
    let det = m.determinant();
    m.try_inverse()
        .map(|inv| from_na(&inv))
        .ok_or(IcaError::Singular(det))
}

/// Ratio of largest to smallest singular value (infinite for singular input).
pub(crate) fn condition_number(a: ArrayView2<'_, f64>) -> f64 {
    let sv = to_na(a).singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
///
/// Each eigenvector (column of the returned matrix) is signed so that its
/// largest-magnitude entry is positive.
pub(crate) fn symmetric_eigen(a: ArrayView2<'_, f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let eig = to_na(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = Array1::from_iter(order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vecs = Array2::zeros((n, n));
    for (dst, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vecs[[i, dst]] = sign * col[i];
        }
    }
    (vals, vecs)
}

/// Divide every row by its Euclidean norm.
pub(crate) fn normalize_rows(w: &mut Array2<f64>) {
    for mut row in w.rows_mut() {
        let n = row.dot(&row).sqrt();
        if n > 0.0 {
            row /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigen_sorted_and_signed() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(a.view());
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let col = vecs.column(k);
            let pivot = col.iter().copied().fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn condition_and_inverse() {
        let a = array![[1.0, 0.0], [0.0, 1e-2]];
        assert!((condition_number(a.view()) - 100.0).abs() < 1e-9);
        let inv = inverse(a.view()).unwrap();
        assert!((inv[[1, 1]] - 100.0).abs() < 1e-9);
        assert!(inverse(array![[1.0, 2.0], [2.0, 4.0]].view()).is_err());
    }
}
