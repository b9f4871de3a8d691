//! Separation-quality metrics.

use ndarray::Array2;

use crate::{IcaError, Result};

/// Amari error of a global system `P = W A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmariScore {
    /// Normalised to `[0, 1]`.
    pub value: f64,
    /// `100 * value`, the scale used in result tables.
    pub value_x100: f64,
}

/// Sum in ascending order, so the result does not depend on the input order.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Amari error of the demixing map `w` (applied to raw observations)
/// against the true mixing matrix `a`.
///
/// With `P = w a` and each row of `|P|` divided by its largest entry
/// (`q_ij = |p_ij| / max_k |p_ik|`),
///
/// ```text
/// E = [ sum_i (sum_j q_ij - 1) + sum_j (sum_i q_ij / max_k q_kj - 1) ] / (2 M (M - 1))
/// ```
///
/// The row normalisation removes the arbitrary scale of each demixing row,
/// and all sums run in sorted order, so row permutations of `w` and column
/// permutations of `a` give bit-identical results. `E` is zero exactly when
/// `P` is a scaled permutation and at most one.
pub fn amari_error(w: &Array2<f64>, a: &Array2<f64>) -> Result<AmariScore> {
    let m = w.nrows();
    if w.ncols() != m || a.dim() != (m, m) {
        return Err(IcaError::DimensionMismatch(format!(
            "demixing is {:?}, mixing is {:?}",
            w.dim(),
            a.dim()
        )));
    }
    if m < 2 {
        return Err(IcaError::InvalidArgument("Amari error needs M >= 2".into()));
    }
    let mut q = w.dot(a).mapv(f64::abs);
    for mut row in q.rows_mut() {
        let max = row.fold(0.0f64, |acc, v| acc.max(*v));
        if !(max > 0.0 && max.is_finite()) {
            return Err(IcaError::Singular(0.0));
        }
        row.mapv_inplace(|v| v / max);
    }
    let mut terms = Vec::with_capacity(2 * m);
    for row in q.rows() {
        terms.push(sorted_sum(row.to_vec()) - 1.0);
    }
    for col in q.columns() {
        let max = col.fold(0.0f64, |acc, v| acc.max(*v));
        terms.push(sorted_sum(col.iter().map(|v| v / max).collect()) - 1.0);
    }
    let value = (sorted_sum(terms) / (2.0 * m as f64 * (m as f64 - 1.0))).clamp(0.0, 1.0);
    Ok(AmariScore {
        value,
        value_x100: 100.0 * value,
    })
}

/// Excess kurtosis `E[s^4] / E[s^2]^2 - 3` with `1/T` central moments.
pub fn kurtosis(s: &[f64]) -> Result<f64> {
    if s.len() < 4 {
        return Err(IcaError::InvalidArgument(format!(
            "kurtosis needs at least 4 samples, got {}",
            s.len()
        )));
    }
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let (m2, m4) = s.iter().fold((0.0, 0.0), |(m2, m4), v| {
        let d = (v - mean) * (v - mean);
        (m2 + d, m4 + d * d)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        return Err(IcaError::DegenerateContrast("kurtosis of a constant signal".into()));
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn all_ones_system_scores_one_hundred() {
        let p = array![[1.0, 1.0], [1.0, 1.0]];
        let s = amari_error(&p, &Array2::eye(2)).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.value_x100, 100.0);
    }

    #[test]
    fn scaled_permutation_is_zero() {
        let a = array![[0.3, -1.1, 0.2], [0.9, 0.4, -0.5], [0.1, 0.7, 1.3]];
        let inv = crate::linalg::inverse(a.view()).unwrap();
        let mut w = Array2::zeros((3, 3));
        for (dst, (src, scale)) in [(2, -3.0), (0, 0.5), (1, 7.0)].into_iter().enumerate() {
            w.row_mut(dst).assign(&(&inv.row(src) * scale));
        }
        assert!(amari_error(&w, &a).unwrap().value < 1e-12);
    }

    #[test]
    fn near_identity_rotation() {
        let d: f64 = 0.05;
        let p = array![[d.cos(), -d.sin()], [d.sin(), d.cos()]];
        assert_relative_eq!(amari_error(&p, &Array2::eye(2)).unwrap().value, d.tan(), max_relative = 1e-12);
    }

    #[test]
    fn row_permutation_and_scaling_of_w() {
        let w = array![[0.9, 0.3, -0.2], [0.1, -1.2, 0.4], [0.5, 0.2, 0.8]];
        let a = array![[1.0, 0.4, 0.1], [-0.3, 0.9, 0.2], [0.2, -0.1, 1.1]];
        let base = amari_error(&w, &a).unwrap().value;
        assert!(base > 0.1);
        let permuted = array![[0.5, 0.2, 0.8], [0.9, 0.3, -0.2], [0.1, -1.2, 0.4]];
        assert_eq!(amari_error(&permuted, &a).unwrap().value, base);
        let mut scaled = w.clone();
        for (mut row, c) in scaled.rows_mut().into_iter().zip([0.1, -10.0, 3.7]) {
            row *= c;
        }
        assert_relative_eq!(amari_error(&scaled, &a).unwrap().value, base, max_relative = 1e-14);
        // column permutation of the mixing is also bit-exact
        let a_perm = array![[0.4, 0.1, 1.0], [0.9, 0.2, -0.3], [-0.1, 1.1, 0.2]];
        assert_eq!(amari_error(&w, &a_perm).unwrap().value, base);
    }

    #[test]
    fn dimension_errors() {
        assert!(amari_error(&Array2::eye(2), &Array2::eye(3)).is_err());
        assert!(amari_error(&Array2::zeros((2, 3)), &Array2::eye(2)).is_err());
    }

    #[test]
    fn kurtosis_basics() {
        // Rademacher: E[s^4] = E[s^2]^2
        let s: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_relative_eq!(kurtosis(&s).unwrap(), -2.0, epsilon = 1e-12);
        assert!(kurtosis(&[1.0; 10]).is_err());
        assert!(kurtosis(&[1.0, 2.0]).is_err());
        let scaled: Vec<f64> = s.iter().map(|v| v * -4.5 + 0.5).collect();
        assert_relative_eq!(kurtosis(&scaled).unwrap(), -2.0, epsilon = 1e-12);
    }
}
