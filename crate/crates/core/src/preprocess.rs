//! Centering and whitening.

use ndarray::{Array1, Array2, Axis};

use crate::linalg::symmetric_eigen;
use crate::{IcaError, Result, SignalMatrix};

/// Smallest covariance eigenvalue accepted by [`fit_whitener`].
pub const RANK_FLOOR: f64 = 1e-12;

/// Affine map `x -> V (x - mean)` with `V = Lambda^(-1/2) E^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Whitener {
    pub v: Array2<f64>,
    pub mean: Array1<f64>,
    /// Covariance eigenvalues, descending.
    pub eigvals: Array1<f64>,
}

impl Whitener {
    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// Whitener that only removes the mean (`V = I`).
    pub fn identity(mean: Array1<f64>) -> Self {
        let m = mean.len();
        Self {
            v: Array2::eye(m),
            mean,
            eigvals: Array1::ones(m),
        }
    }
}

/// Sample mean and `1/T` covariance of `x`, then `V = Lambda^(-1/2) E^T`.
///
/// Eigenvalues are sorted descending and each eigenvector is signed so that
/// its largest-magnitude entry is positive, which makes the result
/// independent of the eigensolver's conventions.
pub fn fit_whitener(x: &SignalMatrix) -> Result<Whitener> {
    let (m, t) = x.dim();
    if m == 0 {
        return Err(IcaError::InvalidArgument("no channels to whiten".into()));
    }
    if t <= m {
        return Err(IcaError::InvalidArgument(format!(
            "whitening needs more samples than channels (T = {t}, M = {m})"
        )));
    }
    let mean = x.mean_axis(Axis(1)).expect("t > 0");
    let centered = x - &mean.view().insert_axis(Axis(1));
    let cov = centered.dot(&centered.t()) / t as f64;
    let (eigvals, vecs) = symmetric_eigen(cov.view());
    let smallest = eigvals[m - 1];
    if !(smallest >= RANK_FLOOR) {
        return Err(IcaError::RankDeficient(smallest));
    }
    let mut v = vecs.reversed_axes();
    for (mut row, &lambda) in v.rows_mut().into_iter().zip(eigvals.iter()) {
        row /= lambda.sqrt();
    }
    Ok(Whitener { v, mean, eigvals })
}

pub fn apply_whitener(w: &Whitener, x: &SignalMatrix) -> Result<SignalMatrix> {
    if x.nrows() != w.dims() {
        return Err(IcaError::DimensionMismatch(format!(
            "whitener is {}-dimensional, data has {} channels",
            w.dims(),
            x.nrows()
        )));
    }
    let centered = x - &w.mean.view().insert_axis(Axis(1));
    Ok(w.v.dot(&centered))
}

/// Fit and apply in one go.
pub fn whiten(x: &SignalMatrix) -> Result<(Whitener, SignalMatrix)> {
    let w = fit_whitener(x)?;
    let xw = apply_whitener(&w, x)?;
    Ok((w, xw))
}

/// Symmetric whitening `E Lambda^(-1/2) E^T (x - mean)`.
///
/// Same covariance as [`whiten`] but without the extra rotation into the
/// eigenbasis: the result is the white signal closest to the centred input.
/// Useful for building rotation fixtures.
pub fn symmetric_whiten(x: &SignalMatrix) -> Result<SignalMatrix> {
    let (w, z) = whiten(x)?;
    let mut e = w.v.t().to_owned();
    for (mut col, l) in e.columns_mut().into_iter().zip(w.eigvals.iter()) {
        col *= l.sqrt();
    }
    Ok(e.dot(&z))
}

/// `1/T` covariance of the rows of `x` about their means.
pub fn covariance(x: &SignalMatrix) -> Array2<f64> {
    let t = x.ncols() as f64;
    let mean = x.mean_axis(Axis(1)).expect("non-empty");
    let c = x - &mean.insert_axis(Axis(1));
    c.dot(&c.t()) / t
}
