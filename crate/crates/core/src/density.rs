//! Gaussian Parzen-window density estimators.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::{IcaError, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal kernel `(2 pi)^(-1/2) exp(-u^2 / 2)`.
#[inline]
pub fn kernel_uni(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

/// Derivative of [`kernel_uni`]: `-u * kernel_uni(u)`.
#[inline]
pub fn kernel_uni_deriv(u: f64) -> f64 {
    -u * kernel_uni(u)
}

/// Isotropic `N`-dimensional normal kernel `(2 pi)^(-N/2) exp(-u'u / 2)`.
pub fn kernel_multi(u: &[f64]) -> f64 {
    let sq: f64 = u.iter().map(|v| v * v).sum();
    (2.0 * PI).powf(-0.5 * u.len() as f64) * (-0.5 * sq).exp()
}

/// Kernel width together with the sample count it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBandwidth {
    pub h: f64,
    pub t_count: usize,
}

impl KernelBandwidth {
    /// Rule-of-thumb width `1.06 * T^(-1/5)` for unit-variance data.
    pub fn rule_of_thumb(t_count: usize) -> Result<Self> {
        if t_count == 0 {
            return Err(IcaError::InvalidArgument("bandwidth needs at least one sample".into()));
        }
        Ok(Self {
            h: 1.06 * (t_count as f64).powf(-0.2),
            t_count,
        })
    }

    pub fn fixed(h: f64, t_count: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(IcaError::InvalidArgument(format!("bandwidth must be positive, got {h}")));
        }
        if t_count == 0 {
            return Err(IcaError::InvalidArgument("bandwidth needs at least one sample".into()));
        }
        Ok(Self { h, t_count })
    }
}

/// Number of columns kept when taking every `stride`-th column from `t`.
pub fn strided_len(t: usize, stride: usize) -> usize {
    t.div_ceil(stride)
}

/// Columns `0, stride, 2*stride, ...` of `x`.
pub fn strided_columns(x: ArrayView2<'_, f64>, stride: usize) -> Array2<f64> {
    let idx: Vec<usize> = (0..x.ncols()).step_by(stride.max(1)).collect();
    x.select(Axis(1), &idx)
}

/// Kernel density estimate anchored at (a strided subset of) the columns of
/// an `M x T` sample matrix.
#[derive(Debug, Clone)]
pub struct ParzenModel {
    anchors: Array2<f64>,
    bandwidth: KernelBandwidth,
    stride: usize,
}

impl ParzenModel {
    /// Anchors every `stride`-th column of `samples`, starting at column 0.
    ///
    /// With `h = None` the bandwidth follows the rule of thumb evaluated at
    /// the effective anchor count.
    pub fn new(samples: ArrayView2<'_, f64>, stride: usize, h: Option<f64>) -> Result<Self> {
        if stride == 0 {
            return Err(IcaError::InvalidArgument("stride must be at least 1".into()));
        }
        if samples.nrows() == 0 {
            return Err(IcaError::InvalidArgument("no channels".into()));
        }
        let effective = strided_len(samples.ncols(), stride);
        if effective < 2 {
            return Err(IcaError::InvalidArgument(format!(
                "stride {stride} leaves {effective} anchor(s) out of {} samples; need at least 2",
                samples.ncols()
            )));
        }
        let bandwidth = match h {
            Some(h) => KernelBandwidth::fixed(h, effective)?,
            None => KernelBandwidth::rule_of_thumb(effective)?,
        };
        Ok(Self {
            anchors: strided_columns(samples, stride),
            bandwidth,
            stride,
        })
    }

    pub fn anchors(&self) -> ArrayView2<'_, f64> {
        self.anchors.view()
    }

    pub fn bandwidth(&self) -> KernelBandwidth {
        self.bandwidth
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn dims(&self) -> usize {
        self.anchors.nrows()
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors.ncols()
    }

    fn channel(&self, m: usize) -> Result<ArrayView1<'_, f64>> {
        if m >= self.dims() {
            return Err(IcaError::InvalidArgument(format!(
                "channel {m} out of range for {} channels",
                self.dims()
            )));
        }
        Ok(self.anchors.row(m))
    }

    /// Univariate estimate `p(y_m)` for channel `m`.
    pub fn pdf_uni(&self, m: usize, y: f64) -> Result<f64> {
        let h = self.bandwidth.h;
        let s: f64 = self.channel(m)?.iter().map(|a| kernel_uni((y - a) / h)).sum();
        Ok(s / (self.anchor_count() as f64 * h))
    }

    /// `d p(y_m) / d y` for channel `m`.
    pub fn pdf_uni_deriv(&self, m: usize, y: f64) -> Result<f64> {
        let h = self.bandwidth.h;
        let s: f64 = self.channel(m)?.iter().map(|a| kernel_uni_deriv((y - a) / h)).sum();
        Ok(s / (self.anchor_count() as f64 * h * h))
    }

    /// Multivariate estimate `p(y)` over all channels.
    pub fn pdf_multi(&self, y: &[f64]) -> Result<f64> {
        let dims = self.dims();
        if y.len() != dims {
            return Err(IcaError::DimensionMismatch(format!(
                "query has {} coordinates, model has {dims} channels",
                y.len()
            )));
        }
        Ok(self.pdf_multi_unchecked(y))
    }

    pub(crate) fn pdf_multi_unchecked(&self, y: &[f64]) -> f64 {
        let h = self.bandwidth.h;
        let dims = self.dims();
        let norm = (2.0 * PI).powf(-0.5 * dims as f64);
        let mut s = 0.0;
        for col in self.anchors.columns() {
            let mut sq = 0.0;
            for (yi, ai) in y.iter().zip(col.iter()) {
                let u = (yi - ai) / h;
                sq += u * u;
            }
            s += (-0.5 * sq).exp();
        }
        norm * s / (self.anchor_count() as f64 * h.powi(dims as i32))
    }

    /// Multivariate estimate at each anchor, i.e. `p(y_i)` for every retained column.
    pub fn pdf_multi_at_anchors(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.dims()];
        self.anchors
            .columns()
            .into_iter()
            .map(|col| {
                q.iter_mut().zip(col.iter()).for_each(|(d, s)| *d = *s);
                self.pdf_multi_unchecked(&q)
            })
            .collect()
    }
}
