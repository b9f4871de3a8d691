//! The convex function `f`, its derivative, and the convex Cauchy-Schwarz
//! divergence between a joint density and the product of its marginals.
//!
//! For a convexity parameter `alpha` away from `+-1`,
//!
//! ```text
//! f(t) = 4 / (1 - alpha^2) * [ (1 - alpha)/2 + (1 + alpha)/2 * t - t^((1 + alpha)/2) ]
//! ```
//!
//! with the limits `t log t - t + 1` at `alpha = +1` and `t - 1 - log t` at
//! `alpha = -1`. The divergence over sample points is
//!
//! ```text
//! D = log( sum f(P)^2 * sum f(Q)^2 / (sum f(P) f(Q))^2 )
//! ```
//!
//! which is non-negative by Cauchy-Schwarz and vanishes when `f(P)` and
//! `f(Q)` are proportional.
//!
//! Both `f` and `f'` are evaluated through `expm1` so that values of `alpha`
//! within `1e-5` of the limits (the usual operating point is `-0.99999`)
//! keep full relative precision instead of losing it to the `1 / (1 - alpha^2)`
//! prefactor.

use ndarray::Array2;

use crate::{IcaError, Result};

/// Lower clamp applied to every density value before it enters `f`.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Convexity parameter `alpha` of the divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityParam {
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Generic,
    /// `alpha = +1`: `t log t - t + 1`.
    PlusOne,
    /// `alpha = -1`: `t - 1 - log t`.
    MinusOne,
}

impl ConvexityParam {
    /// The operating point used throughout the experiments.
    pub const DEFAULT_ALPHA: f64 = -0.99999;

    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(IcaError::InvalidArgument(format!(
                "convexity parameter must be finite, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True when `alpha` is exactly `+1` or `-1` and the closed-form limits apply.
    pub fn is_limit(&self) -> bool {
        self.branch() != Branch::Generic
    }

    fn branch(&self) -> Branch {
        if self.alpha == 1.0 {
            Branch::PlusOne
        } else if self.alpha == -1.0 {
            Branch::MinusOne
        } else {
            Branch::Generic
        }
    }

    /// `f(t)` for `t > 0`. No validation.
    #[inline]
    pub(crate) fn f(&self, t: f64) -> f64 {
        let a = self.alpha;
        let v = match self.branch() {
            Branch::PlusOne => t * t.ln() - t + 1.0,
            Branch::MinusOne => t - 1.0 - t.ln(),
            Branch::Generic => {
                let ln_t = t.ln();
                // (1-a)/2 + (1+a)/2 t - t^((1+a)/2), rearranged around whichever
                // exponent is small.
                let g = if a <= 0.0 {
                    let b = 0.5 * (1.0 + a);
                    b * (t - 1.0) - (b * ln_t).exp_m1()
                } else {
                    let c = 0.5 * (1.0 - a);
                    c * (1.0 - t) - t * (-c * ln_t).exp_m1()
                };
                4.0 / ((1.0 - a) * (1.0 + a)) * g
            }
        };
        v.max(0.0)
    }

    /// `f'(t)` for `t > 0`. No validation.
    #[inline]
    pub(crate) fn f_prime(&self, t: f64) -> f64 {
        let a = self.alpha;
        match self.branch() {
            Branch::PlusOne => t.ln(),
            Branch::MinusOne => 1.0 - 1.0 / t,
            Branch::Generic => {
                let e = 0.5 * (a - 1.0);
                -(e * t.ln()).exp_m1() * 2.0 / (1.0 - a)
            }
        }
    }
}

impl Default for ConvexityParam {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// Joint-density values `P_J` and marginal-product values `Q_M` at the same
/// sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair {
    pub pj: Vec<f64>,
    pub qm: Vec<f64>,
}

impl DensityPair {
    pub fn new(pj: Vec<f64>, qm: Vec<f64>) -> Result<Self> {
        if pj.len() != qm.len() {
            return Err(IcaError::DimensionMismatch(format!(
                "joint has {} samples, marginal product has {}",
                pj.len(),
                qm.len()
            )));
        }
        if pj.is_empty() {
            return Err(IcaError::InvalidArgument("density pair is empty".into()));
        }
        if let Some(v) = pj.iter().chain(&qm).find(|v| !v.is_finite() || **v < 0.0) {
            return Err(IcaError::Domain(format!("density value {v} is not a finite nonnegative number")));
        }
        Ok(Self { pj, qm })
    }

    pub fn len(&self) -> usize {
        self.pj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pj.is_empty()
    }
}

/// The convex function `f(t)`.
pub fn convex_f(t: f64, a: ConvexityParam) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(IcaError::Domain(format!("f(t) requires finite t >= 0, got {t}")));
    }
    if t == 0.0 {
        return match a.branch() {
            Branch::MinusOne => Err(IcaError::Domain("f(0) diverges at alpha = -1".into())),
            Branch::PlusOne => Ok(1.0),
            Branch::Generic => Ok(2.0 / (1.0 + a.alpha)),
        };
    }
    Ok(a.f(t))
}

/// Derivative `f'(t)`, defined for `t > 0`.
pub fn convex_f_prime(t: f64, a: ConvexityParam) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(IcaError::Domain(format!("f'(t) requires finite t > 0, got {t}")));
    }
    Ok(a.f_prime(t))
}

/// The three sums behind the contrast: `sum f(P)^2`, `sum f(Q)^2`, `sum f(P) f(Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ContrastSums {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl ContrastSums {
    pub(crate) fn accumulate<'a>(
        pj: impl IntoIterator<Item = &'a f64>,
        qm: impl IntoIterator<Item = &'a f64>,
        a: ConvexityParam,
        floor: f64,
    ) -> Self {
        let mut s = Self { v1: 0.0, v2: 0.0, v3: 0.0 };
        for (&p, &q) in pj.into_iter().zip(qm) {
            let fp = a.f(p.max(floor));
            let fq = a.f(q.max(floor));
            s.v1 += fp * fp;
            s.v2 += fq * fq;
            s.v3 += fp * fq;
        }
        s
    }

    pub(crate) fn divergence(&self) -> Result<f64> {
        if self.v1 == 0.0 || self.v2 == 0.0 || self.v3 == 0.0 {
            return Err(IcaError::DegenerateContrast(format!(
                "sums are ({:e}, {:e}, {:e})",
                self.v1, self.v2, self.v3
            )));
        }
        let d = self.v1.ln() + self.v2.ln() - 2.0 * self.v3.abs().ln();
        if !d.is_finite() {
            return Err(IcaError::DegenerateContrast(format!("non-finite divergence {d}")));
        }
        Ok(d.max(0.0))
    }
}

/// Sample-approximated CCS-DIV of a density pair.
pub fn ccs_div(d: &DensityPair, a: ConvexityParam) -> Result<f64> {
    ContrastSums::accumulate(&d.pj, &d.qm, a, DENSITY_FLOOR).divergence()
}

/// Quadrature evaluation of the divergence between a gridded 2-D joint
/// density and the outer product of two gridded marginals.
///
/// `p_joint[[i, j]]` is paired with `p_marg1[i] * p_marg2[j]`; every cell
/// carries weight `cell_area`.
pub fn ccs_div_integral_2d(
    p_joint: &Array2<f64>,
    p_marg1: &[f64],
    p_marg2: &[f64],
    a: ConvexityParam,
    cell_area: f64,
) -> Result<f64> {
    let (n1, n2) = p_joint.dim();
    if n1 != p_marg1.len() || n2 != p_marg2.len() {
        return Err(IcaError::DimensionMismatch(format!(
            "joint grid is {n1}x{n2}, marginals have {} and {} points",
            p_marg1.len(),
            p_marg2.len()
        )));
    }
    if !(cell_area > 0.0) {
        return Err(IcaError::InvalidArgument(format!("cell area must be positive, got {cell_area}")));
    }
    let mut s = ContrastSums { v1: 0.0, v2: 0.0, v3: 0.0 };
    for (i, &m1) in p_marg1.iter().enumerate() {
        for (j, &m2) in p_marg2.iter().enumerate() {
            let fp = a.f(p_joint[[i, j]].max(DENSITY_FLOOR));
            let fq = a.f((m1 * m2).max(DENSITY_FLOOR));
            s.v1 += fp * fp * cell_area;
            s.v2 += fq * fq * cell_area;
            s.v3 += fp * fq * cell_area;
        }
    }
    s.divergence()
}
