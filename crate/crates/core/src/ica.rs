//! Full-matrix gradient-descent ICA on the CCS-DIV contrast.
//!
//! For whitened observations `x_t` and a demixing matrix `W` with outputs
//! `y_t = W x_t`:
//!
//! - the joint term uses the change-of-variables form
//!   `P_J(t) = p_x(x_t) / |det W|`, where `p_x` is a multivariate Parzen
//!   estimate on the whitened data. It is fitted once and reused for every `W`.
//! - the marginal term is `Q_M(t) = prod_m p_m(y_mt)`, each `p_m` a
//!   univariate Parzen estimate anchored at the current outputs `y_m`.
//!
//! The gradient is the log-derivative `V1'/V1 + V2'/V2 - 2 V3'/V3` of
//! `log(V1 V2 / V3^2)`. Because the univariate anchors move with `W`, the
//! kernel argument `(y_mt - y_mi)/h` differentiates to `(x_lt - x_li)/h`.

use ndarray::{Array2, ArrayView2, Axis};

use crate::density::{kernel_uni, strided_columns, strided_len, KernelBandwidth, ParzenModel};
use crate::divergence::{ContrastSums, ConvexityParam, DENSITY_FLOOR};
use crate::linalg::{determinant, inverse, normalize_rows};
use crate::preprocess::{fit_whitener, apply_whitener, Whitener};
use crate::{IcaError, Result, SignalMatrix};

/// `|det W|` below this is treated as singular.
const SINGULAR_DET: f64 = 1e-12;

/// Settings of the contrast estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastConfig {
    pub alpha: ConvexityParam,
    /// Kernel width; `None` selects `1.06 * T'^(-1/5)` where `T'` is the
    /// number of strided samples.
    pub bandwidth: Option<f64>,
    /// Sampling stride `T_s`: only every `stride`-th sample is used, both as
    /// evaluation point and as kernel anchor.
    pub stride: usize,
    pub density_floor: f64,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        Self {
            alpha: ConvexityParam::default(),
            bandwidth: None,
            stride: 1,
            density_floor: DENSITY_FLOOR,
        }
    }
}

impl ContrastConfig {
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Ok(Self {
            alpha: ConvexityParam::new(alpha)?,
            ..Self::default()
        })
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(IcaError::InvalidArgument("stride must be at least 1".into()));
        }
        if !(self.density_floor > 0.0) {
            return Err(IcaError::InvalidArgument("density floor must be positive".into()));
        }
        Ok(())
    }
}

/// How the update `W <- W - step * G` picks its step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    /// `step = gamma` on the raw gradient; stop once `|D_k - D_{k-1}| <= epsilon`.
    Fixed,
    /// Step of length `gamma` along `G / ||G||_F`. An update that raises the
    /// contrast is rejected and `gamma` halved; an accepted one grows it by
    /// [`STEP_GROWTH`]. Stop once `|D_k - D_{k-1}| <= epsilon * D_{k-1}`.
    #[default]
    Normalized,
}

/// Step size and stopping rule of the gradient iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Give up after this many consecutive contrast increases.
    pub divergence_patience: usize,
    pub step_rule: StepRule,
}

pub const STEP_GROWTH: f64 = 1.2;

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(IcaError::InvalidArgument(format!("step size must be positive, got {}", self.gamma)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(IcaError::InvalidArgument(format!("tolerance must be non-negative, got {}", self.epsilon)));
        }
        if self.divergence_patience == 0 {
            return Err(IcaError::InvalidArgument("divergence patience must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.3,
            epsilon: 1e-4,
            max_iter: 100,
            divergence_patience: 10,
            step_rule: StepRule::Normalized,
        }
    }
}

/// Result of a separation run.
#[derive(Debug, Clone)]
pub struct DemixingState {
    /// Demixing matrix acting on whitened data.
    pub w: Array2<f64>,
    pub whitener: Whitener,
    pub iteration: usize,
    pub last_div: f64,
    pub converged: bool,
    /// Contrast after each update, starting with the initial value.
    pub history: Vec<f64>,
    /// Pairs whose inner optimisation failed (pairwise scheme only).
    pub skipped_pairs: usize,
}

impl DemixingState {
    /// The overall demixing map on raw observations, `W V`.
    pub fn total_demixing(&self) -> Array2<f64> {
        self.w.dot(&self.whitener.v)
    }

    /// Estimated sources `W V (x - mean)`.
    pub fn unmix(&self, x: &SignalMatrix) -> Result<SignalMatrix> {
        Ok(self.w.dot(&apply_whitener(&self.whitener, x)?))
    }
}

/// Values and element-wise partials of the three sums of the contrast.
#[derive(Debug, Clone)]
pub struct GradientTerms {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v1p: Array2<f64>,
    pub v2p: Array2<f64>,
    pub v3p: Array2<f64>,
}

impl GradientTerms {
    pub fn contrast(&self) -> Result<f64> {
        ContrastSums { v1: self.v1, v2: self.v2, v3: self.v3 }.divergence()
    }

    /// `dD/dW = V1'/V1 + V2'/V2 - 2 V3'/V3`.
    pub fn gradient(&self) -> Array2<f64> {
        &self.v1p / self.v1 + &self.v2p / self.v2 - &self.v3p * (2.0 / self.v3)
    }
}

/// The contrast as a function of `W` for fixed whitened data.
///
/// Holds the strided samples and the cached joint density `p_x` at each of
/// them, so repeated evaluations only pay for the marginal terms.
#[derive(Debug, Clone)]
pub struct ContrastProblem {
    samples: Array2<f64>,
    px: Vec<f64>,
    h: f64,
    cfg: ContrastConfig,
}

impl ContrastProblem {
    pub fn new(x_white: ArrayView2<'_, f64>, cfg: &ContrastConfig) -> Result<Self> {
        cfg.validate()?;
        if x_white.nrows() == 0 {
            return Err(IcaError::InvalidArgument("no channels".into()));
        }
        let t_eff = strided_len(x_white.ncols(), cfg.stride);
        let bw = match cfg.bandwidth {
            Some(h) => KernelBandwidth::fixed(h, t_eff.max(1))?,
            None => KernelBandwidth::rule_of_thumb(t_eff.max(1))?,
        };
        let joint = ParzenModel::new(x_white, cfg.stride, Some(bw.h))?;
        for (m, row) in joint.anchors().rows().into_iter().enumerate() {
            let first = row[0];
            if row.iter().all(|v| *v == first) {
                return Err(IcaError::DegenerateContrast(format!("channel {m} is constant")));
            }
        }
        let px = joint.pdf_multi_at_anchors();
        Ok(Self {
            samples: strided_columns(x_white, cfg.stride),
            px,
            h: bw.h,
            cfg: *cfg,
        })
    }

    pub fn dims(&self) -> usize {
        self.samples.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.samples.ncols()
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    fn check_w(&self, w: ArrayView2<'_, f64>) -> Result<f64> {
        let m = self.dims();
        if w.dim() != (m, m) {
            return Err(IcaError::DimensionMismatch(format!(
                "demixing matrix is {:?}, data has {m} channels",
                w.dim()
            )));
        }
        let det = determinant(w);
        if !(det.abs() >= SINGULAR_DET) {
            return Err(IcaError::Singular(det));
        }
        Ok(det)
    }

    fn joint(&self, det: f64) -> Vec<f64> {
        let scale = 1.0 / det.abs();
        self.px.iter().map(|p| p * scale).collect()
    }

    /// Univariate Parzen values `p_m(y_mt)` for every channel and sample.
    fn marginals(&self, y: &Array2<f64>) -> Array2<f64> {
        let (m, t) = y.dim();
        let h = self.h;
        let norm = 1.0 / (t as f64 * h);
        let mut p = Array2::zeros((m, t));
        for ch in 0..m {
            let yr = y.row(ch);
            let mut acc = vec![kernel_uni(0.0); t];
            for a in 0..t {
                let ya = yr[a];
                for b in (a + 1)..t {
                    let k = kernel_uni((ya - yr[b]) / h);
                    acc[a] += k;
                    acc[b] += k;
                }
            }
            for (dst, v) in p.row_mut(ch).iter_mut().zip(acc) {
                *dst = v * norm;
            }
        }
        p
    }

    /// CCS-DIV at `w`.
    pub fn contrast(&self, w: ArrayView2<'_, f64>) -> Result<f64> {
        let det = self.check_w(w)?;
        let y = w.dot(&self.samples);
        let marg = self.marginals(&y);
        let qm = marg.map_axis(Axis(0), |col| col.product());
        let pj = self.joint(det);
        ContrastSums::accumulate(&pj, qm.iter(), self.cfg.alpha, self.cfg.density_floor)
            .divergence()
    }

    /// Contrast sums and their partial derivatives at `w`.
    pub fn gradient_terms(&self, w: ArrayView2<'_, f64>) -> Result<GradientTerms> {
        let det = self.check_w(w)?;
        let m = self.dims();
        let t = self.sample_count();
        let h = self.h;
        let a = self.cfg.alpha;
        let floor = self.cfg.density_floor;
        let x = &self.samples;
        let y = w.dot(x);

        // p_m(y_mt) and d p_m(y_mt) / d w_ml for every (m, t, l).
        let norm = 1.0 / (t as f64 * h);
        let mut marg = Array2::<f64>::zeros((m, t));
        let mut dmarg = ndarray::Array3::<f64>::zeros((m, t, m));
        let mut dx = vec![0.0; m];
        for ch in 0..m {
            let yr = y.row(ch);
            let mut acc = vec![kernel_uni(0.0); t];
            let mut dacc = Array2::<f64>::zeros((t, m));
            for i in 0..t {
                for j in (i + 1)..t {
                    let u = (yr[i] - yr[j]) / h;
                    let k = kernel_uni(u);
                    acc[i] += k;
                    acc[j] += k;
                    // theta'(u) (x_li - x_lj) / h is the same for (i, j) and (j, i)
                    let g = -u * k / h;
                    for (l, d) in dx.iter_mut().enumerate() {
                        *d = g * (x[[l, i]] - x[[l, j]]);
                    }
                    for l in 0..m {
                        dacc[[i, l]] += dx[l];
                        dacc[[j, l]] += dx[l];
                    }
                }
            }
            for i in 0..t {
                marg[[ch, i]] = acc[i] * norm;
                for l in 0..m {
                    dmarg[[ch, i, l]] = dacc[[i, l]] * norm;
                }
            }
        }

        let pj = self.joint(det);
        // cofactor matrix: C = det * W^{-T}
        let cof = inverse(w)?.reversed_axes() * det;
        let sign = det.signum();
        let inv_det_sq = 1.0 / (det * det);

        let mut terms = GradientTerms {
            v1: 0.0,
            v2: 0.0,
            v3: 0.0,
            v1p: Array2::zeros((m, m)),
            v2p: Array2::zeros((m, m)),
            v3p: Array2::zeros((m, m)),
        };
        // Sums over t of the P_J-dependent weights; P_J' factorises as
        // -p_x(t) / |det W|^2 * C_ml * sign(det W).
        let mut p_w1 = 0.0;
        let mut p_w3 = 0.0;
        for ti in 0..t {
            let p = pj[ti].max(floor);
            let q_raw: f64 = (0..m).map(|ch| marg[[ch, ti]]).product();
            let q = q_raw.max(floor);
            let (fp, fpp) = (a.f(p), a.f_prime(p));
            let (fq, fqp) = (a.f(q), a.f_prime(q));
            terms.v1 += fp * fp;
            terms.v2 += fq * fq;
            terms.v3 += fp * fq;

            let px = self.px[ti];
            p_w1 += 2.0 * fp * fpp * px;
            p_w3 += fpp * fq * px;

            for ch in 0..m {
                let others: f64 = (0..m).filter(|&j| j != ch).map(|j| marg[[j, ti]]).product();
                for l in 0..m {
                    let dq = others * dmarg[[ch, ti, l]];
                    terms.v2p[[ch, l]] += 2.0 * fq * fqp * dq;
                    terms.v3p[[ch, l]] += fp * fqp * dq;
                }
            }
        }
        let dpj = cof.mapv(|c| -inv_det_sq * c * sign);
        terms.v1p = &dpj * p_w1;
        terms.v3p = &terms.v3p + &(&dpj * p_w3);
        Ok(terms)
    }

    /// `(D, dD/dW)` at `w`.
    pub fn gradient(&self, w: ArrayView2<'_, f64>) -> Result<(f64, Array2<f64>)> {
        let terms = self.gradient_terms(w)?;
        Ok((terms.contrast()?, terms.gradient()))
    }
}

/// CCS-DIV of the outputs `W x` for whitened `x`.
pub fn eval_contrast(x_white: &SignalMatrix, w: &Array2<f64>, cfg: &ContrastConfig) -> Result<f64> {
    ContrastProblem::new(x_white.view(), cfg)?.contrast(w.view())
}

/// Analytic gradient `dD/dw_ml` for whitened `x`.
pub fn eval_gradient(
    x_white: &SignalMatrix,
    w: &Array2<f64>,
    cfg: &ContrastConfig,
) -> Result<Array2<f64>> {
    Ok(ContrastProblem::new(x_white.view(), cfg)?.gradient(w.view())?.1)
}

/// Outcome of the gradient iteration on already-whitened data.
#[derive(Debug, Clone)]
pub(crate) struct DescentOutcome {
    pub w: Array2<f64>,
    pub iteration: usize,
    pub last_div: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Row-normalised descent on the contrast from `w0`, see [`StepRule`].
pub(crate) fn descend(
    problem: &ContrastProblem,
    w0: Array2<f64>,
    opt: &OptimizerConfig,
) -> Result<DescentOutcome> {
    opt.validate()?;
    let normalized = opt.step_rule == StepRule::Normalized;
    let mut w = w0;
    normalize_rows(&mut w);
    let (mut d, mut grad) = problem.gradient(w.view())?;
    let mut history = vec![d];
    let mut step = opt.gamma;
    let mut rising = 0;
    let mut converged = false;
    let mut iteration = 0;
    while iteration < opt.max_iter {
        iteration += 1;
        let scale = if normalized {
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm == 0.0 {
                converged = true;
                break;
            }
            step / norm
        } else {
            step
        };
        let mut next = &w - &(&grad * scale);
        normalize_rows(&mut next);
        let trial = match problem.gradient(next.view()) {
            Ok(v) => Some(v),
            Err(IcaError::Singular(_)) | Err(IcaError::DegenerateContrast(_)) => None,
            Err(e) => return Err(e),
        };
        if trial.as_ref().is_none_or(|(dn, _)| *dn > d) {
            rising += 1;
            if rising >= opt.divergence_patience {
                break;
            }
            if normalized {
                step *= 0.5;
                continue;
            }
        } else {
            rising = 0;
        }
        let Some((d_next, g_next)) = trial else { break };
        let delta = (d_next - d).abs();
        let tol = if normalized { opt.epsilon * d.abs() } else { opt.epsilon };
        w = next;
        d = d_next;
        grad = g_next;
        history.push(d);
        if normalized {
            step *= STEP_GROWTH;
        }
        if delta <= tol {
            converged = true;
            break;
        }
    }
    Ok(DescentOutcome {
        w,
        iteration,
        last_div: d,
        converged,
        history,
    })
}

pub(crate) fn check_run_shape(x: &SignalMatrix) -> Result<()> {
    let (m, t) = x.dim();
    if m < 2 {
        return Err(IcaError::InvalidArgument(format!(
            "separation needs at least two channels, got {m}"
        )));
    }
    if t <= m {
        return Err(IcaError::InvalidArgument(format!(
            "need more samples than channels (T = {t}, M = {m})"
        )));
    }
    Ok(())
}

/// Whiten `x`, then minimise the contrast by gradient descent from `W = I`.
pub fn run_gradient_ica(
    x: &SignalMatrix,
    cfg: &ContrastConfig,
    opt: &OptimizerConfig,
) -> Result<DemixingState> {
    check_run_shape(x)?;
    let whitener = fit_whitener(x)?;
    let xw = apply_whitener(&whitener, x)?;
    let problem = ContrastProblem::new(xw.view(), cfg)?;
    let out = descend(&problem, Array2::eye(x.nrows()), opt)?;
    Ok(DemixingState {
        w: out.w,
        whitener,
        iteration: out.iteration,
        last_div: out.last_div,
        converged: out.converged,
        history: out.history,
        skipped_pairs: 0,
    })
}
