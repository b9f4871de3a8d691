//! Pairwise schemes for more than two sources.
//!
//! After whitening, any demixing matrix can be built from planar rotations
//! acting on one pair of channels at a time. Two schemes are provided:
//!
//! - [`run_jacobi_ica`] scans a fixed grid of angles for every pair, applies
//!   the rotation that minimises the pair's contrast, and repeats sweeps
//!   until the applied angles become negligible.
//! - [`run_pairwise_gradient_ica`] runs the 2 x 2 gradient descent of
//!   [`crate::ica`] on each pair instead of a grid search.

use std::f64::consts::FRAC_PI_4;

use ndarray::{array, Array2, ArrayView2};

use crate::ica::{
    check_run_shape, descend, ContrastConfig, ContrastProblem, DemixingState, OptimizerConfig,
};
use crate::preprocess::{apply_whitener, fit_whitener};
use crate::{IcaError, Result, SignalMatrix};

/// Initial convergence-matrix entry (degrees) so every pair is visited in the first sweep.
pub const CM_SENTINEL_DEGREES: f64 = 1.0;
/// Sweeps stop once the absolute applied angles sum to at most this many degrees.
pub const CM_TOLERANCE_DEGREES: f64 = 1.0;

/// Candidate angles `theta_min, theta_min + step, ..., theta_max`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RotationGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub step: f64,
}

impl Default for RotationGrid {
    /// `[-pi/4, pi/4]` in steps of `pi/64`: 33 candidates.
    fn default() -> Self {
        Self {
            theta_min: -FRAC_PI_4,
            theta_max: FRAC_PI_4,
            step: std::f64::consts::PI / 64.0,
        }
    }
}

impl RotationGrid {
    pub fn new(theta_min: f64, theta_max: f64, step: f64) -> Result<Self> {
        let g = Self { theta_min, theta_max, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.theta_min <= self.theta_max) || !self.theta_max.is_finite() {
            return Err(IcaError::InvalidArgument(format!("invalid rotation grid {self:?}")));
        }
        Ok(())
    }

    /// Grid angles in ascending order, both endpoints included.
    pub fn candidates(&self) -> Vec<f64> {
        let n = ((self.theta_max - self.theta_min) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                if k == n && (self.theta_min + n as f64 * self.step - self.theta_max).abs() < 1e-9 * self.step.max(1.0) {
                    self.theta_max
                } else {
                    self.theta_min + k as f64 * self.step
                }
            })
            .collect()
    }

    /// Candidates in tie-break order: smallest `|theta|` first, negative before positive.
    fn search_order(&self) -> Vec<f64> {
        let mut c = self.candidates();
        c.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        c
    }
}

/// `[[cos t, -sin t], [sin t, cos t]]`.
pub fn rotation2(theta: f64) -> Array2<f64> {
    let (s, c) = theta.sin_cos();
    array![[c, -s], [s, c]]
}

/// Bookkeeping of the Jacobi scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepState {
    /// Last applied angle per pair, in degrees; symmetric with zero diagonal.
    pub cm: Array2<f64>,
    pub sweep: usize,
    /// Product of all applied rotations (acts on whitened data).
    pub w_accum: Array2<f64>,
    /// Pairs whose grid was scanned during the most recent sweep.
    pub pairs_last_sweep: usize,
    /// Minimal pair contrasts found during the most recent sweep.
    pub last_minima: Vec<f64>,
}

impl SweepState {
    pub fn new(m: usize) -> Self {
        let mut cm = Array2::from_elem((m, m), CM_SENTINEL_DEGREES);
        cm.diag_mut().fill(0.0);
        Self {
            cm,
            sweep: 0,
            w_accum: Array2::eye(m),
            pairs_last_sweep: 0,
            last_minima: Vec::new(),
        }
    }

    pub fn dims(&self) -> usize {
        self.cm.nrows()
    }

    /// `sum_{i<j} |cm_ij|` in degrees.
    pub fn angle_sum(&self) -> f64 {
        let m = self.dims();
        (0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .map(|(i, j)| self.cm[[i, j]].abs())
            .sum()
    }
}

/// Contrast of the pair `w2 * x2` for a `2 x T` block of whitened data.
pub fn pairwise_contrast(x2: ArrayView2<'_, f64>, w2: &Array2<f64>, cfg: &ContrastConfig) -> Result<f64> {
    if x2.nrows() != 2 || w2.dim() != (2, 2) {
        return Err(IcaError::DimensionMismatch(format!(
            "pair data must be 2 x T and the pair matrix 2 x 2 (got {:?} and {:?})",
            x2.dim(),
            w2.dim()
        )));
    }
    ContrastProblem::new(x2, cfg)?.contrast(w2.view())
}

/// Grid minimiser for one pair. Returns `(theta, contrast)`.
pub fn best_pair_rotation(
    x2: ArrayView2<'_, f64>,
    grid: &RotationGrid,
    cfg: &ContrastConfig,
) -> Result<(f64, f64)> {
    let problem = ContrastProblem::new(x2, cfg)?;
    let mut best: Option<(f64, f64)> = None;
    for theta in grid.search_order() {
        let d = problem.contrast(rotation2(theta).view())?;
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((theta, d));
        }
    }
    best.ok_or_else(|| IcaError::InvalidArgument("empty rotation grid".into()))
}

/// Left-multiply rows `i` and `j` of `target` by the 2 x 2 matrix `r`.
fn rotate_rows(target: &mut Array2<f64>, i: usize, j: usize, r: &Array2<f64>) {
    let ri = target.row(i).to_owned();
    let rj = target.row(j).to_owned();
    target.row_mut(i).assign(&(&ri * r[[0, 0]] + &rj * r[[0, 1]]));
    target.row_mut(j).assign(&(&ri * r[[1, 0]] + &rj * r[[1, 1]]));
}

/// One pass over all pairs `(i, j)`, `i < j`, in lexicographic order.
///
/// Pairs whose convergence entry is exactly zero are skipped. For the
/// others the best grid rotation is applied to rows `i, j` of `x`, composed
/// into `state.w_accum`, and recorded (in degrees) in `state.cm`.
pub fn jacobi_sweep(
    x: &mut SignalMatrix,
    state: &mut SweepState,
    grid: &RotationGrid,
    cfg: &ContrastConfig,
) -> Result<()> {
    grid.validate()?;
    let m = state.dims();
    if x.nrows() != m {
        return Err(IcaError::DimensionMismatch(format!(
            "sweep state is {m}-dimensional, data has {} channels",
            x.nrows()
        )));
    }
    state.pairs_last_sweep = 0;
    state.last_minima.clear();
    for i in 0..m {
        for j in (i + 1)..m {
            if state.cm[[i, j]] == 0.0 {
                continue;
            }
            let pair = x.select(ndarray::Axis(0), &[i, j]);
            let (theta, d) = best_pair_rotation(pair.view(), grid, cfg)?;
            state.pairs_last_sweep += 1;
            state.last_minima.push(d);
            let r = rotation2(theta);
            rotate_rows(x, i, j, &r);
            rotate_rows(&mut state.w_accum, i, j, &r);
            let deg = theta.to_degrees();
            state.cm[[i, j]] = deg;
            state.cm[[j, i]] = deg;
        }
    }
    state.sweep += 1;
    Ok(())
}

/// Whiten `x`, then run Jacobi sweeps until the applied angles sum to at
/// most one degree or `max_sweeps` is reached.
///
/// `history` of the returned state holds the angle sum after every sweep.
pub fn run_jacobi_ica(
    x: &SignalMatrix,
    grid: &RotationGrid,
    cfg: &ContrastConfig,
    max_sweeps: usize,
) -> Result<DemixingState> {
    check_run_shape(x)?;
    let whitener = fit_whitener(x)?;
    let mut xw = apply_whitener(&whitener, x)?;
    let mut state = SweepState::new(x.nrows());
    let mut history = Vec::new();
    let mut converged = false;
    let mut last_div = f64::NAN;
    while state.sweep < max_sweeps {
        jacobi_sweep(&mut xw, &mut state, grid, cfg)?;
        if !state.last_minima.is_empty() {
            last_div = state.last_minima.iter().sum::<f64>() / state.last_minima.len() as f64;
        }
        let sum = state.angle_sum();
        history.push(sum);
        if sum <= CM_TOLERANCE_DEGREES {
            converged = true;
            break;
        }
    }
    Ok(DemixingState {
        w: state.w_accum,
        whitener,
        iteration: state.sweep,
        last_div,
        converged,
        history,
        skipped_pairs: 0,
    })
}

/// Largest entry change `max |W2 - I|` regarded as "no update" for a pair.
pub const PAIR_CHANGE_TOLERANCE: f64 = 1e-2;

/// Whiten `x` once, then for each outer iteration run the 2 x 2 gradient
/// descent on every pair and compose the result into the demixing matrix.
///
/// A pair whose inner descent fails to meet its stopping rule is left
/// untouched and counted in `skipped_pairs`. The run is marked converged
/// when a full pass changes no pair by more than [`PAIR_CHANGE_TOLERANCE`].
pub fn run_pairwise_gradient_ica(
    x: &SignalMatrix,
    cfg: &ContrastConfig,
    opt: &OptimizerConfig,
    max_outer: usize,
) -> Result<DemixingState> {
    check_run_shape(x)?;
    let m = x.nrows();
    let whitener = fit_whitener(x)?;
    let mut xw = apply_whitener(&whitener, x)?;
    let mut w = Array2::<f64>::eye(m);
    let mut skipped = 0;
    let mut converged = false;
    let mut history = Vec::new();
    let mut last_div = f64::NAN;
    let mut outer = 0;
    while outer < max_outer {
        outer += 1;
        let mut changed = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let pair = xw.select(ndarray::Axis(0), &[i, j]);
                let problem = ContrastProblem::new(pair.view(), cfg)?;
                let out = match descend(&problem, Array2::eye(2), opt) {
                    Ok(out) if out.converged => out,
                    Ok(_) | Err(IcaError::Singular(_)) | Err(IcaError::DegenerateContrast(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                last_div = out.last_div;
                history.push(out.last_div);
                let delta = (&out.w - &Array2::<f64>::eye(2))
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                if delta > PAIR_CHANGE_TOLERANCE {
                    changed = true;
                }
                rotate_rows(&mut xw, i, j, &out.w);
                rotate_rows(&mut w, i, j, &out.w);
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(DemixingState {
        w,
        whitener,
        iteration: outer,
        last_div,
        converged,
        history,
        skipped_pairs: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::amari_error;
    use crate::preprocess::symmetric_whiten;
    use crate::signals::{gen_sources, SourceSpec};
    use std::f64::consts::PI;

    fn white_pair(t: usize, seed: u64) -> SignalMatrix {
        symmetric_whiten(&gen_sources(&[SourceSpec::uniform(), SourceSpec::uniform()], t, seed)).unwrap()
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Angle difference modulo the quarter turn that maps one solution onto another.
    fn quarter_turn_distance(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(PI / 2.0);
        d.min(PI / 2.0 - d)
    }

    #[test]
    fn rotation_matrices() {
        assert_eq!(rotation2(0.0), Array2::<f64>::eye(2));
        let h = 2f64.sqrt() / 2.0;
        assert!(max_abs(&(rotation2(PI / 4.0) - array![[h, -h], [h, h]])) <= 1e-15);
        for (a, b) in [(0.3, -1.1), (2.0, 0.7), (-0.4, -0.2)] {
            assert!(max_abs(&(rotation2(a).dot(&rotation2(b)) - rotation2(a + b))) <= 1e-12);
            assert!((crate::linalg::determinant(rotation2(a).view()) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn default_grid() {
        let g = RotationGrid::default();
        let c = g.candidates();
        assert_eq!(c.len(), 33);
        assert_eq!(c[0], -FRAC_PI_4);
        assert_eq!(c[32], FRAC_PI_4);
        let order = g.search_order();
        assert_eq!(order[0], 0.0);
        assert!(order[1] < 0.0 && order[2] > 0.0 && order[1] == -order[2]);
        assert!(RotationGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(RotationGrid::new(1.0, 0.0, 0.1).is_err());
        assert_eq!(RotationGrid::new(0.0, 1.0, 0.25).unwrap().candidates().len(), 5);
    }

    #[test]
    fn independent_pair_prefers_small_angles() {
        let x = white_pair(1000, 1);
        let (theta, d) = best_pair_rotation(x.view(), &RotationGrid::default(), &ContrastConfig::default()).unwrap();
        assert!(theta.abs() <= PI / 64.0 + 1e-12, "{theta}");
        let at_zero = pairwise_contrast(x.view(), &Array2::eye(2), &ContrastConfig::default()).unwrap();
        assert!(d <= at_zero);
    }

    #[test]
    fn quarter_turn_gives_the_same_contrast() {
        let x = white_pair(300, 2);
        let cfg = ContrastConfig::default();
        for theta in [-0.6, -0.1, 0.25, 0.7] {
            let a = pairwise_contrast(x.view(), &rotation2(theta), &cfg).unwrap();
            let b = pairwise_contrast(x.view(), &rotation2(theta + PI / 2.0), &cfg).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn constant_channel_is_degenerate() {
        let mut x = white_pair(100, 3);
        x.row_mut(1).fill(0.5);
        let cfg = ContrastConfig::default();
        assert!(matches!(pairwise_contrast(x.view(), &Array2::eye(2), &cfg), Err(IcaError::DegenerateContrast(_))));
        assert!(pairwise_contrast(x.view(), &Array2::eye(3), &cfg).is_err());
    }

    #[test]
    fn one_sweep_undoes_a_grid_rotation() {
        let grid = RotationGrid::default();
        let cfg = ContrastConfig::default();
        for (k, seed) in [(-12i32, 4u64), (-5, 5), (3, 6), (9, 7), (15, 8)] {
            let theta = k as f64 * grid.step;
            let mut x = rotation2(theta).dot(&white_pair(1000, seed));
            let mut state = SweepState::new(2);
            jacobi_sweep(&mut x, &mut state, &grid, &cfg).unwrap();
            let found = state.cm[[0, 1]].to_radians();
            assert!(quarter_turn_distance(found, -theta) <= grid.step + 1e-12, "theta {theta}, found {found}");
        }
    }

    #[test]
    fn sweep_bookkeeping() {
        let specs = vec![SourceSpec::uniform(); 4];
        let s = gen_sources(&specs, 400, 9);
        let mixed = rotation2(0.3).dot(&symmetric_whiten(&s).unwrap().select(ndarray::Axis(0), &[0, 1]));
        let mut x = symmetric_whiten(&s).unwrap();
        x.slice_mut(ndarray::s![0..2, ..]).assign(&mixed);
        let mut state = SweepState::new(4);
        let grid = RotationGrid::default();
        let cfg = ContrastConfig::default().stride(4);
        for _ in 0..3 {
            jacobi_sweep(&mut x, &mut state, &grid, &cfg).unwrap();
            assert!(state.pairs_last_sweep <= 6);
            assert!(max_abs(&(state.w_accum.dot(&state.w_accum.t()) - Array2::<f64>::eye(4))) <= 1e-8);
            assert_eq!(state.cm, state.cm.t());
            assert!(state.cm.iter().all(|v| v.abs() <= 45.0));
            assert!(state.cm.diag().iter().all(|v| *v == 0.0));
        }
        assert_eq!(state.sweep, 3);
        let mut fresh = SweepState::new(4);
        jacobi_sweep(&mut x, &mut fresh, &grid, &cfg).unwrap();
        assert_eq!(fresh.pairs_last_sweep, 6);
        assert_eq!(fresh.last_minima.len(), 6);
    }

    #[test]
    fn zero_entries_are_skipped() {
        let mut x = white_pair(200, 10);
        let before = x.clone();
        let mut state = SweepState::new(2);
        state.cm.fill(0.0);
        jacobi_sweep(&mut x, &mut state, &RotationGrid::default(), &ContrastConfig::default()).unwrap();
        assert_eq!(state.pairs_last_sweep, 0);
        assert_eq!(x, before);
        assert!(jacobi_sweep(&mut x, &mut SweepState::new(3), &RotationGrid::default(), &ContrastConfig::default()).is_err());
    }

    #[test]
    fn selected_angle_is_the_grid_minimum() {
        let x = rotation2(0.4).dot(&white_pair(300, 11));
        let grid = RotationGrid::default();
        let cfg = ContrastConfig::default();
        let (theta, d) = best_pair_rotation(x.view(), &grid, &cfg).unwrap();
        for c in grid.candidates() {
            assert!(pairwise_contrast(x.view(), &rotation2(c), &cfg).unwrap() >= d);
        }
        assert_eq!(pairwise_contrast(x.view(), &rotation2(theta), &cfg).unwrap(), d);
    }

    #[test]
    fn jacobi_on_an_identity_mixture() {
        // PCA whitening of equal-variance sources rotates by 45 degrees,
        // which lands on the grid edge; allow one grid step.
        let limit = (PI / 64.0).tan() * 100.0 + 1e-6;
        for seed in 12..15u64 {
            let s = gen_sources(&[SourceSpec::uniform(), SourceSpec::uniform()], 1000, seed);
            let st = run_jacobi_ica(&s, &RotationGrid::default(), &ContrastConfig::default().stride(2), 1).unwrap();
            let a = amari_error(&st.total_demixing(), &Array2::eye(2)).unwrap();
            assert!(a.value_x100 <= limit, "{}", a.value_x100);
            assert_eq!(st.history.len(), 1);
        }
    }

    #[test]
    fn pairwise_gradient_converges_on_mixed_sources() {
        use crate::signals::{gen_mixing, mix, SourceKind};
        let specs = [SourceSpec::new(SourceKind::Laplacian), SourceSpec::new(SourceKind::Lognormal)];
        let s = gen_sources(&specs, 1000, 13);
        let a = gen_mixing(2, 14);
        let x = mix(&a, &s, 0).unwrap();
        let st = run_pairwise_gradient_ica(&x, &ContrastConfig::default(), &OptimizerConfig::default(), 10).unwrap();
        assert!(st.converged);
        assert_eq!(st.skipped_pairs, 0);
        let amari = amari_error(&st.total_demixing(), &a.a).unwrap().value_x100;
        assert!(amari <= 5.0, "{amari}");
    }

    #[test]
    fn run_shape_errors() {
        let one = Array2::from_shape_fn((1, 20), |(_, t)| t as f64);
        assert!(run_jacobi_ica(&one, &RotationGrid::default(), &ContrastConfig::default(), 3).is_err());
        assert!(run_pairwise_gradient_ica(&one, &ContrastConfig::default(), &OptimizerConfig::default(), 3).is_err());
    }
}
