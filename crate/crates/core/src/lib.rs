//! Non-parametric independent component analysis driven by the convex
//! Cauchy-Schwarz divergence (CCS-DIV).
//!
//! The crate is organised bottom-up:
//!
//! - [`divergence`]: the convex function `f`, its derivative, and the
//!   sample-level CCS-DIV contrast.
//! - [`density`]: Gaussian Parzen-window estimators and the bandwidth rule.
//! - [`preprocess`]: centering and whitening.
//! - [`ica`]: full-matrix gradient-descent ICA with the analytic gradient.
//! - [`pairwise`]: pairwise gradient and pairwise Jacobi grid-search schemes
//!   for more than two sources.
//! - [`signals`]: synthetic sources and random mixing.
//! - [`metrics`]: Amari error and excess kurtosis.
//! - [`bench`]: Monte-Carlo harness, CSV tables and SVG figures.
//! - [`cli`]: the `gen` / `separate` / `bench` command line.
//!
//! Signals are stored as `M x T` matrices: one row per channel, one column
//! per time sample.
//!
//! ```no_run
//! use ccs_ica::prelude::*;
//!
//! # fn main() -> ccs_ica::Result<()> {
//! let sources = gen_sources(&[SourceSpec::uniform(), SourceSpec::uniform()], 1000, 7);
//! let mixing = gen_mixing(2, 7);
//! let x = mix(&mixing, &sources, 7)?;
//!
//! let cfg = ContrastConfig::default();
//! let state = run_jacobi_ica(&x, &RotationGrid::default(), &cfg, 20)?;
//! let score = amari_error(&state.total_demixing(), &mixing.a)?;
//! println!("Amari x100 = {:.2}", score.value_x100);
//! # Ok(())
//! # }
//! ```

pub mod bench;
pub mod cli;
pub mod density;
pub mod divergence;
mod error;
mod linalg;
pub mod ica;
pub mod metrics;
pub mod pairwise;
pub mod preprocess;
pub mod signals;

pub use error::{IcaError, Result};

/// Row = channel, column = time sample.
pub type SignalMatrix = ndarray::Array2<f64>;

pub mod prelude {
    pub use crate::bench::{emit_figure, emit_table, run_benchmark, Algorithm, RunConfig, TrialRecord};
    pub use crate::density::{KernelBandwidth, ParzenModel};
    pub use crate::divergence::{ccs_div, ConvexityParam, DensityPair};
    pub use crate::ica::{
        eval_contrast, eval_gradient, run_gradient_ica, ContrastConfig, DemixingState,
        OptimizerConfig, StepRule,
    };
    pub use crate::metrics::{amari_error, kurtosis, AmariScore};
    pub use crate::pairwise::{
        jacobi_sweep, rotation2, run_jacobi_ica, run_pairwise_gradient_ica, RotationGrid,
        SweepState,
    };
    pub use crate::preprocess::{apply_whitener, fit_whitener, symmetric_whiten, whiten, Whitener};
    pub use crate::signals::{gen_mixing, gen_source, gen_sources, mix, MixingModel, SourceKind, SourceSpec};
    pub use crate::{IcaError, Result, SignalMatrix};
}
