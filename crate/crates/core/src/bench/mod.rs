//! Monte-Carlo harness: seeded trials, aggregation tables and bar charts.
//!
//! A [`RunConfig`] describes one batch. Trial `k` draws its own seed
//! `derive_seed(master_seed, k)`; sources, mixing matrix and noise are all
//! derived from it, so a batch is a pure function of its configuration no
//! matter how trials are scheduled across threads.

mod dataset;
mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::ConvexityParam;
use crate::ica::{run_gradient_ica, ContrastConfig, OptimizerConfig, StepRule};
use crate::metrics::amari_error;
use crate::pairwise::{run_jacobi_ica, run_pairwise_gradient_ica, RotationGrid};
use crate::signals::{
    derive_seed, gen_mixing, gen_sources, mix, MixingModel, SourceSpec, MIXING_STREAM, NOISE_STREAM,
};
use crate::{IcaError, Result, SignalMatrix};

pub use dataset::{matrix_to_rows as dataset_rows, read_dataset, read_sidecar, sidecar_path, write_dataset, write_sidecar, DatasetMeta};
pub use report::{emit_figure, emit_table, group_records, GroupKey, GroupSummary};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CCS_ICA_THREADS";

/// The three separation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Full-matrix gradient descent.
    Gradient,
    /// Gradient descent on one pair of channels at a time.
    PairwiseGradient,
    /// Grid search over planar rotations, pair by pair.
    Jacobi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Gradient, Algorithm::PairwiseGradient, Algorithm::Jacobi];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gradient => "gradient",
            Algorithm::PairwiseGradient => "pairwise_gradient",
            Algorithm::Jacobi => "jacobi",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = IcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gradient" | "alg1" => Ok(Algorithm::Gradient),
            "pairwise_gradient" | "pairwise" | "alg2" => Ok(Algorithm::PairwiseGradient),
            "jacobi" | "alg3" => Ok(Algorithm::Jacobi),
            other => Err(IcaError::InvalidArgument(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// One benchmark batch. Field names double as the JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Sampling stride. When absent: 10 for `dims >= 4`, otherwise 1.
    pub t_s: Option<usize>,
    pub grid: RotationGrid,
    pub dims: usize,
    pub samples: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// One spec per channel; empty means uniform sources on every channel.
    pub source_plan: Vec<SourceSpec>,
    pub noise_std: f64,
    pub step_rule: StepRule,
    pub max_iter: usize,
    pub max_sweeps: usize,
    pub max_outer: usize,
    /// Include mean wall time in the table. Off gives byte-stable output.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        Self {
            algorithm: Algorithm::Jacobi,
            alpha: ConvexityParam::DEFAULT_ALPHA,
            gamma: opt.gamma,
            epsilon: opt.epsilon,
            t_s: None,
            grid: RotationGrid::default(),
            dims: 2,
            samples: 1000,
            trials: 20,
            master_seed: 0,
            source_plan: Vec::new(),
            noise_std: 0.0,
            step_rule: opt.step_rule,
            max_iter: opt.max_iter,
            max_sweeps: 20,
            max_outer: 10,
            timing: true,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn stride(&self) -> usize {
        self.t_s.unwrap_or(if self.dims >= 4 { 10 } else { 1 })
    }

    pub fn sources(&self) -> Vec<SourceSpec> {
        if self.source_plan.is_empty() {
            vec![SourceSpec::uniform(); self.dims]
        } else {
            self.source_plan.clone()
        }
    }

    pub fn contrast_config(&self) -> Result<ContrastConfig> {
        Ok(ContrastConfig::with_alpha(self.alpha)?.stride(self.stride()))
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            gamma: self.gamma,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            step_rule: self.step_rule,
            ..OptimizerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(IcaError::InvalidArgument(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims < 2 {
            return bad(format!("dims must be at least 2, got {}", self.dims));
        }
        if self.samples <= self.dims {
            return bad(format!("samples ({}) must exceed dims ({})", self.samples, self.dims));
        }
        if !self.source_plan.is_empty() && self.source_plan.len() != self.dims {
            return bad(format!(
                "source_plan lists {} sources for {} dims",
                self.source_plan.len(),
                self.dims
            ));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be non-negative, got {}", self.noise_std));
        }
        for spec in &self.source_plan {
            spec.validate()?;
        }
        self.grid.validate()?;
        self.contrast_config()?.validate()?;
        self.optimizer_config().validate()
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub amari_x100: f64,
    pub wall_seconds: f64,
    pub converged: bool,
    pub algorithm: Algorithm,
    pub dims: usize,
    pub samples: usize,
    pub t_s: usize,
    /// Set when the algorithm returned an error; the score is then that of
    /// the unseparated mixture.
    pub error: Option<String>,
}

/// Everything drawn for one trial.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub seed: u64,
    pub sources: SignalMatrix,
    pub mixing: MixingModel,
    pub x: SignalMatrix,
}

/// Sources, mixing and mixture of trial `index`.
pub fn trial_data(cfg: &RunConfig, index: usize) -> Result<TrialData> {
    let seed = derive_seed(cfg.master_seed, index as u64);
    let sources = gen_sources(&cfg.sources(), cfg.samples, seed);
    let mixing = gen_mixing(cfg.dims, derive_seed(seed, MIXING_STREAM)).with_noise(cfg.noise_std);
    let x = mix(&mixing, &sources, derive_seed(seed, NOISE_STREAM))?;
    Ok(TrialData { seed, sources, mixing, x })
}

/// Total demixing map on raw data, its convergence flag and the time spent.
pub fn separate(cfg: &RunConfig, x: &SignalMatrix) -> Result<(Array2<f64>, bool, f64)> {
    let contrast = cfg.contrast_config()?;
    let start = Instant::now();
    let state = match cfg.algorithm {
        Algorithm::Gradient => run_gradient_ica(x, &contrast, &cfg.optimizer_config()),
        Algorithm::PairwiseGradient => {
            run_pairwise_gradient_ica(x, &contrast, &cfg.optimizer_config(), cfg.max_outer)
        }
        Algorithm::Jacobi => run_jacobi_ica(x, &cfg.grid, &contrast, cfg.max_sweeps),
    }?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok((state.total_demixing(), state.converged, elapsed))
}

/// Run trial `index` and score it against the true mixing matrix.
pub fn run_trial(cfg: &RunConfig, index: usize) -> Result<TrialRecord> {
    let data = trial_data(cfg, index)?;
    let mut record = TrialRecord {
        trial_index: index,
        seed: data.seed,
        amari_x100: 0.0,
        wall_seconds: 0.0,
        converged: false,
        algorithm: cfg.algorithm,
        dims: cfg.dims,
        samples: cfg.samples,
        t_s: cfg.stride(),
        error: None,
    };
    let w = match separate(cfg, &data.x) {
        Ok((w, converged, secs)) => {
            record.converged = converged;
            record.wall_seconds = secs;
            w
        }
        Err(e) => {
            record.error = Some(e.to_string());
            Array2::eye(cfg.dims)
        }
    };
    record.amari_x100 = amari_error(&w, &data.mixing.a)?.value_x100;
    Ok(record)
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// All trials of `cfg`, ordered by trial index.
///
/// Trials run on a worker pool whose size is capped by `CCS_ICA_THREADS`.
/// A failing algorithm is recorded in its trial and never aborts the batch.
pub fn run_benchmark(cfg: &RunConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| IcaError::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let mut records = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|k| run_trial(cfg, k))
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|r| r.trial_index);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algorithm: Algorithm) -> RunConfig {
        RunConfig {
            algorithm,
            samples: 200,
            trials: 3,
            master_seed: 42,
            t_s: Some(2),
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            source_plan: vec![SourceSpec::uniform(), SourceSpec::laplacian()],
            ..small(Algorithm::PairwiseGradient)
        };
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = RunConfig::from_json(r#"{"algorithm": "jacobi", "dims": 4, "samples": 500}"#).unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.stride(), 10);
        assert_eq!(cfg.alpha, -0.99999);
        assert_eq!(cfg.gamma, 0.3);
        assert_eq!(cfg.sources().len(), 4);
        assert_eq!(RunConfig::default().stride(), 1);
    }

    #[test]
    fn invalid_configs() {
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        for cfg in [
            RunConfig { trials: 0, ..RunConfig::default() },
            RunConfig { dims: 1, ..RunConfig::default() },
            RunConfig { samples: 2, ..RunConfig::default() },
            RunConfig { t_s: Some(0), ..RunConfig::default() },
            RunConfig { gamma: -1.0, ..RunConfig::default() },
            RunConfig { source_plan: vec![SourceSpec::uniform()], ..RunConfig::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
        assert!("fastica".parse::<Algorithm>().is_err());
    }

    #[test]
    fn trials_are_seeded_independently() {
        let cfg = small(Algorithm::Jacobi);
        let a = trial_data(&cfg, 0).unwrap();
        let b = trial_data(&cfg, 1).unwrap();
        assert_ne!(a.seed, b.seed);
        assert_ne!(a.x, b.x);
        assert_eq!(trial_data(&cfg, 1).unwrap().x, b.x);
    }

    #[test]
    fn benchmark_is_deterministic() {
        for algorithm in Algorithm::ALL {
            let cfg = small(algorithm);
            let strip = |mut v: Vec<TrialRecord>| {
                v.iter_mut().for_each(|r| r.wall_seconds = 0.0);
                v
            };
            let a = strip(run_benchmark(&cfg).unwrap());
            let b = strip(run_benchmark(&cfg).unwrap());
            assert_eq!(a, b);
            assert_eq!(a.len(), 3);
            assert!(a.iter().enumerate().all(|(k, r)| r.trial_index == k && r.amari_x100 >= 0.0));
        }
    }

    #[test]
    fn failed_trial_is_recorded_not_raised() {
        // a stride longer than the signal leaves a single kernel anchor
        let cfg = RunConfig { t_s: Some(500), ..small(Algorithm::Jacobi) };
        let records = run_benchmark(&cfg).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.error.is_some() && !r.converged);
            assert!(r.amari_x100 > 0.0);
        }
    }
}
