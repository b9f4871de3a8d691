//! Synthetic sources, random mixing matrices, and the mixing model
//! `x = A s + v`.
//!
//! All generators are pure functions of their arguments and a `u64` seed.
//! Seeds for sub-streams are derived with [`derive_seed`]:
//!
//! - trial `k` of a batch with master seed `s`: `derive_seed(s, k)`
//! - channel `c` of a trial seeded `t`: `derive_seed(t, c)`
//! - its mixing matrix: `derive_seed(t, MIXING_STREAM)`
//! - its additive noise: `derive_seed(t, NOISE_STREAM)`
//!
//! Random numbers come from ChaCha8, which is stable across platforms and
//! crate releases.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::condition_number;
use crate::{IcaError, Result, SignalMatrix};

/// Stream index reserved for the mixing matrix of a trial.
pub const MIXING_STREAM: u64 = u64::MAX;
/// Stream index reserved for the additive noise of a trial.
pub const NOISE_STREAM: u64 = u64::MAX - 1;
/// Mixing matrices with a larger condition number are redrawn.
pub const MAX_CONDITION: f64 = 1e3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` under `parent` (SplitMix64 finaliser applied twice).
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// Uniform on `(-tau1, tau1)`; sub-Gaussian, excess kurtosis `-1.2`.
    Uniform,
    /// Density `s exp(-s^2 / 2)` on `s > 0`.
    Rayleigh,
    /// Density `exp(-|s| / tau2) / (2 tau2)`; excess kurtosis `3`.
    Laplacian,
    /// `exp(z)` with `z` standard normal.
    Lognormal,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [
        SourceKind::Uniform,
        SourceKind::Rayleigh,
        SourceKind::Laplacian,
        SourceKind::Lognormal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SourceKind::Uniform => "uniform",
            SourceKind::Rayleigh => "rayleigh",
            SourceKind::Laplacian => "laplacian",
            SourceKind::Lognormal => "lognormal",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceKind {
    type Err = IcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "s1" => Ok(SourceKind::Uniform),
            "rayleigh" | "s2" => Ok(SourceKind::Rayleigh),
            "laplacian" | "laplace" | "s3" => Ok(SourceKind::Laplacian),
            "lognormal" | "s4" => Ok(SourceKind::Lognormal),
            other => Err(IcaError::InvalidArgument(format!("unknown source kind '{other}'"))),
        }
    }
}

fn default_tau1() -> f64 {
    3.0
}
fn default_tau2() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

/// One synthetic source family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    #[serde(default = "default_tau1")]
    pub tau1: f64,
    #[serde(default = "default_tau2")]
    pub tau2: f64,
    /// Shift and scale the drawn samples to zero mean and unit variance.
    #[serde(default = "default_true")]
    pub standardize: bool,
}

impl SourceSpec {
    pub fn new(kind: SourceKind) -> Self {
        Self {
            kind,
            tau1: default_tau1(),
            tau2: default_tau2(),
            standardize: true,
        }
    }

    pub fn uniform() -> Self {
        Self::new(SourceKind::Uniform)
    }
    pub fn rayleigh() -> Self {
        Self::new(SourceKind::Rayleigh)
    }
    pub fn laplacian() -> Self {
        Self::new(SourceKind::Laplacian)
    }
    pub fn lognormal() -> Self {
        Self::new(SourceKind::Lognormal)
    }

    pub fn raw(mut self) -> Self {
        self.standardize = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau2 > 0.0) {
            return Err(IcaError::InvalidArgument(format!(
                "tau1 and tau2 must be positive (got {}, {})",
                self.tau1, self.tau2
            )));
        }
        Ok(())
    }

    /// Parse a comma-separated list such as `uniform,laplacian,s4`.
    pub fn parse_list(s: &str) -> Result<Vec<SourceSpec>> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.parse::<SourceKind>().map(SourceSpec::new))
            .collect()
    }
}

fn draw(kind: SourceKind, tau1: f64, tau2: f64, rng: &mut ChaCha8Rng) -> f64 {
    match kind {
        SourceKind::Uniform => rng.random_range(-tau1..tau1),
        SourceKind::Rayleigh => {
            let u: f64 = rng.random();
            (-2.0 * (1.0 - u).ln()).sqrt()
        }
        SourceKind::Laplacian => {
            // inverse CDF on u in (-1/2, 1/2)
            let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
            -tau2 * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
        SourceKind::Lognormal => {
            let z: f64 = rng.sample(StandardNormal);
            z.exp()
        }
    }
}

/// `t_count` i.i.d. samples of `spec`.
pub fn gen_source(spec: &SourceSpec, t_count: usize, seed: u64) -> Array1<f64> {
    let mut rng = rng_from(seed);
    let mut s: Array1<f64> = (0..t_count)
        .map(|_| draw(spec.kind, spec.tau1, spec.tau2, &mut rng))
        .collect();
    if spec.standardize && t_count > 1 {
        let mean = s.mean().unwrap_or(0.0);
        s -= mean;
        let sd = (s.dot(&s) / t_count as f64).sqrt();
        if sd > 0.0 {
            s /= sd;
        }
    }
    s
}

/// One row per spec; channel `c` is seeded with `derive_seed(seed, c)`.
pub fn gen_sources(specs: &[SourceSpec], t_count: usize, seed: u64) -> SignalMatrix {
    let mut out = Array2::zeros((specs.len(), t_count));
    for (c, spec) in specs.iter().enumerate() {
        out.row_mut(c).assign(&gen_source(spec, t_count, derive_seed(seed, c as u64)));
    }
    out
}

/// Mixing matrix `A` and additive noise level of `x = A s + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingModel {
    pub a: Array2<f64>,
    pub noise_std: f64,
}

impl MixingModel {
    pub fn new(a: Array2<f64>) -> Self {
        Self { a, noise_std: 0.0 }
    }

    pub fn identity(m: usize) -> Self {
        Self::new(Array2::eye(m))
    }

    pub fn with_noise(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn dims(&self) -> usize {
        self.a.nrows()
    }
}

/// Random `m x m` mixing matrix with i.i.d. entries uniform on `(-1, 1)`,
/// redrawn until its condition number is at most [`MAX_CONDITION`].
///
/// # Panics
///
/// If `m == 0`.
pub fn gen_mixing(m: usize, seed: u64) -> MixingModel {
    assert!(m > 0, "mixing matrix needs at least one dimension");
    let mut rng = rng_from(seed);
    loop {
        let a = Array2::from_shape_fn((m, m), |_| rng.random_range(-1.0..1.0));
        if condition_number(a.view()) <= MAX_CONDITION {
            return MixingModel::new(a);
        }
    }
}

/// `A s` plus Gaussian noise of standard deviation `noise_std` drawn from `seed`.
pub fn mix(model: &MixingModel, s: &SignalMatrix, seed: u64) -> Result<SignalMatrix> {
    if model.a.ncols() != s.nrows() {
        return Err(IcaError::DimensionMismatch(format!(
            "mixing matrix is {:?}, sources have {} channels",
            model.a.dim(),
            s.nrows()
        )));
    }
    let mut x = model.a.dot(s);
    if model.noise_std > 0.0 {
        let mut rng = rng_from(seed);
        x.mapv_inplace(|v| v + model.noise_std * rng.sample::<f64, _>(StandardNormal));
    }
    Ok(x)
}
