//! The `ccs-ica` command line: `gen`, `separate` and `bench`.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 when the command itself
//! fails (unreadable input, singular data, ...).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{
    dataset_rows, emit_figure, emit_table, read_dataset, read_sidecar, run_benchmark, separate,
    sidecar_path, trial_data, write_dataset, write_sidecar, Algorithm, DatasetMeta, RunConfig,
};
use crate::divergence::ConvexityParam;
use crate::ica::{OptimizerConfig, StepRule};
use crate::metrics::amari_error;
use crate::preprocess::{apply_whitener, Whitener};
use crate::signals::{derive_seed, SourceSpec, MIXING_STREAM, NOISE_STREAM};
use crate::{IcaError, Result};

#[derive(Debug, Parser)]
#[command(name = "ccs-ica", version, about = "Non-parametric ICA with the convex Cauchy-Schwarz divergence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw sources, mix them and write the mixture as CSV.
    Gen(GenArgs),
    /// Separate a mixture CSV and write the estimated sources.
    Separate(SeparateArgs),
    /// Run a Monte-Carlo batch from a JSON config.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Comma-separated source families: uniform, rayleigh, laplacian, lognormal (or s1..s4).
    #[arg(long, default_value = "uniform,uniform")]
    spec: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Mixture CSV. Sources go to `<stem>_sources.csv`, ground truth to `<stem>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SeparateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "jacobi", value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, default_value_t = ConvexityParam::DEFAULT_ALPHA, allow_hyphen_values = true)]
    alpha: f64,
    /// Sampling stride of the contrast.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().gamma)]
    gamma: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().epsilon)]
    epsilon: f64,
    /// Use the plain fixed step instead of the normalised adaptive one.
    #[arg(long)]
    fixed_step: bool,
    #[arg(long, default_value_t = OptimizerConfig::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value_t = 20)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 10)]
    max_outer: usize,
    /// Estimated sources CSV. The demixing matrix goes to `<stem>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON file with `RunConfig` fields; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Aggregated results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Bar chart of the mean Amari error.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Per-trial records CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, value_parser = parse_algorithm)]
    algo: Option<Algorithm>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stride: Option<usize>,
    /// Leave the wall-time column out so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: IcaError| e.to_string())
}

/// Parse `argv` (including the program name) and run the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => run_gen(&a),
        Command::Separate(a) => run_separate(&a),
        Command::Bench(a) => run_bench(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let plan = SourceSpec::parse_list(&a.spec)?;
    let cfg = RunConfig {
        dims: plan.len(),
        samples: a.samples,
        trials: 1,
        master_seed: a.seed,
        source_plan: plan.clone(),
        noise_std: a.noise,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let data = trial_data(&cfg, 0)?;
    write_dataset(&a.out, &data.x)?;
    write_dataset(&with_suffix(&a.out, "_sources"), &data.sources)?;
    let meta = DatasetMeta {
        mixing: dataset_rows(&data.mixing.a),
        seed: a.seed,
        source_seed: data.seed,
        mixing_seed: derive_seed(data.seed, MIXING_STREAM),
        noise_seed: derive_seed(data.seed, NOISE_STREAM),
        noise_std: a.noise,
        samples: a.samples,
        source_plan: plan,
    };
    write_sidecar(&sidecar_path(&a.out), &meta)
}

#[derive(Debug, Serialize)]
struct SeparationMeta {
    algorithm: Algorithm,
    alpha: f64,
    t_s: usize,
    converged: bool,
    /// Row-major map from raw observations to estimated sources.
    demixing: Vec<Vec<f64>>,
    /// Present when the input came with a ground-truth sidecar.
    amari_x100: Option<f64>,
}

fn run_separate(a: &SeparateArgs) -> Result<()> {
    let x = read_dataset(&a.input)?;
    let cfg = RunConfig {
        algorithm: a.algo,
        alpha: a.alpha,
        gamma: a.gamma,
        epsilon: a.epsilon,
        t_s: Some(a.stride),
        dims: x.nrows(),
        samples: x.ncols(),
        trials: 1,
        step_rule: if a.fixed_step { StepRule::Fixed } else { StepRule::Normalized },
        max_iter: a.max_iter,
        max_sweeps: a.max_sweeps,
        max_outer: a.max_outer,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let (w, converged, _) = separate(&cfg, &x)?;
    // W V (x - mean): centre with the sample mean, as the whitener does
    let mean = Whitener::identity(
        x.mean_axis(ndarray::Axis(1)).expect("validated non-empty"),
    );
    let y = w.dot(&apply_whitener(&mean, &x)?);
    write_dataset(&a.out, &y)?;
    let truth = sidecar_path(&a.input);
    let amari_x100 = if truth.exists() {
        let mixing = read_sidecar(&truth)?.mixing_matrix()?;
        Some(amari_error(&w, &mixing)?.value_x100)
    } else {
        None
    };
    let meta = SeparationMeta {
        algorithm: a.algo,
        alpha: a.alpha,
        t_s: a.stride,
        converged,
        demixing: dataset_rows(&w),
        amari_x100,
    };
    write_sidecar(&sidecar_path(&a.out), &meta)
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_json(&fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.algo {
        cfg.algorithm = v;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.stride {
        cfg.t_s = Some(v);
    }
    if a.no_timing {
        cfg.timing = false;
    }
    let records = run_benchmark(&cfg)?;
    fs::write(&a.out, emit_table(&records, cfg.timing)?)?;
    if let Some(p) = &a.svg {
        fs::write(p, emit_figure(&records)?)?;
    }
    if let Some(p) = &a.records {
        let mut w = csv::Writer::from_path(p)?;
        for r in &records {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!("trial {} failed: {}", r.trial_index, r.error.as_deref().unwrap_or(""));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(cli_main(["ccs-ica"]), 1);
        assert_eq!(cli_main(["ccs-ica", "frobnicate"]), 1);
        assert_eq!(cli_main(["ccs-ica", "gen", "--bogus"]), 1);
        assert_eq!(cli_main(["ccs-ica", "separate", "--in", "x.csv", "--algo", "fastica", "--out", "y.csv"]), 1);
        assert_eq!(cli_main(["ccs-ica", "--help"]), 0);
    }

    #[test]
    fn runtime_errors_exit_with_two() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("missing.csv");
        let out = dir.path().join("out.csv");
        let args = ["ccs-ica", "separate", "--in", missing.to_str().unwrap(), "--out", out.to_str().unwrap()];
        assert_eq!(cli_main(args), 2);
        let gen = ["ccs-ica", "gen", "--spec", "uniform,cauchy", "--out", out.to_str().unwrap()];
        assert_eq!(cli_main(gen), 2);
    }

    #[test]
    fn suffixed_paths() {
        assert_eq!(with_suffix(Path::new("/a/mix.csv"), "_sources"), PathBuf::from("/a/mix_sources.csv"));
        assert_eq!(with_suffix(Path::new("mix"), "_s"), PathBuf::from("mix_s"));
    }
}
