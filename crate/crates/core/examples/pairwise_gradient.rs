//! Gradient descent applied pair by pair, compared with the Jacobi scheme.
//!
//! Run with `cargo run --release --example pairwise_gradient`.

use ccs_ica::prelude::*;

fn main() -> Result<()> {
    let specs = [SourceSpec::uniform(), SourceSpec::laplacian(), SourceSpec::lognormal()];
    let cfg = ContrastConfig::default().stride(2);
    for seed in 0..3u64 {
        let s = gen_sources(&specs, 1000, seed);
        let mixing = gen_mixing(3, seed + 50);
        let x = mix(&mixing, &s, 0)?;

        let pg = run_pairwise_gradient_ica(&x, &cfg, &OptimizerConfig::default(), 10)?;
        let jac = run_jacobi_ica(&x, &RotationGrid::default(), &cfg, 20)?;
        println!(
            "seed {seed}: pairwise gradient {:.2} ({} passes, {} skipped), jacobi {:.2} ({} sweeps)",
            amari_error(&pg.total_demixing(), &mixing.a)?.value_x100,
            pg.iteration,
            pg.skipped_pairs,
            amari_error(&jac.total_demixing(), &mixing.a)?.value_x100,
            jac.iteration
        );
    }
    Ok(())
}
