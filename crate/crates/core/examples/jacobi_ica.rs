//! Pairwise Jacobi rotations chosen by grid search.
//!
//! Run with `cargo run --release --example jacobi_ica`.

use ccs_ica::prelude::*;

fn main() -> Result<()> {
    let specs = [SourceSpec::uniform(), SourceSpec::laplacian(), SourceSpec::rayleigh(), SourceSpec::lognormal()];
    let s = gen_sources(&specs, 1000, 21);
    let mixing = gen_mixing(4, 22);
    let x = mix(&mixing, &s, 0)?;

    for stride in [10, 2] {
        let cfg = ContrastConfig::default().stride(stride);
        let start = std::time::Instant::now();
        let state = run_jacobi_ica(&x, &RotationGrid::default(), &cfg, 20)?;
        let amari = amari_error(&state.total_demixing(), &mixing.a)?;
        println!(
            "stride {stride:>2}: {} sweeps, angle sums {:.2?}, Amari x100 {:.2}, {:.2}s",
            state.iteration,
            state.history,
            amari.value_x100,
            start.elapsed().as_secs_f64()
        );
    }

    // a single sweep by hand on whitened data
    let (_, mut z) = whiten(&x)?;
    let mut sweep = SweepState::new(4);
    jacobi_sweep(&mut z, &mut sweep, &RotationGrid::default(), &ContrastConfig::default().stride(10))?;
    println!("angles of the first sweep (degrees):\n{:.2}", sweep.cm);
    Ok(())
}
