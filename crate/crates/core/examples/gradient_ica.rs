//! Full-matrix gradient descent on the contrast.
//!
//! Run with `cargo run --release --example gradient_ica`.

use ccs_ica::prelude::*;

fn main() -> Result<()> {
    let s = gen_sources(&[SourceSpec::laplacian(), SourceSpec::lognormal()], 1000, 5);
    let mixing = gen_mixing(2, 6);
    let x = mix(&mixing, &s, 0)?;

    for rule in [StepRule::Normalized, StepRule::Fixed] {
        let opt = OptimizerConfig { step_rule: rule, ..OptimizerConfig::default() };
        let state = run_gradient_ica(&x, &ContrastConfig::default(), &opt)?;
        let amari = amari_error(&state.total_demixing(), &mixing.a)?;
        println!(
            "{rule:?}: {} iterations, converged {}, contrast {:.5} -> {:.5}, Amari x100 {:.2}",
            state.iteration,
            state.converged,
            state.history[0],
            state.last_div,
            amari.value_x100
        );
    }

    // the analytic gradient at the starting point
    let (_, z) = whiten(&x)?;
    let g = eval_gradient(&z, &ndarray::Array2::eye(2), &ContrastConfig::default())?;
    println!("gradient at W = I:\n{g:.5}");
    Ok(())
}
