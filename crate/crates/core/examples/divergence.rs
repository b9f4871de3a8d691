//! CCS-DIV between two discrete densities, across the convexity parameter.
//!
//! Run with `cargo run --example divergence`.

use ccs_ica::divergence::{ccs_div, convex_f, ConvexityParam, DensityPair};

fn main() -> ccs_ica::Result<()> {
    // a joint density and the product of its marginals on a 3 x 3 grid
    let joint = [0.20, 0.05, 0.05, 0.05, 0.20, 0.05, 0.05, 0.05, 0.30];
    let px = [0.30, 0.30, 0.40];
    let product: Vec<f64> = px.iter().flat_map(|a| px.iter().map(move |b| a * b)).collect();

    let dependent = DensityPair::new(joint.to_vec(), product.clone())?;
    let independent = DensityPair::new(product.clone(), product)?;

    println!("{:>10} {:>12} {:>12} {:>10}", "alpha", "dependent", "independent", "f(0)");
    for alpha in [-1.0, -0.99999, -0.5, 0.0, 0.5, 1.0] {
        let a = ConvexityParam::new(alpha)?;
        println!(
            "{alpha:>10} {:>12.6} {:>12.2e} {:>10.4}",
            ccs_div(&dependent, a)?,
            ccs_div(&independent, a)?,
            if alpha == -1.0 { f64::INFINITY } else { convex_f(0.0, a)? },
        );
    }
    Ok(())
}
