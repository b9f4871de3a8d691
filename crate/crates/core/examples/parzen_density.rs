//! Gaussian Parzen estimates of a univariate and a bivariate density.
//!
//! Run with `cargo run --example parzen_density`.

use ccs_ica::density::ParzenModel;
use ccs_ica::prelude::*;

fn main() -> Result<()> {
    let s = gen_sources(&[SourceSpec::laplacian(), SourceSpec::uniform()], 2000, 3);

    for stride in [1, 10] {
        let model = ParzenModel::new(s.view(), stride, None)?;
        println!(
            "stride {stride:>2}: {} anchors, bandwidth {:.4}",
            model.anchor_count(),
            model.bandwidth().h
        );
        println!("{:>6} {:>12} {:>12} {:>12}", "y", "laplacian", "d/dy", "uniform");
        for y in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
            println!(
                "{y:>6.1} {:>12.5} {:>12.5} {:>12.5}",
                model.pdf_uni(0, y)?,
                model.pdf_uni_deriv(0, y)?,
                model.pdf_uni(1, y)?
            );
        }
        // joint density integrated on a coarse grid
        let (lo, hi, n) = (-8.0, 8.0, 161);
        let dx = (hi - lo) / (n - 1) as f64;
        let mut mass = 0.0;
        for i in 0..n {
            for j in 0..n {
                mass += model.pdf_multi(&[lo + i as f64 * dx, lo + j as f64 * dx])?;
            }
        }
        println!("bivariate mass on [-8, 8]^2: {:.4}\n", mass * dx * dx);
    }
    Ok(())
}
