//! Centering and whitening of a mixture.
//!
//! Run with `cargo run --example whitening`.

use ccs_ica::preprocess::covariance;
use ccs_ica::prelude::*;

fn main() -> Result<()> {
    let s = gen_sources(&[SourceSpec::uniform(), SourceSpec::rayleigh(), SourceSpec::lognormal()], 5000, 11);
    let mixing = gen_mixing(3, 12);
    let x = mix(&mixing, &s, 0)? * 4.0 + 10.0;

    println!("covariance of the mixture:\n{:.3}", covariance(&x));
    let (w, z) = whiten(&x)?;
    println!("eigenvalues: {:.4}", w.eigvals);
    println!("whitening matrix V:\n{:.4}", w.v);
    println!("covariance after whitening:\n{:.2e}", covariance(&z));
    println!("means after whitening: {:.2e}", z.mean_axis(ndarray::Axis(1)).unwrap());
    Ok(())
}
