//! Amari error of a few global systems and the kurtosis of each source family.
//!
//! Run with `cargo run --example metrics`.

use ccs_ica::prelude::*;
use ndarray::array;

fn main() -> Result<()> {
    let a = array![[1.0, 0.0], [0.0, 1.0]];
    let cases = [
        ("identity", array![[1.0, 0.0], [0.0, 1.0]]),
        ("scaled permutation", array![[0.0, -3.0], [0.5, 0.0]]),
        ("small rotation", rotation2(0.05)),
        ("all ones", array![[1.0, 1.0], [1.0, 1.0]]),
    ];
    for (name, w) in cases {
        println!("{name:>20}: Amari x100 = {:.3}", amari_error(&w, &a)?.value_x100);
    }

    println!();
    for kind in SourceKind::ALL {
        let s = gen_source(&SourceSpec::new(kind), 100_000, 1);
        println!("{:>10}: excess kurtosis {:+.3}", kind.name(), kurtosis(s.as_slice().unwrap())?);
    }
    Ok(())
}
