//! A small Monte-Carlo batch for each algorithm, emitted as CSV and SVG.
//!
//! Run with `cargo run --release --example monte_carlo [out_dir]`.

use ccs_ica::prelude::*;

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let mut records = Vec::new();
    for algorithm in Algorithm::ALL {
        let cfg = RunConfig {
            algorithm,
            samples: 500,
            trials: 5,
            master_seed: 2024,
            source_plan: vec![SourceSpec::laplacian(), SourceSpec::uniform()],
            ..RunConfig::default()
        };
        records.extend(run_benchmark(&cfg)?);
    }
    let table = emit_table(&records, true)?;
    let figure = emit_figure(&records)?;
    print!("{table}");
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("results.csv"), &table)?;
            std::fs::write(dir.join("results.svg"), &figure)?;
            println!("wrote {}", dir.display());
        }
        None => println!("(pass a directory to save the CSV and SVG)"),
    }
    Ok(())
}
