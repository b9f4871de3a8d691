use ccs_ica::prelude::*;

fn hit_rate(cfg: &RunConfig) -> (usize, usize) {
    let records = run_benchmark(cfg).unwrap();
    let hits = records.iter().filter(|r| r.amari_x100 <= 5.0).count();
    (hits, records.len())
}

#[test]
fn full_gradient_on_uniform_pairs() {
    let cfg = RunConfig {
        algorithm: Algorithm::Gradient,
        master_seed: 5,
        ..RunConfig::default()
    };
    let (hits, n) = hit_rate(&cfg);
    assert!(5 * hits >= 4 * n, "{hits}/{n} trials at Amari x100 <= 5");
}

#[test]
fn jacobi_on_uniform_pairs() {
    let cfg = RunConfig {
        master_seed: 5,
        ..RunConfig::default()
    };
    let (hits, n) = hit_rate(&cfg);
    assert!(5 * hits >= 4 * n, "{hits}/{n} trials at Amari x100 <= 5");
}
