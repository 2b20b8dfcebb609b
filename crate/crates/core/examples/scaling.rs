//! Wall time of the refinement as the number of constants doubles.
//!
//! Unit-norm random systems with 8, 16, 32 and 64 constants. Each size is
//! timed over a batch of systems, the batch is repeated, and the fastest
//! repetition is kept.
//!
//! cargo run --release --example scaling

use std::time::{Duration, Instant};

use tnbpa::oracle::{random_system, GenParams};
use tnbpa::{compute_bisimilarity_base, standardize, EngineConfig};

fn batch(n: usize, systems: u64) -> Duration {
    let prepared: Vec<_> = (0..systems)
        .map(|seed| {
            let params = GenParams {
                constants: n,
                norm_cap: 1,
                extra_rules: 2 * n,
                seed,
                ..GenParams::default()
            };
            standardize(&random_system(&params)).expect("generated systems are totally normed")
        })
        .collect();
    let start = Instant::now();
    for std in &prepared {
        compute_bisimilarity_base(std, &EngineConfig::default()).expect("engine run");
    }
    start.elapsed()
}

fn main() {
    let mut prev: Option<Duration> = None;
    println!("{:>4} {:>12} {:>8}", "n", "time", "ratio");
    for n in [8, 16, 32, 64] {
        let best = (0..5).map(|_| batch(n, 20)).min().unwrap();
        let ratio = prev.map_or(String::from("-"), |p| format!("{:.2}", best.as_secs_f64() / p.as_secs_f64()));
        println!("{n:>4} {:>12?} {ratio:>8}", best);
        prev = Some(best);
    }
}
