//! Engine against the bounded game over random systems.
//!
//! cargo run --release --example differential_fuzz -- [trials] [seed]

use tnbpa::oracle::differential::Summary;
use tnbpa::oracle::{differential_run, DiffParams, GenParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let params = DiffParams {
        gen: GenParams { constants: 8, norm_cap: 5, seed, ..GenParams::default() },
        trials,
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..DiffParams::default()
    };
    let reports = differential_run(&params);
    for r in reports.iter().filter(|r| !r.ok()) {
        println!("{}", serde_json::to_string(r).unwrap());
    }
    println!("{}", serde_json::to_string_pretty(&Summary::of(&reports)).unwrap());
}
