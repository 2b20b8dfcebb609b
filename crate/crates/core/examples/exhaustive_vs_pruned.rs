//! The pruned candidate set finds the same base as trying every candidate.
//!
//! cargo run --release --example exhaustive_vs_pruned -- [systems]

use tnbpa::base::base_equal;
use tnbpa::oracle::{random_system, GenParams};
use tnbpa::{compute_bisimilarity_base, standardize, CandidateMode, EngineConfig, EngineError};

fn main() {
    let systems = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200u64);
    let (mut same, mut differ, mut skipped) = (0, 0, 0);
    for seed in 0..systems {
        let params = GenParams { constants: 8, norm_cap: 5, seed, ..GenParams::default() };
        let std = standardize(&random_system(&params)).expect("totally normed");
        let (pruned, _) = compute_bisimilarity_base(&std, &EngineConfig::default()).expect("engine run");
        match compute_bisimilarity_base(&std, &EngineConfig::default().with_mode(CandidateMode::Exhaustive)) {
            Ok((full, _)) if base_equal(&pruned, &full) => same += 1,
            Ok(_) => {
                differ += 1;
                println!("seed {seed}: bases differ");
            }
            Err(EngineError::GuardExceeded { .. }) => skipped += 1,
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    println!("equal {same}, different {differ}, too many candidates {skipped}");
}
