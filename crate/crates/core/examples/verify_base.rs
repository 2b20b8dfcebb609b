//! Auditing a decomposition base with the bounded game.
//!
//! The final base passes. A base claiming `Y = X` fails, and the report
//! carries the strategy that separates them.
//!
//! cargo run --example verify_base

use tnbpa::base::{DecompositionBase, Entry};
use tnbpa::oracle::verify_base_generators;
use tnbpa::{compute_bisimilarity_base, parse_system, standardize, EngineConfig, NormedString};

fn main() {
    let std = standardize(&parse_system(include_str!("../fixtures/preempted-choice.bpa")).unwrap()).unwrap();
    let (good, _) = compute_bisimilarity_base(&std, &EngineConfig::default()).unwrap();
    let report = verify_base_generators(&std, &good, 16, 50, 0).unwrap();
    println!("final base: {} failures over {} equations and {} samples", report.failure_count(), report.equations_checked, report.samples_checked);

    let id = |n: &str| std.parse_process(n).unwrap().head().unwrap();
    let mut entries = vec![Entry::Prime; std.num_constants()];
    entries[id("Y").index()] = Entry::Composite(NormedString::new(std.weights(), vec![id("X")]));
    let bad = DecompositionBase::new(&std, entries).unwrap();
    let report = verify_base_generators(&std, &bad, 16, 0, 0).unwrap();
    println!("base with Y = X: {} failures", report.failure_count());
    println!("{}", serde_json::to_string_pretty(&report.to_json(&std)).unwrap());
}
