//! Every candidate the refinement tests, and why it was rejected.
//!
//! cargo run --example refinement_trace -- [FILE]

use tnbpa::refine::Decision;
use tnbpa::{compute_bisimilarity_base, parse_system, standardize, EngineConfig};

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => include_str!("../fixtures/inert-tau.bpa").to_string(),
    };
    let std = standardize(&parse_system(&text).expect("parses")).expect("totally normed");
    let (_, trace) = compute_bisimilarity_base(&std, &EngineConfig::default()).expect("engine run");
    let name = |c| std.name(c);
    for (k, it) in trace.iterations.iter().enumerate() {
        println!("iteration {}", k + 1);
        for c in &it.constants {
            for cand in &c.candidates {
                let why = match cand.decision {
                    Decision::Accept { shortcut: true } => "accepted by a silent move onto it".to_string(),
                    Decision::Accept { shortcut: false } => "accepted".to_string(),
                    Decision::Reject { step } => format!("rejected at step {step}"),
                };
                println!("  {} = {}: {why}", name(c.constant), cand.delta.format(name));
            }
            if c.accepted.is_none() {
                println!("  {} becomes prime", name(c.constant));
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&trace.to_json(&std)).unwrap());
}
