//! Weakly bisimilar but not branching bisimilar.
//!
//! `X` and `Y` can both do `b`, or silently commit to doing `a`. `X` can also
//! do `a` without committing, which `Y` can only imitate by giving up `b`
//! first. That is a change of state, so the engine separates them, and the
//! bounded game produces a strategy that proves it.
//!
//! cargo run --example preempted_choice

use tnbpa::oracle::{replay, Oracle, Search};
use tnbpa::{check_equivalence, parse_system, standardize, EngineConfig};

fn main() {
    let sys = parse_system(include_str!("../fixtures/preempted-choice.bpa")).expect("fixture parses");
    let std = standardize(&sys).expect("totally normed");
    println!("standard order: {}", std.order().join(" "));

    let config = EngineConfig::default();
    for (l, r) in [("X", "Y"), ("X'", "Y'"), ("X Y", "X Y"), ("Y", "Y'")] {
        let p = std.parse_process(l).unwrap();
        let q = std.parse_process(r).unwrap();
        let verdict = check_equivalence(&std, &p, &q, &config).expect("engine run");
        println!("{l:>4} vs {r:<4} {:?}", verdict.outcome);
    }

    let x = std.parse_process("X").unwrap();
    let y = std.parse_process("Y").unwrap();
    let mut oracle = Oracle::new(&std);
    if let Search::Distinguished { level, distinction } = oracle.find_distinction(&x, &y, 16).unwrap() {
        replay(&std, &distinction).expect("certificate replays");
        println!("distinguished at level {level}, {} nodes", distinction.node_count());
        println!("{}", serde_json::to_string_pretty(&distinction.to_json(&std)).unwrap());
    }
}
