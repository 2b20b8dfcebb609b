//! A system where silent steps are state preserving.
//!
//! `A -tau-> B` loses nothing because `A` and `B` offer the same `a`, so
//! `A` and `B` are branching bisimilar, and so are `A Y` and `B Y`. `X` is
//! not prime: it decomposes as `B Y`.
//!
//! cargo run --example branching_system

use tnbpa::oracle::{Oracle, Search};
use tnbpa::{compute_bisimilarity_base, parse_system, standardize, EngineConfig};

fn main() {
    let sys = parse_system(include_str!("../fixtures/inert-tau.bpa")).expect("fixture parses");
    let std = standardize(&sys).expect("totally normed");
    let (base, trace) = compute_bisimilarity_base(&std, &EngineConfig::default()).expect("engine run");
    println!("{} iterations", trace.iterations.len());
    print!("{}", base.render_text(&std));

    let mut oracle = Oracle::new(&std);
    for (l, r) in [("A", "B"), ("A Y", "B Y"), ("X", "B Y"), ("X", "A A")] {
        let p = std.parse_process(l).unwrap();
        let q = std.parse_process(r).unwrap();
        let game = match oracle.find_distinction(&p, &q, 16).unwrap() {
            Search::Distinguished { level, .. } => format!("distinguished at level {level}"),
            Search::NoneFound { bound } => format!("no distinction up to {bound}"),
        };
        println!("{l:>3} vs {r:<4} engine: {:<5} game: {game}", base.equivalent(&p, &q));
    }
}
