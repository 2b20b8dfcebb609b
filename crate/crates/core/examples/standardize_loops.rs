//! Silent cycles collapse to one constant; the rest is ordered by norm.
//!
//! cargo run --example standardize_loops

use tnbpa::{parse_system, standardize};

fn main() {
    let sys = parse_system(include_str!("../fixtures/tau-cycle.bpa")).expect("fixture parses");
    let std = standardize(&sys).expect("totally normed");
    print!("{}", std.render());
    for (removed, into) in std.contracted() {
        println!("{removed} now denotes {into}");
    }
    let q = std.parse_process("Q R").unwrap();
    println!("Q R reads as {}", std.format_process(&q));
}
