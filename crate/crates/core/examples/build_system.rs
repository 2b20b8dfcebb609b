//! Building a system in code, printing it, and stepping a process.
//!
//! cargo run --example build_system

use tnbpa::model::{serialize_system, ActionId, BpaSystem, Process};
use tnbpa::{compute_norms, parse_system};

fn main() {
    let mut b = BpaSystem::builder();
    let stack = b.constant("Stack");
    let item = b.constant("Item");
    let push = b.visible("push");
    let pop = b.visible("pop");
    b.rule(stack, push, Process(vec![item, stack]));
    b.rule(stack, pop, Process::empty());
    b.rule(item, pop, Process::empty());
    b.rule(item, ActionId::TAU, Process::single(item));
    let sys = b.build();

    let text = serialize_system(&sys);
    print!("{text}");
    assert_eq!(parse_system(&text).unwrap(), sys);

    let norms = compute_norms(&sys);
    for c in sys.constant_ids() {
        println!("norm({}) = {}", sys.constant_name(c), norms.get(c));
    }
    let p = sys.parse_process("Item Stack").unwrap();
    for (a, q) in sys.transitions_of(&p) {
        println!("{} -{}-> {}", sys.format_process(&p), sys.action_name(a), sys.format_process(&q));
    }
}
