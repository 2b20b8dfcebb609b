use proptest::prelude::*;
use tnbpa::model::{parse_system, serialize_system, Process};
use tnbpa::oracle::{random_system, GenParams};

fn system(seed: u64) -> tnbpa::BpaSystem {
    random_system(&GenParams { constants: 7, seed, ..GenParams::default() })
}

fn any_process(n: usize, max: usize) -> impl Strategy<Value = Process> {
    prop::collection::vec(0..n as u32, 0..max).prop_map(|v| Process(v.into_iter().map(tnbpa::ConstId).collect()))
}

proptest! {
    #[test]
    fn transitions_only_touch_the_head(seed in 0u64..500, head in 0u32..7, tail in any_process(7, 6)) {
        let sys = system(seed);
        let x = Process::single(tnbpa::ConstId(head));
        let whole = sys.transitions_of(&x.concat(&tail));
        let expected: Vec<_> = sys.transitions_of(&x).into_iter().map(|(a, r)| (a, r.concat(&tail))).collect();
        prop_assert_eq!(whole, expected);
    }

    #[test]
    fn empty_process_is_a_unit(seed in 0u64..500, p in any_process(7, 6)) {
        let sys = system(seed);
        let e = Process::empty();
        prop_assert_eq!(sys.transitions_of(&e.concat(&p)), sys.transitions_of(&p));
        prop_assert_eq!(sys.transitions_of(&p.concat(&e)), sys.transitions_of(&p));
    }

    #[test]
    fn generated_systems_round_trip(seed in 0u64..2000) {
        let text = serialize_system(&system(seed));
        let again = parse_system(&text).unwrap();
        prop_assert_eq!(serialize_system(&again), text);
        prop_assert_eq!(parse_system(&serialize_system(&again)).unwrap(), again);
    }
}

#[test]
fn empty_process_has_no_moves() {
    let sys = parse_system(include_str!("../fixtures/preempted-choice.bpa")).unwrap();
    assert!(sys.transitions_of(&Process::empty()).is_empty());
}

#[test]
fn inert_tau_head_b_moves() {
    let sys = parse_system(include_str!("../fixtures/inert-tau.bpa")).unwrap();
    let by = sys.parse_process("B Y").unwrap();
    let moves: Vec<(String, String)> = sys
        .transitions_of(&by)
        .into_iter()
        .map(|(a, p)| (sys.action_name(a).to_string(), sys.format_process(&p)))
        .collect();
    assert_eq!(moves, [("a".to_string(), "Y".to_string())]);
}

#[test]
fn rule_free_system_serializes_to_header() {
    let sys = parse_system("constants: X\n").unwrap();
    assert_eq!(serialize_system(&sys), "constants: X\n");
}

#[test]
fn process_text() {
    let sys = parse_system(include_str!("../fixtures/preempted-choice.bpa")).unwrap();
    assert!(sys.parse_process("eps").unwrap().is_empty());
    assert_eq!(sys.parse_process("X Y").unwrap().len(), 2);
    assert!(sys.parse_process("X Q").is_err());
}
