use proptest::prelude::*;
use tnbpa::model::{parse_system, serialize_system, ActionId, Process};
use tnbpa::normalize::{NormalizeError, NormedSystem};
use tnbpa::oracle::{random_system, GenParams, Oracle};
use tnbpa::{standardize, ConstId};

fn params(seed: u64) -> GenParams {
    GenParams { constants: 8, seed, ..GenParams::default() }
}

proptest! {
    #[test]
    fn norms_add_up_and_vanish_only_on_empty(seed in 0u64..300, a in prop::collection::vec(0u32..8, 0..6), b in prop::collection::vec(0u32..8, 0..6)) {
        let std = standardize(&random_system(&params(seed))).unwrap();
        let n = std.num_constants() as u32;
        let p = Process(a.into_iter().filter(|&c| c < n).map(ConstId).collect());
        let q = Process(b.into_iter().filter(|&c| c < n).map(ConstId).collect());
        prop_assert_eq!(std.norm_of(&p.concat(&q)), std.norm_of(&p) + std.norm_of(&q));
        prop_assert_eq!(std.norm_of(&p) == 0, p.is_empty());
    }
}

#[test]
fn decreasing_rules_point_strictly_down() {
    for seed in 0..400 {
        for silent_prob in [0.0, 0.3, 0.6] {
            let sys = random_system(&GenParams { silent_prob, ..params(seed) });
            let std = match standardize(&sys) {
                Ok(s) => s,
                Err(NormalizeError::OrderViolation(r)) => panic!("seed {seed}: {r}"),
                Err(e) => panic!("seed {seed}: {e}"),
            };
            for (i, r) in std.system().rules().iter().enumerate() {
                if std.rule_class(i).is_decreasing() {
                    assert!(r.rhs.constants().iter().all(|c| *c < r.lhs), "seed {seed}");
                }
            }
            assert!(std.weights().norms().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn standardizing_twice_changes_nothing() {
    for seed in 0..200 {
        let std = standardize(&random_system(&params(seed))).unwrap();
        let again = standardize(&parse_system(&serialize_system(std.system())).unwrap()).unwrap();
        assert_eq!(std.order(), again.order(), "seed {seed}");
        assert_eq!(std.weights().norms(), again.weights().norms());
    }
}

/// Adds a silent cycle through every group of equal-norm constants.
fn plant_cycles(sys: &tnbpa::BpaSystem) -> tnbpa::BpaSystem {
    let norms = tnbpa::compute_norms(sys);
    let mut b = tnbpa::BpaSystem::builder();
    for name in sys.constant_names() {
        b.constant(name.clone());
    }
    for a in sys.actions().iter().skip(1) {
        b.action(a.clone());
    }
    for r in sys.rules() {
        let label = b.action(sys.action(r.label).clone());
        b.rule(r.lhs, label, r.rhs.clone());
    }
    let ids: Vec<ConstId> = sys.constant_ids().collect();
    let mut by_norm: std::collections::BTreeMap<u64, Vec<ConstId>> = Default::default();
    for &c in &ids {
        by_norm.entry(norms.get(c).finite().unwrap()).or_default().push(c);
    }
    for members in by_norm.values().filter(|m| m.len() > 1) {
        for w in 0..members.len() {
            let next = members[(w + 1) % members.len()];
            b.rule(members[w], ActionId::TAU, Process::single(next));
        }
    }
    b.build()
}

#[test]
fn planted_cycles_collapse() {
    let fixture = standardize(&parse_system(include_str!("../fixtures/tau-cycle.bpa")).unwrap()).unwrap();
    assert_eq!(fixture.order(), ["P", "S"]);
    assert_eq!(fixture.contracted().len(), 2);

    for seed in 0..100 {
        let sys = plant_cycles(&random_system(&params(seed)));
        let norms = tnbpa::compute_norms(&sys);
        let std = standardize(&sys).unwrap();
        let mut distinct_norms: Vec<u64> = sys.constant_ids().map(|c| norms.get(c).finite().unwrap()).collect();
        distinct_norms.sort();
        distinct_norms.dedup();
        assert_eq!(std.num_constants(), distinct_norms.len(), "seed {seed}");
        for c in sys.constant_ids() {
            let a = std.name_map()[sys.constant_name(c)];
            assert_eq!(std.norm(a), norms.get(c).finite().unwrap());
        }
    }
}

#[test]
fn contracted_constants_are_not_distinguished() {
    let mut checked = 0;
    for seed in 0..60 {
        let sys = random_system(&GenParams { silent_prob: 0.6, ..params(seed) });
        let std = standardize(&sys).unwrap();
        if std.contracted().is_empty() {
            continue;
        }
        let raw = NormedSystem::new(sys.clone()).unwrap();
        let mut oracle = Oracle::new(&raw);
        for (removed, into) in std.contracted() {
            let p = sys.parse_process(removed).unwrap();
            let q = sys.parse_process(into).unwrap();
            assert!(!oracle.find_distinction(&p, &q, 10).unwrap().is_distinguished(), "seed {seed}: {removed} / {into}");
            checked += 1;
        }
    }
    let sys = parse_system(include_str!("../fixtures/tau-cycle.bpa")).unwrap();
    let raw = NormedSystem::new(sys.clone()).unwrap();
    let mut oracle = Oracle::new(&raw);
    for (a, b) in [("Q", "P"), ("R", "P"), ("Q", "R")] {
        let (p, q) = (sys.parse_process(a).unwrap(), sys.parse_process(b).unwrap());
        assert!(!oracle.find_distinction(&p, &q, 16).unwrap().is_distinguished());
    }
    println!("{checked} contracted pairs from generated systems");
}

#[test]
fn realtime_order_is_preserved() {
    let text = "constants: A B C\nA -a-> eps\nB -b-> A\nC -a-> B\n";
    let std = standardize(&parse_system(text).unwrap()).unwrap();
    assert_eq!(std.order(), ["A", "B", "C"]);
}
