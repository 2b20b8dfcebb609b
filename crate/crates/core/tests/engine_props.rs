use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tnbpa::model::Process;
use tnbpa::oracle::differential::{process_with_norm, traces_agree};
use tnbpa::oracle::{differential_run, random_system, DiffParams, GenParams};
use tnbpa::refine::{refine, select_decreasing_rules, Mutation};
use tnbpa::{
    compute_bisimilarity_base, initial_base, standardize, CandidateMode, EngineConfig, EngineError, Procedure,
    StandardSystem,
};

fn generated(seed: u64, silent_prob: f64) -> StandardSystem {
    let p = GenParams { constants: 7, silent_prob, seed, ..GenParams::default() };
    standardize(&random_system(&p)).unwrap()
}

fn sample_pairs(std: &StandardSystem, seed: u64, count: usize) -> Vec<(Process, Process)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let h = 1 + (i as u64 % 5);
            (process_with_norm(std, h, &mut rng), process_with_norm(std, h, &mut rng))
        })
        .collect()
}

#[test]
fn iterations_refine_monotonically_and_stop_within_n() {
    for seed in 0..150 {
        let std = generated(seed, 0.3);
        let (base, trace) = compute_bisimilarity_base(&std, &EngineConfig::default()).unwrap();
        assert!(trace.iterations.len() <= std.num_constants().max(1), "seed {seed}");
        let pairs = sample_pairs(&std, seed, 40);
        for it in &trace.iterations {
            for p in it.before.primes() {
                assert!(it.after.is_prime(p), "seed {seed}: prime lost");
            }
            for (p, q) in &pairs {
                if it.after.equivalent(p, q) {
                    assert!(it.before.equivalent(p, q), "seed {seed}: congruence grew");
                }
            }
        }
        let fixed = select_decreasing_rules(&std);
        let (again, _) = refine(&std, &base, &fixed, &EngineConfig::default()).unwrap();
        assert_eq!(again, base, "seed {seed}: not a fixpoint");
    }
}

#[test]
fn final_congruence_is_an_equivalence() {
    for seed in 0..60 {
        let std = generated(seed, 0.3);
        let (base, _) = compute_bisimilarity_base(&std, &EngineConfig::default()).unwrap();
        let pairs = sample_pairs(&std, seed + 1000, 30);
        for (p, q) in &pairs {
            assert!(base.equivalent(p, p));
            assert_eq!(base.equivalent(p, q), base.equivalent(q, p));
            let r = &pairs[0].1;
            if base.equivalent(p, q) && base.equivalent(q, r) {
                assert!(base.equivalent(p, r));
            }
        }
    }
}

#[test]
fn initial_base_relates_exactly_equal_norms() {
    for seed in 0..40 {
        let std = generated(seed, 0.3);
        let base = initial_base(&std);
        for (p, q) in sample_pairs(&std, seed, 50) {
            assert_eq!(base.equivalent(&p, &q), std.norm_of(&p) == std.norm_of(&q));
        }
    }
}

#[test]
fn exhaustive_and_pruned_agree() {
    let exhaustive = EngineConfig::default().with_mode(CandidateMode::Exhaustive);
    let mut compared = 0;
    for seed in 0..80 {
        let std = generated(seed, 0.3);
        let (pruned, _) = compute_bisimilarity_base(&std, &EngineConfig::default()).unwrap();
        match compute_bisimilarity_base(&std, &exhaustive) {
            Ok((full, _)) => {
                assert_eq!(pruned, full, "seed {seed}");
                compared += 1;
            }
            Err(EngineError::GuardExceeded { .. }) => {}
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(compared >= 60, "only {compared} systems under the guard");
}

#[test]
fn realtime_procedure_agrees_on_realtime_systems() {
    let realtime = EngineConfig::default().with_procedure(Procedure::Realtime);
    for seed in 0..60 {
        let std = generated(seed, 0.0);
        assert!(std.is_realtime());
        let (a, ta) = compute_bisimilarity_base(&std, &EngineConfig::default()).unwrap();
        let (b, tb) = compute_bisimilarity_base(&std, &realtime).unwrap();
        assert_eq!(a, b, "seed {seed}");
        assert!(traces_agree(&ta, &tb), "seed {seed}");
    }
}

fn mutated_run(mutation: Mutation, silent_prob: f64) -> (usize, usize) {
    let params = DiffParams {
        gen: GenParams { constants: 6, silent_prob, ..GenParams::default() },
        trials: 30,
        pairs: 10,
        init_pairs: 20,
        k: 10,
        k_escalate: 12,
        sample_budget: 5,
        engine: EngineConfig { mutation: Some(mutation), ..EngineConfig::default() },
        ..DiffParams::default()
    };
    let reports = differential_run(&params);
    let failed = reports.iter().filter(|r| !r.ok()).count();
    let refuted = reports.iter().map(|r| r.refuted + r.verify_failures).sum();
    (failed, refuted)
}

#[test]
fn oracle_catches_a_missing_increasing_match() {
    let (failed, caught) = mutated_run(Mutation::SkipIncreasingMatch, 0.3);
    assert!(failed > 0 && caught > 0, "{failed} failed, {caught} caught");
}

#[test]
fn oracle_catches_a_missing_reverse_match() {
    let (failed, caught) = mutated_run(Mutation::SkipReverseDecreasingMatch, 0.0);
    assert!(failed > 0 && caught > 0, "{failed} failed, {caught} caught");
}

#[test]
fn unmutated_run_is_clean() {
    let params = DiffParams {
        gen: GenParams { constants: 6, ..GenParams::default() },
        trials: 30,
        pairs: 10,
        init_pairs: 20,
        k: 10,
        k_escalate: 12,
        sample_budget: 5,
        ..DiffParams::default()
    };
    for r in differential_run(&params) {
        assert!(r.ok(), "{}", serde_json::to_string(&r).unwrap());
    }
}
