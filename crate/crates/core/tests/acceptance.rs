//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use tnbpa::model::{parse_system, ActionId, Process};
use tnbpa::normalize::NormalizeError;
use tnbpa::oracle::differential::Summary;
use tnbpa::oracle::{differential_run, random_system, replay, DiffParams, GenParams, Oracle, Search, TrialReport};
use tnbpa::{check_equivalence, compute_bisimilarity_base, standardize, BpaSystem, EngineConfig, Outcome};

const PREEMPTED: &str = include_str!("../fixtures/preempted-choice.bpa");
const INERT_TAU: &str = include_str!("../fixtures/inert-tau.bpa");
const TAU_CYCLE: &str = include_str!("../fixtures/tau-cycle.bpa");

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, n: u32, name: &str, ok: bool, detail: String) {
        println!("{} {n:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.failed += usize::from(!ok);
    }
}

fn outcome(text: &str, l: &str, r: &str) -> Outcome {
    let std = standardize(&parse_system(text).unwrap()).unwrap();
    let (p, q) = (std.parse_process(l).unwrap(), std.parse_process(r).unwrap());
    check_equivalence(&std, &p, &q, &EngineConfig::default()).unwrap().outcome
}

fn preempted_choice() -> (bool, String) {
    let std = standardize(&parse_system(PREEMPTED).unwrap()).unwrap();
    let xy = outcome(PREEMPTED, "X", "Y");
    let primed = outcome(PREEMPTED, "X'", "Y'");
    let mut oracle = Oracle::new(&std);
    let (x, y) = (std.parse_process("X").unwrap(), std.parse_process("Y").unwrap());
    let replayed = match oracle.find_distinction(&x, &y, 16).unwrap() {
        Search::Distinguished { level, distinction } => replay(&std, &distinction).is_ok().then_some(level),
        Search::NoneFound { .. } => None,
    };
    let ok = xy == Outcome::NotBisimilar && primed == Outcome::Bisimilar && replayed.is_some();
    (ok, format!("X,Y {xy:?}; X',Y' {primed:?}; distinction replayed at level {replayed:?}"))
}

fn inert_tau() -> (bool, String) {
    let std = standardize(&parse_system(INERT_TAU).unwrap()).unwrap();
    let ab = outcome(INERT_TAU, "A", "B");
    let ayby = outcome(INERT_TAU, "A Y", "B Y");
    let mut oracle = Oracle::new(&std);
    let mut none = true;
    for (l, r) in [("A", "B"), ("A Y", "B Y")] {
        let (p, q) = (std.parse_process(l).unwrap(), std.parse_process(r).unwrap());
        none &= !oracle.find_distinction(&p, &q, 16).unwrap().is_distinguished();
    }
    let ok = ab == Outcome::Bisimilar && ayby == Outcome::Bisimilar && none;
    (ok, format!("A,B {ab:?}; A Y,B Y {ayby:?}; oracle silent up to 16: {none}"))
}

fn planted_cycles(seeds: u64) -> (bool, String) {
    let fixture = standardize(&parse_system(TAU_CYCLE).unwrap()).unwrap();
    let mut ok = fixture.order() == ["P", "S"];
    let mut planted = 0;
    for seed in 0..seeds {
        let base = random_system(&GenParams { constants: 8, seed, ..GenParams::default() });
        let norms = tnbpa::compute_norms(&base);
        let unit: Vec<_> = base.constant_ids().filter(|&c| norms.get(c).finite() == Some(1)).collect();
        if unit.len() < 2 {
            continue;
        }
        let mut b = BpaSystem::builder();
        for name in base.constant_names() {
            b.constant(name.clone());
        }
        for r in base.rules() {
            let label = b.action(base.action(r.label).clone());
            b.rule(r.lhs, label, r.rhs.clone());
        }
        for w in 0..unit.len() {
            b.rule(unit[w], ActionId::TAU, Process::single(unit[(w + 1) % unit.len()]));
        }
        let std = standardize(&b.build()).unwrap();
        let reps: std::collections::BTreeSet<_> = unit.iter().map(|&c| std.name_map()[base.constant_name(c)]).collect();
        ok &= reps.len() == 1;
        planted += 1;
    }
    (ok, format!("fixture order {:?}; {planted} planted cycles collapsed", fixture.order()))
}

fn no_order_violation(seeds: u64) -> (bool, usize) {
    let mut violations = 0;
    for seed in 0..seeds {
        for silent_prob in [0.0, 0.3, 0.7] {
            let sys = random_system(&GenParams { constants: 8, silent_prob, seed, ..GenParams::default() });
            violations += usize::from(matches!(standardize(&sys), Err(NormalizeError::OrderViolation(_))));
        }
    }
    (violations == 0, violations)
}

fn timed_batch(n: usize) -> Duration {
    let systems: Vec<_> = (0..20)
        .map(|seed| {
            let p = GenParams { constants: n, norm_cap: 1, extra_rules: 2 * n, seed, ..GenParams::default() };
            standardize(&random_system(&p)).unwrap()
        })
        .collect();
    let start = Instant::now();
    for std in &systems {
        compute_bisimilarity_base(std, &EngineConfig::default()).unwrap();
    }
    start.elapsed()
}

fn scaling() -> (bool, String) {
    let times: Vec<Duration> = [8, 16, 32, 64].iter().map(|&n| (0..5).map(|_| timed_batch(n)).min().unwrap()).collect();
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1].as_secs_f64() / w[0].as_secs_f64().max(1e-6)).collect();
    let ok = ratios.iter().all(|&r| r < 32.0);
    let detail = format!(
        "20 systems per size, n=8/16/32/64: {:?}; ratios {:?}",
        times,
        ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
    );
    (ok, detail)
}

fn main() -> ExitCode {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut r = Report { failed: 0 };

    let (ok, d) = preempted_choice();
    r.line(1, "preempted choice verdicts", ok, d);
    let (ok, d) = inert_tau();
    r.line(2, "inert silent steps branching verdicts", ok, d);

    let main_run = DiffParams {
        gen: GenParams { constants: 8, norm_cap: 5, ..GenParams::default() },
        trials: 100,
        pairs: 20,
        init_pairs: 200,
        k: 16,
        k_escalate: 24,
        jobs,
        ..DiffParams::default()
    };
    let reports = differential_run(&main_run);
    let s = Summary::of(&reports);
    let clean = |f: fn(&TrialReport) -> bool| reports.iter().all(|t| t.error.is_none() && f(t));

    r.line(
        3,
        "initial congruence is norm equality",
        s.errors == 0 && s.init_law_violations == 0,
        format!("{} systems x 200 pairs, {} violations", s.trials, s.init_law_violations),
    );
    r.line(
        4,
        "iteration bound and monotone primes",
        clean(|t| t.within_bound && t.monotone_primes),
        format!("max iterations/n = {:.3}", s.max_iterations_over_n),
    );
    r.line(
        5,
        "pruned and exhaustive candidates agree",
        s.mode_compared >= 100 && s.mode_mismatches == 0,
        format!("{} systems compared, {} mismatches", s.mode_compared, s.mode_mismatches),
    );
    let replays: usize = reports.iter().map(|t| t.replay_failures).sum();
    r.line(
        6,
        "differential soundness against the game",
        s.trials >= 100
            && reports.iter().all(|t| t.pairs >= 20)
            && s.refuted == 0
            && replays == 0
            && s.confirmed + s.flagged == s.engine_not_bisimilar
            && s.flag_rate < 0.05
            && s.flagged == s.flagged_confirmed,
        format!(
            "{} pairs: {} bisimilar, {} refuted; {} not bisimilar, {} confirmed, {} flagged ({:.2}%), {} confirmed at 24",
            s.pairs,
            s.engine_bisimilar,
            s.refuted,
            s.engine_not_bisimilar,
            s.confirmed,
            s.flagged,
            100.0 * s.flag_rate,
            s.flagged_confirmed
        ),
    );
    r.line(
        7,
        "generator verification",
        s.errors == 0 && s.verify_failures == 0,
        format!("{} failures over {} final bases", s.verify_failures, s.trials),
    );

    let realtime_run = DiffParams {
        gen: GenParams { silent_prob: 0.0, seed: 10_000, ..main_run.gen.clone() },
        trials: 60,
        pairs: 5,
        init_pairs: 20,
        ..main_run.clone()
    };
    let rt = Summary::of(&differential_run(&realtime_run));
    r.line(
        8,
        "realtime degeneration",
        rt.errors == 0 && rt.realtime_compared >= 50 && rt.realtime_mismatches == 0,
        format!("{} realtime systems compared, {} divergences", rt.realtime_compared, rt.realtime_mismatches),
    );

    let (order_ok, violations) = no_order_violation(300);
    let (cycles_ok, d) = planted_cycles(100);
    r.line(
        9,
        "standardization order and loop contraction",
        order_ok && cycles_ok && s.errors == 0 && rt.errors == 0,
        format!("{violations} order violations over 900 systems; {d}"),
    );

    let (ok, d) = scaling();
    r.line(10, "scaling smoke test", ok, d);

    if r.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
