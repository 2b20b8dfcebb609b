//! Engine versus game over random systems.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::base::{base_equal, initial_base, DecompositionBase};
use crate::model::{ConstId, Process};
use crate::normalize::{standardize, StandardSystem};
use crate::refine::{compute_bisimilarity_base, CandidateMode, Decision, EngineConfig, EngineError, Procedure, RefinementTrace};

use super::approx::{replay, Oracle, Search};
use super::gen::{random_system, GenParams};
use super::verify::{refold, verify_base_generators};

#[derive(Clone, Debug)]
pub struct DiffParams {
    pub gen: GenParams,
    pub trials: usize,
    /// Pairs per system checked against the game.
    pub pairs: usize,
    /// Pairs per system checked against the norm-equality law of the initial base.
    pub init_pairs: usize,
    pub k: u32,
    /// Bound used for pairs the engine separates but the game could not at `k`.
    pub k_escalate: u32,
    pub sample_budget: usize,
    pub max_exhaustive: u64,
    pub max_pair_norm: u64,
    pub jobs: usize,
    pub engine: EngineConfig,
}

impl Default for DiffParams {
    fn default() -> Self {
        DiffParams {
            gen: GenParams::default(),
            trials: 100,
            pairs: 20,
            init_pairs: 200,
            k: 16,
            k_escalate: 24,
            sample_budget: 10,
            max_exhaustive: 100_000,
            max_pair_norm: 6,
            jobs: 1,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub constants: usize,
    pub contracted: usize,
    pub realtime: bool,
    pub error: Option<String>,
    pub iterations: usize,
    pub primes: usize,
    pub within_bound: bool,
    pub monotone_primes: bool,
    /// `None` when exhaustive candidates exceed the guard.
    pub mode_agreement: Option<bool>,
    /// `None` on systems with silent rules.
    pub realtime_agreement: Option<bool>,
    pub verify_failures: usize,
    pub init_law_violations: usize,
    pub pairs: usize,
    pub engine_bisimilar: usize,
    pub engine_not_bisimilar: usize,
    /// Pairs the engine relates and the game separates.
    pub refuted: usize,
    pub confirmed: usize,
    pub flagged: usize,
    pub flagged_confirmed: usize,
    pub replay_failures: usize,
    pub findings: Vec<String>,
}

impl TrialReport {
    pub fn ok(&self) -> bool {
        self.error.is_none()
            && self.within_bound
            && self.monotone_primes
            && self.mode_agreement != Some(false)
            && self.realtime_agreement != Some(false)
            && self.verify_failures == 0
            && self.init_law_violations == 0
            && self.refuted == 0
            && self.replay_failures == 0
            && self.flagged == self.flagged_confirmed
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub failed_trials: usize,
    pub errors: usize,
    pub mode_compared: usize,
    pub mode_mismatches: usize,
    pub realtime_compared: usize,
    pub realtime_mismatches: usize,
    pub verify_failures: usize,
    pub init_law_violations: usize,
    pub pairs: usize,
    pub engine_bisimilar: usize,
    pub engine_not_bisimilar: usize,
    pub refuted: usize,
    pub confirmed: usize,
    pub flagged: usize,
    pub flagged_confirmed: usize,
    pub flag_rate: f64,
    pub max_iterations_over_n: f64,
}

impl Summary {
    pub fn of(reports: &[TrialReport]) -> Summary {
        let mut s = Summary {
            trials: reports.len(),
            ..Summary::default()
        };
        for r in reports {
            s.failed_trials += usize::from(!r.ok());
            s.errors += usize::from(r.error.is_some());
            if let Some(a) = r.mode_agreement {
                s.mode_compared += 1;
                s.mode_mismatches += usize::from(!a);
            }
            if let Some(a) = r.realtime_agreement {
                s.realtime_compared += 1;
                s.realtime_mismatches += usize::from(!a);
            }
            s.verify_failures += r.verify_failures;
            s.init_law_violations += r.init_law_violations;
            s.pairs += r.pairs;
            s.engine_bisimilar += r.engine_bisimilar;
            s.engine_not_bisimilar += r.engine_not_bisimilar;
            s.refuted += r.refuted;
            s.confirmed += r.confirmed;
            s.flagged += r.flagged;
            s.flagged_confirmed += r.flagged_confirmed;
            if r.constants > 0 {
                s.max_iterations_over_n = s.max_iterations_over_n.max(r.iterations as f64 / r.constants as f64);
            }
        }
        if s.engine_not_bisimilar > 0 {
            s.flag_rate = s.flagged as f64 / s.engine_not_bisimilar as f64;
        }
        s
    }
}

/// Runs `params.trials` independent trials; trial `t` uses seed `params.gen.seed + t`.
pub fn differential_run(params: &DiffParams) -> Vec<TrialReport> {
    let run = || {
        (0..params.trials)
            .into_par_iter()
            .map(|t| run_trial(params, t))
            .collect::<Vec<_>>()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(params.jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

pub fn run_trial(params: &DiffParams, trial: usize) -> TrialReport {
    let seed = params.gen.seed.wrapping_add(trial as u64);
    let mut report = TrialReport {
        trial,
        seed,
        ..TrialReport::default()
    };
    if let Err(e) = trial_body(params, seed, &mut report) {
        report.error = Some(e);
    }
    report
}

fn trial_body(params: &DiffParams, seed: u64, report: &mut TrialReport) -> Result<(), String> {
    let sys = random_system(&params.gen.with_seed(seed));
    let std = standardize(&sys).map_err(|e| e.to_string())?;
    let n = std.num_constants();
    report.constants = n;
    report.contracted = std.contracted().len();
    report.realtime = std.is_realtime();

    let (base, trace) = compute_bisimilarity_base(&std, &params.engine).map_err(|e| e.to_string())?;
    report.iterations = trace.iterations.len();
    report.primes = base.primes().len();
    report.within_bound = report.iterations <= n;
    report.monotone_primes = trace
        .iterations
        .iter()
        .all(|it| it.before.primes().iter().all(|&p| it.after.is_prime(p)));

    let exhaustive = EngineConfig {
        mode: CandidateMode::Exhaustive,
        max_exhaustive: params.max_exhaustive,
        ..params.engine
    };
    report.mode_agreement = match compute_bisimilarity_base(&std, &exhaustive) {
        Ok((b, _)) => Some(base_equal(&b, &base)),
        Err(EngineError::GuardExceeded { .. }) => None,
        Err(e) => return Err(e.to_string()),
    };
    if report.mode_agreement == Some(false) {
        report.findings.push("pruned and exhaustive bases differ".into());
    }

    if std.is_realtime() {
        let rt = params.engine.with_procedure(Procedure::Realtime);
        let (b, t) = compute_bisimilarity_base(&std, &rt).map_err(|e| e.to_string())?;
        let agree = base_equal(&b, &base) && traces_agree(&trace, &t);
        report.realtime_agreement = Some(agree);
        if !agree {
            report.findings.push("realtime procedure diverges".into());
        }
    }

    let verify = verify_base_generators(&std, &base, params.k, params.sample_budget, seed).map_err(|e| e.to_string())?;
    report.verify_failures = verify.failure_count();
    for f in verify.equation_failures.iter().chain(&verify.sample_failures) {
        report.findings.push(format!(
            "base relates {} and {} but the game separates them at level {}",
            std.format_process(&f.left),
            std.format_process(&f.right),
            f.level
        ));
    }
    report.findings.extend(verify.structural_failures.iter().cloned());
    report.findings.extend(verify.expansion_failures.iter().map(|e| format!("not an expansion: {e}")));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let init = initial_base(&std);
    for _ in 0..params.init_pairs {
        let (p, q) = loose_pair(&std, params.max_pair_norm, &mut rng);
        if init.equivalent(&p, &q) != (std.norm_of(&p) == std.norm_of(&q)) {
            report.init_law_violations += 1;
        }
    }

    let mut oracle = Oracle::new(&std);
    for k in 0..params.pairs {
        let (p, q) = test_pair(&std, &base, k, params.max_pair_norm, &mut rng);
        report.pairs += 1;
        let engine_says = base.equivalent(&p, &q);
        let search = oracle.find_distinction(&p, &q, params.k).map_err(|e| e.to_string())?;
        let shown = || format!("{} / {}", std.format_process(&p), std.format_process(&q));
        if let Search::Distinguished { distinction, .. } = &search {
            if replay(&std, distinction).is_err() {
                report.replay_failures += 1;
                report.findings.push(format!("certificate does not replay: {}", shown()));
            }
        }
        match (engine_says, search.is_distinguished()) {
            (true, true) => {
                report.engine_bisimilar += 1;
                report.refuted += 1;
                report.findings.push(format!("engine relates a separated pair: {}", shown()));
            }
            (true, false) => report.engine_bisimilar += 1,
            (false, true) => {
                report.engine_not_bisimilar += 1;
                report.confirmed += 1;
            }
            (false, false) => {
                report.engine_not_bisimilar += 1;
                report.flagged += 1;
                let again = oracle.find_distinction(&p, &q, params.k_escalate).map_err(|e| e.to_string())?;
                if again.is_distinguished() {
                    report.flagged_confirmed += 1;
                } else {
                    report.findings.push(format!("no distinction up to {}: {}", params.k_escalate, shown()));
                }
            }
        }
    }
    Ok(())
}

/// Per-candidate decisions of the general and the silent-free procedure coincide.
pub fn traces_agree(branching: &RefinementTrace, realtime: &RefinementTrace) -> bool {
    fn step(d: Decision) -> Decision {
        match d {
            Decision::Reject { step: 5 } => Decision::Reject { step: 4 },
            Decision::Reject { step: 6 } => Decision::Reject { step: 5 },
            other => other,
        }
    }
    branching.iterations.len() == realtime.iterations.len()
        && branching.iterations.iter().zip(&realtime.iterations).all(|(a, b)| {
            a.constants.len() == b.constants.len()
                && a.constants.iter().zip(&b.constants).all(|(x, y)| {
                    x.constant == y.constant
                        && x.accepted == y.accepted
                        && x.candidates.len() == y.candidates.len()
                        && x.candidates
                            .iter()
                            .zip(&y.candidates)
                            .all(|(c, d)| c.delta == d.delta && step(c.decision) == d.decision)
                })
        })
}

/// A process with norm exactly `h`.
pub fn process_with_norm(std: &StandardSystem, h: u64, rng: &mut impl Rng) -> Process {
    let mut out = Vec::new();
    let mut left = h;
    while left > 0 {
        let fits: Vec<ConstId> = std.system().constant_ids().filter(|&c| std.norm(c) <= left).collect();
        let &c = fits.choose(rng).expect("X1 has norm 1");
        left -= std.norm(c);
        out.push(c);
    }
    Process(out)
}

/// Independent random processes, half of them forced to equal norm.
fn loose_pair(std: &StandardSystem, max_norm: u64, rng: &mut impl Rng) -> (Process, Process) {
    let h = rng.gen_range(1..=max_norm);
    let p = process_with_norm(std, h, rng);
    let h2 = if rng.gen_bool(0.5) { h } else { rng.gen_range(1..=max_norm) };
    (p, process_with_norm(std, h2, rng))
}

/// Mixes pairs the base relates, equal-norm random pairs, and near misses.
fn test_pair(std: &StandardSystem, base: &DecompositionBase, k: usize, max_norm: u64, rng: &mut impl Rng) -> (Process, Process) {
    let h = rng.gen_range(1..=max_norm);
    let p = process_with_norm(std, h, rng);
    match k % 3 {
        0 => {
            let q = refold(base, base.dcmp(&p).ids(), rng);
            (p, q)
        }
        1 => (p, process_with_norm(std, h, rng)),
        _ => {
            let mut q = refold(base, base.dcmp(&p).ids(), rng).0;
            let pos = rng.gen_range(0..q.len());
            let same: Vec<ConstId> = std
                .system()
                .constant_ids()
                .filter(|&c| std.norm(c) == std.norm(q[pos]))
                .collect();
            q[pos] = *same.choose(rng).expect("q[pos] itself");
            if q.len() > 1 && rng.gen_bool(0.3) {
                let i = rng.gen_range(0..q.len() - 1);
                q.swap(i, i + 1);
            }
            (p, Process(q))
        }
    }
}
