//! Audits a decomposition base against the bounded game.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::base::DecompositionBase;
use crate::model::{ConstId, Process};
use crate::normalize::StandardSystem;

use super::approx::{Distinction, Oracle, Search};
use super::closure::{silent_closure_dec, DEFAULT_CLOSURE_GUARD};
use super::OracleError;

#[derive(Clone, Debug)]
pub struct Failure {
    pub left: Process,
    pub right: Process,
    pub level: u32,
    pub distinction: Arc<Distinction>,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub equations_checked: usize,
    pub samples_checked: usize,
    /// Equations `X = α` the game refutes.
    pub equation_failures: Vec<Failure>,
    /// Sampled pairs with equal decompositions that the game refutes.
    pub sample_failures: Vec<Failure>,
    /// Broken base invariants, including decreasing moves that stay in a prime's class.
    pub structural_failures: Vec<String>,
    /// Equal-decomposition pairs that are not a one-round branching expansion of the base itself.
    pub expansion_failures: Vec<String>,
}

impl VerifyReport {
    pub fn failure_count(&self) -> usize {
        self.equation_failures.len()
            + self.sample_failures.len()
            + self.structural_failures.len()
            + self.expansion_failures.len()
    }

    pub fn is_clean(&self) -> bool {
        self.failure_count() == 0
    }

    pub fn to_json(&self, std: &StandardSystem) -> Value {
        let f = |fs: &[Failure]| -> Vec<Value> {
            fs.iter()
                .map(|x| {
                    json!({
                        "left": std.format_process(&x.left),
                        "right": std.format_process(&x.right),
                        "level": x.level,
                        "distinction": x.distinction.to_json(std),
                    })
                })
                .collect()
        };
        json!({
            "equations_checked": self.equations_checked,
            "samples_checked": self.samples_checked,
            "equation_failures": f(&self.equation_failures),
            "sample_failures": f(&self.sample_failures),
            "structural_failures": self.structural_failures,
            "expansion_failures": self.expansion_failures,
        })
    }
}

/// Whether `(p, q)` passes one round of the branching conditions with
/// relatedness read off the base.
pub fn expansion_holds(std: &StandardSystem, base: &DecompositionBase, p: &Process, q: &Process) -> Result<bool, OracleError> {
    let sys = std.system();
    for (a, b) in [(p, q), (q, p)] {
        let da = base.dcmp(a);
        let db = base.dcmp(b);
        let closure = silent_closure_dec(std, b, DEFAULT_CLOSURE_GUARD)?;
        for (label, a1) in sys.transitions_of(a) {
            let d1 = base.dcmp(&a1);
            if label.is_silent() && d1 == db {
                continue;
            }
            let ok = closure.states.iter().any(|b2| {
                base.dcmp(b2) == da
                    && sys
                        .transitions_of(b2)
                        .iter()
                        .any(|(l2, b1)| *l2 == label && base.dcmp(b1) == d1)
            });
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rewrites a prime string back into some process with the same decomposition,
/// folding random occurrences of equation right-hand sides into their constants.
pub fn refold(base: &DecompositionBase, primes: &[ConstId], rng: &mut impl Rng) -> Process {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < primes.len() {
        let rest = &primes[pos..];
        let matches: Vec<(ConstId, usize)> = (0..base.len() as u32)
            .map(ConstId)
            .filter_map(|c| base.equation(c).map(|a| (c, a)))
            .filter(|(_, a)| rest.starts_with(a.ids()))
            .map(|(c, a)| (c, a.len()))
            .collect();
        match matches.choose(rng) {
            Some(&(c, len)) if rng.gen_bool(0.7) => {
                out.push(c);
                pos += len;
            }
            _ => {
                out.push(rest[0]);
                pos += 1;
            }
        }
    }
    Process(out)
}

fn random_process(n: usize, max_len: usize, rng: &mut impl Rng) -> Process {
    let len = rng.gen_range(1..=max_len);
    Process((0..len).map(|_| ConstId(rng.gen_range(0..n as u32))).collect())
}

/// Checks every equation of `base` against the game, the base invariants, and
/// `sample_budget` random pairs with equal decompositions.
pub fn verify_base_generators(
    std: &StandardSystem,
    base: &DecompositionBase,
    k_max: u32,
    sample_budget: usize,
    seed: u64,
) -> Result<VerifyReport, OracleError> {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = Oracle::new(std);

    if let Err(e) = base.validate(std) {
        report.structural_failures.push(e.to_string());
        return Ok(report);
    }

    let primes = base.primes();
    for &x in &primes {
        for m in std.moves(&Process::single(x)) {
            if m.class.is_decreasing() && base.dcmp(&m.target).ids() == [x] {
                report
                    .structural_failures
                    .push(format!("prime {} keeps its class after a decreasing move", std.name(x)));
            }
        }
    }
    for _ in 0..sample_budget.min(64) {
        let len = rng.gen_range(1..=3);
        let alpha: Vec<ConstId> = (0..len).map(|_| *primes.choose(&mut rng).expect("X1 is prime")).collect();
        let alpha = Process(alpha);
        for m in std.moves(&alpha) {
            if m.class.is_decreasing() && base.dcmp(&m.target).ids() == alpha.constants() {
                report.structural_failures.push(format!(
                    "prime string {} keeps its class after a decreasing move",
                    std.format_process(&alpha)
                ));
            }
        }
    }

    for x in std.system().constant_ids() {
        let Some(alpha) = base.equation(x) else { continue };
        let (l, r) = (Process::single(x), alpha.to_process());
        report.equations_checked += 1;
        if let Search::Distinguished { level, distinction } = oracle.find_distinction(&l, &r, k_max)? {
            report.equation_failures.push(Failure { left: l.clone(), right: r.clone(), level, distinction });
        }
        if !expansion_holds(std, base, &l, &r)? {
            report
                .expansion_failures
                .push(format!("{} = {}", std.name(x), std.format_process(&r)));
        }
    }

    let n = std.num_constants();
    for _ in 0..sample_budget {
        let p = random_process(n, 3, &mut rng);
        let q = refold(base, base.dcmp(&p).ids(), &mut rng);
        report.samples_checked += 1;
        if let Search::Distinguished { level, distinction } = oracle.find_distinction(&p, &q, k_max)? {
            report.sample_failures.push(Failure { left: p.clone(), right: q.clone(), level, distinction });
        }
        if !expansion_holds(std, base, &p, &q)? {
            report
                .expansion_failures
                .push(format!("{} ~ {}", std.format_process(&p), std.format_process(&q)));
        }
    }
    Ok(report)
}
