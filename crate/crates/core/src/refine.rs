//! Partition refinement over decomposition bases.
//!
//! Starting from the norm-equality base, each iteration rebuilds the base in
//! standard index order. For a composite `Xi` only a handful of candidate
//! decompositions `δ` need to be tested: `Xj · sffx(norm(Xi) - norm(Xj); s)`
//! where `s` is the new decomposition of the right-hand side of a fixed
//! decreasing rule of `Xi`, and `Xj` is either the old leftmost prime factor of
//! `Xi` or a prime that is new in this iteration. `lpftest` decides each
//! candidate using the old base and the part of the new base already settled
//! (all indices below `i`). A constant with no accepted candidate becomes
//! prime. The loop stops once no new prime appears.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::base::{initial_base, DecompositionBase, Entry};
use crate::model::{ConstId, Process};
use crate::normalize::{Move, StandardSystem};
use crate::strings::NormedString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateMode {
    #[default]
    Pruned,
    /// Every string of earlier primes with the right norm. Desk scale only.
    Exhaustive,
}

/// Which membership test is run for each candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Procedure {
    /// The general test for systems with silent actions.
    #[default]
    Branching,
    /// The silent-free test. Only legal on realtime systems.
    Realtime,
}

/// Deliberate defects used by mutation tests to show the oracle catches engine bugs.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Do not check that increasing moves of `Xi` are matched.
    SkipIncreasingMatch,
    /// Do not check that decreasing moves of `δ` are matched.
    SkipReverseDecreasingMatch,
}

pub const DEFAULT_MAX_EXHAUSTIVE: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: CandidateMode,
    /// Upper bound on the number of candidates per constant in exhaustive mode.
    pub max_exhaustive: u64,
    pub procedure: Procedure,
    #[doc(hidden)]
    pub mutation: Option<Mutation>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: CandidateMode::Pruned,
            max_exhaustive: DEFAULT_MAX_EXHAUSTIVE,
            procedure: Procedure::Branching,
            mutation: None,
        }
    }
}

impl EngineConfig {
    pub fn with_mode(mut self, mode: CandidateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_procedure(mut self, procedure: Procedure) -> Self {
        self.procedure = procedure;
        self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("internal: decomposition of `{0}` requested before it was settled")]
    Unsettled(String),
    #[error("exhaustive mode would test {count} candidates for `{constant}` (limit {limit})")]
    GuardExceeded { constant: String, count: u64, limit: u64 },
    #[error("internal: two different decompositions accepted for `{0}`")]
    SecondAcceptance(String),
    #[error("internal: old leftmost prime factor of `{0}` is not prime in the new base")]
    LpfNotPrime(String),
    #[error("internal: prime `{0}` became composite")]
    PrimeLost(String),
    #[error("internal: prime sets are equal but bases differ")]
    UnstableFixpoint,
    #[error("internal: no fixpoint after {0} iterations")]
    IterationBound(usize),
    #[error("the realtime procedure requires a system without silent actions")]
    NotRealtime,
}

/// One chosen decreasing rule per constant (rule indices into the standard system).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedDecreasingRules {
    rules: Vec<usize>,
}

impl FixedDecreasingRules {
    pub fn rule(&self, c: ConstId) -> usize {
        self.rules[c.index()]
    }

    pub fn rhs<'a>(&self, std: &'a StandardSystem, c: ConstId) -> &'a Process {
        &std.system().rules()[self.rule(c)].rhs
    }
}

/// Picks, per constant, the least decreasing rule under
/// (visible before silent, action name, right-hand side ids).
pub fn select_decreasing_rules(std: &StandardSystem) -> FixedDecreasingRules {
    let sys = std.system();
    let rules = sys
        .constant_ids()
        .map(|c| {
            sys.rules_of(c)
                .iter()
                .copied()
                .filter(|&r| std.rule_class(r).is_decreasing())
                .min_by(|&a, &b| {
                    let (ra, rb) = (&sys.rules()[a], &sys.rules()[b]);
                    (ra.label.is_silent(), sys.action_name(ra.label), &ra.rhs)
                        .cmp(&(rb.label.is_silent(), sys.action_name(rb.label), &rb.rhs))
                })
                .expect("every constant of a standard system has a decreasing rule")
        })
        .collect();
    FixedDecreasingRules { rules }
}

/// The new base under construction: entries below the current index are settled.
#[derive(Clone, Debug)]
pub struct PartialBase<'a> {
    std: &'a StandardSystem,
    entries: Vec<Option<Entry>>,
}

impl<'a> PartialBase<'a> {
    pub fn new(std: &'a StandardSystem) -> Self {
        PartialBase {
            std,
            entries: vec![None; std.num_constants()],
        }
    }

    /// A partial base whose entries below `upto` are copied from `base`.
    pub fn prefix_of(std: &'a StandardSystem, base: &DecompositionBase, upto: ConstId) -> Self {
        let mut p = Self::new(std);
        for i in 0..upto.index() {
            p.entries[i] = Some(base.entries()[i].clone());
        }
        p
    }

    pub fn settle(&mut self, c: ConstId, entry: Entry) {
        debug_assert!(self.entries[c.index()].is_none());
        self.entries[c.index()] = Some(entry);
    }

    pub fn is_prime(&self, c: ConstId) -> bool {
        matches!(self.entries[c.index()], Some(Entry::Prime))
    }

    pub fn dcmp(&self, p: &Process) -> Result<NormedString, EngineError> {
        let mut out = Vec::with_capacity(p.len());
        for &c in p.constants() {
            match &self.entries[c.index()] {
                Some(Entry::Prime) => out.push(c),
                Some(Entry::Composite(alpha)) => out.extend_from_slice(alpha.ids()),
                None => return Err(EngineError::Unsettled(self.std.name(c).to_string())),
            }
        }
        Ok(NormedString::new(self.std.weights(), out))
    }

    fn finish(self) -> DecompositionBase {
        let entries = self
            .entries
            .into_iter()
            .map(|e| e.expect("all constants settled"))
            .collect();
        DecompositionBase::from_entries_unchecked(std::sync::Arc::clone(self.std.weights()), entries)
    }
}

/// Result of testing one candidate. Step numbers refer to the procedure that ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum Decision {
    /// `shortcut` is set when a silent decreasing move of `Xi` lands on `δ`,
    /// which accepts without checking the moves of `δ`.
    Accept { shortcut: bool },
    Reject { step: u8 },
}

impl Decision {
    pub fn accepted(self) -> bool {
        matches!(self, Decision::Accept { .. })
    }
}

/// Candidate decompositions for composite `xi`.
pub fn candidates_for(
    std: &StandardSystem,
    old: &DecompositionBase,
    next: &PartialBase<'_>,
    xi: ConstId,
    fixed: &FixedDecreasingRules,
    config: &EngineConfig,
) -> Result<Vec<NormedString>, EngineError> {
    match config.mode {
        CandidateMode::Pruned => pruned_candidates(std, old, next, xi, fixed),
        CandidateMode::Exhaustive => exhaustive_candidates(std, next, xi, config.max_exhaustive),
    }
}

fn pruned_candidates(
    std: &StandardSystem,
    old: &DecompositionBase,
    next: &PartialBase<'_>,
    xi: ConstId,
    fixed: &FixedDecreasingRules,
) -> Result<Vec<NormedString>, EngineError> {
    let s = next.dcmp(fixed.rhs(std, xi))?;
    let lpf = old.lpf(xi);
    if !next.is_prime(lpf) {
        return Err(EngineError::LpfNotPrime(std.name(xi).to_string()));
    }
    let mut heads = vec![lpf];
    heads.extend(
        (lpf.0 + 1..xi.0)
            .map(ConstId)
            .filter(|&j| next.is_prime(j) && !old.is_prime(j)),
    );

    let target = std.norm(xi);
    let mut out = Vec::with_capacity(heads.len());
    for xj in heads {
        let nj = std.norm(xj);
        if nj > target || target - nj > s.norm() {
            continue;
        }
        if let Some(suffix) = s.suffix_with_norm(target - nj) {
            let head = NormedString::new(std.weights(), vec![xj]);
            out.push(head.concat(&suffix).expect("same table"));
        }
    }
    Ok(out)
}

fn exhaustive_candidates(
    std: &StandardSystem,
    next: &PartialBase<'_>,
    xi: ConstId,
    limit: u64,
) -> Result<Vec<NormedString>, EngineError> {
    let primes: Vec<ConstId> = (0..xi.0).map(ConstId).filter(|&p| next.is_prime(p)).collect();
    let target = std.norm(xi);

    // count[h]: number of prime strings of norm h
    let mut count = vec![0u64; target as usize + 1];
    count[0] = 1;
    for h in 1..=target as usize {
        let mut total = 0u64;
        for &p in &primes {
            let np = std.norm(p) as usize;
            if np <= h {
                total = total.saturating_add(count[h - np]);
            }
        }
        count[h] = total;
    }
    let total = count[target as usize];
    if total > limit {
        return Err(EngineError::GuardExceeded {
            constant: std.name(xi).to_string(),
            count: total,
            limit,
        });
    }

    let mut out = Vec::with_capacity(total as usize);
    let mut stack = Vec::new();
    fn walk(
        std: &StandardSystem,
        primes: &[ConstId],
        remaining: u64,
        stack: &mut Vec<ConstId>,
        out: &mut Vec<NormedString>,
    ) {
        if remaining == 0 {
            out.push(NormedString::new(std.weights(), stack.clone()));
            return;
        }
        for &p in primes {
            let np = std.norm(p);
            if np <= remaining {
                stack.push(p);
                walk(std, primes, remaining - np, stack, out);
                stack.pop();
            }
        }
    }
    walk(std, &primes, target, &mut stack, &mut out);
    Ok(out)
}

struct Sides {
    xi_moves: Vec<Move>,
    delta_moves: Vec<Move>,
}

fn sides(std: &StandardSystem, xi: ConstId, delta: &NormedString) -> Sides {
    Sides {
        xi_moves: std.moves(&Process::single(xi)),
        delta_moves: std.moves(&delta.to_process()),
    }
}

/// Decomposes every move target: decreasing targets under the new (partial)
/// base, increasing ones under the old base.
fn decompose(
    moves: &[Move],
    old: &DecompositionBase,
    next: &PartialBase<'_>,
) -> Result<Vec<NormedString>, EngineError> {
    moves
        .iter()
        .map(|m| {
            if m.class.is_decreasing() {
                next.dcmp(&m.target)
            } else {
                Ok(old.dcmp(&m.target))
            }
        })
        .collect()
}

fn matched(
    m: &Move,
    target: &NormedString,
    others: &[Move],
    other_targets: &[NormedString],
) -> bool {
    others
        .iter()
        .zip(other_targets)
        .any(|(o, t)| o.class == m.class && o.label == m.label && t.equal(target))
}

/// Tests `Xi ≡' δ` where `≡'` is the new base being built.
///
/// `δ` must be a string of new primes below `xi`; every decomposition under
/// the new base that the test needs lies below `xi` as well.
pub fn lpftest(
    std: &StandardSystem,
    old: &DecompositionBase,
    next: &PartialBase<'_>,
    xi: ConstId,
    delta: &NormedString,
    config: &EngineConfig,
) -> Result<Decision, EngineError> {
    match config.procedure {
        Procedure::Branching => lpftest_branching(std, old, next, xi, delta, config.mutation),
        Procedure::Realtime => lpftest_realtime(std, old, next, xi, delta),
    }
}

fn lpftest_branching(
    std: &StandardSystem,
    old: &DecompositionBase,
    next: &PartialBase<'_>,
    xi: ConstId,
    delta: &NormedString,
    mutation: Option<Mutation>,
) -> Result<Decision, EngineError> {
    // step 1
    if !old.dcmp_ids(&[xi]).equal(&old.dcmp_ids(delta.ids())) {
        return Ok(Decision::Reject { step: 1 });
    }
    let Sides { xi_moves, delta_moves } = sides(std, xi, delta);
    let xi_targets = decompose(&xi_moves, old, next)?;
    let delta_targets = decompose(&delta_moves, old, next)?;

    // step 2: decreasing moves of Xi
    for (m, t) in xi_moves.iter().zip(&xi_targets) {
        if !m.class.is_decreasing() {
            continue;
        }
        let vacuous = m.label.is_silent() && t.equal(delta);
        if !vacuous && !matched(m, t, &delta_moves, &delta_targets) {
            return Ok(Decision::Reject { step: 2 });
        }
    }

    // step 3: increasing moves of Xi
    if mutation != Some(Mutation::SkipIncreasingMatch) {
        for (m, t) in xi_moves.iter().zip(&xi_targets) {
            if !m.class.is_decreasing() && !matched(m, t, &delta_moves, &delta_targets) {
                return Ok(Decision::Reject { step: 3 });
            }
        }
    }

    // step 4: a silent decreasing move of Xi onto δ settles the reverse direction
    let shortcut = xi_moves
        .iter()
        .zip(&xi_targets)
        .any(|(m, t)| m.label.is_silent() && m.class.is_decreasing() && t.equal(delta));
    if shortcut {
        return Ok(Decision::Accept { shortcut: true });
    }

    // step 5: decreasing moves of δ
    if mutation != Some(Mutation::SkipReverseDecreasingMatch) {
        for (m, t) in delta_moves.iter().zip(&delta_targets) {
            if m.class.is_decreasing() && !matched(m, t, &xi_moves, &xi_targets) {
                return Ok(Decision::Reject { step: 5 });
            }
        }
    }

    // step 6: increasing moves of δ
    for (m, t) in delta_moves.iter().zip(&delta_targets) {
        if !m.class.is_decreasing() && !matched(m, t, &xi_moves, &xi_targets) {
            return Ok(Decision::Reject { step: 6 });
        }
    }

    Ok(Decision::Accept { shortcut: false })
}

/// The silent-free membership test, written out step by step on its own.
pub fn lpftest_realtime(
    std: &StandardSystem,
    old: &DecompositionBase,
    next: &PartialBase<'_>,
    xi: ConstId,
    delta: &NormedString,
) -> Result<Decision, EngineError> {
    if !std.is_realtime() {
        return Err(EngineError::NotRealtime);
    }
    // 1. dcmp_B(Xi) = dcmp_B(δ)
    if old.dcmp_ids(&[xi]) != old.dcmp_ids(delta.ids()) {
        return Ok(Decision::Reject { step: 1 });
    }
    let xi_moves = std.moves(&Process::single(xi));
    let delta_moves = std.moves(&delta.to_process());

    // 2. every Xi -a->dec α has δ -a->dec β with dcmp_B'(α) = dcmp_B'(β)
    for a in xi_moves.iter().filter(|m| m.class.is_decreasing()) {
        let da = next.dcmp(&a.target)?;
        let mut found = false;
        for b in delta_moves.iter().filter(|m| m.class.is_decreasing() && m.label == a.label) {
            if next.dcmp(&b.target)? == da {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(Decision::Reject { step: 2 });
        }
    }
    // 3. every Xi -a->inc α has δ -a->inc β with dcmp_B(α) = dcmp_B(β)
    for a in xi_moves.iter().filter(|m| !m.class.is_decreasing()) {
        let da = old.dcmp(&a.target);
        let found = delta_moves
            .iter()
            .filter(|m| !m.class.is_decreasing() && m.label == a.label)
            .any(|b| old.dcmp(&b.target) == da);
        if !found {
            return Ok(Decision::Reject { step: 3 });
        }
    }
    // 4. every δ -a->dec β has Xi -a->dec α with dcmp_B'(α) = dcmp_B'(β)
    for b in delta_moves.iter().filter(|m| m.class.is_decreasing()) {
        let db = next.dcmp(&b.target)?;
        let mut found = false;
        for a in xi_moves.iter().filter(|m| m.class.is_decreasing() && m.label == b.label) {
            if next.dcmp(&a.target)? == db {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(Decision::Reject { step: 4 });
        }
    }
    // 5. every δ -a->inc β has Xi -a->inc α with dcmp_B(α) = dcmp_B(β)
    for b in delta_moves.iter().filter(|m| !m.class.is_decreasing()) {
        let db = old.dcmp(&b.target);
        let found = xi_moves
            .iter()
            .filter(|m| !m.class.is_decreasing() && m.label == b.label)
            .any(|a| old.dcmp(&a.target) == db);
        if !found {
            return Ok(Decision::Reject { step: 5 });
        }
    }
    Ok(Decision::Accept { shortcut: false })
}

#[derive(Clone, Debug)]
pub struct CandidateRecord {
    pub delta: NormedString,
    pub decision: Decision,
}

#[derive(Clone, Debug)]
pub struct ConstantRecord {
    pub constant: ConstId,
    pub candidates: Vec<CandidateRecord>,
    pub accepted: Option<NormedString>,
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub before: DecompositionBase,
    pub after: DecompositionBase,
    pub new_primes: Vec<ConstId>,
    /// One record per constant that was composite before the iteration.
    pub constants: Vec<ConstantRecord>,
}

#[derive(Clone, Debug, Default)]
pub struct RefinementTrace {
    pub iterations: Vec<IterationRecord>,
}

impl RefinementTrace {
    pub fn to_json(&self, std: &StandardSystem) -> Value {
        let name = |c: ConstId| std.name(c).to_string();
        let fmt = |s: &NormedString| -> Vec<String> { s.ids().iter().map(|&c| name(c)).collect() };
        let iterations: Vec<Value> = self
            .iterations
            .iter()
            .enumerate()
            .map(|(k, it)| {
                let constants: Vec<Value> = it
                    .constants
                    .iter()
                    .map(|cr| {
                        let cands: Vec<Value> = cr
                            .candidates
                            .iter()
                            .map(|c| {
                                let mut v = serde_json::to_value(c.decision).expect("plain enum");
                                v["delta"] = json!(fmt(&c.delta));
                                v
                            })
                            .collect();
                        json!({
                            "constant": name(cr.constant),
                            "candidates": cands,
                            "accepted": cr.accepted.as_ref().map(fmt),
                        })
                    })
                    .collect();
                json!({
                    "iteration": k + 1,
                    "before": it.before.to_json(std),
                    "after": it.after.to_json(std),
                    "new_primes": it.new_primes.iter().map(|&c| name(c)).collect::<Vec<_>>(),
                    "constants": constants,
                })
            })
            .collect();
        json!({ "iterations": iterations })
    }
}

/// One refinement step: computes the next base from `old`.
pub fn refine(
    std: &StandardSystem,
    old: &DecompositionBase,
    fixed: &FixedDecreasingRules,
    config: &EngineConfig,
) -> Result<(DecompositionBase, IterationRecord), EngineError> {
    if config.procedure == Procedure::Realtime && !std.is_realtime() {
        return Err(EngineError::NotRealtime);
    }
    let mut next = PartialBase::new(std);
    let mut records = Vec::new();
    let mut new_primes = Vec::new();

    for xi in std.system().constant_ids() {
        if old.is_prime(xi) {
            next.settle(xi, Entry::Prime);
            continue;
        }
        let candidates = candidates_for(std, old, &next, xi, fixed, config)?;
        let mut tested = Vec::new();
        let mut accepted: Option<NormedString> = None;
        let mut rest = candidates.into_iter();
        for delta in rest.by_ref() {
            let decision = lpftest(std, old, &next, xi, &delta, config)?;
            tested.push(CandidateRecord {
                delta: delta.clone(),
                decision,
            });
            if decision.accepted() {
                accepted = Some(delta);
                break;
            }
        }
        if cfg!(debug_assertions) && accepted.is_some() {
            for delta in rest {
                if lpftest(std, old, &next, xi, &delta, config)?.accepted() {
                    return Err(EngineError::SecondAcceptance(std.name(xi).to_string()));
                }
            }
        }
        match &accepted {
            Some(delta) => next.settle(xi, Entry::Composite(delta.clone())),
            None => {
                next.settle(xi, Entry::Prime);
                new_primes.push(xi);
            }
        }
        records.push(ConstantRecord {
            constant: xi,
            candidates: tested,
            accepted,
        });
    }

    let new = next.finish();
    Ok((
        new.clone(),
        IterationRecord {
            before: old.clone(),
            after: new,
            new_primes,
            constants: records,
        },
    ))
}

/// Iterates [`refine`] from the initial base until the prime set is stable.
pub fn compute_bisimilarity_base(
    std: &StandardSystem,
    config: &EngineConfig,
) -> Result<(DecompositionBase, RefinementTrace), EngineError> {
    let fixed = select_decreasing_rules(std);
    let n = std.num_constants();
    let mut base = initial_base(std);
    let mut trace = RefinementTrace::default();
    loop {
        let (next, record) = refine(std, &base, &fixed, config)?;
        for p in base.primes() {
            if !next.is_prime(p) {
                return Err(EngineError::PrimeLost(std.name(p).to_string()));
            }
        }
        let stable = next.same_primes(&base);
        if stable && next != base {
            return Err(EngineError::UnstableFixpoint);
        }
        trace.iterations.push(record);
        base = next;
        if stable {
            break;
        }
        if trace.iterations.len() >= n.max(1) {
            return Err(EngineError::IterationBound(trace.iterations.len()));
        }
    }
    Ok((base, trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Bisimilar,
    NotBisimilar,
    /// Only produced by bounded oracle queries: no distinction up to `bound` rounds.
    Unknown { bound: u32 },
}

/// A decided query with the final base as evidence.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub base: DecompositionBase,
}

/// Decides `p ≃ q` by comparing prime decompositions under the final base.
pub fn check_equivalence(
    std: &StandardSystem,
    p: &Process,
    q: &Process,
    config: &EngineConfig,
) -> Result<Verdict, EngineError> {
    let (base, _) = compute_bisimilarity_base(std, config)?;
    Ok(verdict_from_base(base, p, q))
}

pub fn verdict_from_base(base: DecompositionBase, p: &Process, q: &Process) -> Verdict {
    let outcome = if base.equivalent(p, q) {
        Outcome::Bisimilar
    } else {
        Outcome::NotBisimilar
    };
    Verdict { outcome, base }
}
