//! Stratified branching bisimulation game.
//!
//! Level 0 relates processes of equal norm. Level `k` relates `p` and `q` when
//! they have equal norm and every move of either side is answered with level
//! `k - 1`: a silent move may be answered by standing still, and any move may
//! be answered by silent steps to some `q''` related to `p`, then the same
//! action. Bisimilar processes are related at every level, so failing at some
//! level refutes bisimilarity, and the failing game is returned as a
//! certificate that [`replay`] checks against the transition rules alone.
//!
//! Only silent steps that keep the norm are considered for the defender. Silent
//! steps never lower the norm, so any longer silent path ends in a process
//! whose norm differs from the attacker's, which level 0 already rejects.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::model::{ActionId, Process};
use crate::normalize::NormedSystem;

use super::closure::{silent_closure_dec, DEFAULT_CLOSURE_GUARD};
use super::OracleError;

pub const DEFAULT_STATE_GUARD: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Maximum number of memoised pairs.
    pub max_states: usize,
    /// Maximum size of a single silent closure.
    pub closure_guard: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_states: DEFAULT_STATE_GUARD,
            closure_guard: DEFAULT_CLOSURE_GUARD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A winning attacker strategy showing two processes are not bisimilar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distinction {
    NormMismatch {
        left: Process,
        right: Process,
    },
    Attack {
        left: Process,
        right: Process,
        side: Side,
        label: ActionId,
        target: Process,
        /// Refutes standing still; present exactly when the attack is silent.
        vacuous: Option<Arc<Distinction>>,
        /// One entry per process in the defender's silent closure.
        stages: Vec<Stage>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub via: Process,
    pub outcome: StageOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageOutcome {
    /// `via` is distinguished from the attacker's source, so no reply through it counts.
    Unrelated(Arc<Distinction>),
    /// Every `via -label-> reached` is distinguished from the attacker's target.
    Replies(Vec<(Process, Arc<Distinction>)>),
}

impl Distinction {
    pub fn pair(&self) -> (&Process, &Process) {
        match self {
            Distinction::NormMismatch { left, right } | Distinction::Attack { left, right, .. } => {
                (left, right)
            }
        }
    }

    fn refutes(&self, a: &Process, b: &Process) -> bool {
        let (l, r) = self.pair();
        (l == a && r == b) || (l == b && r == a)
    }

    fn children(&self) -> Vec<&Arc<Distinction>> {
        match self {
            Distinction::NormMismatch { .. } => Vec::new(),
            Distinction::Attack { vacuous, stages, .. } => {
                let mut out: Vec<&Arc<Distinction>> = vacuous.iter().collect();
                for s in stages {
                    match &s.outcome {
                        StageOutcome::Unrelated(d) => out.push(d),
                        StageOutcome::Replies(rs) => out.extend(rs.iter().map(|(_, d)| d)),
                    }
                }
                out
            }
        }
    }

    /// Number of rounds the attacker needs in the worst case.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Distinct nodes, counting shared subtrees once.
    pub fn node_count(&self) -> usize {
        fn walk(d: &Distinction, seen: &mut HashSet<*const Distinction>) -> usize {
            let mut n = 1;
            for c in d.children() {
                if seen.insert(Arc::as_ptr(c)) {
                    n += walk(c, seen);
                }
            }
            n
        }
        walk(self, &mut HashSet::new())
    }

    pub fn to_json(&self, std: &NormedSystem) -> Value {
        let f = |p: &Process| std.system().format_process(p);
        match self {
            Distinction::NormMismatch { left, right } => json!({
                "left": f(left),
                "right": f(right),
                "norm_mismatch": [std.norm_of(left), std.norm_of(right)],
            }),
            Distinction::Attack {
                left,
                right,
                side,
                label,
                target,
                vacuous,
                stages,
            } => {
                let stages: Vec<Value> = stages
                    .iter()
                    .map(|s| match &s.outcome {
                        StageOutcome::Unrelated(d) => json!({"via": f(&s.via), "unrelated": d.to_json(std)}),
                        StageOutcome::Replies(rs) => json!({
                            "via": f(&s.via),
                            "replies": rs.iter().map(|(p, d)| json!({"reached": f(p), "refuted": d.to_json(std)})).collect::<Vec<_>>(),
                        }),
                    })
                    .collect();
                json!({
                    "left": f(left),
                    "right": f(right),
                    "attack": {
                        "side": side,
                        "action": std.system().action_name(*label),
                        "target": f(target),
                    },
                    "stay": vacuous.as_ref().map(|d| d.to_json(std)),
                    "stages": stages,
                })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Search {
    Distinguished { level: u32, distinction: Arc<Distinction> },
    NoneFound { bound: u32 },
}

impl Search {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, Search::Distinguished { .. })
    }
}

#[derive(Clone, Copy, Debug)]
struct Levels {
    /// Related at every level up to and including this one.
    true_upto: u32,
    /// Unrelated from this level on.
    false_from: u32,
}

type Pair = (Process, Process);

fn key(p: &Process, q: &Process) -> Pair {
    if p <= q {
        (p.clone(), q.clone())
    } else {
        (q.clone(), p.clone())
    }
}

/// Removes the longest common prefix and suffix.
fn strip<'a>(p: &'a [crate::model::ConstId], q: &'a [crate::model::ConstId]) -> (&'a [crate::model::ConstId], &'a [crate::model::ConstId]) {
    let pre = p.iter().zip(q).take_while(|(a, b)| a == b).count();
    let (p, q) = (&p[pre..], &q[pre..]);
    let suf = p.iter().rev().zip(q.iter().rev()).take_while(|(a, b)| a == b).count();
    (&p[..p.len() - suf], &q[..q.len() - suf])
}

/// Memoised approximant game over one totally normed system.
pub struct Oracle<'a> {
    std: &'a NormedSystem,
    config: OracleConfig,
    memo: HashMap<Pair, Levels>,
    closures: HashMap<Process, Arc<Vec<Process>>>,
    built: HashMap<Pair, Arc<Distinction>>,
}

struct Attack {
    side: Side,
    label: ActionId,
    target: Process,
}

impl<'a> Oracle<'a> {
    pub fn new(std: &'a NormedSystem) -> Self {
        Self::with_config(std, OracleConfig::default())
    }

    pub fn with_config(std: &'a NormedSystem, config: OracleConfig) -> Self {
        Oracle {
            std,
            config,
            memo: HashMap::new(),
            closures: HashMap::new(),
            built: HashMap::new(),
        }
    }

    pub fn states(&self) -> usize {
        self.memo.len()
    }

    fn closure(&mut self, p: &Process) -> Result<Arc<Vec<Process>>, OracleError> {
        if let Some(c) = self.closures.get(p) {
            return Ok(Arc::clone(c));
        }
        let c = Arc::new(silent_closure_dec(self.std, p, self.config.closure_guard)?.states);
        self.closures.insert(p.clone(), Arc::clone(&c));
        Ok(c)
    }

    /// Whether `p` and `q` survive `k` rounds.
    pub fn related(&mut self, p: &Process, q: &Process, k: u32) -> Result<bool, OracleError> {
        if p == q {
            return Ok(true);
        }
        if self.std.norm_of(p) != self.std.norm_of(q) {
            return Ok(false);
        }
        if k == 0 {
            return Ok(true);
        }
        let key = key(p, q);
        if let Some(l) = self.memo.get(&key) {
            if k <= l.true_upto {
                return Ok(true);
            }
            if k >= l.false_from {
                return Ok(false);
            }
        }
        if self.memo.len() >= self.config.max_states {
            return Err(OracleError::StateGuard(self.config.max_states));
        }

        // Every level is a congruence, so a related core makes the whole pair related.
        let (sp, sq) = strip(p.constants(), q.constants());
        let mut result = false;
        if sp.len() < p.len() {
            let (sp, sq) = (Process(sp.to_vec()), Process(sq.to_vec()));
            result = self.related(&sp, &sq, k)?;
        }
        if !result {
            result = self.winning_attack(p, q, k)?.is_none();
        }

        let entry = self.memo.entry(key).or_insert(Levels {
            true_upto: 0,
            false_from: u32::MAX,
        });
        if result {
            entry.true_upto = entry.true_upto.max(k);
        } else {
            entry.false_from = entry.false_from.min(k);
        }
        Ok(result)
    }

    /// An attacker move at level `k` that no defender reply answers at level `k - 1`.
    fn winning_attack(&mut self, p: &Process, q: &Process, k: u32) -> Result<Option<Attack>, OracleError> {
        for (side, a, b) in [(Side::Left, p, q), (Side::Right, q, p)] {
            for (label, a1) in self.std.system().transitions_of(a) {
                if !self.answered(a, b, label, &a1, k - 1)? {
                    return Ok(Some(Attack { side, label, target: a1 }));
                }
            }
        }
        Ok(None)
    }

    fn answered(&mut self, a: &Process, b: &Process, label: ActionId, a1: &Process, k: u32) -> Result<bool, OracleError> {
        if label.is_silent() && self.related(a1, b, k)? {
            return Ok(true);
        }
        let closure = self.closure(b)?;
        for b2 in closure.iter() {
            if !self.related(a, b2, k)? {
                continue;
            }
            for (l2, b1) in self.std.system().transitions_of(b2) {
                if l2 == label && self.related(a1, &b1, k)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Iterative deepening up to `k_max` rounds.
    pub fn find_distinction(&mut self, p: &Process, q: &Process, k_max: u32) -> Result<Search, OracleError> {
        for k in 0..=k_max {
            if !self.related(p, q, k)? {
                let distinction = self.build(p, q, k)?;
                return Ok(Search::Distinguished { level: k, distinction });
            }
        }
        Ok(Search::NoneFound { bound: k_max })
    }

    fn least_failing(&mut self, p: &Process, q: &Process, upto: u32) -> Result<u32, OracleError> {
        for j in 0..=upto {
            if !self.related(p, q, j)? {
                return Ok(j);
            }
        }
        Err(OracleError::Internal("pair expected to be unrelated".into()))
    }

    /// Certificate for a pair known to be unrelated at level `k`.
    fn build(&mut self, p: &Process, q: &Process, k: u32) -> Result<Arc<Distinction>, OracleError> {
        let key = (p.clone(), q.clone());
        if let Some(d) = self.built.get(&key) {
            return Ok(Arc::clone(d));
        }
        let k = self.least_failing(p, q, k)?;
        let d = if k == 0 {
            Distinction::NormMismatch {
                left: p.clone(),
                right: q.clone(),
            }
        } else {
            let attack = self
                .winning_attack(p, q, k)?
                .ok_or_else(|| OracleError::Internal("no winning attack at a failing level".into()))?;
            let (a, b) = match attack.side {
                Side::Left => (p, q),
                Side::Right => (q, p),
            };
            let j = k - 1;
            let vacuous = if attack.label.is_silent() {
                Some(self.build(&attack.target, b, j)?)
            } else {
                None
            };
            let mut stages = Vec::new();
            let closure = self.closure(b)?;
            for b2 in closure.iter() {
                let outcome = if !self.related(a, b2, j)? {
                    StageOutcome::Unrelated(self.build(a, b2, j)?)
                } else {
                    let mut replies = Vec::new();
                    for (l2, b1) in self.std.system().transitions_of(b2) {
                        if l2 == attack.label {
                            let d = self.build(&attack.target, &b1, j)?;
                            replies.push((b1, d));
                        }
                    }
                    StageOutcome::Replies(replies)
                };
                stages.push(Stage {
                    via: b2.clone(),
                    outcome,
                });
            }
            Distinction::Attack {
                left: p.clone(),
                right: q.clone(),
                side: attack.side,
                label: attack.label,
                target: attack.target,
                vacuous,
                stages,
            }
        };
        let d = Arc::new(d);
        self.built.insert(key, Arc::clone(&d));
        Ok(d)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("leaf claims a norm mismatch but both sides have norm {0}")]
    NormsEqual(u64),
    #[error("attack node on processes of different norm")]
    NormsDiffer,
    #[error("attacker move is not a transition")]
    NoSuchMove,
    #[error("silent attack without a refutation of standing still")]
    MissingVacuous,
    #[error("a child refutes the wrong pair")]
    WrongChild,
    #[error("defender state `{0}` has no stage")]
    MissingStage(String),
    #[error("defender reply to `{0}` is not refuted")]
    MissingReply(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Checks a certificate against the transition rules, independently of the game solver.
pub fn replay(std: &NormedSystem, d: &Distinction) -> Result<(), ReplayError> {
    fn go(std: &NormedSystem, d: &Arc<Distinction>, seen: &mut HashSet<*const Distinction>) -> Result<(), ReplayError> {
        if !seen.insert(Arc::as_ptr(d)) {
            return Ok(());
        }
        check(std, d, seen)
    }

    fn check(std: &NormedSystem, d: &Distinction, seen: &mut HashSet<*const Distinction>) -> Result<(), ReplayError> {
        let sys = std.system();
        match d {
            Distinction::NormMismatch { left, right } => {
                let n = std.norm_of(left);
                if n == std.norm_of(right) {
                    return Err(ReplayError::NormsEqual(n));
                }
                Ok(())
            }
            Distinction::Attack {
                left,
                right,
                side,
                label,
                target,
                vacuous,
                stages,
            } => {
                if std.norm_of(left) != std.norm_of(right) {
                    return Err(ReplayError::NormsDiffer);
                }
                let (a, b) = match side {
                    Side::Left => (left, right),
                    Side::Right => (right, left),
                };
                if !sys.transitions_of(a).iter().any(|(l, t)| l == label && t == target) {
                    return Err(ReplayError::NoSuchMove);
                }
                if label.is_silent() {
                    let v = vacuous.as_ref().ok_or(ReplayError::MissingVacuous)?;
                    if !v.refutes(target, b) {
                        return Err(ReplayError::WrongChild);
                    }
                    go(std, v, seen)?;
                }
                let closure = silent_closure_dec(std, b, DEFAULT_CLOSURE_GUARD)?;
                for b2 in &closure.states {
                    let stage = stages
                        .iter()
                        .find(|s| &s.via == b2)
                        .ok_or_else(|| ReplayError::MissingStage(std.system().format_process(b2)))?;
                    match &stage.outcome {
                        StageOutcome::Unrelated(c) => {
                            if !c.refutes(a, b2) {
                                return Err(ReplayError::WrongChild);
                            }
                            go(std, c, seen)?;
                        }
                        StageOutcome::Replies(rs) => {
                            for (l2, b1) in sys.transitions_of(b2) {
                                if l2 != *label {
                                    continue;
                                }
                                let (_, c) = rs
                                    .iter()
                                    .find(|(r, _)| *r == b1)
                                    .ok_or_else(|| ReplayError::MissingReply(std.system().format_process(&b1)))?;
                                if !c.refutes(target, &b1) {
                                    return Err(ReplayError::WrongChild);
                                }
                                go(std, c, seen)?;
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    check(std, d, &mut HashSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_system;
    use crate::normalize::{standardize, StandardSystem};

    const PREEMPTED: &str = "constants: X X' Y Y'\nX -b-> eps\nX -tau-> X'\nX' -a-> eps\nX -a-> eps\nY -b-> eps\nY -tau-> Y'\nY' -a-> eps\n";
    const INERT_TAU: &str = "constants: A B X Y\nX -a-> Y\nY -a-> eps\nY -tau-> X\nA -a-> eps\nA -tau-> B\nB -a-> eps\n";

    fn std_of(text: &str) -> StandardSystem {
        standardize(&parse_system(text).unwrap()).unwrap()
    }

    #[test]
    fn identity_is_related_at_every_level() {
        let std = std_of(INERT_TAU);
        let mut o = Oracle::new(&std);
        let p = std.parse_process("X Y A").unwrap();
        for k in 0..10 {
            assert!(o.related(&p, &p, k).unwrap());
        }
        assert!(!o.find_distinction(&p, &p, 8).unwrap().is_distinguished());
    }

    #[test]
    fn preempted_choice_x_and_y_are_distinguished() {
        let std = std_of(PREEMPTED);
        let mut o = Oracle::new(&std);
        let (x, y) = (std.parse_process("X").unwrap(), std.parse_process("Y").unwrap());
        let Search::Distinguished { level, distinction } = o.find_distinction(&x, &y, 16).unwrap() else {
            panic!("X and Y must be distinguished");
        };
        assert!(level >= 1);
        replay(&std, &distinction).unwrap();
        assert_eq!(distinction.pair(), (&x, &y));
    }

    #[test]
    fn preempted_choice_primed_constants_agree() {
        let std = std_of(PREEMPTED);
        let mut o = Oracle::new(&std);
        let (a, b) = (std.parse_process("X'").unwrap(), std.parse_process("Y'").unwrap());
        assert!(!o.find_distinction(&a, &b, 16).unwrap().is_distinguished());
    }

    #[test]
    fn inert_tau_equations_survive() {
        let std = std_of(INERT_TAU);
        let mut o = Oracle::new(&std);
        let p = |s: &str| std.parse_process(s).unwrap();
        assert!(!o.find_distinction(&p("A"), &p("B"), 16).unwrap().is_distinguished());
        assert!(!o.find_distinction(&p("A Y"), &p("B Y"), 16).unwrap().is_distinguished());
        assert!(!o.find_distinction(&p("X"), &p("B Y"), 16).unwrap().is_distinguished());
        assert!(o.find_distinction(&p("X"), &p("A A"), 16).unwrap().is_distinguished());
    }

    #[test]
    fn norm_mismatch_is_a_leaf() {
        let std = std_of(INERT_TAU);
        let mut o = Oracle::new(&std);
        let p = |s: &str| std.parse_process(s).unwrap();
        let Search::Distinguished { level: 0, distinction } = o.find_distinction(&p("A"), &p("X"), 4).unwrap() else {
            panic!();
        };
        assert!(matches!(*distinction, Distinction::NormMismatch { .. }));
        replay(&std, &distinction).unwrap();
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let std = std_of(PREEMPTED);
        let mut o = Oracle::new(&std);
        let (x, y) = (std.parse_process("X").unwrap(), std.parse_process("Y").unwrap());
        let Search::Distinguished { distinction, .. } = o.find_distinction(&x, &y, 16).unwrap() else {
            panic!();
        };
        let fake = Distinction::NormMismatch { left: x.clone(), right: y.clone() };
        assert_eq!(replay(&std, &fake), Err(ReplayError::NormsEqual(1)));
        if let Distinction::Attack { left, right, side, label, target, vacuous, .. } = &*distinction {
            let cut = Distinction::Attack {
                left: left.clone(),
                right: right.clone(),
                side: *side,
                label: *label,
                target: target.clone(),
                vacuous: vacuous.clone(),
                stages: Vec::new(),
            };
            assert!(matches!(replay(&std, &cut), Err(ReplayError::MissingStage(_))));
        } else {
            panic!("expected an attack");
        }
    }

    #[test]
    fn levels_are_anti_monotone() {
        let std = std_of(PREEMPTED);
        let mut o = Oracle::new(&std);
        let p = |s: &str| std.parse_process(s).unwrap();
        let pairs = [("X", "Y"), ("X", "X'"), ("Y", "Y'"), ("X Y", "Y X"), ("X'", "Y'")];
        for (a, b) in pairs {
            let mut prev = true;
            for k in 0..8 {
                let r = o.related(&p(a), &p(b), k).unwrap();
                assert!(prev || !r, "{a} / {b} related at {k} but not before");
                prev = r;
            }
        }
    }

    #[test]
    fn state_guard_fires() {
        let std = std_of(PREEMPTED);
        let mut o = Oracle::with_config(&std, OracleConfig { max_states: 0, closure_guard: 10 });
        let p = |s: &str| std.parse_process(s).unwrap();
        assert_eq!(o.related(&p("X"), &p("Y"), 3), Err(OracleError::StateGuard(0)));
    }
}
