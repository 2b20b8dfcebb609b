//! Norms, decreasing/increasing classification, silent-loop contraction and the
//! standard constant order.
//!
//! After [`standardize`], constant `ConstId(i)` of the returned system is the
//! `(i + 1)`-th constant of the standard order: norms are non-decreasing in the
//! index, and every decreasing rule of a constant only mentions constants with
//! strictly smaller index.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::model::{parse_process_with, BpaSystem, ConstId, Process, ProcessParseError, Rule};

/// Norm of a constant. Constants that cannot terminate have an infinite norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Norm {
    Finite(u64),
    Infinite,
}

impl Norm {
    pub fn finite(self) -> Option<u64> {
        match self {
            Norm::Finite(v) => Some(v),
            Norm::Infinite => None,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Finite(v) => write!(f, "{v}"),
            Norm::Infinite => f.write_str("inf"),
        }
    }
}

/// Largest norm accepted by standardization; keeps every process norm sum far from overflow.
pub const MAX_NORM: u64 = 1 << 48;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormTable {
    values: Vec<Norm>,
}

impl NormTable {
    pub fn get(&self, c: ConstId) -> Norm {
        self.values[c.index()]
    }

    pub fn values(&self) -> &[Norm] {
        &self.values
    }

    /// Additive extension to processes.
    pub fn of_process(&self, p: &Process) -> Norm {
        let mut total: u64 = 0;
        for &c in p.constants() {
            match self.get(c) {
                Norm::Finite(v) => total = total.saturating_add(v),
                Norm::Infinite => return Norm::Infinite,
            }
        }
        Norm::Finite(total)
    }
}

/// Least fixpoint of `norm(X) = min over X -l-> rhs of cost(l) + norm(rhs)`, with
/// silent steps costing 0 and visible steps 1.
///
/// Every rule is a hyperedge from the constants of its right-hand side to its
/// left-hand side. Constants are settled in order of increasing norm; a rule
/// fires once all of its right-hand side constants are settled.
pub fn compute_norms(sys: &BpaSystem) -> NormTable {
    let n = sys.num_constants();
    let rules = sys.rules();
    let mut pending: Vec<usize> = rules.iter().map(|r| r.rhs.len()).collect();
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ri, r) in rules.iter().enumerate() {
        for c in r.rhs.constants() {
            occurs[c.index()].push(ri);
        }
    }

    let mut best: Vec<Option<u64>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let cost = |r: &Rule| u64::from(!r.label.is_silent());

    for r in rules.iter().filter(|r| r.rhs.is_empty()) {
        heap.push(Reverse((cost(r), r.lhs.0)));
    }

    while let Some(Reverse((value, c))) = heap.pop() {
        let ci = c as usize;
        if settled[ci] {
            continue;
        }
        settled[ci] = true;
        best[ci] = Some(value);
        for &ri in &occurs[ci] {
            pending[ri] -= 1;
            if pending[ri] == 0 {
                let r = &rules[ri];
                if settled[r.lhs.index()] {
                    continue;
                }
                let total = r
                    .rhs
                    .constants()
                    .iter()
                    .map(|c| best[c.index()].expect("settled"))
                    .fold(cost(r), u64::saturating_add);
                heap.push(Reverse((total, r.lhs.0)));
            }
        }
    }

    NormTable {
        values: best
            .into_iter()
            .map(|b| b.map_or(Norm::Infinite, Norm::Finite))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("constant `{0}` cannot terminate (infinite norm)")]
    Unnormed(String),
    #[error("silent rule to the empty process is forbidden: `{0}`")]
    SilentTermination(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ViolationReport(pub Vec<Violation>);

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("system is not totally normed: ")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn check_totally_normed(sys: &BpaSystem, norms: &NormTable) -> Result<(), ViolationReport> {
    let mut report = Vec::new();
    for c in sys.constant_ids() {
        if norms.get(c) == Norm::Infinite {
            report.push(Violation::Unnormed(sys.constant_name(c).to_string()));
        }
    }
    for r in sys.rules() {
        if r.label.is_silent() && r.rhs.is_empty() {
            report.push(Violation::SilentTermination(sys.format_rule(r)));
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(ViolationReport(report))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleClass {
    Decreasing,
    Increasing,
}

impl RuleClass {
    pub fn is_decreasing(self) -> bool {
        self == RuleClass::Decreasing
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error(transparent)]
    NotTotallyNormed(#[from] ViolationReport),
    #[error("norm of `{0}` exceeds the supported maximum")]
    NormOverflow(String),
    #[error("internal: constant `{0}` has no decreasing rule")]
    NoDecreasingRule(String),
    #[error("internal: decreasing rule `{0}` mentions a constant that is not strictly earlier")]
    OrderViolation(String),
}

/// Classifies each rule (aligned with `sys.rules()`). Requires finite norms.
///
/// Fails if some constant has no decreasing rule, which would mean the norm
/// table is not the least fixpoint.
pub fn classify_rules(sys: &BpaSystem, norms: &NormTable) -> Result<Vec<RuleClass>, NormalizeError> {
    let classes: Vec<RuleClass> = sys
        .rules()
        .iter()
        .map(|r| {
            let lhs = norms.get(r.lhs);
            let rhs = norms.of_process(&r.rhs);
            let dec = match (lhs, rhs) {
                (Norm::Finite(l), Norm::Finite(v)) => {
                    if r.label.is_silent() {
                        v == l
                    } else {
                        v + 1 == l
                    }
                }
                _ => false,
            };
            if dec {
                RuleClass::Decreasing
            } else {
                RuleClass::Increasing
            }
        })
        .collect();
    for c in sys.constant_ids() {
        let has_dec = sys.rules_of(c).iter().any(|&r| classes[r].is_decreasing());
        if !has_dec {
            return Err(NormalizeError::NoDecreasingRule(sys.constant_name(c).to_string()));
        }
    }
    Ok(classes)
}

/// Edges `X -> Y` for silent decreasing rules `X -tau-> Y` with a single-constant right-hand side.
fn silent_unary_edges(sys: &BpaSystem, classes: &[RuleClass]) -> Vec<(ConstId, ConstId)> {
    sys.rules()
        .iter()
        .zip(classes)
        .filter(|(r, cl)| r.label.is_silent() && cl.is_decreasing() && r.rhs.len() == 1)
        .map(|(r, _)| (r.lhs, r.rhs.constants()[0]))
        .collect()
}

/// Result of collapsing silent norm-preserving cycles.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub system: BpaSystem,
    /// For every original constant, its representative in `system`.
    pub map: Vec<ConstId>,
}

/// Collapses every strongly connected component of the silent unary decreasing
/// graph into its member with the smallest declaration index.
///
/// Silent norm-preserving steps from a single constant to a longer string can
/// never silently return: getting back to one constant would require erasing
/// a constant of positive norm without a visible action.
pub fn contract_loops(sys: &BpaSystem, norms: &NormTable) -> Result<Contraction, NormalizeError> {
    check_totally_normed(sys, norms)?;
    let classes = classify_rules(sys, norms)?;
    let n = sys.num_constants();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (a, b) in silent_unary_edges(sys, &classes) {
        graph.add_edge(nodes[a.index()], nodes[b.index()], ());
    }

    let mut rep: Vec<usize> = (0..n).collect();
    for scc in tarjan_scc(&graph) {
        let min = scc.iter().map(|v| v.index()).min().expect("non-empty component");
        for v in scc {
            rep[v.index()] = min;
        }
    }

    let self_loops = sys
        .rules()
        .iter()
        .any(|r| r.label.is_silent() && r.rhs.constants() == [r.lhs]);
    if !self_loops && rep.iter().enumerate().all(|(i, &r)| i == r) {
        return Ok(Contraction {
            system: sys.clone(),
            map: sys.constant_ids().collect(),
        });
    }

    let mut builder = BpaSystem::builder();
    let mut new_id = vec![None; n];
    for i in 0..n {
        if rep[i] == i {
            new_id[i] = Some(builder.constant(sys.constant_names()[i].clone()));
        }
    }
    let map: Vec<ConstId> = (0..n).map(|i| new_id[rep[i]].expect("representative")).collect();
    for a in sys.actions().iter().skip(1) {
        builder.action(a.clone());
    }
    for r in sys.rules() {
        let lhs = map[r.lhs.index()];
        let rhs = Process(r.rhs.constants().iter().map(|c| map[c.index()]).collect());
        if r.label.is_silent() && rhs.constants() == [lhs] {
            continue;
        }
        let label = builder.action(sys.action(r.label).clone());
        builder.rule(lhs, label, rhs);
    }
    Ok(Contraction {
        system: builder.build(),
        map,
    })
}

static WEIGHT_TABLE_IDS: AtomicU64 = AtomicU64::new(1);

/// Finite norms of a standard system, shared by all strings built against it.
#[derive(Debug)]
pub struct Weights {
    id: u64,
    norms: Vec<u64>,
}

impl Weights {
    pub fn new(norms: Vec<u64>) -> Arc<Self> {
        Arc::new(Weights {
            id: WEIGHT_TABLE_IDS.fetch_add(1, Ordering::Relaxed),
            norms,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn norm(&self, c: ConstId) -> u64 {
        self.norms[c.index()]
    }

    pub fn norms(&self) -> &[u64] {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }
}

/// A totally normed system with finite norms and rule classes.
///
/// This is the common view of a system used by the oracle: it does not have to
/// be in standard order.
#[derive(Clone, Debug)]
pub struct NormedSystem {
    sys: BpaSystem,
    weights: Arc<Weights>,
    classes: Vec<RuleClass>,
}

impl NormedSystem {
    pub fn new(sys: BpaSystem) -> Result<Self, NormalizeError> {
        let norms = compute_norms(&sys);
        check_totally_normed(&sys, &norms)?;
        let classes = classify_rules(&sys, &norms)?;
        let mut finite = Vec::with_capacity(norms.values().len());
        for c in sys.constant_ids() {
            let v = norms.get(c).finite().expect("totally normed");
            if v > MAX_NORM {
                return Err(NormalizeError::NormOverflow(sys.constant_name(c).to_string()));
            }
            finite.push(v);
        }
        Ok(NormedSystem {
            sys,
            weights: Weights::new(finite),
            classes,
        })
    }

    pub fn system(&self) -> &BpaSystem {
        &self.sys
    }

    pub fn weights(&self) -> &Arc<Weights> {
        &self.weights
    }

    pub fn norm(&self, c: ConstId) -> u64 {
        self.weights.norm(c)
    }

    pub fn norm_of(&self, p: &Process) -> u64 {
        p.constants().iter().map(|&c| self.norm(c)).sum()
    }

    pub fn classes(&self) -> &[RuleClass] {
        &self.classes
    }

    pub fn rule_class(&self, rule: usize) -> RuleClass {
        self.classes[rule]
    }

    pub fn num_constants(&self) -> usize {
        self.sys.num_constants()
    }

    /// One-step transitions of `p` with the class of the rule that produced each.
    pub fn moves(&self, p: &Process) -> Vec<Move> {
        let Some(head) = p.head() else {
            return Vec::new();
        };
        let tail = p.tail();
        self.sys
            .rules_of(head)
            .iter()
            .map(|&ri| {
                let rule = &self.sys.rules()[ri];
                let mut ids = Vec::with_capacity(rule.rhs.len() + tail.len());
                ids.extend_from_slice(rule.rhs.constants());
                ids.extend_from_slice(tail);
                Move {
                    label: rule.label,
                    class: self.classes[ri],
                    target: Process(ids),
                }
            })
            .collect()
    }
}

/// A transition of a process, classified by norm behaviour.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub label: crate::model::ActionId,
    pub class: RuleClass,
    pub target: Process,
}

/// A system in standard form, together with how its constants relate to the input.
#[derive(Clone, Debug)]
pub struct StandardSystem {
    normed: NormedSystem,
    /// Original constant name to standard constant.
    name_map: BTreeMap<String, ConstId>,
    /// Pairs `(removed, representative)` produced by loop contraction.
    contracted: Vec<(String, String)>,
}

impl std::ops::Deref for StandardSystem {
    type Target = NormedSystem;

    fn deref(&self) -> &NormedSystem {
        &self.normed
    }
}

impl StandardSystem {
    pub fn normed(&self) -> &NormedSystem {
        &self.normed
    }

    /// `X_1 .. X_n` as names.
    pub fn order(&self) -> &[String] {
        self.normed.sys.constant_names()
    }

    pub fn name_map(&self) -> &BTreeMap<String, ConstId> {
        &self.name_map
    }

    pub fn contracted(&self) -> &[(String, String)] {
        &self.contracted
    }

    pub fn name(&self, c: ConstId) -> &str {
        self.normed.sys.constant_name(c)
    }

    pub fn is_realtime(&self) -> bool {
        !self.normed.sys.has_silent_rules()
    }

    /// Resolves a process written with the names of the original input system;
    /// contracted constants resolve to their representative.
    pub fn parse_process(&self, text: &str) -> Result<Process, ProcessParseError> {
        parse_process_with(text, |name| self.name_map.get(name).copied())
    }

    pub fn format_process(&self, p: &Process) -> String {
        self.normed.sys.format_process(p)
    }

    /// Serialized standard system preceded by a comment block with the index map.
    pub fn render(&self) -> String {
        let mut out = String::from("# standard order\n");
        for (i, name) in self.order().iter().enumerate() {
            out.push_str(&format!("# X{} = {} (norm {})\n", i + 1, name, self.norm(ConstId(i as u32))));
        }
        for (removed, rep) in &self.contracted {
            out.push_str(&format!("# contracted {removed} into {rep}\n"));
        }
        out.push_str(&crate::model::serialize_system(&self.normed.sys));
        out
    }
}

/// Produces the standard form of a totally normed system.
///
/// Silent loops are contracted first. The order extends the precedence
/// `X < X'` iff `norm(X) < norm(X')` or `X'` silently and norm-preservingly
/// reaches `X`; ties are broken by the length of the longest silent unary
/// decreasing chain below a constant, then by declaration order.
pub fn standardize(sys: &BpaSystem) -> Result<StandardSystem, NormalizeError> {
    let norms = compute_norms(sys);
    let contraction = contract_loops(sys, &norms)?;
    let contracted_sys = contraction.system;
    let normed = NormedSystem::new(contracted_sys)?;
    let csys = normed.system();
    let n = csys.num_constants();

    // Longest chain of silent unary decreasing edges starting at each constant.
    // The edge graph is acyclic after contraction.
    let edges = silent_unary_edges(csys, normed.classes());
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in &edges {
        succ[a.index()].push(b.index());
    }
    let mut depth: Vec<Option<usize>> = vec![None; n];
    fn chain(v: usize, succ: &[Vec<usize>], depth: &mut [Option<usize>]) -> usize {
        if let Some(d) = depth[v] {
            return d;
        }
        let mut d = 0;
        for &w in &succ[v] {
            d = d.max(1 + chain(w, succ, depth));
        }
        depth[v] = Some(d);
        d
    }
    for v in 0..n {
        chain(v, &succ, &mut depth);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (normed.norm(ConstId(v as u32)), depth[v], v));
    let mut position = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i as u32;
    }

    let mut builder = BpaSystem::builder();
    for &v in &order {
        builder.constant(csys.constant_names()[v].clone());
    }
    for a in csys.actions().iter().skip(1) {
        builder.action(a.clone());
    }
    for r in csys.rules() {
        let label = builder.action(csys.action(r.label).clone());
        let rhs = Process(r.rhs.constants().iter().map(|c| ConstId(position[c.index()])).collect());
        builder.rule(ConstId(position[r.lhs.index()]), label, rhs);
    }
    let std_normed = NormedSystem::new(builder.build())?;

    for (ri, r) in std_normed.system().rules().iter().enumerate() {
        if std_normed.rule_class(ri).is_decreasing() && r.rhs.constants().iter().any(|c| *c >= r.lhs) {
            return Err(NormalizeError::OrderViolation(std_normed.system().format_rule(r)));
        }
    }
    debug_assert!(std_normed.weights().norms().windows(2).all(|w| w[0] <= w[1]));

    let mut name_map = BTreeMap::new();
    let mut contracted = Vec::new();
    for c in sys.constant_ids() {
        let rep = contraction.map[c.index()];
        let std_id = ConstId(position[rep.index()]);
        name_map.insert(sys.constant_name(c).to_string(), std_id);
        let rep_name = csys.constant_name(rep);
        if rep_name != sys.constant_name(c) {
            contracted.push((sys.constant_name(c).to_string(), rep_name.to_string()));
        }
    }

    Ok(StandardSystem {
        normed: std_normed,
        name_map,
        contracted,
    })
}
