//! Exact closure under silent norm-preserving steps.

use std::collections::HashMap;

use crate::model::Process;
use crate::normalize::NormedSystem;

use super::OracleError;

pub const DEFAULT_CLOSURE_GUARD: usize = 100_000;

/// Processes reachable by silent norm-preserving steps, in discovery order.
/// `states[0]` is the start; `parents[k]` is the state `states[k]` was reached from.
#[derive(Clone, Debug)]
pub struct SilentClosure {
    pub states: Vec<Process>,
    pub parents: Vec<Option<usize>>,
}

impl SilentClosure {
    pub fn contains(&self, p: &Process) -> bool {
        self.states.contains(p)
    }

    /// Path from the start to `states[k]`, inclusive.
    pub fn path_to(&self, k: usize) -> Vec<Process> {
        let mut out = vec![self.states[k].clone()];
        let mut cur = k;
        while let Some(p) = self.parents[cur] {
            out.push(self.states[p].clone());
            cur = p;
        }
        out.reverse();
        out
    }
}

/// Breadth-first closure. Every state has the norm of `p` and every constant has
/// positive norm, so there are finitely many states; the guard only catches bugs.
pub fn silent_closure_dec(
    std: &NormedSystem,
    p: &Process,
    guard: usize,
) -> Result<SilentClosure, OracleError> {
    let sys = std.system();
    let mut index: HashMap<Process, usize> = HashMap::new();
    let mut states = vec![p.clone()];
    let mut parents = vec![None];
    index.insert(p.clone(), 0);
    let mut next = 0;
    while next < states.len() {
        let cur = states[next].clone();
        let n = std.norm_of(&cur);
        for (label, target) in sys.transitions_of(&cur) {
            if !label.is_silent() || std.norm_of(&target) != n || index.contains_key(&target) {
                continue;
            }
            if states.len() >= guard {
                return Err(OracleError::ClosureGuard(guard));
            }
            index.insert(target.clone(), states.len());
            states.push(target);
            parents.push(Some(next));
        }
        next += 1;
    }
    Ok(SilentClosure { states, parents })
}
