//! Decomposition bases: a set of primes plus one equation per composite
//! constant, giving its prime decomposition.
//!
//! A base generates the congruence "same prime decomposition". Equations are
//! stored already in prime form, so decomposing a process is a table lookup
//! per constant.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ConstId, Process};
use crate::normalize::{StandardSystem, Weights};
use crate::strings::NormedString;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Prime,
    Composite(NormedString),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaseError {
    #[error("X1 must be prime")]
    FirstNotPrime,
    #[error("equation for `{0}` does not preserve norm")]
    NormMismatch(String),
    #[error("equation for `{0}` mentions a non-prime or a constant that is not strictly earlier")]
    NotEarlierPrimes(String),
    #[error("base covers {got} constants, system has {want}")]
    SizeMismatch { got: usize, want: usize },
}

#[derive(Clone, Debug)]
pub struct DecompositionBase {
    entries: Vec<Entry>,
    weights: Arc<Weights>,
}

impl DecompositionBase {
    /// Builds a base from entries in standard index order, checking the base invariants.
    pub fn new(std: &StandardSystem, entries: Vec<Entry>) -> Result<Self, BaseError> {
        let base = DecompositionBase {
            entries,
            weights: Arc::clone(std.weights()),
        };
        base.validate(std)?;
        Ok(base)
    }

    pub(crate) fn from_entries_unchecked(weights: Arc<Weights>, entries: Vec<Entry>) -> Self {
        DecompositionBase { entries, weights }
    }

    pub fn validate(&self, std: &StandardSystem) -> Result<(), BaseError> {
        if self.entries.len() != std.num_constants() {
            return Err(BaseError::SizeMismatch {
                got: self.entries.len(),
                want: std.num_constants(),
            });
        }
        if matches!(self.entries.first(), Some(Entry::Composite(_))) {
            return Err(BaseError::FirstNotPrime);
        }
        for (i, e) in self.entries.iter().enumerate() {
            if let Entry::Composite(alpha) = e {
                let c = ConstId(i as u32);
                if alpha.norm() != std.norm(c) {
                    return Err(BaseError::NormMismatch(std.name(c).to_string()));
                }
                let ok = alpha
                    .ids()
                    .iter()
                    .all(|p| *p < c && self.is_prime(*p));
                if !ok {
                    return Err(BaseError::NotEarlierPrimes(std.name(c).to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weights(&self) -> &Arc<Weights> {
        &self.weights
    }

    pub fn entry(&self, c: ConstId) -> &Entry {
        &self.entries[c.index()]
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_prime(&self, c: ConstId) -> bool {
        matches!(self.entries[c.index()], Entry::Prime)
    }

    pub fn primes(&self) -> Vec<ConstId> {
        (0..self.entries.len() as u32)
            .map(ConstId)
            .filter(|&c| self.is_prime(c))
            .collect()
    }

    pub fn equation(&self, c: ConstId) -> Option<&NormedString> {
        match &self.entries[c.index()] {
            Entry::Prime => None,
            Entry::Composite(alpha) => Some(alpha),
        }
    }

    /// Prime decomposition of `p`.
    pub fn dcmp(&self, p: &Process) -> NormedString {
        self.dcmp_ids(p.constants())
    }

    pub fn dcmp_ids(&self, ids: &[ConstId]) -> NormedString {
        let mut out = Vec::with_capacity(ids.len());
        for &c in ids {
            match &self.entries[c.index()] {
                Entry::Prime => out.push(c),
                Entry::Composite(alpha) => out.extend_from_slice(alpha.ids()),
            }
        }
        NormedString::new(&self.weights, out)
    }

    pub fn equivalent(&self, p: &Process, q: &Process) -> bool {
        self.dcmp(p).equal(&self.dcmp(q))
    }

    /// Leftmost prime factor of a constant.
    pub fn lpf(&self, c: ConstId) -> ConstId {
        match &self.entries[c.index()] {
            Entry::Prime => c,
            Entry::Composite(alpha) => alpha.head().expect("composites have positive norm"),
        }
    }

    pub fn same_primes(&self, other: &DecompositionBase) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| matches!(a, Entry::Prime) == matches!(b, Entry::Prime))
    }

    pub fn render_text(&self, std: &StandardSystem) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let c = ConstId(i as u32);
            match e {
                Entry::Prime => out.push_str(&format!("prime {}\n", std.name(c))),
                Entry::Composite(alpha) => out.push_str(&format!(
                    "{} = {}\n",
                    std.name(c),
                    alpha.format(|x| std.name(x))
                )),
            }
        }
        out
    }

    pub fn to_json(&self, std: &StandardSystem) -> BaseJson {
        let mut primes = Vec::new();
        let mut equations = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            let c = ConstId(i as u32);
            match e {
                Entry::Prime => primes.push(std.name(c).to_string()),
                Entry::Composite(alpha) => {
                    equations.insert(
                        std.name(c).to_string(),
                        alpha.ids().iter().map(|&x| std.name(x).to_string()).collect(),
                    );
                }
            }
        }
        BaseJson { primes, equations }
    }
}

/// Full comparison of prime sets and equations.
pub fn base_equal(a: &DecompositionBase, b: &DecompositionBase) -> bool {
    a.entries == b.entries
}

impl PartialEq for DecompositionBase {
    fn eq(&self, other: &Self) -> bool {
        base_equal(self, other)
    }
}

impl Eq for DecompositionBase {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaseJson {
    pub primes: Vec<String>,
    pub equations: BTreeMap<String, Vec<String>>,
}

/// The base of the norm-equality congruence: `X1` is the only prime and
/// every other constant is `X1` repeated `norm(Xi)` times.
///
/// `norm(X1) = 1` in every standard system: the last step of any terminating
/// run is a visible `Y -a-> eps`, so some constant has norm 1.
pub fn initial_base(std: &StandardSystem) -> DecompositionBase {
    let w = std.weights();
    let first = ConstId(0);
    debug_assert!(w.is_empty() || w.norm(first) == 1);
    let entries = (0..w.len())
        .map(|i| {
            if i == 0 {
                Entry::Prime
            } else {
                let h = w.norm(ConstId(i as u32)) as usize;
                Entry::Composite(NormedString::new(w, vec![first; h]))
            }
        })
        .collect();
    DecompositionBase::from_entries_unchecked(Arc::clone(w), entries)
}
