//! Normed strings: sequences of constants with a prefix-sum norm index.
//!
//! This is the exact baseline representation. Splitting at a norm boundary is
//! a binary search over the prefix sums; equality compares the sequences after
//! a norm check.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{format_ids, ConstId, Process};
use crate::normalize::Weights;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StringError {
    #[error("strings were built against different norm tables")]
    TableMismatch,
    #[error("norm {requested} is outside 0..={total}")]
    OutOfRange { requested: u64, total: u64 },
}

#[derive(Clone)]
pub struct NormedString {
    ids: Vec<ConstId>,
    /// `prefix[k]` is the norm of the first `k` constants; `prefix.len() == ids.len() + 1`.
    prefix: Vec<u64>,
    weights: Arc<Weights>,
}

/// Outcome of [`NormedString::split_at_norm`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Split {
    At { prefix: NormedString, suffix: NormedString },
    NoBoundary,
}

impl NormedString {
    pub fn new(weights: &Arc<Weights>, ids: Vec<ConstId>) -> Self {
        let mut prefix = Vec::with_capacity(ids.len() + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for &c in &ids {
            acc += weights.norm(c);
            prefix.push(acc);
        }
        NormedString {
            ids,
            prefix,
            weights: Arc::clone(weights),
        }
    }

    pub fn empty(weights: &Arc<Weights>) -> Self {
        Self::new(weights, Vec::new())
    }

    pub fn from_process(weights: &Arc<Weights>, p: &Process) -> Self {
        Self::new(weights, p.constants().to_vec())
    }

    pub fn to_process(&self) -> Process {
        Process(self.ids.clone())
    }

    pub fn ids(&self) -> &[ConstId] {
        &self.ids
    }

    pub fn head(&self) -> Option<ConstId> {
        self.ids.first().copied()
    }

    pub fn norm(&self) -> u64 {
        *self.prefix.last().expect("prefix has a sentinel")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn weights(&self) -> &Arc<Weights> {
        &self.weights
    }

    fn same_table(&self, other: &Self) -> bool {
        self.weights.id() == other.weights.id()
    }

    pub fn concat(&self, other: &NormedString) -> Result<NormedString, StringError> {
        if !self.same_table(other) {
            return Err(StringError::TableMismatch);
        }
        let mut ids = Vec::with_capacity(self.len() + other.len());
        ids.extend_from_slice(&self.ids);
        ids.extend_from_slice(&other.ids);
        let mut prefix = Vec::with_capacity(ids.len() + 1);
        prefix.extend_from_slice(&self.prefix);
        let base = self.norm();
        prefix.extend(other.prefix[1..].iter().map(|v| v + base));
        Ok(NormedString {
            ids,
            prefix,
            weights: Arc::clone(&self.weights),
        })
    }

    /// Splits so that the suffix has norm exactly `h`, if a constant boundary falls there.
    pub fn split_at_norm(&self, h: u64) -> Result<Split, StringError> {
        let total = self.norm();
        if h > total {
            return Err(StringError::OutOfRange { requested: h, total });
        }
        let cut = total - h;
        match self.prefix.binary_search(&cut) {
            Ok(mut k) => {
                // Zero-norm constants never occur in a totally normed system,
                // but keep the split canonical anyway: leftmost boundary.
                while k > 0 && self.prefix[k - 1] == cut {
                    k -= 1;
                }
                Ok(Split::At {
                    prefix: NormedString::new(&self.weights, self.ids[..k].to_vec()),
                    suffix: NormedString::new(&self.weights, self.ids[k..].to_vec()),
                })
            }
            Err(_) => Ok(Split::NoBoundary),
        }
    }

    /// The suffix of norm `h`, when one exists.
    pub fn suffix_with_norm(&self, h: u64) -> Option<NormedString> {
        match self.split_at_norm(h) {
            Ok(Split::At { suffix, .. }) => Some(suffix),
            _ => None,
        }
    }

    pub fn equal(&self, other: &NormedString) -> bool {
        self.norm() == other.norm() && self.ids == other.ids
    }

    pub fn format<'a>(&self, name: impl Fn(ConstId) -> &'a str) -> String {
        format_ids(&self.ids, name)
    }
}

impl PartialEq for NormedString {
    fn eq(&self, other: &Self) -> bool {
        self.same_table(other) && self.equal(other)
    }
}

impl Eq for NormedString {}

impl std::hash::Hash for NormedString {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ids.hash(state);
    }
}

impl fmt::Debug for NormedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormedString")
            .field("ids", &self.ids)
            .field("norm", &self.norm())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> Arc<Weights> {
        Weights::new(vec![1, 1, 1])
    }

    fn s(w: &Arc<Weights>, ids: &[u32]) -> NormedString {
        NormedString::new(w, ids.iter().map(|&i| ConstId(i)).collect())
    }

    #[test]
    fn concat_with_empty_is_identity() {
        let w = unit();
        let x = s(&w, &[0, 1]);
        assert_eq!(NormedString::empty(&w).concat(&x).unwrap(), x);
        assert_eq!(x.concat(&NormedString::empty(&w)).unwrap(), x);
    }

    #[test]
    fn concat_adds_norms() {
        let w = Weights::new(vec![3]);
        let x = s(&w, &[0]);
        assert_eq!(x.concat(&x).unwrap().norm(), 6);
    }

    #[test]
    fn table_mismatch() {
        let a = s(&unit(), &[0]);
        let b = s(&unit(), &[0]);
        assert_eq!(a.concat(&b).unwrap_err(), StringError::TableMismatch);
    }

    #[test]
    fn split_unit_norms() {
        let w = unit();
        let x = s(&w, &[0, 0, 0]);
        assert_eq!(
            x.split_at_norm(2).unwrap(),
            Split::At { prefix: s(&w, &[0]), suffix: s(&w, &[0, 0]) }
        );
        assert_eq!(
            x.split_at_norm(0).unwrap(),
            Split::At { prefix: x.clone(), suffix: NormedString::empty(&w) }
        );
        assert_eq!(
            x.split_at_norm(4).unwrap_err(),
            StringError::OutOfRange { requested: 4, total: 3 }
        );
    }

    #[test]
    fn split_inside_a_constant_has_no_boundary() {
        let w = Weights::new(vec![1, 2]);
        assert_eq!(s(&w, &[1]).split_at_norm(1).unwrap(), Split::NoBoundary);
    }

    #[test]
    fn equality_fast_path() {
        let w = Weights::new(vec![1, 2]);
        assert!(s(&w, &[0, 1]).equal(&s(&w, &[0, 1])));
        assert!(!s(&w, &[0]).equal(&s(&w, &[1])));
        assert_eq!(NormedString::empty(&w).norm(), 0);
        assert_eq!(s(&w, &[1]).norm(), 2);
    }

    fn weights_and_strings() -> impl Strategy<Value = (Vec<u64>, Vec<u32>, Vec<u32>, Vec<u32>)> {
        prop::collection::vec(1u64..5, 1..5).prop_flat_map(|ws| {
            let n = ws.len() as u32;
            let v = || prop::collection::vec(0..n, 0..8);
            (Just(ws), v(), v(), v())
        })
    }

    proptest! {
        #[test]
        fn concat_is_associative_and_additive((ws, a, b, c) in weights_and_strings()) {
            let w = Weights::new(ws.clone());
            let (a, b, c) = (s(&w, &a), s(&w, &b), s(&w, &c));
            let left = a.concat(&b).unwrap().concat(&c).unwrap();
            let right = a.concat(&b.concat(&c).unwrap()).unwrap();
            prop_assert_eq!(&left, &right);
            let naive: Vec<ConstId> = a.ids().iter().chain(b.ids()).chain(c.ids()).copied().collect();
            prop_assert_eq!(left.ids(), naive.as_slice());
            let fold: u64 = naive.iter().map(|c| ws[c.index()]).sum();
            prop_assert_eq!(left.norm(), fold);
        }

        #[test]
        fn split_then_concat_restores((ws, a, _b, _c) in weights_and_strings(), frac in 0.0f64..=1.0) {
            let w = Weights::new(ws);
            let a = s(&w, &a);
            let h = (a.norm() as f64 * frac).floor() as u64;
            match a.split_at_norm(h).unwrap() {
                Split::At { prefix, suffix } => {
                    prop_assert_eq!(suffix.norm(), h);
                    prop_assert_eq!(prefix.norm() + suffix.norm(), a.norm());
                    prop_assert_eq!(prefix.concat(&suffix).unwrap(), a);
                }
                Split::NoBoundary => {
                    // brute force: no suffix has norm h
                    for k in 0..=a.len() {
                        let tail = s(&w, &a.ids()[k..].iter().map(|c| c.0).collect::<Vec<_>>());
                        prop_assert_ne!(tail.norm(), h);
                    }
                }
            }
        }

        #[test]
        fn equality_matches_elementwise((ws, a, b, _c) in weights_and_strings()) {
            let w = Weights::new(ws);
            let (x, y) = (s(&w, &a), s(&w, &b));
            prop_assert_eq!(x.equal(&y), a == b);
            let g = s(&w, &[0]);
            if x.equal(&y) {
                prop_assert!(g.concat(&x).unwrap().equal(&g.concat(&y).unwrap()));
                prop_assert!(x.concat(&g).unwrap().equal(&y.concat(&g).unwrap()));
            }
        }
    }
}
