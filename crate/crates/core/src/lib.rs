//! Branching bisimilarity for totally normed BPA.
//!
//! A system is parsed with [`parse_system`], brought into standard form with
//! [`standardize`], and then [`compute_bisimilarity_base`] refines the
//! norm-equality base until it is stable. Two processes are branching bisimilar
//! exactly when they have the same prime decomposition under the final base.
//!
//! The [`oracle`] module holds an independent bounded-game checker used to
//! validate the engine.

pub mod base;
pub mod cli;
pub mod model;
pub mod normalize;
pub mod oracle;
pub mod refine;
pub mod strings;

pub use base::{initial_base, DecompositionBase, Entry};
pub use model::{parse_system, BpaSystem, ConstId, Process};
pub use normalize::{compute_norms, standardize, Norm, StandardSystem};
pub use refine::{
    check_equivalence, compute_bisimilarity_base, CandidateMode, EngineConfig, EngineError,
    Outcome, Procedure, RefinementTrace, Verdict,
};
pub use strings::NormedString;
