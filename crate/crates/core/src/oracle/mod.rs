//! Independent checks for the refinement engine.
//!
//! Nothing here uses decomposition bases to decide relatedness: the game in
//! [`approx`] works directly on the transition rules, and its refutations are
//! replayable certificates. [`verify`] audits a base against the game,
//! [`gen`] produces random totally normed systems, and [`differential`] runs
//! the engine and the game side by side over many of them.

use thiserror::Error;

pub mod approx;
pub mod closure;
pub mod differential;
pub mod gen;
pub mod verify;

pub use approx::{replay, Distinction, Oracle, OracleConfig, Search, Side};
pub use closure::{silent_closure_dec, SilentClosure};
pub use differential::{differential_run, DiffParams, TrialReport};
pub use gen::{random_system, GenParams};
pub use verify::{verify_base_generators, VerifyReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("game explored more than {0} pairs")]
    StateGuard(usize),
    #[error("silent closure exceeded {0} processes")]
    ClosureGuard(usize),
    #[error("internal: {0}")]
    Internal(String),
}
