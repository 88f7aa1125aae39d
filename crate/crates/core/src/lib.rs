//! Analysis of randomised strategies in n-player concurrent games on finite
//! graphs: state values, locally-admissible moves, admissibility verdicts for
//! finite-memory Moore strategies, and assume-admissible synthesis on the
//! derived labelled game.
//!
//! All probabilities are exact rationals; every analysis is deterministic
//! (lowest-index tie-breaking throughout).

pub mod aa_synthesis;
pub mod admissibility;
pub mod arena;
pub mod cli;
pub mod error;
pub mod format;
mod graph;
pub mod objectives;
pub mod random;
pub mod rat;
pub mod values;

pub use arena::{ActionId, Arena, MixedMove, MooreStrategy, Player, ProductGraph, StateId};
pub use error::{GameError, Result};
pub use format::GameSpec;
pub use objectives::{Normalized, Objective, ObjectiveKind, Semantics};
