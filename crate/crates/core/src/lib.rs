//! Core allocations of weighted bipartite B-matching problems.
//!
//! Two routes reach a copies-core state: the centralized
//! [`paths_transfers`] solver and the randomized [`dynamics`] simulator.
//! [`expanded`] certifies copies-core states and [`oracle`] supplies exact
//! maximum B-matching values plus coalition-level core checks.

pub mod dynamics;
pub mod exec;
pub mod expanded;
pub mod experiments;
pub mod instance;
pub mod money;
pub mod oracle;
pub mod paths_transfers;

pub use expanded::{
    check_copies_core, check_feasible, reduce, CoreReport, ExpandedState, NodesSolution,
};
pub use instance::{load_instance, Instance, NodeRef, Side};
pub use money::Money;
