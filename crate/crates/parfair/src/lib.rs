//! Parallel fair division of indivisible goods.
//!
//! The crate computes EF1 and EF(k) allocations for additive valuations
//! using fork-join parallel algorithms, and instruments every solver with
//! work/depth counters so the asymptotic behavior can be measured:
//!
//! * [`two_agent`] — logarithmic-depth, linear-work EF1 for two agents via
//!   a recursive tree game.
//! * [`graph_alloc`] — EF1 when each good is valued by at most two agents,
//!   by solving independent two-agent subinstances.
//! * [`const_agents`] — parallel simulation of Fixed-Order Round Robin for
//!   a small number of agents via a configuration reachability graph.
//! * [`hypergraph_alloc`] — EF1 for bounded-rank, bounded-edge-degree
//!   hypergraph instances via line-graph coloring.
//! * [`matching_alloc`] — EF1 in m/n rounds of maximum-weight matching.
//! * [`efk_alloc`] — randomized EF(k) relaxations.
//! * [`cc_reduce`] — reduction of Fixed-Order Round Robin to stable
//!   matching, with a Gale–Shapley solver for cross-validation.
//!
//! Sequential baselines live in [`round_robin`]; the fork-join substrate
//! and its cost model live in [`parexec`].

pub mod cc_reduce;
pub mod const_agents;
pub mod efk_alloc;
mod error;
pub mod generate;
pub mod graph_alloc;
pub mod hypergraph_alloc;
pub mod matching_alloc;
pub mod model;
pub mod parexec;
pub mod round_robin;
pub mod two_agent;

pub use error::{Error, Result};
