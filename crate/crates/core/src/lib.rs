//! Exact and heuristic solvers for the travelling salesman problem with
//! vertex requisitions where every tour position admits at most two vertices.
//!
//! Feasible tours are perfect matchings of a position/vertex bipartite graph.
//! [`structure`] extracts the forced (special) edges and the even cycles of
//! that graph; a tour is then a choice of one of two matchings per cycle,
//! encoded as a [`DeltaVector`]. [`contacts`] precomputes per-cycle and
//! per-cycle-pair costs so that [`exact`] can walk all `2^q` choices in Gray
//! order with constant-size updates, [`local_search`] can scan the flip
//! neighborhood cheaply, and [`mip`] can emit a compact integer program.

pub mod cli;
pub mod contacts;
pub mod delta;
pub mod exact;
pub mod generator;
pub mod instance;
pub mod local_search;
pub mod mip;
pub mod structure;

pub use contacts::{ContactTables, PairLayout};
pub use delta::DeltaVector;
pub use exact::{brute_force_oracle, solve_exact, solve_naive, Solution, SolveError};
pub use instance::{parse_instance, Instance, InstanceError};
pub use structure::{Infeasible, MatchingStructure};
