//! Scheduling policies and the cost model they share.

pub mod central;
pub mod cost;
pub mod latency;
pub mod sidecar;

pub use central::{
    centralized_solve, centralized_solve_with, Assignment, ExecutionPath, Infeasible, SolveStats, Solution,
    SolverOptions,
};
pub use cost::{placement_cost, ChainFloors, PlacementCost};
pub use latency::{latency_central, latency_decentral};
pub use sidecar::{sidecar_next_hop, sidecar_walk, DropReason, HopDecision, HopQuery, SidecarPolicy};
