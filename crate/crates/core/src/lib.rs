//! Optimal robust policies for the secretary problem in which each candidate
//! accepts an offer independently with probability `p`.
//!
//! The robust ratio of a policy is the smallest, over `k`, ratio between its
//! probability of hiring one of the top `k` candidates and `1 - (1-p)^k`, the
//! probability that at least one of them would accept.

pub mod asymptotics;
pub mod error;
pub mod evaluation;
pub mod fmt;
pub mod lp;
pub mod montecarlo;
pub mod policies;
pub mod polytope;
pub mod rank_stats;
pub mod tri;

pub use error::{Error, Result};
pub use evaluation::{EvaluationReport, robust_ratio};
pub use lp::{LpModel, LpSolution, SolveStatus};
pub use policies::{TamakiTable, ThresholdFamily, UtilityVector};
pub use polytope::{OccupancyMeasure, PolicyTable};
pub use tri::Tri;
