//! The finite robust-ratio program, its capped relaxation, a sparse simplex
//! solver and the dual dynamic-programming bound.

mod dual;
pub mod lu;
mod model;
mod simplex;

use serde::Serialize;

use crate::error::Result;
use crate::tri::Tri;

pub use dual::dual_dp_value;
pub use model::{
    build_capped_lp, build_finite_lp, default_cap, top_k_accept_prob, Constraint, LpModel, RowKind, Sense, Variable,
};
pub use simplex::SolverOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub n: usize,
    pub p: f64,
    pub cap: usize,
    pub status: SolveStatus,
    /// Optimal objective; the robust ratio for the secretary programs.
    pub gamma: f64,
    /// Values of every model variable, indexed like `LpModel::variables`.
    pub values: Vec<f64>,
    /// Offer variables as a table; pruned cells are zero.
    pub x: Tri<f64>,
    pub iterations: usize,
    pub max_violation: f64,
}

pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    solve_lp_with(model, &SolverOptions::default())
}

/// Solves to optimality or returns an [`Error::Solver`](crate::Error::Solver)
/// naming the failure status.
pub fn solve_lp_with(model: &LpModel, opts: &SolverOptions) -> Result<LpSolution> {
    let raw = simplex::solve_raw(model, opts)?;
    let mut x = Tri::filled(model.n, 0.0);
    for (j, v) in model.variables.iter().enumerate() {
        if let Variable::Offer { t, s } = *v {
            if model.gamma_var().is_some() {
                x[(t, s)] = raw.values[j].max(0.0);
            }
        }
    }
    Ok(LpSolution {
        n: model.n,
        p: model.p,
        cap: model.cap,
        status: SolveStatus::Optimal,
        gamma: raw.objective,
        max_violation: model.max_violation(&raw.values),
        values: raw.values,
        x,
        iterations: raw.iterations,
    })
}
