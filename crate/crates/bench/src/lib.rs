//! Shared inputs for the criterion benchmarks.

use spua_core::lp::{build_finite_lp, solve_lp};
use spua_core::policies::robust_policy_from_lp;
use spua_core::PolicyTable;

/// Problem sizes used by the solver benchmarks.
pub const SOLVE_SIZES: &[usize] = &[10, 30, 60];

/// Acceptance probabilities used across benchmarks.
pub const PROBABILITIES: &[f64] = &[0.3, 0.7, 1.0];

/// Optimal robust policy for `(n, p)`, panicking on solver failure.
pub fn robust_policy(n: usize, p: f64) -> PolicyTable {
    let sol = solve_lp(&build_finite_lp(n, p).expect("valid parameters")).expect("solver succeeds");
    robust_policy_from_lp(&sol).expect("policy realizes the solution")
}
