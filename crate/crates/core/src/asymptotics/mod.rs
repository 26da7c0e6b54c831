//! Quantities of the infinite-candidate limit: the constants `beta` and `p*`,
//! the upper and lower bound curves, and feasible solutions of the continuous
//! program.

mod bounds;
mod clp;
pub mod quadrature;
pub mod roots;

use std::sync::OnceLock;

use crate::error::{Error, Result};
use quadrature::{integrate, DEFAULT_TOLERANCE};
use roots::find_root;

pub use bounds::{bound_curve, bounds_csv, lower_bound, upper_bound, BoundCurvePoint};
pub use clp::{
    clp_alpha, clp_constraint_value, damped_rank_integral, damped_solution, single_threshold_solution,
    threshold_rank_integral, ClpSolution, K_MAX,
};

/// `p^{p/(1-p)}`, with the limit `1/e` at `p = 1`.
pub fn threshold_value(p: f64) -> f64 {
    if 1.0 - p <= 1e-12 {
        (-1.0f64).exp()
    } else {
        (p * p.ln() / (1.0 - p)).exp()
    }
}

/// `int_0^1 dy / (y (1 - ln y) + beta - 1)`.
pub fn beta_integral(beta: f64) -> Result<f64> {
    integrate(
        |y| {
            let core = if y > 0.0 { y * (1.0 - y.ln()) } else { 0.0 };
            1.0 / (core + beta - 1.0)
        },
        0.0,
        1.0,
        DEFAULT_TOLERANCE,
    )
}

fn compute_beta() -> Result<f64> {
    let beta = find_root(|b| Ok(beta_integral(b)? - 1.0), 1.1, 2.0, 1e-14)?;
    let residual = (beta_integral(beta)? - 1.0).abs();
    if residual > 1e-10 {
        return Err(Error::Convergence(format!("beta residual {residual:e}")));
    }
    Ok(beta)
}

/// The root `beta` of `int_0^1 dy / (y (1 - ln y) + beta - 1) = 1`.
pub fn beta_root() -> Result<f64> {
    static BETA: OnceLock<std::result::Result<f64, String>> = OnceLock::new();
    BETA.get_or_init(|| compute_beta().map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Convergence)
}

/// `p^{(2-p)/(1-p)} - (1-p)^2`.
pub fn pstar_residual(p: f64) -> f64 {
    (p.ln() * (2.0 - p) / (1.0 - p)).exp() - (1.0 - p) * (1.0 - p)
}

/// The root `p*` of `p^{(2-p)/(1-p)} = (1-p)^2` in `(0.5, 0.7)`.
pub fn pstar_root() -> Result<f64> {
    static PSTAR: OnceLock<std::result::Result<f64, String>> = OnceLock::new();
    PSTAR
        .get_or_init(|| find_root(|p| Ok(pstar_residual(p)), 0.5, 0.7, 1e-15).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Convergence)
}

pub(crate) fn pstar() -> Result<f64> {
    pstar_root()
}
