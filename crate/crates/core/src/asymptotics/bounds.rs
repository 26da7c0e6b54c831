use rayon::prelude::*;
use serde::Serialize;

use super::{beta_root, pstar_root, threshold_value};
use crate::error::{check_p, Result};
use crate::fmt::sig;
use crate::lp::{build_finite_lp, solve_lp};

/// `min(p^{p/(1-p)}, 1/beta)`.
pub fn upper_bound(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(threshold_value(p).min(1.0 / beta_root()?))
}

/// `p^{p/(1-p)}` for `p >= p*`, and `(p*)^{p*/(1-p*)}` below.
pub fn lower_bound(p: f64) -> Result<f64> {
    check_p(p)?;
    let ps = pstar_root()?;
    Ok(threshold_value(p.max(ps)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurvePoint {
    pub p: f64,
    pub upper: f64,
    pub lower: f64,
    /// Best robust ratio for the reference `n`, when requested and solved.
    pub gamma_n: Option<f64>,
    /// `ok`, or the error that prevented this row from being computed.
    pub status: String,
}

fn point(p: f64, reference_n: Option<usize>) -> BoundCurvePoint {
    let bounds = upper_bound(p).and_then(|u| Ok((u, lower_bound(p)?)));
    let (upper, lower) = match bounds {
        Ok(v) => v,
        Err(e) => {
            return BoundCurvePoint {
                p,
                upper: f64::NAN,
                lower: f64::NAN,
                gamma_n: None,
                status: e.to_string(),
            }
        }
    };
    let mut status = "ok".to_string();
    let gamma_n = reference_n.and_then(|n| match build_finite_lp(n, p).and_then(|m| solve_lp(&m)) {
        Ok(sol) => Some(sol.gamma),
        Err(e) => {
            status = e.to_string();
            None
        }
    });
    BoundCurvePoint {
        p,
        upper,
        lower,
        gamma_n,
        status,
    }
}

/// Bounds at every grid point, optionally with the finite optimum for
/// `reference_n`. Rows follow the grid order.
pub fn bound_curve(grid: &[f64], reference_n: Option<usize>) -> Vec<BoundCurvePoint> {
    grid.par_iter().map(|&p| point(p, reference_n)).collect()
}

/// CSV with header `p,upper,lower,gamma_n,status`; `gamma_n` is empty when
/// not computed.
pub fn bounds_csv(points: &[BoundCurvePoint]) -> String {
    let mut out = String::from("p,upper,lower,gamma_n,status\n");
    for pt in points {
        let gamma = pt.gamma_n.map(sig).unwrap_or_default();
        let status = pt.status.replace([',', '\n'], ";");
        out.push_str(&format!("{},{},{},{},{}\n", sig(pt.p), sig(pt.upper), sig(pt.lower), gamma, status));
    }
    out
}
