//! Feasible solutions of the continuous program obtained as `n -> infinity`,
//! and numerical evaluation of its constraints.
//!
//! A solution is a function `alpha(t, s)` on `[0, 1] x {1, 2, ...}`. The
//! dynamic constraint reads `t alpha(t, s) <= 1 - p int_0^t sum_s alpha`, and
//! the `k`-th robust constraint value is
//! `p / (1 - (1-p)^k) int_0^1 sum_s alpha(t, s) sum_{l=s}^k C(l-1, s-1) t^s (1-t)^{l-s} dt`.

use serde::Serialize;

use super::quadrature::{integrate, integrate_vec, DEFAULT_TOLERANCE};
use super::pstar;
use crate::error::{check_p, domain, Result};
use crate::lp::top_k_accept_prob;
use crate::policies::{threshold_fraction, ThresholdFamily};

/// Largest `k` used when estimating the robust ratio of a solution.
pub const K_MAX: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ClpSolution {
    /// `alpha(t, s) = T_i / t^{ip+1}` for `s <= i` on `[t_i, t_{i+1})`, zero
    /// otherwise, with `T_i = (t_1 ... t_i)^p`.
    Thresholds {
        p: f64,
        times: Vec<f64>,
        coeffs: Vec<f64>,
    },
    /// `alpha(t, s) = eps^{s-1} alpha*(t, 1)`, where `alpha*` is the
    /// single-threshold solution at `p*` and `p = (1 - eps) p*`.
    Damped { p: f64, eps: f64, base: Box<ClpSolution> },
}

/// The piecewise solution generated by a threshold family.
pub fn clp_alpha(fam: &ThresholdFamily, p: f64) -> Result<ClpSolution> {
    check_p(p)?;
    let times: Vec<f64> = fam.times().iter().copied().filter(|&t| t < 1.0).collect();
    let mut coeffs = Vec::with_capacity(times.len());
    let mut log_prod = 0.0;
    for &t in &times {
        log_prod += t.ln();
        coeffs.push((p * log_prod).exp());
    }
    Ok(ClpSolution::Thresholds { p, times, coeffs })
}

/// The single-threshold solution `alpha(t, 1) = p^{p/(1-p)} / t^{1+p}` on
/// `[p^{1/(1-p)}, 1]`.
pub fn single_threshold_solution(p: f64) -> Result<ClpSolution> {
    clp_alpha(&ThresholdFamily::single(p)?, p)
}

/// The geometric-damping solution for `p <= p*`.
pub fn damped_solution(p: f64) -> Result<ClpSolution> {
    check_p(p)?;
    let ps = pstar()?;
    if p > ps {
        return domain(format!("damped solution needs p <= p* = {ps}, got {p}"));
    }
    Ok(ClpSolution::Damped {
        p,
        eps: 1.0 - p / ps,
        base: Box::new(single_threshold_solution(ps)?),
    })
}

impl ClpSolution {
    pub fn p(&self) -> f64 {
        match self {
            ClpSolution::Thresholds { p, .. } | ClpSolution::Damped { p, .. } => *p,
        }
    }

    /// Points where `alpha` may jump, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ClpSolution::Thresholds { times, .. } => {
                let mut pts = vec![0.0];
                pts.extend(times.iter().copied());
                pts.push(1.0);
                pts.dedup();
                pts
            }
            ClpSolution::Damped { base, .. } => base.breakpoints(),
        }
    }

    /// Index `i` of the piece `[t_i, t_{i+1})` containing `t`.
    fn piece(times: &[f64], t: f64) -> usize {
        times.iter().take_while(|&&ti| ti <= t).count()
    }

    pub fn alpha(&self, t: f64, s: usize) -> f64 {
        match self {
            ClpSolution::Thresholds { p, times, coeffs } => {
                let i = Self::piece(times, t);
                if i == 0 || s > i {
                    0.0
                } else {
                    coeffs[i - 1] / t.powf(i as f64 * p + 1.0)
                }
            }
            ClpSolution::Damped { eps, base, .. } => eps.powi(s as i32 - 1) * base.alpha(t, 1),
        }
    }

    /// `sum_s alpha(t, s)`.
    pub fn alpha_sum(&self, t: f64) -> f64 {
        match self {
            ClpSolution::Thresholds { times, .. } => {
                let i = Self::piece(times, t);
                i as f64 * self.alpha(t, 1)
            }
            ClpSolution::Damped { eps, base, .. } => base.alpha(t, 1) / (1.0 - eps),
        }
    }

    /// `1 - p int_0^t sum_s alpha - t max_s alpha(t, s)`, with the integral
    /// evaluated by quadrature.
    pub fn dynamic_slack(&self, t: f64) -> Result<f64> {
        let p = self.p();
        let mut mass = 0.0;
        for w in self.breakpoints().windows(2) {
            let (a, b) = (w[0], w[1].min(t));
            if b > a {
                mass += integrate(|x| self.alpha_sum(x), a, b, DEFAULT_TOLERANCE)?;
            }
        }
        Ok(1.0 - p * mass - t * self.alpha(t, 1))
    }

    /// Closed form of `1 - p int_0^t sum_s alpha` for threshold solutions:
    /// `T_i t^{-ip}` on `[t_i, t_{i+1})` (with `T_0 = 1`).
    pub fn remaining_mass(&self, t: f64) -> Option<f64> {
        match self {
            ClpSolution::Thresholds { p, times, coeffs } => {
                let i = Self::piece(times, t);
                Some(if i == 0 { 1.0 } else { coeffs[i - 1] * t.powf(-(i as f64) * p) })
            }
            ClpSolution::Damped { .. } => None,
        }
    }

    /// `(g_1(t), ..., g_K(t))` with
    /// `g_l = sum_{s<=l} alpha(t, s) C(l-1, s-1) t^s (1-t)^{l-s}`.
    fn rank_mass(&self, t: f64, out: &mut [f64]) {
        match self {
            ClpSolution::Thresholds { times, .. } => {
                let i = Self::piece(times, t);
                out.iter_mut().for_each(|v| *v = 0.0);
                if i == 0 {
                    return;
                }
                let a = self.alpha(t, 1);
                // b[j] = C(m, j) t^j (1-t)^{m-j}, advanced in m; only j < i
                // carries weight.
                let mut b = vec![0.0; i.min(out.len())];
                b[0] = 1.0;
                for (m, o) in out.iter_mut().enumerate() {
                    if m > 0 {
                        for j in (0..b.len()).rev() {
                            let prev = if j > 0 { b[j - 1] } else { 0.0 };
                            b[j] = (1.0 - t) * b[j] + t * prev;
                        }
                    }
                    *o = a * t * b.iter().sum::<f64>();
                }
            }
            ClpSolution::Damped { eps, base, .. } => {
                let a = base.alpha(t, 1);
                let r = 1.0 - (1.0 - eps) * t;
                let mut pow = 1.0;
                for o in out.iter_mut() {
                    *o = a * t * pow;
                    pow *= r;
                }
            }
        }
    }

    /// Robust constraint values for `k = 1..=kmax`.
    pub fn constraint_values(&self, kmax: usize) -> Result<Vec<f64>> {
        let p = self.p();
        let mut total = vec![0.0; kmax];
        for w in self.breakpoints().windows(2) {
            let part = integrate_vec(|t, out| self.rank_mass(t, out), w[0], w[1], kmax, DEFAULT_TOLERANCE)?;
            for (a, b) in total.iter_mut().zip(part) {
                *a += b;
            }
        }
        let mut acc = 0.0;
        Ok(total
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                acc += g;
                p * acc / top_k_accept_prob(p, i + 1)
            })
            .collect())
    }

    /// Smallest robust constraint value over `k <= kmax` and its `k`.
    pub fn gamma(&self, kmax: usize) -> Result<(f64, usize)> {
        let values = self.constraint_values(kmax)?;
        Ok(values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |(bv, bk), (i, &v)| if v < bv { (v, i + 1) } else { (bv, bk) }))
    }
}

/// The `k`-th robust constraint value of `alpha`.
pub fn clp_constraint_value(alpha: &ClpSolution, k: usize) -> Result<f64> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    Ok(alpha.constraint_values(k)?[k - 1])
}

/// `int_{p^{1/(1-p)}}^1 (1-t)^l t^{-p} dt`, compared with `(1-p)^l`.
pub fn threshold_rank_integral(p: f64, l: usize) -> Result<f64> {
    check_p(p)?;
    let lo = threshold_fraction(p);
    integrate(|t| (1.0 - t).powi(l as i32) * t.powf(-p), lo, 1.0, DEFAULT_TOLERANCE)
}

/// `int_{tau*}^1 (1 - (1-eps) t)^l t^{-p*} dt`, compared with
/// `(1 - (1-eps) p*)^l`.
pub fn damped_rank_integral(eps: f64, l: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return domain(format!("damping {eps} outside [0, 1)"));
    }
    let ps = pstar()?;
    let lo = threshold_fraction(ps);
    integrate(
        |t| (1.0 - (1.0 - eps) * t).powi(l as i32) * t.powf(-ps),
        lo,
        1.0,
        DEFAULT_TOLERANCE,
    )
}
