use super::model::top_k_accept_prob;
use crate::error::{check_n, check_p, domain, Result};
use crate::rank_stats::RankTable;

/// Value of the stopping problem with utilities
/// `U_i = p sum_{k >= i} u_k / (1 - (1-p)^k)`; an upper bound on the best
/// robust ratio whenever `sum u >= 1`.
pub fn dual_dp_value(n: usize, p: f64, u: &[f64]) -> Result<f64> {
    check_n(n)?;
    check_p(p)?;
    if u.len() != n {
        return domain(format!("weight vector has length {}, expected {n}", u.len()));
    }
    if u.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return domain("weights must be finite and nonnegative");
    }
    let total: f64 = u.iter().sum();
    if total < 1.0 - 1e-12 {
        return domain(format!("weights sum to {total}, need at least 1"));
    }
    let mut utility = vec![0.0; n];
    let mut acc = 0.0;
    for i in (1..=n).rev() {
        acc += p * u[i - 1] / top_k_accept_prob(p, i);
        utility[i - 1] = acc;
    }
    let ranks = RankTable::new(n);
    let mut next_sum = 0.0;
    for t in (1..=n).rev() {
        let pass = next_sum / (t + 1) as f64;
        let mut sum = 0.0;
        for s in 1..=t {
            let row = ranks.point_row(t, s)?;
            let gain: f64 = row.iter().zip(&utility).map(|(a, b)| a * b).sum();
            sum += (gain + (1.0 - p) * pass).max(pass);
        }
        next_sum = sum;
    }
    Ok(next_sum)
}
