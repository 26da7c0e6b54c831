//! Policy constructors: the LP-derived robust policy, threshold families,
//! the utility-optimal dynamic program and the availability-aware benchmark.

use serde::{Deserialize, Serialize};

use crate::error::{check_n, check_p, domain, Error, Result};
use crate::lp::LpSolution;
use crate::polytope::{PolicyTable, ZERO_REACH};
use crate::rank_stats::RankTable;
use crate::tri::Tri;

/// Clamping beyond this amount signals an inconsistent LP solution.
pub const CLAMP_TOLERANCE: f64 = 1e-7;

/// `p^{1/(1-p)}`, the fraction of candidates observed before the single
/// threshold opens; `1/e` at `p = 1`.
pub fn threshold_fraction(p: f64) -> f64 {
    if 1.0 - p <= 1e-12 {
        (-1.0f64).exp()
    } else {
        (p.ln() / (1.0 - p)).exp()
    }
}

/// Realizes an optimal LP solution as a policy:
/// `q[t][s] = t x[t][s] / (1 - p sum_{tau<t} sum_s x[tau][s])`.
pub fn robust_policy_from_lp(sol: &LpSolution) -> Result<PolicyTable> {
    let n = sol.n;
    let p = sol.p;
    check_n(n)?;
    check_p(p)?;
    let mut q = Tri::filled(n, 0.0);
    let mut offered = 0.0;
    let mut worst = 0.0f64;
    for t in 1..=n {
        let den = 1.0 - p * offered;
        if den > ZERO_REACH {
            for s in 1..=t {
                let raw = t as f64 * sol.x[(t, s)] / den;
                worst = worst.max(raw - 1.0).max(-raw);
                q[(t, s)] = raw.clamp(0.0, 1.0);
            }
        }
        offered += sol.x.row(t).iter().sum::<f64>();
    }
    if worst > CLAMP_TOLERANCE {
        return Err(Error::Invariant(format!(
            "offer probabilities needed clamping by {worst:e}"
        )));
    }
    PolicyTable::new(n, p, q)
}

/// Offers to a relative best once more than `ceil(tau n)` candidates have
/// been observed, with `tau = p^{1/(1-p)}`.
pub fn single_threshold_policy(n: usize, p: f64) -> Result<PolicyTable> {
    check_n(n)?;
    check_p(p)?;
    let cutoff = (threshold_fraction(p) * n as f64 - 1e-9).ceil() as usize;
    PolicyTable::from_fn(n, p, |t, s| if s == 1 && t > cutoff { 1.0 } else { 0.0 })
}

/// Nondecreasing fractions `t_1 <= t_2 <= ...` in `(0, 1]`; partial ranks
/// beyond the listed ones use `1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFamily {
    times: Vec<f64>,
}

impl ThresholdFamily {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if let Some(t) = times.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return domain(format!("threshold {t} outside (0, 1]"));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return domain("thresholds must be nondecreasing");
        }
        Ok(ThresholdFamily { times })
    }

    /// The family `(p^{1/(1-p)})`.
    pub fn single(p: f64) -> Result<Self> {
        check_p(p)?;
        Self::new(vec![threshold_fraction(p)])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Threshold for partial rank `s` (1-based).
    pub fn time(&self, s: usize) -> f64 {
        self.times.get(s - 1).copied().unwrap_or(1.0)
    }
}

/// Offers to partial rank `s` once `t / n >= t_s`. A threshold of 1 (the
/// default beyond the listed ones) never opens, as in the continuous
/// solution where the piece `[1, 1)` is empty.
pub fn multi_threshold_policy(n: usize, p: f64, fam: &ThresholdFamily) -> Result<PolicyTable> {
    check_n(n)?;
    check_p(p)?;
    PolicyTable::from_fn(n, p, |t, s| {
        let ts = fam.time(s);
        if ts < 1.0 && t as f64 >= ts * n as f64 - 1e-9 {
            1.0
        } else {
            0.0
        }
    })
}

/// Utilities by overall rank, `U_1 >= U_2 >= ... >= U_n >= 0`, not all zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityVector {
    values: Vec<f64>,
}

impl UtilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("utility vector is empty");
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return domain("utilities must be finite and nonnegative");
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return domain("utilities must be nonincreasing in rank");
        }
        if values[0] == 0.0 {
            return domain("utility vector is identically zero");
        }
        Ok(UtilityVector { values })
    }

    /// `1 + eps^i` for the top `k` ranks and `eps^i` below, `eps = 1/n`.
    pub fn top_k(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        if k == 0 || k > n {
            return domain(format!("k = {k} outside 1..={n}"));
        }
        let eps = 1.0 / n as f64;
        Self::new(
            (1..=n)
                .map(|i| if i <= k { 1.0 } else { 0.0 } + eps.powi(i as i32))
                .collect(),
        )
    }

    /// `i^{-1/(1+delta)}`.
    pub fn power_law(n: usize, delta: f64) -> Result<Self> {
        check_n(n)?;
        if !(delta > 0.0 && delta.is_finite()) {
            return domain(format!("power-law exponent parameter {delta} must be positive"));
        }
        Self::new((1..=n).map(|i| (i as f64).powf(-1.0 / (1.0 + delta))).collect())
    }

    pub fn indicator_top(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        if k == 0 || k > n {
            return domain(format!("k = {k} outside 1..={n}"));
        }
        Self::new((1..=n).map(|i| if i <= k { 1.0 } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `U_i` for rank `i` (1-based).
    pub fn get(&self, i: usize) -> f64 {
        self.values[i - 1]
    }
}

fn check_utility_len(n: usize, u: &UtilityVector) -> Result<()> {
    if u.len() != n {
        return domain(format!("utility vector has length {}, expected {n}", u.len()));
    }
    Ok(())
}

/// `E[U_{R_t} | r_t = s]` for every state.
pub(crate) fn conditional_utility(n: usize, u: &UtilityVector) -> Result<Tri<f64>> {
    let ranks = RankTable::new(n);
    let mut out = Tri::filled(n, 0.0);
    for t in 1..=n {
        for s in 1..=t {
            let row = ranks.point_row(t, s)?;
            out[(t, s)] = row.iter().zip(u.values()).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// Policy maximizing expected utility, with its value.
#[derive(Clone, Debug)]
pub struct UtilityPolicy {
    pub policy: PolicyTable,
    pub value: f64,
}

pub fn util_pol(n: usize, p: f64, u: &UtilityVector) -> Result<UtilityPolicy> {
    check_n(n)?;
    check_p(p)?;
    check_utility_len(n, u)?;
    let gain = conditional_utility(n, u)?;
    let mut q = Tri::filled(n, 0.0);
    let mut next_sum = 0.0;
    for t in (1..=n).rev() {
        let pass = next_sum / (t + 1) as f64;
        let mut sum = 0.0;
        for s in 1..=t {
            let offer = p * gain[(t, s)] + (1.0 - p) * pass;
            if offer >= pass {
                q[(t, s)] = 1.0;
                sum += offer;
            } else {
                sum += pass;
            }
        }
        next_sum = sum;
    }
    Ok(UtilityPolicy {
        policy: PolicyTable::new(n, p, q)?,
        value: next_sum,
    })
}

/// Decision table for the model where availability is seen on arrival:
/// offer to an available candidate at `(t, s)` iff the entry is `true`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTamaki")]
pub struct TamakiTable {
    pub n: usize,
    pub p: f64,
    pub offer_if_available: Tri<bool>,
}

#[derive(Deserialize)]
struct RawTamaki {
    n: usize,
    p: f64,
    offer_if_available: Tri<bool>,
}

impl TryFrom<RawTamaki> for TamakiTable {
    type Error = Error;
    fn try_from(raw: RawTamaki) -> Result<Self> {
        TamakiTable::new(raw.n, raw.p, raw.offer_if_available)
    }
}

impl TamakiTable {
    pub fn new(n: usize, p: f64, offer_if_available: Tri<bool>) -> Result<Self> {
        check_n(n)?;
        check_p(p)?;
        if offer_if_available.n() != n {
            return domain(format!(
                "decision table has {} stages, expected {n}",
                offer_if_available.n()
            ));
        }
        Ok(TamakiTable {
            n,
            p,
            offer_if_available,
        })
    }

    pub fn offers(&self, t: usize, s: usize) -> bool {
        self.offer_if_available[(t, s)]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The equivalent [`PolicyTable`]: offering to an available candidate is
    /// the same as offering to everyone with the same table, because an
    /// unavailable candidate declines.
    pub fn as_policy(&self) -> Result<PolicyTable> {
        PolicyTable::from_fn(self.n, self.p, |t, s| if self.offers(t, s) { 1.0 } else { 0.0 })
    }
}

#[derive(Clone, Debug)]
pub struct TamakiPolicy {
    pub table: TamakiTable,
    /// Exact probability that the table selects the best available candidate.
    pub value: f64,
    /// `c_1` of the backward recursion that produced the table.
    pub recursion_value: f64,
}

/// Backward recursion for selecting the best candidate among those willing to
/// accept, when availability is revealed on arrival.
pub fn tamaki_model2(n: usize, p: f64) -> Result<TamakiPolicy> {
    check_n(n)?;
    check_p(p)?;
    let ranks = RankTable::new(n);
    let mut offer = Tri::filled(n, false);
    let mut cont = 0.0;
    for t in (1..=n).rev() {
        let mut acc = 0.0;
        for s in 1..=t {
            let row = ranks.point_row(t, s)?;
            let win: f64 = (s..=n)
                .map(|i| row[i - 1] * (1.0 - p).powi(i as i32 - 1))
                .sum();
            let take = win >= cont;
            offer[(t, s)] = take;
            acc += p * if take { win } else { cont } + (1.0 - p) * cont;
        }
        cont = acc / t as f64;
    }
    let table = TamakiTable::new(n, p, offer)?;
    let value = best_available_probability(&table)?;
    Ok(TamakiPolicy {
        table,
        value,
        recursion_value: cont,
    })
}

/// Exact probability that `table` stops on the best candidate among all who
/// are willing to accept.
///
/// Stopping at an available `(t, s)` wins iff every better candidate is
/// unavailable. Later ones are free coin flips. Each of the `s - 1` earlier
/// better candidates must have been unavailable; every other earlier arrival
/// must have been unavailable whenever the table would have offered to it.
/// The walk over earlier arrivals tracks how many of the `s - 1` better ones
/// have appeared, which fixes the law of each arrival's partial rank.
pub fn best_available_probability(table: &TamakiTable) -> Result<f64> {
    let n = table.n;
    let p = table.p;
    let miss = 1.0 - p;
    let ranks = RankTable::new(n);
    // prefix[tau][r] = number of offering partial ranks <= r at stage tau.
    let prefix: Vec<Vec<usize>> = (0..=n)
        .map(|tau| {
            let mut row = vec![0usize; tau + 1];
            for r in 1..=tau {
                row[r] = row[r - 1] + usize::from(table.offers(tau, r));
            }
            row
        })
        .collect();
    let mut total = 0.0;
    let mut dist = vec![0.0f64; n + 1];
    for t in 1..=n {
        for s in 1..=t {
            if !table.offers(t, s) {
                continue;
            }
            let row = ranks.point_row(t, s)?;
            let later: f64 = (s..=n).map(|i| row[i - 1] * miss.powi((i - s) as i32)).sum();
            // dist[j]: weight of histories with j better arrivals so far.
            let better = s - 1;
            dist[..=better].iter_mut().for_each(|v| *v = 0.0);
            dist[0] = 1.0;
            for tau in 1..t {
                let left = (t - tau) as f64;
                for j in (0..=better.min(tau - 1)).rev() {
                    let w = dist[j];
                    if w == 0.0 {
                        continue;
                    }
                    let p_better = (better - j) as f64 / left;
                    // Non-better arrival: partial rank uniform on j+1..=tau.
                    let worse_slots = (tau - j) as f64;
                    let offers = (prefix[tau][tau] - prefix[tau][j]) as f64;
                    let survive = (worse_slots - offers + offers * miss) / worse_slots;
                    dist[j] = w * (1.0 - p_better) * survive;
                    if p_better > 0.0 {
                        dist[j + 1] += w * p_better * miss;
                    }
                }
            }
            total += p * later * dist[better] / t as f64;
        }
    }
    if !(0.0..=1.0 + 1e-9).contains(&total) {
        return Err(Error::Invariant(format!("win probability {total} outside [0, 1]")));
    }
    Ok(total.min(1.0))
}
