//! Markovian offer/pass policies and their occupancy measures.
//!
//! A policy offers to the `t`-th arrival with probability `q[t][s]` when its
//! partial rank is `s`. Its occupancy measure records, for each state, the
//! probability of reaching it and offering (`x`) or passing (`y`). The two
//! representations are interchangeable on reachable states.

use serde::{Deserialize, Serialize};

use crate::error::{check_n, check_p, domain, Error, Result};
use crate::tri::Tri;

/// Tolerance for Pol membership checks.
pub const POL_TOLERANCE: f64 = 1e-10;

/// Below this reach probability a stage is treated as unreachable.
pub const ZERO_REACH: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy")]
pub struct PolicyTable {
    pub n: usize,
    pub p: f64,
    pub q: Tri<f64>,
}

#[derive(Deserialize)]
struct RawPolicy {
    n: usize,
    p: f64,
    q: Tri<f64>,
}

impl TryFrom<RawPolicy> for PolicyTable {
    type Error = Error;
    fn try_from(raw: RawPolicy) -> Result<Self> {
        PolicyTable::new(raw.n, raw.p, raw.q)
    }
}

impl PolicyTable {
    pub fn new(n: usize, p: f64, q: Tri<f64>) -> Result<Self> {
        check_n(n)?;
        check_p(p)?;
        if q.n() != n {
            return domain(format!("offer table has {} stages, expected {n}", q.n()));
        }
        if let Some(((t, s), v)) = q.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return domain(format!("offer probability q[{t}][{s}] = {v} outside [0, 1]"));
        }
        Ok(PolicyTable { n, p, q })
    }

    pub fn from_fn(n: usize, p: f64, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(n, p, Tri::from_fn(n, f))
    }

    pub fn never_offer(n: usize, p: f64) -> Result<Self> {
        Self::from_fn(n, p, |_, _| 0.0)
    }

    pub fn always_offer(n: usize, p: f64) -> Result<Self> {
        Self::from_fn(n, p, |_, _| 1.0)
    }

    /// Offers to the first arrival only.
    pub fn first_only(n: usize, p: f64) -> Result<Self> {
        Self::from_fn(n, p, |t, _| if t == 1 { 1.0 } else { 0.0 })
    }

    pub fn offer(&self, t: usize, s: usize) -> f64 {
        self.q[(t, s)]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyMeasure {
    pub n: usize,
    pub p: f64,
    /// Probability of reaching `(t, s)` and offering.
    pub x: Tri<f64>,
    /// Probability of reaching `(t, s)` and passing.
    pub y: Tri<f64>,
}

impl OccupancyMeasure {
    /// Probability that the process reaches stage `t`, computed from the
    /// offer mass of earlier stages.
    pub fn reach_probability(&self, t: usize) -> f64 {
        let offered: f64 = (1..t.min(self.n + 1)).map(|tau| self.x.row(tau).iter().sum::<f64>()).sum();
        1.0 - self.p * offered
    }

    /// Probability mass flowing out of stage `t` without an acceptance; the
    /// right-hand side shared by every cell of stage `t + 1`.
    pub fn outflow(&self, t: usize) -> f64 {
        self.x
            .row(t)
            .iter()
            .zip(self.y.row(t))
            .map(|(x, y)| y + (1.0 - self.p) * x)
            .sum()
    }

    /// Largest violation of the Pol constraints.
    pub fn max_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (_, v) in self.x.iter().chain(self.y.iter()) {
            worst = worst.max(-v);
        }
        worst = worst.max((self.x[(1, 1)] + self.y[(1, 1)] - 1.0).abs());
        for t in 2..=self.n {
            let rhs = self.outflow(t - 1) / t as f64;
            for s in 1..=t {
                worst = worst.max((self.x[(t, s)] + self.y[(t, s)] - rhs).abs());
            }
        }
        worst
    }

    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let v = self.max_violation();
        if v > tolerance {
            return Err(Error::Invariant(format!("occupancy measure violates Pol by {v:e}")));
        }
        Ok(())
    }
}

/// Forward recursion from a policy to its occupancy measure.
pub fn policy_to_occupancy(policy: &PolicyTable) -> OccupancyMeasure {
    let n = policy.n;
    let p = policy.p;
    let mut x = Tri::filled(n, 0.0);
    let mut y = Tri::filled(n, 0.0);
    let mut reach = 1.0;
    for t in 1..=n {
        let share = reach / t as f64;
        let mut next = 0.0;
        for s in 1..=t {
            let q = policy.q[(t, s)];
            let xo = share * q;
            let yo = share * (1.0 - q);
            x[(t, s)] = xo;
            y[(t, s)] = yo;
            next += yo + (1.0 - p) * xo;
        }
        reach = next;
    }
    OccupancyMeasure { n, p, x, y }
}

/// Recovers the policy realizing an occupancy measure. Offer probabilities at
/// unreachable stages are set to zero.
pub fn occupancy_to_policy(occ: &OccupancyMeasure) -> Result<PolicyTable> {
    occ.validate(POL_TOLERANCE)?;
    let n = occ.n;
    let mut q = Tri::filled(n, 0.0);
    q[(1, 1)] = occ.x[(1, 1)].clamp(0.0, 1.0);
    for t in 2..=n {
        let den = occ.outflow(t - 1);
        if den <= ZERO_REACH {
            continue;
        }
        for s in 1..=t {
            q[(t, s)] = (t as f64 * occ.x[(t, s)] / den).clamp(0.0, 1.0);
        }
    }
    PolicyTable::new(n, occ.p, q)
}

/// Probability that `policy` reaches stage `t`.
pub fn reach_probability(occ: &OccupancyMeasure, t: usize) -> f64 {
    occ.reach_probability(t)
}
