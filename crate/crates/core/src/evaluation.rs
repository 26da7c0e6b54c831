//! Exact evaluation of policies through their occupancy measures.

use serde::Serialize;

use crate::error::{check_n, check_p, domain, Result};
use crate::lp::top_k_accept_prob;
use crate::policies::UtilityVector;
use crate::polytope::{policy_to_occupancy, PolicyTable};
use crate::rank_stats::RankTable;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    /// Robust ratio: the smallest entry of `ratios`.
    pub gamma: f64,
    /// Smallest `k` attaining the robust ratio.
    pub argmin_k: usize,
    /// `collect[k-1] / (1 - (1-p)^k)`.
    pub ratios: Vec<f64>,
    /// Probability of collecting a top-`k` candidate, indexed by `k - 1`.
    pub collect: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_utility: Option<f64>,
}

/// Probability of hiring the candidate of overall rank `i`, for every `i`.
pub fn collect_rank_probs(policy: &PolicyTable) -> Vec<f64> {
    let n = policy.n;
    let occ = policy_to_occupancy(policy);
    let ranks = RankTable::new(n);
    let mut out = vec![0.0; n];
    for t in 1..=n {
        for s in 1..=t {
            let x = occ.x[(t, s)];
            if x == 0.0 {
                continue;
            }
            let row = ranks.point_row(t, s).expect("state in range");
            for (o, r) in out.iter_mut().zip(&row) {
                *o += x * r;
            }
        }
    }
    out.iter_mut().for_each(|v| *v *= policy.p);
    out
}

/// Probability of hiring a top-`k` candidate, for every `k`.
pub fn collect_topk_probs(policy: &PolicyTable) -> Vec<f64> {
    let mut acc = 0.0;
    collect_rank_probs(policy)
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return domain(format!("rank {k} outside 1..={n}"));
    }
    Ok(())
}

pub fn collect_rank_prob(policy: &PolicyTable, i: usize) -> Result<f64> {
    check_k(policy.n, i)?;
    Ok(collect_rank_probs(policy)[i - 1])
}

pub fn collect_topk_prob(policy: &PolicyTable, k: usize) -> Result<f64> {
    check_k(policy.n, k)?;
    Ok(collect_topk_probs(policy)[k - 1])
}

/// Builds a report from top-`k` collect probabilities.
pub fn report_from_collect(p: f64, collect: Vec<f64>) -> EvaluationReport {
    let ratios: Vec<f64> = collect
        .iter()
        .enumerate()
        .map(|(i, c)| c / top_k_accept_prob(p, i + 1))
        .collect();
    let (argmin, gamma) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    EvaluationReport {
        gamma,
        argmin_k: argmin + 1,
        ratios,
        collect,
        expected_utility: None,
    }
}

pub fn robust_ratio(policy: &PolicyTable) -> EvaluationReport {
    report_from_collect(policy.p, collect_topk_probs(policy))
}

pub fn expected_utility(policy: &PolicyTable, u: &UtilityVector) -> Result<f64> {
    if u.len() != policy.n {
        return domain(format!("utility vector has length {}, expected {}", u.len(), policy.n));
    }
    Ok(collect_rank_probs(policy).iter().zip(u.values()).map(|(a, b)| a * b).sum())
}

/// Report including the expected utility under `u`.
pub fn evaluate_with_utility(policy: &PolicyTable, u: &UtilityVector) -> Result<EvaluationReport> {
    let mut report = robust_ratio(policy);
    report.expected_utility = Some(expected_utility(policy, u)?);
    Ok(report)
}

/// Expected utility of an offline decision maker who knows every candidate's
/// rank and willingness: the best willing candidate is hired.
pub fn opt_offline_utility(n: usize, p: f64, u: &UtilityVector) -> Result<f64> {
    check_n(n)?;
    check_p(p)?;
    if u.len() != n {
        return domain(format!("utility vector has length {}, expected {n}", u.len()));
    }
    Ok(u.values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * p * (1.0 - p).powi(i as i32))
        .sum())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_only_policy() {
        let (n, p) = (7, 0.35);
        let pol = PolicyTable::first_only(n, p).unwrap();
        let collect = collect_topk_probs(&pol);
        for k in 1..=n {
            assert!((collect[k - 1] - p * k as f64 / n as f64).abs() < 1e-14);
            assert!((collect_rank_prob(&pol, k).unwrap() - p / n as f64).abs() < 1e-14);
        }
        let report = robust_ratio(&pol);
        assert!((report.gamma - 1.0 / n as f64).abs() < 1e-14);
        assert_eq!(report.argmin_k, 1);
    }

    #[test]
    fn never_offer_collects_nothing() {
        let pol = PolicyTable::never_offer(4, 0.5).unwrap();
        assert!(collect_topk_probs(&pol).iter().all(|&v| v == 0.0));
        assert_eq!(robust_ratio(&pol).gamma, 0.0);
    }

    #[test]
    fn single_candidate() {
        let pol = PolicyTable::always_offer(1, 0.4).unwrap();
        assert!((collect_topk_prob(&pol, 1).unwrap() - 0.4).abs() < 1e-15);
        assert!((robust_ratio(&pol).gamma - 1.0).abs() < 1e-15);
    }

    #[test]
    fn always_offer_constant_utility() {
        let (n, p) = (9, 0.2);
        let pol = PolicyTable::always_offer(n, p).unwrap();
        let u = UtilityVector::new(vec![1.0; n]).unwrap();
        let v = expected_utility(&pol, &u).unwrap();
        assert!((v - (1.0 - 0.8f64.powi(9))).abs() < 1e-13);
    }

    #[test]
    fn offline_optimum() {
        let u = UtilityVector::new(vec![1.0, 0.5, 0.25]).unwrap();
        assert!((opt_offline_utility(3, 0.5, &u).unwrap() - 0.65625).abs() < 1e-15);
        let u = UtilityVector::indicator_top(4, 1).unwrap();
        assert!((opt_offline_utility(4, 0.3, &u).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn report_json_schema() {
        let pol = PolicyTable::first_only(3, 0.5).unwrap();
        let v: serde_json::Value = serde_json::to_value(robust_ratio(&pol)).unwrap();
        for key in ["gamma", "argmin_k", "ratios", "collect"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v.get("expected_utility").is_none());
    }
}
