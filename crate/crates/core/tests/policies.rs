mod common;

use common::*;
use spua_core::evaluation::{expected_utility, robust_ratio};
use spua_core::lp::{build_finite_lp, solve_lp};
use spua_core::policies::{
    best_available_probability, multi_threshold_policy, robust_policy_from_lp, single_threshold_policy,
    tamaki_model2, threshold_fraction, util_pol, ThresholdFamily, UtilityVector,
};

#[test]
fn availability_value_matches_enumeration_for_every_table() {
    for n in 1..=3 {
        for &p in &[0.3, 0.5, 1.0] {
            for table in all_tables(n, p) {
                let fast = best_available_probability(&table).unwrap();
                let slow = enumerate_best_available(&table);
                assert!((fast - slow).abs() < 1e-13, "n={n} p={p}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn tamaki_two_candidates() {
    let res = tamaki_model2(2, 0.5).unwrap();
    let brute_best = all_tables(2, 0.5)
        .iter()
        .map(enumerate_best_available)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((res.value - enumerate_best_available(&res.table)).abs() < 1e-14);
    assert!((res.value - brute_best).abs() < 1e-14, "{} vs {brute_best}", res.value);
}

#[test]
fn tamaki_classical_reduction() {
    for n in 1..=10 {
        let res = tamaki_model2(n, 1.0).unwrap();
        let exact = ratio_to_f64(classical_secretary(n));
        assert!((res.value - exact).abs() < 1e-12);
        let u = UtilityVector::indicator_top(n, 1).unwrap();
        assert!((util_pol(n, 1.0, &u).unwrap().value - exact).abs() < 1e-12);
        let g = solve_lp(&build_finite_lp(n, 1.0).unwrap()).unwrap().gamma;
        assert!((g - exact).abs() < 1e-9);
    }
}

#[test]
fn robust_policy_reproduces_lp_value() {
    for &(n, p) in &[(5, 1.0), (10, 0.2), (20, 0.65)] {
        let sol = solve_lp(&build_finite_lp(n, p).unwrap()).unwrap();
        let pol = robust_policy_from_lp(&sol).unwrap();
        let rep = robust_ratio(&pol);
        assert!((rep.gamma - sol.gamma).abs() < 1e-8, "n={n} p={p}");
    }
}

#[test]
fn util_pol_dominates_random_policies() {
    let n = 20;
    let mut r = rng(77);
    for &p in &[0.2, 0.7] {
        for u in [UtilityVector::top_k(n, 3).unwrap(), UtilityVector::power_law(n, 0.1).unwrap()] {
            let best = util_pol(n, p, &u).unwrap();
            let own = expected_utility(&best.policy, &u).unwrap();
            assert!((own - best.value).abs() < 1e-12);
            for _ in 0..50 {
                let pol = random_policy(n, p, &mut r);
                assert!(expected_utility(&pol, &u).unwrap() <= best.value + 1e-12);
            }
        }
    }
}

#[test]
fn single_threshold_as_multi_threshold() {
    for &(n, p) in &[(100, 1.0), (100, 0.8), (37, 0.3), (10, 0.6), (7, 0.95)] {
        let single = single_threshold_policy(n, p).unwrap();
        let cutoff = (threshold_fraction(p) * n as f64 - 1e-9).ceil() as usize;
        if cutoff >= n {
            assert!(single.q.iter().all(|(_, &v)| v == 0.0));
            continue;
        }
        let fam = ThresholdFamily::new(vec![(cutoff + 1) as f64 / n as f64, 1.0, 1.0]).unwrap();
        let multi = multi_threshold_policy(n, p, &fam).unwrap();
        assert_eq!(single, multi, "n={n} p={p}");
    }
    // With the raw fraction the two conventions differ by one stage.
    let raw = multi_threshold_policy(100, 0.8, &ThresholdFamily::single(0.8).unwrap()).unwrap();
    assert_eq!(raw.offer(33, 1), 1.0);
    assert_eq!(single_threshold_policy(100, 0.8).unwrap().offer(33, 1), 0.0);
}
