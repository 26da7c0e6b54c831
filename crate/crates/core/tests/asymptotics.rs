use spua_core::asymptotics::{
    beta_root, clp_alpha, clp_constraint_value, damped_rank_integral, damped_solution, lower_bound, pstar_root,
    single_threshold_solution, threshold_rank_integral, threshold_value, upper_bound, K_MAX,
};
use spua_core::policies::ThresholdFamily;

#[test]
fn sandwich_on_fine_grid() {
    for i in 1..=1000 {
        let p = i as f64 / 1000.0;
        let lo = lower_bound(p).unwrap();
        let hi = upper_bound(p).unwrap();
        assert!(lo <= hi + 1e-9, "p={p}: {lo} > {hi}");
        assert!(lo > 0.0 && hi <= 1.0);
    }
}

#[test]
fn constants() {
    assert!((1.0 / beta_root().unwrap() - 0.745).abs() < 1e-3);
    let ps = pstar_root().unwrap();
    assert!((ps - 0.594).abs() < 1e-3);
    assert!((threshold_value(ps) - 0.466).abs() < 1e-3);
}

#[test]
fn single_threshold_value_for_large_p() {
    for &p in &[0.6, 0.7, 0.8, 0.9] {
        let sol = single_threshold_solution(p).unwrap();
        let (g, _) = sol.gamma(K_MAX).unwrap();
        assert!((g - threshold_value(p)).abs() < 1e-6, "p={p}: {g}");
    }
    let sol = single_threshold_solution(0.55).unwrap();
    assert!(clp_constraint_value(&sol, 2).unwrap() < threshold_value(0.55));
    let ps = pstar_root().unwrap();
    let sol = single_threshold_solution(ps).unwrap();
    assert!((clp_constraint_value(&sol, 2).unwrap() - threshold_value(ps)).abs() < 1e-9);
}

#[test]
fn damped_solution_lower_bound() {
    let target = threshold_value(pstar_root().unwrap());
    for &p in &[0.1, 0.3, 0.5] {
        let sol = damped_solution(p).unwrap();
        let (g, _) = sol.gamma(K_MAX).unwrap();
        assert!(g >= target - 1e-6, "p={p}: {g}");
        for i in 0..=100 {
            assert!(sol.dynamic_slack(i as f64 / 100.0).unwrap() >= -1e-10);
        }
    }
    assert!(damped_solution(0.9).is_err());
}

#[test]
fn threshold_families_are_feasible() {
    let fams = [vec![0.2, 0.5], vec![(-1.0f64).exp()], vec![0.1, 0.1, 0.4, 0.9], vec![0.3, 1.0]];
    for times in fams {
        for &p in &[0.2, 0.6, 1.0] {
            let sol = clp_alpha(&ThresholdFamily::new(times.clone()).unwrap(), p).unwrap();
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                let slack = sol.dynamic_slack(t).unwrap();
                assert!(slack >= -1e-10, "{times:?} p={p} t={t}: {slack}");
                let closed = sol.remaining_mass(t).unwrap();
                assert!((slack + t * sol.alpha(t, 1) - closed).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn integral_inequalities() {
    let ps = pstar_root().unwrap();
    for &p in &[ps, 0.7, 0.9] {
        for l in 0..=10 {
            let v = threshold_rank_integral(p, l).unwrap();
            let rhs = (1.0 - p).powi(l as i32);
            assert!(v >= rhs - 1e-10, "p={p} l={l}");
            if l == 0 {
                assert!((v - 1.0).abs() < 1e-10);
            }
        }
    }
    for &eps in &[0.1, 0.3] {
        let p = (1.0 - eps) * ps;
        for l in 0..=10 {
            let v = damped_rank_integral(eps, l).unwrap();
            assert!(v >= (1.0 - p).powi(l as i32) - 1e-10, "eps={eps} l={l}");
        }
    }
}
