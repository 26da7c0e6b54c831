//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use num_rational::Ratio;
use spua_core::asymptotics::{
    beta_root, bound_curve, bounds_csv, clp_constraint_value, damped_rank_integral, lower_bound, pstar_root,
    single_threshold_solution, threshold_rank_integral, threshold_value, upper_bound, K_MAX,
};
use spua_core::evaluation::{collect_topk_probs, expected_utility, opt_offline_utility, robust_ratio};
use spua_core::lp::{build_capped_lp, build_finite_lp, default_cap, dual_dp_value, solve_lp, top_k_accept_prob};
use spua_core::montecarlo::{simulate, SimConfig};
use spua_core::policies::{robust_policy_from_lp, util_pol, UtilityVector};
use spua_core::rank_stats::{ExactRankTable, RankKernel};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gamma(n: usize, p: f64) -> Result<f64, String> {
    let model = build_finite_lp(n, p).map_err(|e| e.to_string())?;
    solve_lp(&model).map(|s| s.gamma).map_err(|e| format!("n={n} p={p}: {e}"))
}

fn rank_oracle() -> Check {
    let mut cells = 0;
    for n in 1..=8 {
        let table = ExactRankTable::new(n).map_err(|e| e.to_string())?;
        let perms = permutations(n);
        for t in 1..=n {
            let mut counts = vec![vec![0i128; n + 1]; t + 1];
            for perm in &perms {
                counts[partial_ranks(perm)[t - 1]][perm[t - 1]] += 1;
            }
            for s in 1..=t {
                let total: i128 = counts[s].iter().sum();
                let mut cum = 0;
                for k in 1..=n {
                    cum += counts[s][k];
                    let got = table.topk(t, s, k).map_err(|e| e.to_string())?;
                    ensure(got == Ratio::new(cum, total), || format!("n={n} t={t} s={s} k={k}: {got}"))?;
                    cells += 1;
                }
            }
        }
    }
    Ok(format!("{cells} (n,t,s,k) cells equal permutation frequencies exactly"))
}

fn classical_equivalence() -> Check {
    let mut worst = 0.0f64;
    for n in 2..=12 {
        let exact = ratio_to_f64(classical_secretary(n));
        let g = gamma(n, 1.0)?;
        worst = worst.max((g - exact).abs());
        ensure((g - exact).abs() <= 1e-8, || format!("n={n}: LP {g} vs DP {exact}"))?;
    }
    ensure(classical_secretary(5) == Ratio::new(13, 30), || "DP value at n=5 is not 13/30".into())?;
    let g5 = gamma(5, 1.0)?;
    ensure((g5 - 13.0 / 30.0).abs() <= 1e-8, || format!("n=5: {g5}"))?;
    Ok(format!("max |LP - DP| = {worst:.1e} over n=2..12; gamma_5 = {g5:.12}"))
}

fn constants() -> Check {
    let inv_beta = 1.0 / beta_root().map_err(|e| e.to_string())?;
    let ps = pstar_root().map_err(|e| e.to_string())?;
    let lb = threshold_value(ps);
    ensure((inv_beta - 0.745).abs() <= 1e-3, || format!("1/beta = {inv_beta}"))?;
    ensure((ps - 0.594).abs() <= 1e-3, || format!("p* = {ps}"))?;
    ensure((lb - 0.466).abs() <= 1e-3, || format!("(p*)^(p*/(1-p*)) = {lb}"))?;
    Ok(format!("1/beta = {inv_beta:.6}, p* = {ps:.6}, (p*)^(p*/(1-p*)) = {lb:.6}"))
}

fn finite_vs_asymptotic() -> Check {
    let floor = (-1.0f64).exp();
    let mut slowest = Duration::ZERO;
    let mut tightest = f64::INFINITY;
    for i in 1..=19 {
        let p = i as f64 * 0.05;
        let start = Instant::now();
        let g = gamma(60, p)?;
        slowest = slowest.max(start.elapsed());
        let lb = lower_bound(p).map_err(|e| e.to_string())?;
        tightest = tightest.min(g - lb);
        ensure(g >= lb - 1e-6, || format!("p={p}: gamma_60 {g} < lower {lb}"))?;
        ensure(g >= floor - 1e-6, || format!("p={p}: gamma_60 {g} < 1/e"))?;
    }
    ensure(slowest <= Duration::from_secs(30), || format!("slowest solve {slowest:?}"))?;
    Ok(format!("min gamma_60 - lower = {tightest:.3e}; slowest solve {:.2}s", slowest.as_secs_f64()))
}

fn monotonicity() -> Check {
    for &p in &[0.3, 0.6, 0.9] {
        let vals = [5, 10, 20, 40].iter().map(|&n| gamma(n, p)).collect::<Result<Vec<_>, _>>()?;
        for w in vals.windows(2) {
            ensure(w[1] <= w[0] + 1e-8, || format!("p={p}: {vals:?}"))?;
        }
    }
    Ok("gamma_n nonincreasing over n = 5, 10, 20, 40 for p = 0.3, 0.6, 0.9".into())
}

fn capped_sandwich() -> Check {
    let mut detail = Vec::new();
    for &p in &[0.3, 0.7] {
        let n = 30;
        let q = default_cap(n, p);
        let full = gamma(n, p)?;
        let capped = solve_lp(&build_capped_lp(n, p, q).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .gamma;
        let upper = full / top_k_accept_prob(p, q);
        ensure(full <= capped + 1e-8 && capped <= upper + 1e-8, || {
            format!("p={p} q={q}: {full} <= {capped} <= {upper} fails")
        })?;
        detail.push(format!("p={p} q={q}: {full:.9} <= {capped:.9} <= {upper:.9}"));
    }
    Ok(detail.join("; "))
}

fn weak_duality() -> Check {
    let n = 30;
    let mut r = rng(7);
    let mut min_gap = f64::INFINITY;
    for &p in &[0.3, 0.7] {
        let g = gamma(n, p)?;
        for _ in 0..20 {
            let u = random_simplex(n, &mut r);
            let s: f64 = u.iter().sum();
            let u: Vec<f64> = u.iter().map(|v| v / s * (1.0 + 1e-15)).collect();
            let d = dual_dp_value(n, p, &u).map_err(|e| e.to_string())?;
            min_gap = min_gap.min(d - g);
            ensure(d >= g - 1e-8, || format!("p={p}: dual {d} < gamma {g}"))?;
        }
    }
    Ok(format!("40 random weight vectors; min dual - gamma = {min_gap:.3e}"))
}

fn policy_consistency() -> Check {
    let mut worst = 0.0f64;
    for &n in &[10, 30, 60] {
        for &p in &[0.2, 0.5, 0.8] {
            let sol = solve_lp(&build_finite_lp(n, p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let pol = robust_policy_from_lp(&sol).map_err(|e| e.to_string())?;
            let g = robust_ratio(&pol).gamma;
            worst = worst.max((g - sol.gamma).abs());
            ensure((g - sol.gamma).abs() <= 1e-8, || format!("n={n} p={p}: {g} vs {}", sol.gamma))?;
        }
    }
    Ok(format!("max |gamma_P - gamma*| = {worst:.1e} over n = 10, 30, 60 and p = 0.2, 0.5, 0.8"))
}

fn clp_exactness() -> Check {
    let mut worst = 0.0f64;
    for &p in &[0.6, 0.7, 0.8, 0.9] {
        let sol = single_threshold_solution(p).map_err(|e| e.to_string())?;
        let (g, _) = sol.gamma(K_MAX).map_err(|e| e.to_string())?;
        worst = worst.max((g - threshold_value(p)).abs());
        ensure((g - threshold_value(p)).abs() <= 1e-6, || format!("p={p}: min_k {g} vs {}", threshold_value(p)))?;
    }
    let sol = single_threshold_solution(0.55).map_err(|e| e.to_string())?;
    let k2 = clp_constraint_value(&sol, 2).map_err(|e| e.to_string())?;
    let target = threshold_value(0.55);
    ensure(k2 < target, || format!("p=0.55: k=2 value {k2} not below {target}"))?;
    Ok(format!("max |min_k value - p^(p/(1-p))| = {worst:.1e}; p=0.55 k=2: {k2:.9} < {target:.9}"))
}

fn integral_inequalities() -> Check {
    let ps = pstar_root().map_err(|e| e.to_string())?;
    let mut min_slack = f64::INFINITY;
    for &p in &[ps, 0.7, 0.9] {
        for l in 0..=10 {
            let v = threshold_rank_integral(p, l).map_err(|e| e.to_string())?;
            let slack = v - (1.0 - p).powi(l as i32);
            min_slack = min_slack.min(slack);
            ensure(slack >= -1e-10, || format!("threshold integral p={p} l={l}: slack {slack}"))?;
        }
    }
    for &eps in &[0.1, 0.3] {
        let p = (1.0 - eps) * ps;
        for l in 0..=10 {
            let v = damped_rank_integral(eps, l).map_err(|e| e.to_string())?;
            let slack = v - (1.0 - p).powi(l as i32);
            min_slack = min_slack.min(slack);
            ensure(slack >= -1e-10, || format!("damped integral eps={eps} l={l}: slack {slack}"))?;
        }
    }
    Ok(format!("55 integrals; min slack = {min_slack:.3e}"))
}

fn monte_carlo() -> Check {
    let trials = 1_000_000;
    let mut worst = 0.0f64;
    let mut r = rng(11);
    let mut cases = Vec::new();
    for i in 0..10 {
        let p = 0.1 + 0.09 * i as f64;
        cases.push((random_policy(8, p, &mut r), 1000 + i as u64));
    }
    let sol = solve_lp(&build_finite_lp(30, 0.5).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    cases.push((robust_policy_from_lp(&sol).map_err(|e| e.to_string())?, 2000));
    for (pol, seed) in &cases {
        let cfg = SimConfig::new(trials, *seed);
        let rep = simulate(pol, &cfg).map_err(|e| e.to_string())?;
        let exact = collect_topk_probs(pol);
        for k in 0..pol.n {
            let z = (rep.collect[k] - exact[k]).abs() / rep.stderr[k].max(1e-12);
            worst = worst.max(z);
            ensure(z <= 4.0, || format!("n={} p={} k={}: z = {z:.2}", pol.n, pol.p, k + 1))?;
        }
        let again = simulate(pol, &cfg).map_err(|e| e.to_string())?;
        ensure(again == rep, || format!("seed {seed} not reproducible"))?;
    }
    Ok(format!("11 policies x 10^6 trials; max |z| = {worst:.2}; reruns bit-identical"))
}

fn utility_guarantee() -> Check {
    let n = 30;
    let mut rows = 0;
    let mut min_margin = f64::INFINITY;
    for &p in &[0.05, 0.2, 0.5, 0.8] {
        let sol = solve_lp(&build_finite_lp(n, p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let rob = robust_policy_from_lp(&sol).map_err(|e| e.to_string())?;
        let mut utilities: Vec<UtilityVector> = (1..=4).map(|k| UtilityVector::top_k(n, k).unwrap()).collect();
        utilities.extend([0.01, 0.1, 0.2].iter().map(|&d| UtilityVector::power_law(n, d).unwrap()));
        for u in &utilities {
            let opt = opt_offline_utility(n, p, u).map_err(|e| e.to_string())?;
            let r = expected_utility(&rob, u).map_err(|e| e.to_string())?;
            let best = util_pol(n, p, u).map_err(|e| e.to_string())?.value;
            min_margin = min_margin.min(r - sol.gamma * opt);
            ensure(r >= sol.gamma * opt - 1e-8, || format!("p={p}: Rob-Pol {r} < gamma*OPT {}", sol.gamma * opt))?;
            ensure(best >= r - 1e-8, || format!("p={p}: Util-Pol {best} < Rob-Pol {r}"))?;
            rows += 1;
        }
    }
    Ok(format!("{rows} (p, utility) pairs; min E[U(Rob)] - gamma E[U(OPT)] = {min_margin:.3e}"))
}

fn figure_regeneration() -> Check {
    let grid: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
    let csv = bounds_csv(&bound_curve(&grid, Some(60)));
    let mut lines = csv.lines();
    ensure(lines.next() == Some("p,upper,lower,gamma_n,status"), || "bad header".into())?;
    let mut max_gap = 0.0f64;
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        ensure(f.len() == 5 && f[4] == "ok", || format!("row {line}"))?;
        let num = |i: usize| f[i].parse::<f64>().map_err(|e| format!("{line}: {e}"));
        let (p, upper, lower, g) = (num(0)?, num(1)?, num(2)?, num(3)?);
        ensure(lower <= g + 1e-9 && g <= 1.0 + 1e-12, || format!("p={p}: lower {lower}, gamma {g}"))?;
        ensure(lower <= upper + 1e-9, || format!("p={p}: lower {lower} > upper {upper}"))?;
        if p >= 0.6 - 1e-12 {
            let gap = g - threshold_value(p);
            max_gap = max_gap.max(gap);
            ensure((-1e-9..=0.08).contains(&gap), || format!("p={p}: gap {gap}"))?;
        }
        ensure(
            (upper - upper_bound(p).unwrap()).abs() < 1e-9 && (lower - lower_bound(p).unwrap()).abs() < 1e-9,
            || format!("p={p}: CSV bounds disagree with library"),
        )?;
        rows += 1;
    }
    ensure(rows == 100, || format!("{rows} rows"))?;
    Ok(format!("{rows} rows; max gamma_60 - p^(p/(1-p)) for p >= 0.6: {max_gap:.4}"))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("rank oracle (n <= 8, exact)", rank_oracle),
        ("classical secretary equivalence (n = 2..12)", classical_equivalence),
        ("asymptotic constants", constants),
        ("finite vs asymptotic sandwich (n = 60)", finite_vs_asymptotic),
        ("monotonicity in n", monotonicity),
        ("capped LP sandwich (n = 30)", capped_sandwich),
        ("weak duality (n = 30)", weak_duality),
        ("LP policy consistency", policy_consistency),
        ("single-threshold exactness for large p", clp_exactness),
        ("threshold and damped integral inequalities", integral_inequalities),
        ("Monte Carlo agreement", monte_carlo),
        ("utility guarantee and dominance (n = 30)", utility_guarantee),
        ("bound curve regeneration (n = 60)", figure_regeneration),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:2}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
