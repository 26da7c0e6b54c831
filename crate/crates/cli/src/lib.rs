//! Command implementations behind the `spua` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use spua_core::asymptotics::{bound_curve, bounds_csv};
use spua_core::evaluation::{evaluate_with_utility, expected_utility, opt_offline_utility};
use spua_core::fmt::sig;
use spua_core::lp::{build_capped_lp, build_finite_lp, default_cap, solve_lp, top_k_accept_prob};
use spua_core::montecarlo::{simulate, simulate_availability_policy, SimConfig};
use spua_core::policies::{robust_policy_from_lp, single_threshold_policy, tamaki_model2, util_pol};
use spua_core::{robust_ratio, Error, PolicyTable, TamakiTable, UtilityVector};

#[derive(Debug, Parser)]
#[command(name = "spua", version, about = "Robust hiring policies when candidates may decline offers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a policy and write it as JSON.
    Solve(SolveArgs),
    /// Evaluate a policy file exactly.
    Eval(EvalArgs),
    /// Simulate a policy or availability-aware decision table.
    Simulate(SimulateArgs),
    /// Asymptotic bounds over a grid of acceptance probabilities.
    Bounds(BoundsArgs),
    /// Compare policies by expected utility relative to the offline optimum.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    /// Optimal robust policy from the linear program.
    Robust,
    /// Single-threshold policy.
    Threshold,
    /// Availability-aware decision table (written as a table, not a policy).
    Tamaki,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cap {
    Auto,
    Fixed(usize),
}

impl FromStr for Cap {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Cap::Auto);
        }
        s.parse().map(Cap::Fixed).map_err(|_| format!("expected a positive integer or `auto`, got `{s}`"))
    }
}

/// Utility specification: `top-k:K` or `power:DELTA`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UtilitySpec {
    TopK(usize),
    PowerLaw(f64),
}

impl FromStr for UtilitySpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = s.split_once(':').ok_or_else(|| format!("expected `top-k:K` or `power:DELTA`, got `{s}`"))?;
        match kind {
            "top-k" => arg.parse().map(UtilitySpec::TopK).map_err(|_| format!("bad k `{arg}`")),
            "power" => arg.parse().map(UtilitySpec::PowerLaw).map_err(|_| format!("bad delta `{arg}`")),
            _ => Err(format!("unknown utility kind `{kind}`")),
        }
    }
}

impl UtilitySpec {
    pub fn build(self, n: usize) -> spua_core::Result<UtilityVector> {
        match self {
            UtilitySpec::TopK(k) => UtilityVector::top_k(n, k),
            UtilitySpec::PowerLaw(d) => {
                if !(d > 0.0 && d.is_finite()) {
                    return Err(Error::Domain(format!("power-law exponent {d} must be positive")));
                }
                UtilityVector::power_law(n, d)
            }
        }
    }

    fn label(self) -> String {
        match self {
            UtilitySpec::TopK(k) => format!("top-k:{k}"),
            UtilitySpec::PowerLaw(d) => format!("power:{d}"),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "robust")]
    pub kind: PolicyKind,
    /// Solve the relaxation with only the top-Q constraints (`auto` picks
    /// ceil(ln n / p)) and report the certified interval.
    #[arg(long, value_name = "Q")]
    pub cap: Option<Cap>,
    /// Where to write the policy JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the LP in CPLEX LP format.
    #[arg(long, value_name = "FILE")]
    pub export_lp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolicyFileArgs {
    /// Policy or decision-table JSON file.
    #[arg(long)]
    pub policy: PathBuf,
    /// Expected number of candidates; checked against the file.
    #[arg(long)]
    pub n: Option<usize>,
    /// Expected acceptance probability; checked against the file.
    #[arg(long)]
    pub p: Option<f64>,
    /// Also report the expected utility (`top-k:K` or `power:DELTA`).
    #[arg(long)]
    pub utility: Option<UtilitySpec>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub file: PolicyFileArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub file: PolicyFileArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated acceptance probabilities.
    #[arg(long, value_delimiter = ',', conflicts_with = "p_range", required_unless_present = "p_range")]
    pub p_grid: Option<Vec<f64>>,
    /// Inclusive range `START:END:STEP`.
    #[arg(long, value_name = "START:END:STEP")]
    pub p_range: Option<String>,
}

impl GridArgs {
    pub fn grid(&self) -> anyhow::Result<Vec<f64>> {
        let grid = match (&self.p_grid, &self.p_range) {
            (Some(g), _) => g.clone(),
            (None, Some(r)) => parse_range(r)?,
            (None, None) => bail!("one of --p-grid or --p-range is required"),
        };
        if grid.is_empty() {
            bail!("empty probability grid");
        }
        if let Some(p) = grid.iter().find(|p| !(p.is_finite() && **p > 0.0 && **p <= 1.0)) {
            return Err(Error::Domain(format!("grid value {p} outside (0, 1]")).into());
        }
        Ok(grid)
    }
}

/// Parses `start:end:step` into an inclusive grid; the end point is kept
/// when it lies within a small fraction of a step.
pub fn parse_range(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("expected START:END:STEP, got `{text}`");
    }
    let nums = parts
        .iter()
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number `{s}` in `{text}`")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !(step.is_finite() && step > 0.0) || end.partial_cmp(&start).is_none_or(|o| o.is_lt()) {
        bail!("range `{text}` must have STEP > 0 and END >= START");
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        bail!("range `{text}` has too many points");
    }
    // Rounding to 12 decimals keeps 0.1 + 2 * 0.05 printing as 0.2.
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also solve the finite program for this many candidates at each point.
    #[arg(long)]
    pub reference_n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// `top-k:K` or `power:DELTA`.
    #[arg(long)]
    pub utility: UtilitySpec,
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Monte Carlo trials for the availability-aware policy.
    #[arg(long, default_value_t = 200_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maximum `n` accepted by the commands that solve the program.
pub const MAX_N: usize = 200;

/// Exit status for an error: 2 when a numerical method failed, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Solver { .. } | Error::Convergence(_) | Error::Quadrature { .. } | Error::Invariant(_) => 2,
                Error::Domain(_) | Error::Json(_) | Error::Io(_) => 1,
            };
        }
    }
    1
}

/// Runs a parsed command and returns what should go to standard output.
pub fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

fn check_size(n: usize) -> anyhow::Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Domain(format!("n = {n} outside 1..={MAX_N}")).into());
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).map_err(Error::from).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: String) -> anyhow::Result<String> {
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn pretty(v: &impl serde::Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

pub fn cmd_solve(a: &SolveArgs) -> anyhow::Result<String> {
    check_size(a.n)?;
    let (file, mut summary) = match a.kind {
        PolicyKind::Robust => solve_robust(a)?,
        PolicyKind::Threshold => {
            if a.cap.is_some() || a.export_lp.is_some() {
                bail!("--cap and --export-lp apply only to --kind robust");
            }
            let policy = single_threshold_policy(a.n, a.p)?;
            let report = robust_ratio(&policy);
            let summary = json!({"gamma": report.gamma, "argmin_k": report.argmin_k});
            (policy.to_json()?, summary)
        }
        PolicyKind::Tamaki => {
            if a.cap.is_some() || a.export_lp.is_some() {
                bail!("--cap and --export-lp apply only to --kind robust");
            }
            let tp = tamaki_model2(a.n, a.p)?;
            let report = robust_ratio(&tp.table.as_policy()?);
            let summary = json!({
                "best_available_probability": tp.value,
                "recursion_value": tp.recursion_value,
                "gamma": report.gamma,
                "argmin_k": report.argmin_k,
            });
            (tp.table.to_json()?, summary)
        }
    };
    summary["n"] = json!(a.n);
    summary["p"] = json!(a.p);
    if let Some(path) = &a.out {
        write_file(path, &file)?;
        summary["policy_file"] = json!(path.display().to_string());
    }
    pretty(&summary)
}

fn solve_robust(a: &SolveArgs) -> anyhow::Result<(String, Value)> {
    let cap = match a.cap {
        None => None,
        Some(Cap::Auto) => Some(default_cap(a.n, a.p)),
        Some(Cap::Fixed(q)) => Some(q),
    };
    let model = match cap {
        None => build_finite_lp(a.n, a.p)?,
        Some(q) => build_capped_lp(a.n, a.p, q)?,
    };
    if let Some(path) = &a.export_lp {
        write_file(path, &model.to_lp_format())?;
    }
    let sol = solve_lp(&model)?;
    let policy = robust_policy_from_lp(&sol)?;
    let report = robust_ratio(&policy);
    let mut summary = json!({
        "status": sol.status,
        "iterations": sol.iterations,
        "rows": model.num_rows(),
        "columns": model.num_vars(),
        "max_violation": sol.max_violation,
        "argmin_k": report.argmin_k,
    });
    match cap {
        None => summary["gamma"] = json!(sol.gamma),
        Some(q) => {
            summary["cap"] = json!(q);
            summary["gamma_capped"] = json!(sol.gamma);
            summary["certified_interval"] = json!([top_k_accept_prob(a.p, q) * sol.gamma, sol.gamma]);
            summary["policy_gamma"] = json!(report.gamma);
        }
    }
    Ok((policy.to_json()?, summary))
}

/// Contents of a policy file: a randomized offer table or an
/// availability-aware decision table.
#[derive(Clone, Debug)]
pub enum PolicyFile {
    Policy(PolicyTable),
    Tamaki(TamakiTable),
}

impl PolicyFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::from).with_context(|| format!("reading {}", path.display()))?;
        let value: Value = serde_json::from_str(&text).map_err(Error::from).with_context(|| format!("parsing {}", path.display()))?;
        let parsed = if value.get("offer_if_available").is_some() {
            TamakiTable::from_json(&text).map(PolicyFile::Tamaki)
        } else {
            PolicyTable::from_json(&text).map(PolicyFile::Policy)
        };
        parsed.with_context(|| format!("{} is not a valid policy file", path.display()))
    }

    fn dims(&self) -> (usize, f64) {
        match self {
            PolicyFile::Policy(pol) => (pol.n, pol.p),
            PolicyFile::Tamaki(t) => (t.n, t.p),
        }
    }
}

fn load_checked(a: &PolicyFileArgs) -> anyhow::Result<PolicyFile> {
    let file = PolicyFile::load(&a.policy)?;
    let (n, p) = file.dims();
    if a.n.is_some_and(|want| want != n) || a.p.is_some_and(|want| want != p) {
        return Err(Error::Domain(format!(
            "{} holds n = {n}, p = {p}, which does not match the requested parameters",
            a.policy.display()
        ))
        .into());
    }
    Ok(file)
}

pub fn cmd_eval(a: &EvalArgs) -> anyhow::Result<String> {
    let policy = match load_checked(&a.file)? {
        PolicyFile::Policy(pol) => pol,
        PolicyFile::Tamaki(t) => t.as_policy()?,
    };
    let report = match a.file.utility {
        Some(spec) => evaluate_with_utility(&policy, &spec.build(policy.n)?)?,
        None => robust_ratio(&policy),
    };
    emit(a.out.as_deref(), pretty(&report)?)
}

pub fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<String> {
    if a.trials == 0 {
        return Err(Error::Domain("trials must be positive".into()).into());
    }
    let file = load_checked(&a.file)?;
    let mut cfg = SimConfig::new(a.trials, a.seed);
    if let Some(spec) = a.file.utility {
        cfg = cfg.with_utility(spec.build(file.dims().0)?);
    }
    let report = match &file {
        PolicyFile::Policy(pol) => simulate(pol, &cfg)?,
        PolicyFile::Tamaki(t) => simulate_availability_policy(t, &cfg)?,
    };
    emit(a.out.as_deref(), pretty(&report)?)
}

pub fn cmd_bounds(a: &BoundsArgs) -> anyhow::Result<String> {
    let grid = a.grid.grid()?;
    if let Some(n) = a.reference_n {
        check_size(n)?;
    }
    emit(a.out.as_deref(), bounds_csv(&bound_curve(&grid, a.reference_n)))
}

/// One row of the experiment table.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub p: f64,
    pub policy: &'static str,
    pub ratio: Option<f64>,
    pub stderr: Option<f64>,
    pub status: String,
}

fn row(p: f64, policy: &'static str, outcome: spua_core::Result<(f64, Option<f64>)>) -> ExperimentRow {
    match outcome {
        Ok((ratio, stderr)) => ExperimentRow {
            p,
            policy,
            ratio: Some(ratio),
            stderr,
            status: "ok".into(),
        },
        Err(e) => ExperimentRow {
            p,
            policy,
            ratio: None,
            stderr: None,
            status: e.to_string(),
        },
    }
}

fn experiment_point(n: usize, p: f64, spec: UtilitySpec, trials: u64, seed: u64) -> Vec<ExperimentRow> {
    let u = match spec.build(n) {
        Ok(u) => u,
        Err(e) => {
            let msg = e.to_string();
            return ["Rob-Pol", "Util-Pol", "Tama-Pol"]
                .into_iter()
                .map(|name| row(p, name, Err(Error::Domain(msg.clone()))))
                .collect();
        }
    };
    let opt = opt_offline_utility(n, p, &u);
    let ratio = |v: spua_core::Result<f64>| -> spua_core::Result<f64> {
        let opt = *opt.as_ref().map_err(|e| Error::Domain(e.to_string()))?;
        Ok(v? / opt)
    };
    let rob = build_finite_lp(n, p)
        .and_then(|m| solve_lp(&m))
        .and_then(|sol| robust_policy_from_lp(&sol))
        .and_then(|pol| expected_utility(&pol, &u));
    let util = util_pol(n, p, &u).map(|up| up.value);
    let tama = tamaki_model2(n, p).and_then(|tp| {
        let cfg = SimConfig::new(trials, seed).with_utility(u.clone());
        let rep = simulate_availability_policy(&tp.table, &cfg)?;
        let mean = rep.expected_utility.unwrap_or(f64::NAN);
        let se = rep.utility_stderr.unwrap_or(f64::NAN);
        Ok((mean, se))
    });
    vec![
        row(p, "Rob-Pol", ratio(rob).map(|r| (r, None))),
        row(p, "Util-Pol", ratio(util).map(|r| (r, None))),
        row(
            p,
            "Tama-Pol",
            tama.and_then(|(mean, se)| {
                let opt = *opt.as_ref().map_err(|e| Error::Domain(e.to_string()))?;
                Ok((mean / opt, Some(se / opt)))
            }),
        ),
    ]
}

/// Rows for every grid point, in grid order, three policies per point.
pub fn experiment_rows(n: usize, grid: &[f64], spec: UtilitySpec, trials: u64, seed: u64) -> Vec<ExperimentRow> {
    grid.par_iter()
        .map(|&p| experiment_point(n, p, spec, trials, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// CSV with header `p,policy,ratio,stderr,status`; `stderr` is empty for
/// exactly computed rows.
pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("p,policy,ratio,stderr,status\n");
    for r in rows {
        let ratio = r.ratio.map(sig).unwrap_or_default();
        let stderr = r.stderr.map(sig).unwrap_or_default();
        let status = r.status.replace([',', '\n'], ";");
        out.push_str(&format!("{},{},{},{},{}\n", sig(r.p), r.policy, ratio, stderr, status));
    }
    out
}

pub fn cmd_experiment(a: &ExperimentArgs) -> anyhow::Result<String> {
    check_size(a.n)?;
    if a.trials == 0 {
        return Err(Error::Domain("trials must be positive".into()).into());
    }
    a.utility.build(a.n).with_context(|| format!("utility {}", a.utility.label()))?;
    let grid = a.grid.grid()?;
    emit(a.out.as_deref(), experiment_csv(&experiment_rows(a.n, &grid, a.utility, a.trials, a.seed)))
}
