use std::fmt::Write as _;

use crate::error::{check_n, check_p, domain, Result};
use crate::rank_stats::RankTable;
use crate::tri::Tri;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    /// Probability of reaching `(t, s)` and offering.
    Offer { t: usize, s: usize },
    /// Upper bound on the probability of reaching stage `t` (`t >= 2`).
    Reach { t: usize },
    /// The robust ratio.
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `t x[t][s] <= reach(t)`.
    Dynamic { t: usize, s: usize },
    /// `reach(t + 1) <= reach(t) - p sum_s x[t][s]`.
    Flow { t: usize },
    /// `gamma <= collect_k / (1 - (1-p)^k)`.
    Robust { k: usize },
    /// Rows of hand-built models.
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates this row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A maximization problem over nonnegative variables.
#[derive(Clone, Debug)]
pub struct LpModel {
    pub n: usize,
    pub p: f64,
    /// Number of robust constraints and largest partial rank with an offer
    /// variable; equals `n` for the uncapped program.
    pub cap: usize,
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    offer_index: Tri<Option<usize>>,
    gamma: Option<usize>,
}

/// `1 - (1-p)^k`, accurate for small `p k`.
pub fn top_k_accept_prob(p: f64, k: usize) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    -((k as f64) * (-p).ln_1p()).exp_m1()
}

impl LpModel {
    /// A general model with no secretary-problem metadata, mainly for tests
    /// and cross-checks of the solver.
    pub fn generic(objective: Vec<f64>, constraints: Vec<Constraint>) -> Self {
        let nv = objective.len();
        LpModel {
            n: 0,
            p: 1.0,
            cap: 0,
            variables: vec![Variable::Gamma; nv],
            objective,
            constraints,
            offer_index: Tri::filled(0, None),
            gamma: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn offer_var(&self, t: usize, s: usize) -> Option<usize> {
        self.offer_index[(t, s)]
    }

    pub fn gamma_var(&self) -> Option<usize> {
        self.gamma
    }

    pub fn num_offer_vars(&self) -> usize {
        self.variables.iter().filter(|v| matches!(v, Variable::Offer { .. })).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Largest constraint or sign violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(values)).fold(0.0, f64::max);
        let signs = values.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        rows.max(signs)
    }

    /// Writes the model in CPLEX LP text format with fixed 12-decimal
    /// coefficients.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let name = |j: usize| match self.variables[j] {
            Variable::Offer { t, s } if self.gamma.is_some() => format!("x_{t}_{s}"),
            Variable::Reach { t } => format!("w_{t}"),
            Variable::Gamma if self.gamma == Some(j) => "gamma".to_string(),
            _ => format!("v{j}"),
        };
        let term = |out: &mut String, first: bool, a: f64, j: usize| {
            let sign = if a < 0.0 { "-" } else if first { "" } else { "+" };
            let _ = write!(out, " {sign} {:.12} {}", a.abs(), name(j));
        };
        out.push_str("\\ secretary problem with uncertain acceptance\nMaximize\n obj:");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, first, c, j);
                first = false;
            }
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{r}:");
            for (i, &(j, a)) in row.coeffs.iter().enumerate() {
                term(&mut out, i == 0, a, j);
            }
            if row.coeffs.is_empty() {
                let _ = write!(out, " 0 {}", name(0));
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {:.12}", row.rhs);
        }
        out.push_str("End\n");
        out
    }
}

/// Largest partial rank that can receive an offer under a given cap.
fn validate_cap(n: usize, cap: usize) -> Result<()> {
    if cap == 0 || cap > n {
        return domain(format!("cap {cap} outside 1..={n}"));
    }
    Ok(())
}

/// The exact program whose optimum is the best robust ratio for `n`
/// candidates.
///
/// The per-cell dynamic constraints are expressed through stage reach
/// variables `w_t`, which keeps every row sparse; eliminating `w` recovers
/// `x[t][s] <= (1 - p sum_{tau<t} sum_sigma x[tau][sigma]) / t`.
pub fn build_finite_lp(n: usize, p: f64) -> Result<LpModel> {
    check_n(n)?;
    check_p(p)?;
    build(n, p, n)
}

/// Relaxation that keeps only the top-`cap` robust constraints and offer
/// variables with partial rank at most `cap`.
pub fn build_capped_lp(n: usize, p: f64, cap: usize) -> Result<LpModel> {
    check_n(n)?;
    check_p(p)?;
    validate_cap(n, cap)?;
    build(n, p, cap)
}

/// The cap `ceil(ln n / p)`, clamped to `1..=n`.
pub fn default_cap(n: usize, p: f64) -> usize {
    let q = ((n as f64).ln() / p).ceil();
    (q.max(1.0) as usize).min(n)
}

fn build(n: usize, p: f64, cap: usize) -> Result<LpModel> {
    let ranks = RankTable::new(n);
    let mut variables = Vec::new();
    let mut offer_index = Tri::filled(n, None);
    for t in 1..=n {
        for s in 1..=t.min(cap) {
            offer_index[(t, s)] = Some(variables.len());
            variables.push(Variable::Offer { t, s });
        }
    }
    let reach_base = variables.len();
    let reach = |t: usize| reach_base + t - 2;
    for t in 2..=n {
        variables.push(Variable::Reach { t });
    }
    let gamma = variables.len();
    variables.push(Variable::Gamma);

    let mut constraints = Vec::new();
    for t in 1..=n {
        for s in 1..=t.min(cap) {
            let x = offer_index[(t, s)].unwrap();
            let row = if t == 1 {
                Constraint {
                    kind: RowKind::Dynamic { t, s },
                    coeffs: vec![(x, 1.0)],
                    sense: Sense::Le,
                    rhs: 1.0,
                }
            } else {
                Constraint {
                    kind: RowKind::Dynamic { t, s },
                    coeffs: vec![(x, t as f64), (reach(t), -1.0)],
                    sense: Sense::Le,
                    rhs: 0.0,
                }
            };
            constraints.push(row);
        }
    }
    for t in 1..n {
        let mut coeffs = vec![(reach(t + 1), 1.0)];
        let mut rhs = 0.0;
        if t == 1 {
            rhs = 1.0;
        } else {
            coeffs.push((reach(t), -1.0));
        }
        for s in 1..=t.min(cap) {
            coeffs.push((offer_index[(t, s)].unwrap(), p));
        }
        constraints.push(Constraint {
            kind: RowKind::Flow { t },
            coeffs,
            sense: Sense::Le,
            rhs,
        });
    }
    // Robust rows need Prob(R_t <= k | r_t = s) for every k; build the
    // cumulative rows once per cell.
    let mut topk: Vec<(usize, Vec<f64>)> = Vec::new();
    for t in 1..=n {
        for s in 1..=t.min(cap) {
            topk.push((offer_index[(t, s)].unwrap(), ranks.topk_row(t, s)?));
        }
    }
    for k in 1..=cap {
        let scale = p / top_k_accept_prob(p, k);
        let mut coeffs = vec![(gamma, 1.0)];
        for (x, row) in &topk {
            let v = row[k - 1];
            if v > 0.0 {
                coeffs.push((*x, -scale * v));
            }
        }
        constraints.push(Constraint {
            kind: RowKind::Robust { k },
            coeffs,
            sense: Sense::Le,
            rhs: 0.0,
        });
    }

    let mut objective = vec![0.0; variables.len()];
    objective[gamma] = 1.0;
    Ok(LpModel {
        n,
        p,
        cap,
        variables,
        objective,
        constraints,
        offer_index,
        gamma: Some(gamma),
    })
}
