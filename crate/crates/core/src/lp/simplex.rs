//! Bounded primal revised simplex over sparse columns.
//!
//! Every row gets a logical column; rows whose logical cannot start feasible
//! get an artificial column and a first phase minimizing the artificial sum.
//! Rows are scaled to unit max-coefficient. Entering columns follow Dantzig's
//! rule until a run of degenerate pivots triggers Bland's rule, which stays
//! active until the next nondegenerate step.

use super::lu::SparseLu;
use super::model::{LpModel, Sense};
use super::SolveStatus;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Defaults to `50 * (rows + columns)`.
    pub max_iterations: Option<usize>,
    pub feasibility_tolerance: f64,
    pub optimality_tolerance: f64,
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: None,
            feasibility_tolerance: 1e-9,
            optimality_tolerance: 1e-9,
            refactor_interval: 100,
            stall_limit: 50,
        }
    }
}

const PIVOT_TOLERANCE: f64 = 1e-9;
const HARRIS_TOLERANCE: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct RawSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Loc {
    Basic(usize),
    Lower,
    Upper,
}

struct Simplex<'a> {
    opts: &'a SolverOptions,
    m: usize,
    structural: usize,
    cols: Vec<Vec<(usize, f64)>>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    artificials: std::ops::Range<usize>,
    head: Vec<usize>,
    loc: Vec<Loc>,
    xb: Vec<f64>,
    lu: SparseLu,
    iterations: usize,
    max_iterations: usize,
    // scratch
    y: Vec<f64>,
    alpha: Vec<f64>,
    work: Vec<f64>,
}

fn fail<T>(status: SolveStatus, iterations: usize, detail: impl Into<String>) -> Result<T> {
    Err(Error::Solver {
        status,
        iterations,
        detail: detail.into(),
    })
}

impl<'a> Simplex<'a> {
    fn new(model: &LpModel, opts: &'a SolverOptions) -> Result<Self> {
        let m = model.num_rows();
        let structural = model.num_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); structural];
        let mut rhs = vec![0.0; m];
        let mut upper = vec![f64::INFINITY; structural];
        let mut logical_upper = Vec::with_capacity(m);
        for (i, row) in model.constraints.iter().enumerate() {
            let scale = row.coeffs.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            // Ge rows are negated into Le rows.
            let sign = if row.sense == Sense::Ge { -1.0 } else { 1.0 };
            for &(j, v) in &row.coeffs {
                if v != 0.0 {
                    cols[j].push((i, sign * v / scale));
                }
            }
            rhs[i] = sign * row.rhs / scale;
            logical_upper.push(if row.sense == Sense::Eq { 0.0 } else { f64::INFINITY });
        }
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
        }
        upper.extend(logical_upper);

        let mut head = Vec::with_capacity(m);
        let mut loc = vec![Loc::Lower; structural + m];
        let art_start = cols.len();
        for i in 0..m {
            let slack = structural + i;
            let feasible = rhs[i] >= 0.0 && rhs[i] <= upper[slack];
            if feasible {
                loc[slack] = Loc::Basic(i);
                head.push(slack);
            } else {
                let a = cols.len();
                cols.push(vec![(i, rhs[i].signum())]);
                upper.push(f64::INFINITY);
                loc.push(Loc::Basic(i));
                head.push(a);
            }
        }
        let artificials = art_start..cols.len();
        let basis: Vec<Vec<(usize, f64)>> = head.iter().map(|&j| cols[j].clone()).collect();
        let lu = SparseLu::factor(m, &basis).map_err(|_| Error::Solver {
            status: SolveStatus::NumericalFailure,
            iterations: 0,
            detail: "initial basis is singular".into(),
        })?;
        let max_iterations = opts.max_iterations.unwrap_or(50 * (m + structural) + 1000);
        let mut simplex = Simplex {
            opts,
            m,
            structural,
            cols,
            upper,
            rhs,
            artificials,
            head,
            loc,
            xb: vec![0.0; m],
            lu,
            iterations: 0,
            max_iterations,
            y: vec![0.0; m],
            alpha: vec![0.0; m],
            work: vec![0.0; m],
        };
        simplex.compute_xb();
        Ok(simplex)
    }

    fn value(&self, j: usize) -> f64 {
        match self.loc[j] {
            Loc::Basic(i) => self.xb[i],
            Loc::Lower => 0.0,
            Loc::Upper => self.upper[j],
        }
    }

    fn compute_xb(&mut self) {
        self.work.copy_from_slice(&self.rhs);
        for (j, l) in self.loc.iter().enumerate() {
            if *l == Loc::Upper {
                for &(i, v) in &self.cols[j] {
                    self.work[i] -= v * self.upper[j];
                }
            }
        }
        self.lu.ftran(&mut self.work, &mut self.xb);
    }

    fn refactor(&mut self) -> Result<()> {
        let basis: Vec<Vec<(usize, f64)>> = self.head.iter().map(|&j| self.cols[j].clone()).collect();
        self.lu = SparseLu::factor(self.m, &basis).map_err(|e| Error::Solver {
            status: SolveStatus::NumericalFailure,
            iterations: self.iterations,
            detail: format!("basis became singular at position {}", e.position),
        })?;
        self.compute_xb();
        Ok(())
    }

    /// Runs simplex iterations minimizing `cost` from the current basis.
    fn run(&mut self, cost: &[f64]) -> Result<()> {
        let tol = self.opts.optimality_tolerance;
        let mut degenerate_run = 0usize;
        let mut fresh = true;
        loop {
            if self.lu.eta_count() >= self.opts.refactor_interval || self.lu.eta_nnz() > 4 * self.lu.factor_nnz() + 10 * self.m {
                self.refactor()?;
                fresh = true;
            }
            let bland = degenerate_run > self.opts.stall_limit;

            let mut cb: Vec<f64> = self.head.iter().map(|&j| cost[j]).collect();
            self.lu.btran(&mut cb, &mut self.y);

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols.len() {
                let at_upper = match self.loc[j] {
                    Loc::Basic(_) => continue,
                    Loc::Lower => {
                        if self.upper[j] == 0.0 {
                            continue;
                        }
                        false
                    }
                    Loc::Upper => true,
                };
                let d = cost[j] - self.cols[j].iter().map(|&(i, v)| v * self.y[i]).sum::<f64>();
                let score = if at_upper { d } else { -d };
                if score > tol {
                    match entering {
                        None => entering = Some((j, score)),
                        Some((_, best)) if !bland && score > best => entering = Some((j, score)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, _)) = entering else {
                if fresh {
                    return Ok(());
                }
                // Confirm optimality on a fresh factorization.
                self.refactor()?;
                fresh = true;
                continue;
            };

            if self.iterations >= self.max_iterations {
                return fail(SolveStatus::IterationLimit, self.iterations, "iteration limit reached");
            }
            self.iterations += 1;

            self.work.iter_mut().for_each(|v| *v = 0.0);
            for &(i, v) in &self.cols[q] {
                self.work[i] = v;
            }
            self.lu.ftran(&mut self.work, &mut self.alpha);
            let dir = if self.loc[q] == Loc::Upper { -1.0 } else { 1.0 };

            let leaving = self.ratio_test(dir, bland);
            let flip = self.upper[q];
            let (theta, pos) = match leaving {
                Some((theta, pos)) if theta < flip => (theta, Some(pos)),
                _ if flip.is_finite() => (flip, None),
                _ => return fail(SolveStatus::Unbounded, self.iterations, "objective is unbounded"),
            };

            for i in 0..self.m {
                self.xb[i] -= theta * dir * self.alpha[i];
            }
            match pos {
                None => {
                    self.loc[q] = if dir > 0.0 { Loc::Upper } else { Loc::Lower };
                }
                Some(r) => {
                    let leave = self.head[r];
                    self.loc[leave] = if dir * self.alpha[r] > 0.0 { Loc::Lower } else { Loc::Upper };
                    self.xb[r] = if dir > 0.0 { theta } else { self.upper[q] - theta };
                    self.head[r] = q;
                    self.loc[q] = Loc::Basic(r);
                    self.lu.push_eta(r, &self.alpha);
                }
            }
            fresh = false;
            if theta <= DEGENERATE_STEP {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// Returns the step length and leaving position, or `None` if no basic
    /// variable limits the step.
    fn ratio_test(&self, dir: f64, bland: bool) -> Option<(f64, usize)> {
        let distance = |i: usize| -> Option<(f64, f64)> {
            let delta = dir * self.alpha[i];
            let j = self.head[i];
            if delta > PIVOT_TOLERANCE {
                Some((self.xb[i].max(0.0), delta))
            } else if delta < -PIVOT_TOLERANCE && self.upper[j].is_finite() {
                Some(((self.upper[j] - self.xb[i]).max(0.0), -delta))
            } else {
                None
            }
        };
        if bland {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.m {
                if let Some((dist, mag)) = distance(i) {
                    let theta = dist / mag;
                    best = match best {
                        None => Some((theta, i)),
                        Some((bt, bi)) => {
                            if theta < bt - DEGENERATE_STEP || (theta <= bt + DEGENERATE_STEP && self.head[i] < self.head[bi]) {
                                Some((theta.min(bt), i))
                            } else {
                                Some((bt, bi))
                            }
                        }
                    };
                }
            }
            return best.map(|(_, i)| {
                let (dist, mag) = distance(i).unwrap();
                (dist / mag, i)
            });
        }
        let mut bound = f64::INFINITY;
        for i in 0..self.m {
            if let Some((dist, mag)) = distance(i) {
                bound = bound.min((dist + HARRIS_TOLERANCE) / mag);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            if let Some((dist, mag)) = distance(i) {
                if dist / mag <= bound {
                    let better = match best {
                        None => true,
                        Some((bi, bm)) => mag > bm || (mag == bm && self.head[i] < self.head[bi]),
                    };
                    if better {
                        best = Some((i, mag));
                    }
                }
            }
        }
        best.map(|(i, _)| {
            let (dist, mag) = distance(i).unwrap();
            (dist / mag, i)
        })
    }
}

pub(crate) fn solve_raw(model: &LpModel, opts: &SolverOptions) -> Result<RawSolution> {
    let mut sx = Simplex::new(model, opts)?;
    let ncols = sx.cols.len();
    if !sx.artificials.is_empty() {
        let mut cost = vec![0.0; ncols];
        for j in sx.artificials.clone() {
            cost[j] = 1.0;
        }
        sx.run(&cost)?;
        let infeasibility: f64 = sx.artificials.clone().map(|j| sx.value(j)).sum();
        if infeasibility > opts.feasibility_tolerance {
            return fail(SolveStatus::Infeasible, sx.iterations, format!("phase one ended with infeasibility {infeasibility:e}"));
        }
        for j in sx.artificials.clone() {
            sx.upper[j] = 0.0;
        }
    }
    let mut cost = vec![0.0; ncols];
    for (j, &c) in model.objective.iter().enumerate() {
        cost[j] = -c;
    }
    sx.run(&cost)?;

    let values: Vec<f64> = (0..sx.structural).map(|j| sx.value(j)).collect();
    let violation = model.max_violation(&values);
    if violation > opts.feasibility_tolerance {
        return fail(
            SolveStatus::NumericalFailure,
            sx.iterations,
            format!("final point violates constraints by {violation:e}"),
        );
    }
    Ok(RawSolution {
        objective: model.objective_value(&values),
        values,
        iterations: sx.iterations,
    })
}
