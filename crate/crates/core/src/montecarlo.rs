//! Seeded simulation of the hiring process, used as an independent check of
//! the exact computations.
//!
//! Trial `i` draws from a ChaCha8 stream seeded with `seed` and positioned at
//! stream `i`, so results do not depend on how trials are split across
//! threads. Per-chunk tallies are combined in chunk order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::evaluation::report_from_collect;
use crate::policies::{TamakiTable, UtilityVector};
use crate::polytope::PolicyTable;
use crate::tri::Tri;

const CHUNK: u64 = 4096;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// When set, the report includes the mean utility of the hired candidate.
    pub utility: Option<UtilityVector>,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig {
            trials,
            seed,
            utility: None,
        }
    }

    pub fn with_utility(mut self, u: UtilityVector) -> Self {
        self.utility = Some(u);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub trials: u64,
    pub gamma: f64,
    pub argmin_k: usize,
    pub ratios: Vec<f64>,
    /// Frequency of hiring a top-`k` candidate, indexed by `k - 1`.
    pub collect: Vec<f64>,
    /// Standard errors of `collect`.
    pub stderr: Vec<f64>,
    /// Number of trials that hired the candidate of each overall rank.
    pub rank_counts: Vec<u64>,
    /// Number of trials in which an offer was accepted.
    pub accepted: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_utility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utility_stderr: Option<f64>,
    /// Frequency of hiring the best candidate among those willing to accept;
    /// reported for availability-aware simulations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_stderr: Option<f64>,
    /// Frequency of reaching `(t, s)` and making an offer.
    #[serde(skip)]
    pub offer_frequency: Tri<f64>,
}

/// One random arrival order.
#[derive(Clone, Debug, PartialEq)]
pub struct Arrivals {
    /// Overall rank of the `t`-th arrival, indexed by `t - 1`.
    pub overall: Vec<usize>,
    /// Partial rank of the `t`-th arrival among the first `t`.
    pub partial: Vec<usize>,
}

/// The generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Binary indexed tree over overall ranks `1..=n`.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn clear(&mut self) {
        self.tree.iter_mut().for_each(|v| *v = 0);
    }

    fn insert(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks `<= i`.
    fn count(&self, mut i: usize) -> u32 {
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }
}

fn fill_arrivals(rng: &mut ChaCha8Rng, fen: &mut Fenwick, arr: &mut Arrivals) {
    let n = arr.overall.len();
    for (i, v) in arr.overall.iter_mut().enumerate() {
        *v = i + 1;
    }
    arr.overall.shuffle(rng);
    fen.clear();
    for t in 0..n {
        let r = arr.overall[t];
        arr.partial[t] = fen.count(r - 1) as usize + 1;
        fen.insert(r);
    }
}

/// Draws the arrival order used by trial `trial`.
pub fn arrival_order(n: usize, seed: u64, trial: u64) -> Arrivals {
    let mut arr = Arrivals {
        overall: vec![0; n],
        partial: vec![0; n],
    };
    let mut fen = Fenwick::new(n);
    fill_arrivals(&mut trial_rng(seed, trial), &mut fen, &mut arr);
    arr
}

#[derive(Clone)]
struct Tally {
    rank_counts: Vec<u64>,
    offers: Vec<u64>,
    utility_sum: f64,
    utility_sq: f64,
    successes: u64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            rank_counts: vec![0; n],
            offers: vec![0; n * (n + 1) / 2],
            utility_sum: 0.0,
            utility_sq: 0.0,
            successes: 0,
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.rank_counts.iter_mut().zip(&other.rank_counts) {
            *a += b;
        }
        for (a, b) in self.offers.iter_mut().zip(&other.offers) {
            *a += b;
        }
        self.utility_sum += other.utility_sum;
        self.utility_sq += other.utility_sq;
        self.successes += other.successes;
    }
}

/// Outcome of one trial.
struct Outcome {
    hired: Option<usize>,
    success: bool,
}

fn run<F>(n: usize, p: f64, cfg: &SimConfig, availability: bool, trial_fn: F) -> Result<SimReport>
where
    F: Fn(&mut ChaCha8Rng, &Arrivals, &mut [u64]) -> Outcome + Sync,
{
    if cfg.trials == 0 {
        return domain("at least one trial is required");
    }
    if let Some(u) = &cfg.utility {
        if u.len() != n {
            return domain(format!("utility vector has length {}, expected {n}", u.len()));
        }
    }
    let chunks = cfg.trials.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::new(n);
            let mut fen = Fenwick::new(n);
            let mut arr = Arrivals {
                overall: vec![0; n],
                partial: vec![0; n],
            };
            let start = c * CHUNK;
            let end = (start + CHUNK).min(cfg.trials);
            for trial in start..end {
                let mut rng = trial_rng(cfg.seed, trial);
                fill_arrivals(&mut rng, &mut fen, &mut arr);
                let out = trial_fn(&mut rng, &arr, &mut tally.offers);
                if let Some(rank) = out.hired {
                    tally.rank_counts[rank - 1] += 1;
                    if let Some(u) = &cfg.utility {
                        let v = u.get(rank);
                        tally.utility_sum += v;
                        tally.utility_sq += v * v;
                    }
                }
                tally.successes += u64::from(out.success);
            }
            tally
        })
        .collect();
    let mut total = Tally::new(n);
    for t in &tallies {
        total.merge(t);
    }

    let trials = cfg.trials as f64;
    let mut acc = 0u64;
    let mut collect = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    for &c in &total.rank_counts {
        acc += c;
        let f = acc as f64 / trials;
        collect.push(f);
        stderr.push((f * (1.0 - f) / trials).sqrt());
    }
    let report = report_from_collect(p, collect);
    let (expected_utility, utility_stderr) = match cfg.utility {
        Some(_) => {
            let mean = total.utility_sum / trials;
            let var = (total.utility_sq / trials - mean * mean).max(0.0);
            let denom = (trials - 1.0).max(1.0);
            (Some(mean), Some((var * trials / denom / trials).sqrt()))
        }
        None => (None, None),
    };
    let (success, success_stderr) = if availability {
        let f = total.successes as f64 / trials;
        (Some(f), Some((f * (1.0 - f) / trials).sqrt()))
    } else {
        (None, None)
    };
    let mut data = total.offers.iter().map(|&c| c as f64 / trials);
    let offer_frequency = Tri::from_fn(n, |_, _| data.next().unwrap());
    Ok(SimReport {
        n,
        p,
        seed: cfg.seed,
        trials: cfg.trials,
        gamma: report.gamma,
        argmin_k: report.argmin_k,
        ratios: report.ratios,
        collect: report.collect,
        stderr,
        accepted: total.rank_counts.iter().sum(),
        rank_counts: total.rank_counts,
        expected_utility,
        utility_stderr,
        success,
        success_stderr,
        offer_frequency,
    })
}

#[inline]
fn cell(t: usize, s: usize) -> usize {
    t * (t - 1) / 2 + s - 1
}

/// Runs `policy`: at each arrival an offer is made with probability
/// `q[t][s]` and accepted with probability `p`; the process stops at the
/// first acceptance.
pub fn simulate(policy: &PolicyTable, cfg: &SimConfig) -> Result<SimReport> {
    let p = policy.p;
    run(policy.n, p, cfg, false, |rng, arr, offers| {
        for (i, &s) in arr.partial.iter().enumerate() {
            let t = i + 1;
            let q = policy.q[(t, s)];
            let offer = q >= 1.0 || (q > 0.0 && rng.random::<f64>() < q);
            if !offer {
                continue;
            }
            offers[cell(t, s)] += 1;
            if p >= 1.0 || rng.random::<f64>() < p {
                return Outcome {
                    hired: Some(arr.overall[i]),
                    success: false,
                };
            }
        }
        Outcome {
            hired: None,
            success: false,
        }
    })
}

/// Runs an availability-aware table: every candidate's willingness is drawn
/// up front and revealed on arrival; offers go only to willing candidates the
/// table selects, and always succeed. A trial succeeds when the hired
/// candidate is the best willing one.
pub fn simulate_availability_policy(table: &TamakiTable, cfg: &SimConfig) -> Result<SimReport> {
    let n = table.n;
    let p = table.p;
    run(n, p, cfg, true, |rng, arr, offers| {
        let mut best_willing = usize::MAX;
        let mut willing = [false; 0].to_vec();
        willing.resize(n, false);
        for (w, &rank) in willing.iter_mut().zip(&arr.overall) {
            *w = p >= 1.0 || rng.random::<f64>() < p;
            if *w {
                best_willing = best_willing.min(rank);
            }
        }
        for (i, &s) in arr.partial.iter().enumerate() {
            let t = i + 1;
            if willing[i] && table.offers(t, s) {
                offers[cell(t, s)] += 1;
                let rank = arr.overall[i];
                return Outcome {
                    hired: Some(rank),
                    success: rank == best_willing,
                };
            }
        }
        Outcome {
            hired: None,
            success: false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_ranks_match_definition() {
        let arr = arrival_order(12, 7, 3);
        for t in 0..12 {
            let better = (0..t).filter(|&j| arr.overall[j] < arr.overall[t]).count();
            assert_eq!(arr.partial[t], better + 1);
        }
        let mut sorted = arr.overall.clone();
        sorted.sort();
        assert_eq!(sorted, (1..=12).collect::<Vec<_>>());
    }

    #[test]
    fn never_offer_collects_nothing() {
        let pol = PolicyTable::never_offer(5, 0.5).unwrap();
        let rep = simulate(&pol, &SimConfig::new(1000, 1)).unwrap();
        assert_eq!(rep.accepted, 0);
        assert!(rep.collect.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn single_candidate_bernoulli() {
        let pol = PolicyTable::always_offer(1, 0.5).unwrap();
        let rep = simulate(&pol, &SimConfig::new(100_000, 11)).unwrap();
        let se = (0.25f64 / 1e5).sqrt();
        assert!((rep.collect[0] - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn reproducible_and_chunk_independent() {
        let pol = PolicyTable::from_fn(6, 0.4, |t, s| if s <= 2 { 0.5 } else { (t as f64) / 10.0 }).unwrap();
        let cfg = SimConfig::new(10_000, 99);
        let a = simulate(&pol, &cfg).unwrap();
        let b = simulate(&pol, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&pol, &SimConfig::new(10_000, 100)).unwrap();
        assert_ne!(a.rank_counts, c.rank_counts);
    }

    #[test]
    fn zero_trials_rejected() {
        let pol = PolicyTable::never_offer(2, 0.5).unwrap();
        assert!(simulate(&pol, &SimConfig::new(0, 1)).is_err());
    }
}
