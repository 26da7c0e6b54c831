//! Brute-force oracles shared by the integration tests. None of these use the
//! library's rank kernel, occupancy measures or LP.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spua_core::{PolicyTable, TamakiTable, Tri};

/// All permutations of `1..=n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Partial ranks of an arrival order given by overall ranks.
pub fn partial_ranks(perm: &[usize]) -> Vec<usize> {
    (0..perm.len())
        .map(|t| 1 + (0..t).filter(|&j| perm[j] < perm[t]).count())
        .collect()
}

/// Exact classical secretary value: the probability of hiring the best of
/// `n` when every offer is accepted.
pub fn classical_secretary(n: usize) -> Ratio<i128> {
    let n_r = Ratio::from_integer(n as i128);
    let mut v = Ratio::from_integer(0);
    for t in (1..=n).rev() {
        let tr = Ratio::from_integer(t as i128);
        let stop = tr / n_r;
        let best = if stop > v { stop } else { v };
        v = best / tr + (Ratio::from_integer(1) - Ratio::from_integer(1) / tr) * v;
    }
    v
}

pub fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Probability of hiring each overall rank, by enumerating arrival orders.
pub fn enumerate_collect(policy: &PolicyTable) -> Vec<f64> {
    let n = policy.n;
    let p = policy.p;
    let perms = permutations(n);
    let mut out = vec![0.0; n];
    for perm in &perms {
        let partial = partial_ranks(perm);
        let mut alive = 1.0;
        for t in 0..n {
            let q = policy.q[(t + 1, partial[t])];
            out[perm[t] - 1] += alive * q * p;
            alive *= 1.0 - q * p;
        }
    }
    let count = perms.len() as f64;
    out.iter_mut().for_each(|v| *v /= count);
    out
}

/// Exact probability that an availability-aware table hires the best willing
/// candidate, by enumerating orders and willingness patterns.
pub fn enumerate_best_available(table: &TamakiTable) -> f64 {
    let n = table.n;
    let p = table.p;
    let perms = permutations(n);
    let mut total = 0.0;
    for perm in &perms {
        let partial = partial_ranks(perm);
        for mask in 0u32..(1 << n) {
            let willing = |t: usize| mask & (1 << t) != 0;
            let k = mask.count_ones() as i32;
            let weight = p.powi(k) * (1.0 - p).powi(n as i32 - k);
            if weight == 0.0 {
                continue;
            }
            let best = (0..n).filter(|&t| willing(t)).map(|t| perm[t]).min();
            let hired = (0..n).find(|&t| willing(t) && table.offers(t + 1, partial[t]));
            if let (Some(t), Some(b)) = (hired, best) {
                if perm[t] == b {
                    total += weight;
                }
            }
        }
    }
    total / perms.len() as f64
}

/// Every deterministic availability-aware table for `n` candidates.
pub fn all_tables(n: usize, p: f64) -> Vec<TamakiTable> {
    let cells = n * (n + 1) / 2;
    (0u64..(1 << cells))
        .map(|bits| {
            let mut i = 0;
            let q = Tri::from_fn(n, |_, _| {
                let b = bits & (1 << i) != 0;
                i += 1;
                b
            });
            TamakiTable::new(n, p, q).unwrap()
        })
        .collect()
}

pub fn random_policy(n: usize, p: f64, rng: &mut ChaCha8Rng) -> PolicyTable {
    PolicyTable::from_fn(n, p, |_, _| rng.random::<f64>()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the probability simplex of dimension `n`.
pub fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
