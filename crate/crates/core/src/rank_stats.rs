//! Conditional distribution of a candidate's overall rank given its partial
//! rank under a uniformly random arrival order.
//!
//! If the `t`-th arrival ranks `s`-th among the first `t`, its overall rank is
//! `i` with probability `C(i-1, s-1) C(n-i, t-s) / C(n, t)` (a negative
//! hypergeometric kernel supported on `s..=n-t+s`).
//!
//! Two implementations share the [`RankKernel`] interface: [`RankTable`]
//! works in floating point with log-domain binomials, [`ExactRankTable`]
//! returns exact rationals for `n <= 30` and serves as a reference.

use num_rational::Ratio;

use crate::error::{domain, Result};

/// A validated `(n, t, s)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankQuery {
    pub n: usize,
    pub t: usize,
    pub s: usize,
}

impl RankQuery {
    pub fn new(n: usize, t: usize, s: usize) -> Result<Self> {
        if n == 0 || t == 0 || s == 0 || s > t || t > n {
            return domain(format!("need 1 <= s <= t <= n, got n={n} t={t} s={s}"));
        }
        Ok(RankQuery { n, t, s })
    }

    /// Smallest and largest attainable overall rank.
    pub fn support(&self) -> (usize, usize) {
        (self.s, self.n - self.t + self.s)
    }

    fn check_rank(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return domain(format!("overall rank {i} outside 1..={}", self.n));
        }
        Ok(())
    }
}

pub trait RankKernel {
    type Prob;

    fn n(&self) -> usize;

    /// `Prob(R_t = i | r_t = s)`.
    fn point(&self, t: usize, s: usize, i: usize) -> Result<Self::Prob>;

    /// `Prob(R_t <= k | r_t = s)`.
    fn topk(&self, t: usize, s: usize, k: usize) -> Result<Self::Prob>;
}

/// Floating-point rank kernel with a per-`n` table of log binomials.
#[derive(Clone, Debug)]
pub struct RankTable {
    n: usize,
    // ln C(a, b) for 0 <= b <= a <= n, row-offset layout.
    ln_binom: Vec<f64>,
}

#[inline]
fn tri_index(a: usize, b: usize) -> usize {
    a * (a + 1) / 2 + b
}

// Beyond this size Pascal's triangle overflows f64.
const PASCAL_LIMIT: usize = 1000;

impl RankTable {
    pub fn new(n: usize) -> Self {
        let mut ln_binom = vec![0.0; (n + 1) * (n + 2) / 2];
        if n <= PASCAL_LIMIT {
            let mut prev = vec![1.0f64];
            for a in 1..=n {
                let mut row = vec![1.0f64; a + 1];
                for b in 1..a {
                    row[b] = prev[b - 1] + prev[b];
                }
                for (b, c) in row.iter().enumerate() {
                    ln_binom[tri_index(a, b)] = c.ln();
                }
                prev = row;
            }
        } else {
            let mut ln_fact = vec![0.0f64; n + 1];
            for k in 1..=n {
                ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
            }
            for a in 0..=n {
                for b in 0..=a {
                    ln_binom[tri_index(a, b)] = ln_fact[a] - ln_fact[b] - ln_fact[a - b];
                }
            }
        }
        RankTable { n, ln_binom }
    }

    #[inline]
    pub fn ln_binom(&self, a: usize, b: usize) -> f64 {
        self.ln_binom[tri_index(a, b)]
    }

    #[inline]
    fn point_unchecked(&self, t: usize, s: usize, i: usize) -> f64 {
        let n = self.n;
        if i < s || i > n - t + s {
            return 0.0;
        }
        (self.ln_binom(i - 1, s - 1) + self.ln_binom(n - i, t - s) - self.ln_binom(n, t)).exp()
    }

    /// The full conditional law of `R_t` given `r_t = s`, indexed by `i - 1`.
    pub fn point_row(&self, t: usize, s: usize) -> Result<Vec<f64>> {
        RankQuery::new(self.n, t, s)?;
        Ok((1..=self.n).map(|i| self.point_unchecked(t, s, i)).collect())
    }

    /// `Prob(R_t <= k | r_t = s)` for every `k` in `1..=n`, indexed by `k - 1`.
    pub fn topk_row(&self, t: usize, s: usize) -> Result<Vec<f64>> {
        let mut row = self.point_row(t, s)?;
        let mut acc = 0.0;
        for v in row.iter_mut() {
            acc += *v;
            *v = acc;
        }
        Ok(row)
    }
}

impl RankKernel for RankTable {
    type Prob = f64;

    fn n(&self) -> usize {
        self.n
    }

    fn point(&self, t: usize, s: usize, i: usize) -> Result<f64> {
        RankQuery::new(self.n, t, s)?.check_rank(i)?;
        Ok(self.point_unchecked(t, s, i))
    }

    fn topk(&self, t: usize, s: usize, k: usize) -> Result<f64> {
        let q = RankQuery::new(self.n, t, s)?;
        q.check_rank(k)?;
        let (lo, hi) = q.support();
        Ok((lo..=k.min(hi)).map(|i| self.point_unchecked(t, s, i)).sum())
    }
}

/// Exact rational rank kernel.
#[derive(Clone, Debug)]
pub struct ExactRankTable {
    n: usize,
    binom: Vec<i128>,
}

impl ExactRankTable {
    pub const MAX_N: usize = 30;

    pub fn new(n: usize) -> Result<Self> {
        if n > Self::MAX_N {
            return domain(format!("exact rank tables support n <= {}, got {n}", Self::MAX_N));
        }
        let mut binom = vec![0i128; (n + 1) * (n + 2) / 2];
        for a in 0..=n {
            binom[tri_index(a, 0)] = 1;
            binom[tri_index(a, a)] = 1;
            for b in 1..a {
                binom[tri_index(a, b)] = binom[tri_index(a - 1, b - 1)] + binom[tri_index(a - 1, b)];
            }
        }
        Ok(ExactRankTable { n, binom })
    }

    pub fn binom(&self, a: usize, b: usize) -> i128 {
        self.binom[tri_index(a, b)]
    }

    fn numerator(&self, t: usize, s: usize, i: usize) -> i128 {
        let n = self.n;
        if i < s || i > n - t + s {
            0
        } else {
            self.binom(i - 1, s - 1) * self.binom(n - i, t - s)
        }
    }
}

impl RankKernel for ExactRankTable {
    type Prob = Ratio<i128>;

    fn n(&self) -> usize {
        self.n
    }

    fn point(&self, t: usize, s: usize, i: usize) -> Result<Ratio<i128>> {
        RankQuery::new(self.n, t, s)?.check_rank(i)?;
        Ok(Ratio::new(self.numerator(t, s, i), self.binom(self.n, t)))
    }

    fn topk(&self, t: usize, s: usize, k: usize) -> Result<Ratio<i128>> {
        let q = RankQuery::new(self.n, t, s)?;
        q.check_rank(k)?;
        let (lo, hi) = q.support();
        let num: i128 = (lo..=k.min(hi)).map(|i| self.numerator(t, s, i)).sum();
        Ok(Ratio::new(num, self.binom(self.n, t)))
    }
}

/// One-shot `Prob(R_t = i | r_t = s)`; build a [`RankTable`] for repeated use.
pub fn rank_point_prob(n: usize, t: usize, s: usize, i: usize) -> Result<f64> {
    RankQuery::new(n, t, s)?;
    RankTable::new(n).point(t, s, i)
}

/// One-shot `Prob(R_t <= k | r_t = s)`.
pub fn rank_topk_prob(n: usize, t: usize, s: usize, k: usize) -> Result<f64> {
    RankQuery::new(n, t, s)?;
    RankTable::new(n).topk(t, s, k)
}
