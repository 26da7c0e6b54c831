//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Columns are eliminated left-looking in order of increasing length; within
//! a column the pivot is the row of smallest static count among entries that
//! pass a relative magnitude threshold.

/// Relative threshold for accepting a pivot candidate.
const PIVOT_THRESHOLD: f64 = 0.1;
/// Absolute magnitude below which a column is treated as dependent.
const SINGULAR_TOLERANCE: f64 = 1e-11;
/// Entries below this are dropped from factors and etas.
const DROP_TOLERANCE: f64 = 1e-14;

#[derive(Debug)]
pub(crate) struct Singular {
    pub position: usize,
}

#[derive(Debug)]
struct Eta {
    position: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug)]
pub(crate) struct SparseLu {
    m: usize,
    pivot_row: Vec<usize>,
    pivot_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_k: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

impl SparseLu {
    /// Factors the basis whose column at position `j` is `columns[j]`, given
    /// as `(row, value)` pairs.
    pub fn factor(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(columns.len(), m);
        let mut row_count = vec![0usize; m];
        for col in columns {
            for &(i, _) in col {
                row_count[i] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&j| columns[j].len());

        let mut lu = SparseLu {
            m,
            pivot_row: Vec::with_capacity(m),
            pivot_pos: Vec::with_capacity(m),
            l_start: vec![0],
            l_row: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_k: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
            eta_nnz: 0,
        };

        let mut work = vec![0.0f64; m];
        let mut marked = vec![false; m];
        let mut pivoted = vec![false; m];
        let mut touched: Vec<usize> = Vec::new();

        for (k, &pos) in order.iter().enumerate() {
            touched.clear();
            for &(i, v) in &columns[pos] {
                if !marked[i] {
                    marked[i] = true;
                    touched.push(i);
                }
                work[i] += v;
            }
            for kk in 0..k {
                let r = lu.pivot_row[kk];
                let v = work[r];
                if v == 0.0 {
                    continue;
                }
                work[r] = 0.0;
                if v.abs() > DROP_TOLERANCE {
                    lu.u_k.push(kk);
                    lu.u_val.push(v);
                }
                for e in lu.l_start[kk]..lu.l_start[kk + 1] {
                    let i = lu.l_row[e];
                    if !marked[i] {
                        marked[i] = true;
                        touched.push(i);
                    }
                    work[i] -= lu.l_val[e] * v;
                }
            }
            lu.u_start.push(lu.u_k.len());

            let max_abs = touched
                .iter()
                .filter(|&&i| !pivoted[i])
                .map(|&i| work[i].abs())
                .fold(0.0, f64::max);
            if max_abs < SINGULAR_TOLERANCE {
                for &i in &touched {
                    work[i] = 0.0;
                    marked[i] = false;
                }
                return Err(Singular { position: pos });
            }
            let mut best: Option<usize> = None;
            for &i in &touched {
                if pivoted[i] || work[i].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(b) => {
                        let order = row_count[i]
                            .cmp(&row_count[b])
                            .then(work[b].abs().total_cmp(&work[i].abs()))
                            .then(i.cmp(&b));
                        Some(if order.is_lt() { i } else { b })
                    }
                };
            }
            let r = best.expect("threshold admits the largest entry");
            let pivot = work[r];
            pivoted[r] = true;
            lu.pivot_row.push(r);
            lu.pivot_pos.push(pos);
            lu.u_diag.push(pivot);
            for &i in &touched {
                if !pivoted[i] && work[i].abs() > DROP_TOLERANCE {
                    lu.l_row.push(i);
                    lu.l_val.push(work[i] / pivot);
                }
                work[i] = 0.0;
                marked[i] = false;
            }
            lu.l_start.push(lu.l_row.len());
        }
        Ok(lu)
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    pub fn factor_nnz(&self) -> usize {
        self.l_row.len() + self.u_k.len() + self.m
    }

    /// Solves `B z = a`. `rhs` is row-indexed and is consumed; the result is
    /// written position-indexed into `out`.
    pub fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        // L' v = a, v stored in out (k-indexed).
        for k in 0..m {
            let v = rhs[self.pivot_row[k]];
            out[k] = v;
            if v != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_row[e]] -= self.l_val[e] * v;
                }
            }
        }
        // U w = v, in place in out.
        for k in (0..m).rev() {
            let w = out[k] / self.u_diag[k];
            out[k] = w;
            if w != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    out[self.u_k[e]] -= self.u_val[e] * w;
                }
            }
        }
        // Permute k -> position, reusing rhs as scratch.
        rhs.copy_from_slice(out);
        for k in 0..m {
            out[self.pivot_pos[k]] = rhs[k];
        }
        for eta in &self.etas {
            let zr = out[eta.position] / eta.pivot;
            out[eta.position] = zr;
            if zr != 0.0 {
                for &(i, d) in &eta.entries {
                    out[i] -= d * zr;
                }
            }
        }
    }

    /// Solves `B^T y = c`. `c` is position-indexed and is consumed; the result
    /// is written row-indexed into `out`.
    pub fn btran(&self, c: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut acc = c[eta.position];
            for &(i, d) in &eta.entries {
                acc -= d * c[i];
            }
            c[eta.position] = acc / eta.pivot;
        }
        // U^T g = c', g stored k-indexed in out.
        for k in 0..m {
            let mut acc = c[self.pivot_pos[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                acc -= self.u_val[e] * out[self.u_k[e]];
            }
            out[k] = acc / self.u_diag[k];
        }
        // L'^T y = g, backward; y written into c (row-indexed) then copied.
        for k in (0..m).rev() {
            let mut acc = out[k];
            for e in self.l_start[k]..self.l_start[k + 1] {
                acc -= self.l_val[e] * c[self.l_row[e]];
            }
            c[self.pivot_row[k]] = acc;
        }
        out.copy_from_slice(c);
    }

    /// Records the replacement of the basis column at `position` by a column
    /// whose FTRAN image is `d` (position-indexed).
    pub fn push_eta(&mut self, position: usize, d: &[f64]) {
        let entries: Vec<(usize, f64)> = d
            .iter()
            .enumerate()
            .filter(|&(i, v)| i != position && v.abs() > DROP_TOLERANCE)
            .map(|(i, &v)| (i, v))
            .collect();
        self.eta_nnz += entries.len() + 1;
        self.etas.push(Eta {
            position,
            pivot: d[position],
            entries,
        });
    }
}
