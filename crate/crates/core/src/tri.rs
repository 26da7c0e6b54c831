//! Row-offset storage for arrays indexed by a stage `t` in `1..=n` and a
//! partial rank `s` in `1..=t`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq)]
pub struct Tri<T> {
    n: usize,
    data: Vec<T>,
}

#[inline]
fn offset(t: usize) -> usize {
    t * (t - 1) / 2
}

impl<T: Clone> Tri<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Tri {
            n,
            data: vec![value; n * (n + 1) / 2],
        }
    }
}

impl<T> Tri<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for t in 1..=n {
            for s in 1..=t {
                data.push(f(t, s));
            }
        }
        Tri { n, data }
    }

    /// Builds from nested rows; row `t - 1` must have length `t`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != i + 1 {
                return None;
            }
            data.extend(row);
        }
        Some(Tri { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, t: usize, s: usize) -> &T {
        debug_assert!(1 <= s && s <= t && t <= self.n);
        &self.data[offset(t) + s - 1]
    }

    #[inline]
    pub fn get_mut(&mut self, t: usize, s: usize) -> &mut T {
        debug_assert!(1 <= s && s <= t && t <= self.n);
        &mut self.data[offset(t) + s - 1]
    }

    /// Entries of stage `t`, indexed by `s - 1`.
    pub fn row(&self, t: usize) -> &[T] {
        &self.data[offset(t)..offset(t) + t]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [T] {
        &mut self.data[offset(t)..offset(t) + t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (1..=self.n).map(move |t| self.row(t))
    }

    /// Iterates `((t, s), value)` in stage-major order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        (1..=self.n).flat_map(move |t| self.row(t).iter().enumerate().map(move |(i, v)| ((t, i + 1), v)))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Tri<U> {
        Tri {
            n: self.n,
            data: self.data.iter().map(&mut f).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Tri<T> {
    type Output = T;
    fn index(&self, (t, s): (usize, usize)) -> &T {
        self.get(t, s)
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Tri<T> {
    fn index_mut(&mut self, (t, s): (usize, usize)) -> &mut T {
        self.get_mut(t, s)
    }
}

impl<T: Serialize> Serialize for Tri<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.rows())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Tri<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(deserializer)?;
        Tri::from_rows(rows).ok_or_else(|| serde::de::Error::custom("row t must contain exactly t entries"))
    }
}
