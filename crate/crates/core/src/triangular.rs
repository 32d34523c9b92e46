//! Row-major storage for arrays indexed by `(k, i)` with `0 <= i <= k < n`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularArray {
    n: usize,
    data: Vec<f64>,
}

#[inline]
pub(crate) fn tri_offset(k: usize, i: usize) -> usize {
    k * (k + 1) / 2 + i
}

#[inline]
pub(crate) fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl TriangularArray {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; tri_len(n)],
        }
    }

    /// Builds an array from `f(k, i)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(tri_len(n));
        for k in 0..n {
            for i in 0..=k {
                data.push(f(k, i));
            }
        }
        Self { n, data }
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        debug_assert!(i <= k && k < self.n);
        self.data[tri_offset(k, i)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, value: f64) {
        debug_assert!(i <= k && k < self.n);
        self.data[tri_offset(k, i)] = value;
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let start = tri_offset(k, 0);
        &self.data[start..start + k + 1]
    }

    pub(crate) fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let start = tri_offset(k, 0);
        &mut self.data[start..start + k + 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Iterates `(k, i, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |k| self.row(k).iter().enumerate().map(move |(i, &v)| (k, i, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_contiguous() {
        let a = TriangularArray::from_fn(5, |k, i| (10 * k + i) as f64);
        assert_eq!(a.as_slice().len(), 15);
        assert_eq!(a.get(3, 2), 32.0);
        assert_eq!(a.row(4), &[40.0, 41.0, 42.0, 43.0, 44.0]);
        let collected: Vec<_> = a.iter().map(|(k, i, _)| (k, i)).collect();
        assert_eq!(collected[0], (0, 0));
        assert_eq!(collected[14], (4, 4));
    }
}
