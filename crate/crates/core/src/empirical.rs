//! Per-cell empirical frequencies of a path set.
//!
//! For a cell `(k, i)` ("i red among the first k draws"):
//! `a` is the fraction of paths in the cell, `b` the fraction in the cell
//! whose next draw is red, `p = b / a` and `ptilde` pools the cell with its
//! mirror `(k, k - i)` using `f(i, j) = 1 - f(j, i)`. Empty ratios are 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::PathSet;
use crate::triangular::{tri_len, tri_offset, TriangularArray};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    n: usize,
    n_paths: usize,
    a: TriangularArray,
    b: TriangularArray,
    p: TriangularArray,
    ptilde: TriangularArray,
}

#[inline]
fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

impl CellStats {
    /// Single pass over all draws; counts are integers until the final division.
    pub fn from_paths(paths: &PathSet) -> Self {
        let n = paths.len();
        let mut a_count = vec![0u64; tri_len(n)];
        let mut b_count = vec![0u64; tri_len(n)];
        for path in paths.iter() {
            let mut red = 0usize;
            for (k, &x) in path.iter().enumerate() {
                let idx = tri_offset(k, red);
                a_count[idx] += 1;
                b_count[idx] += x as u64;
                red += x as usize;
            }
        }
        let total = paths.n_paths() as f64;
        let mut a = TriangularArray::zeros(n);
        let mut b = TriangularArray::zeros(n);
        for k in 0..n {
            for i in 0..=k {
                let idx = tri_offset(k, i);
                a.set(k, i, a_count[idx] as f64 / total);
                b.set(k, i, b_count[idx] as f64 / total);
            }
        }
        Self::assemble(n, paths.n_paths(), a, b)
    }

    /// Builds statistics from occupancy frequencies `a` and conditional
    /// frequencies `p` directly (e.g. synthetic, noise-free data).
    pub fn from_frequencies(
        n_paths: usize,
        a: TriangularArray,
        p: TriangularArray,
    ) -> Result<Self> {
        if a.n() != p.n() {
            return Err(Error::InvalidArgument(
                "a and p have different sizes".into(),
            ));
        }
        for ((_, _, av), (_, _, pv)) in a.iter().zip(p.iter()) {
            if !(0.0..=1.0).contains(&av) || !(0.0..=1.0).contains(&pv) {
                return Err(Error::InvalidArgument(
                    "frequencies must lie in [0, 1]".into(),
                ));
            }
        }
        let n = a.n();
        let b = TriangularArray::from_fn(n, |k, i| a.get(k, i) * p.get(k, i));
        Ok(Self::assemble(n, n_paths, a, b))
    }

    fn assemble(n: usize, n_paths: usize, a: TriangularArray, b: TriangularArray) -> Self {
        let p = TriangularArray::from_fn(n, |k, i| ratio_or_zero(b.get(k, i), a.get(k, i)));
        let ptilde = TriangularArray::from_fn(n, |k, i| {
            let m = k - i;
            if m == i {
                return if a.get(k, i) > 0.0 { 0.5 } else { 0.0 };
            }
            ratio_or_zero(
                b.get(k, i) + a.get(k, m) - b.get(k, m),
                a.get(k, i) + a.get(k, m),
            )
        });
        Self {
            n,
            n_paths,
            a,
            b,
            p,
            ptilde,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    #[inline]
    pub fn a(&self, k: usize, i: usize) -> f64 {
        self.a.get(k, i)
    }

    #[inline]
    pub fn b(&self, k: usize, i: usize) -> f64 {
        self.b.get(k, i)
    }

    #[inline]
    pub fn p(&self, k: usize, i: usize) -> f64 {
        self.p.get(k, i)
    }

    #[inline]
    pub fn q(&self, k: usize, i: usize) -> f64 {
        1.0 - self.p.get(k, i)
    }

    #[inline]
    pub fn ptilde(&self, k: usize, i: usize) -> f64 {
        self.ptilde.get(k, i)
    }

    /// Whether any path visited the cell.
    #[inline]
    pub fn occupied(&self, k: usize, i: usize) -> bool {
        self.a.get(k, i) > 0.0
    }

    pub fn a_array(&self) -> &TriangularArray {
        &self.a
    }

    pub fn p_array(&self) -> &TriangularArray {
        &self.p
    }

    pub fn ptilde_array(&self) -> &TriangularArray {
        &self.ptilde
    }
}

/// `Q_n = min(Z_n, n - Z_n)`, the number of minority-colour draws.
pub fn discarded_count(path: &[u8]) -> usize {
    let red: usize = path.iter().map(|&x| x as usize).sum();
    red.min(path.len() - red)
}
