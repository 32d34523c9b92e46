//! The two-parameter choice function, its derivatives, the exact occupancy
//! law of the red-draw count and the log-likelihood of a set of paths.
//!
//! Counts are passed as `(i, j)` = (red draws so far, green draws so far).
//! Arrays over cells are indexed `(k, i)` with `k = i + j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::PathSet;
use crate::triangular::TriangularArray;

/// Model parameters `(alpha, c)`: intensification exponent and inverse
/// attractiveness of a branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    c: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "c must be positive and finite, got {c}"
            )));
        }
        Ok(Self { alpha, c })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.alpha, self.c]
    }
}

#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `(f, 1 - f)` for a log-odds value. The smaller probability is computed
/// directly and the other as its complement, so the two always add to one.
#[inline]
pub(crate) fn logistic_pair(log_odds: f64) -> (f64, f64) {
    let small = 1.0 / (1.0 + log_odds.abs().exp());
    let large = 1.0 - small;
    if log_odds >= 0.0 {
        (large, small)
    } else {
        (small, large)
    }
}

/// `alpha * ln((c + i) / (c + j))`, the log-odds of drawing red.
#[inline]
pub fn log_odds(params: &ModelParams, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    params.alpha * ((params.c + i as f64).ln() - (params.c + j as f64).ln())
}

/// Probability of drawing red after `i` red and `j` green draws:
/// `(c+i)^a / ((c+i)^a + (c+j)^a)`, evaluated in log space.
#[inline]
pub fn choice_prob(params: &ModelParams, i: usize, j: usize) -> f64 {
    logistic_pair(log_odds(params, i, j)).0
}

/// Gradient of [`choice_prob`] with respect to `(alpha, c)`.
pub fn choice_prob_grad(params: &ModelParams, i: usize, j: usize) -> [f64; 2] {
    if i == j {
        return [0.0, 0.0];
    }
    let (f, fbar) = logistic_pair(log_odds(params, i, j));
    let s = f * fbar;
    let (ci, cj) = (params.c + i as f64, params.c + j as f64);
    [
        s * (ci.ln() - cj.ln()),
        s * params.alpha * (j as f64 - i as f64) / (ci * cj),
    ]
}

/// Symmetric 2x2 matrix over the `(alpha, c)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellMatrix2 {
    pub aa: f64,
    pub ac: f64,
    pub cc: f64,
}

impl CellMatrix2 {
    pub const ZERO: CellMatrix2 = CellMatrix2 {
        aa: 0.0,
        ac: 0.0,
        cc: 0.0,
    };

    pub fn new(aa: f64, ac: f64, cc: f64) -> Self {
        Self { aa, ac, cc }
    }

    pub fn outer(v: [f64; 2]) -> Self {
        Self {
            aa: v[0] * v[0],
            ac: v[0] * v[1],
            cc: v[1] * v[1],
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            aa: self.aa * s,
            ac: self.ac * s,
            cc: self.cc * s,
        }
    }

    pub fn add_scaled(&mut self, other: &CellMatrix2, s: f64) {
        self.aa += s * other.aa;
        self.ac += s * other.ac;
        self.cc += s * other.cc;
    }

    pub fn det(&self) -> f64 {
        self.aa * self.cc - self.ac * self.ac
    }

    pub fn trace(&self) -> f64 {
        self.aa + self.cc
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mid = 0.5 * (self.aa + self.cc);
        let half_diff = 0.5 * (self.aa - self.cc);
        let r = half_diff.hypot(self.ac);
        [mid - r, mid + r]
    }

    /// Ratio of the largest to the smallest eigenvalue magnitude.
    pub fn condition_number(&self) -> f64 {
        let [lo, hi] = self.eigenvalues();
        let (lo, hi) = (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()));
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = self.aa.abs().max(self.cc.abs()).max(f64::MIN_POSITIVE);
        self.eigenvalues()[0] >= -tol * scale
    }

    /// Closed-form inverse. Fails when the condition number exceeds
    /// `1e12` or the determinant underflows.
    pub fn inverse(&self) -> Result<CellMatrix2> {
        let condition = self.condition_number();
        let det = self.det();
        if !(condition.is_finite() && condition <= 1e12) || det.abs() < 1e-300 {
            return Err(Error::Singular { condition });
        }
        Ok(CellMatrix2 {
            aa: self.cc / det,
            ac: -self.ac / det,
            cc: self.aa / det,
        })
    }

    /// `self * inner * self`.
    pub fn sandwich(&self, inner: &CellMatrix2) -> CellMatrix2 {
        // (S M) then (S M) S, all symmetric.
        let m00 = self.aa * inner.aa + self.ac * inner.ac;
        let m01 = self.aa * inner.ac + self.ac * inner.cc;
        let m10 = self.ac * inner.aa + self.cc * inner.ac;
        let m11 = self.ac * inner.ac + self.cc * inner.cc;
        CellMatrix2 {
            aa: m00 * self.aa + m01 * self.ac,
            ac: m00 * self.ac + m01 * self.cc,
            cc: m10 * self.ac + m11 * self.cc,
        }
    }

    pub fn to_rows(&self) -> [[f64; 2]; 2] {
        [[self.aa, self.ac], [self.ac, self.cc]]
    }
}

/// Per-cell Fisher kernel: `grad * grad^T / (f fbar)^2`, i.e. the outer
/// product of `(ln((c+i)/(c+j)), alpha (j-i) / ((c+i)(c+j)))`.
pub fn fisher_cell(params: &ModelParams, i: usize, j: usize) -> CellMatrix2 {
    if i == j {
        return CellMatrix2::ZERO;
    }
    let (ci, cj) = (params.c + i as f64, params.c + j as f64);
    let log_ratio = ci.ln() - cj.ln();
    let dc = params.alpha * (j as f64 - i as f64) / (ci * cj);
    CellMatrix2::outer([log_ratio, dc])
}

/// Exact law of the red-draw count `Z_k` for `k = 0..n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyDistribution {
    rows: TriangularArray,
}

impl OccupancyDistribution {
    pub fn from_rows(rows: TriangularArray) -> Self {
        Self { rows }
    }

    /// Number of rows (the path length the law was computed for).
    pub fn n(&self) -> usize {
        self.rows.n()
    }

    /// `P(Z_k = i)`.
    #[inline]
    pub fn prob(&self, k: usize, i: usize) -> f64 {
        self.rows.get(k, i)
    }

    pub fn row(&self, k: usize) -> &[f64] {
        self.rows.row(k)
    }

    pub fn as_array(&self) -> &TriangularArray {
        &self.rows
    }
}

/// Forward recursion
/// `P(Z_{k+1}=i) = P(Z_k=i)(1 - f(i, k-i)) + P(Z_k=i-1) f(i-1, k-i+1)`.
pub fn occupancy(params: &ModelParams, n: usize) -> OccupancyDistribution {
    let mut rows = TriangularArray::zeros(n);
    if n == 0 {
        return OccupancyDistribution { rows };
    }
    rows.set(0, 0, 1.0);
    let mut next = Vec::with_capacity(n);
    for k in 0..n - 1 {
        next.clear();
        next.resize(k + 2, 0.0);
        for (i, &p) in rows.row(k).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (f, fbar) = logistic_pair(log_odds(params, i, k - i));
            next[i] += p * fbar;
            next[i + 1] += p * f;
        }
        rows.row_mut(k + 1).copy_from_slice(&next);
    }
    OccupancyDistribution { rows }
}

/// `sum_j sum_k { X log f + (1 - X) log(1 - f) }` over every draw of every path.
pub fn loglik(paths: &PathSet, params: &ModelParams) -> f64 {
    let mut total = 0.0;
    for path in paths.iter() {
        let mut red = 0usize;
        for (k, &x) in path.iter().enumerate() {
            let eta = log_odds(params, red, k - red);
            if x == 1 {
                total -= softplus(-eta);
                red += 1;
            } else {
                total -= softplus(eta);
            }
        }
    }
    total
}

/// Expected per-path log-likelihood at `params` when data follow `truth`.
pub fn expected_loglik(truth: &ModelParams, params: &ModelParams, n: usize) -> f64 {
    let occ = occupancy(truth, n);
    let mut total = 0.0;
    for k in 0..n {
        for (i, &p) in occ.row(k).iter().enumerate() {
            let (f0, f0bar) = logistic_pair(log_odds(truth, i, k - i));
            let eta = log_odds(params, i, k - i);
            total += p * (-f0 * softplus(-eta) - f0bar * softplus(eta));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn theta(a: f64, c: f64) -> ModelParams {
        ModelParams::new(a, c).unwrap()
    }

    #[test]
    fn rejects_non_positive_params() {
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -2.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn choice_prob_examples() {
        assert!((choice_prob(&theta(1.0, 1.0), 0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(choice_prob(&theta(1.7, 0.3), 12, 12), 0.5);
        assert!((choice_prob(&theta(2.0, 20.0), 10, 0) - 900.0 / 1300.0).abs() < 1e-15);
    }

    #[test]
    fn grad_examples() {
        let g = choice_prob_grad(&theta(1.0, 1.0), 0, 1);
        assert!((g[0] - (2.0 / 9.0) * 0.5f64.ln()).abs() < 1e-15);
        assert!((g[1] - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(choice_prob_grad(&theta(2.0, 3.0), 4, 4), [0.0, 0.0]);
    }

    #[test]
    fn grad_matches_central_differences() {
        let h = 1e-6;
        let p = theta(1.0, 1.0);
        let fd_a = (choice_prob(&theta(1.0 + h, 1.0), 0, 1)
            - choice_prob(&theta(1.0 - h, 1.0), 0, 1))
            / (2.0 * h);
        let fd_c = (choice_prob(&theta(1.0, 1.0 + h), 0, 1)
            - choice_prob(&theta(1.0, 1.0 - h), 0, 1))
            / (2.0 * h);
        let g = choice_prob_grad(&p, 0, 1);
        assert!(((g[0] - fd_a) / fd_a).abs() < 1e-6);
        assert!(((g[1] - fd_c) / fd_c).abs() < 1e-6);
        assert!((fd_a + 0.1540327).abs() < 1e-7);
        assert!((fd_c - 0.1111111).abs() < 1e-7);
    }

    #[test]
    fn fisher_cell_examples() {
        let m = fisher_cell(&theta(1.0, 1.0), 0, 1);
        let ln2 = 2f64.ln();
        assert!((m.aa - ln2 * ln2).abs() < 1e-15);
        assert!((m.ac + ln2 / 2.0).abs() < 1e-15);
        assert!((m.cc - 0.25).abs() < 1e-15);
        assert_eq!(fisher_cell(&theta(1.3, 0.7), 3, 3), CellMatrix2::ZERO);

        let p = theta(1.0, 1.0);
        let (f, fbar) = (1.0 / 3.0, 2.0 / 3.0);
        let via_grad =
            CellMatrix2::outer(choice_prob_grad(&p, 0, 1)).scaled(1.0 / (f * fbar * f * fbar));
        assert!((via_grad.aa - m.aa).abs() < 1e-14);
        assert!((via_grad.ac - m.ac).abs() < 1e-14);
        assert!((via_grad.cc - m.cc).abs() < 1e-14);
    }

    #[test]
    fn occupancy_small_rows() {
        let occ = occupancy(&theta(1.0, 1.0), 3);
        assert_eq!(occ.row(0), &[1.0]);
        for &v in occ.row(2) {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn occupancy_long_rows_sum_to_one() {
        let occ = occupancy(&theta(1.8, 0.4), 2000);
        for k in [1, 10, 500, 1999] {
            let s: f64 = occ.row(k).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "row {k} sums to {s}");
        }
    }

    #[test]
    fn matrix_inverse_and_sandwich() {
        let m = CellMatrix2::new(4.0, 1.0, 3.0);
        let inv = m.inverse().unwrap();
        let id = m.sandwich(&inv);
        // m * m^-1 * m == m
        assert!(
            (id.aa - m.aa).abs() < 1e-12
                && (id.ac - m.ac).abs() < 1e-12
                && (id.cc - m.cc).abs() < 1e-12
        );
        assert!(matches!(
            CellMatrix2::outer([1.0, 2.0]).inverse(),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn expected_loglik_single_cell() {
        let v = expected_loglik(&theta(1.2, 3.0), &theta(0.4, 9.0), 1);
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn choice_prob_symmetry_is_exact(a in 0.01f64..100.0, c in 0.01f64..1000.0,
                                         i in 0usize..1_000_000, j in 0usize..1_000_000) {
            let p = theta(a, c);
            let f = choice_prob(&p, i, j);
            prop_assert!(f.is_finite() && (0.0..=1.0).contains(&f));
            prop_assert_eq!(f + choice_prob(&p, j, i), 1.0);
        }

        #[test]
        fn choice_prob_strictly_inside_when_representable(a in 0.01f64..5.0, c in 0.05f64..100.0,
                                                         i in 0usize..1000, j in 0usize..1000) {
            let f = choice_prob(&theta(a, c), i, j);
            prop_assert!(f > 0.0 && f < 1.0);
        }

        #[test]
        fn occupancy_is_mirror_symmetric(a in 0.1f64..3.0, c in 0.1f64..20.0) {
            let occ = occupancy(&theta(a, c), 30);
            for k in 0..30 {
                for i in 0..=k {
                    prop_assert!((occ.prob(k, i) - occ.prob(k, k - i)).abs() < 1e-14);
                }
            }
        }
    }
}
