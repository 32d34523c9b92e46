//! Exact asymptotic covariances for `N` independent paths of length `n`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimate::WeightMode;
pub use crate::model::CellMatrix2;
use crate::model::{
    choice_prob_grad, fisher_cell, log_odds, logistic_pair, occupancy, ModelParams,
    OccupancyDistribution,
};
use crate::triangular::TriangularArray;

/// Fisher information of one path,
/// `sum_k sum_i P(Z_k = i) f fbar J(alpha, c, i, k - i)`.
pub fn fisher_info(params: &ModelParams, n: usize) -> CellMatrix2 {
    fisher_info_with(params, &occupancy(params, n))
}

/// [`fisher_info`] against a precomputed occupancy law.
pub fn fisher_info_with(params: &ModelParams, occ: &OccupancyDistribution) -> CellMatrix2 {
    let mut total = CellMatrix2::ZERO;
    for k in 0..occ.n() {
        for (i, &p) in occ.row(k).iter().enumerate() {
            if p == 0.0 || 2 * i == k {
                continue;
            }
            let (f, fbar) = logistic_pair(log_odds(params, i, k - i));
            total.add_scaled(&fisher_cell(params, i, k - i), p * f * fbar);
        }
    }
    total
}

/// Same quantity through `sum P / (f fbar) * grad grad^T`.
pub fn fisher_info_from_gradients(params: &ModelParams, n: usize) -> CellMatrix2 {
    let occ = occupancy(params, n);
    let mut total = CellMatrix2::ZERO;
    for k in 0..n {
        for (i, &p) in occ.row(k).iter().enumerate() {
            if p == 0.0 || 2 * i == k {
                continue;
            }
            let (f, fbar) = logistic_pair(log_odds(params, i, k - i));
            total.add_scaled(
                &CellMatrix2::outer(choice_prob_grad(params, i, k - i)),
                p / (f * fbar),
            );
        }
    }
    total
}

/// The two matrices of the least-squares sandwich.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlseSandwich {
    /// Hessian of the limit contrast, `2 sum w0 fdot fdot^T`.
    pub bread: CellMatrix2,
    /// Limit covariance of the contrast gradient,
    /// `4 sum w0^2 Gamma0 fdot fdot^T`.
    pub meat: CellMatrix2,
}

impl WlseSandwich {
    pub fn covariance(&self) -> Result<CellMatrix2> {
        Ok(self.bread.inverse()?.sandwich(&self.meat))
    }
}

pub fn wlse_sandwich(params: &ModelParams, n: usize, weights: WeightMode) -> WlseSandwich {
    let occ = occupancy(params, n);
    let mut bread = CellMatrix2::ZERO;
    let mut meat = CellMatrix2::ZERO;
    for k in 0..n {
        for (i, &p) in occ.row(k).iter().enumerate() {
            if p == 0.0 || 2 * i == k {
                continue;
            }
            let (f, fbar) = logistic_pair(log_odds(params, i, k - i));
            let v = f * fbar;
            let w0 = match weights {
                WeightMode::Occupancy => p,
                WeightMode::Efficient => p / v,
                WeightMode::Unit => 1.0,
            };
            let gamma0 = v / p;
            // fdot fdot^T = (f fbar)^2 J
            let outer = fisher_cell(params, i, k - i).scaled(v * v);
            bread.add_scaled(&outer, 2.0 * w0);
            meat.add_scaled(&outer, 4.0 * w0 * w0 * gamma0);
        }
    }
    WlseSandwich { bread, meat }
}

/// Asymptotic covariance of `sqrt(N) (theta_hat - theta0)` for the weighted
/// least squares estimator. Requires `n >= 3`; `Singular` otherwise.
pub fn wlse_covariance(params: &ModelParams, n: usize, weights: WeightMode) -> Result<CellMatrix2> {
    if n < 3 {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    wlse_sandwich(params, n, weights).covariance()
}

/// Inverse Fisher information, with the same `n >= 3` rule.
pub fn mle_covariance(params: &ModelParams, n: usize) -> Result<CellMatrix2> {
    if n < 3 {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    fisher_info(params, n).inverse()
}

/// Standard deviations `sqrt(diag(cov) / N)` of an estimate from `N` paths.
pub fn standard_errors(cov: &CellMatrix2, n_paths: usize) -> [f64; 2] {
    [
        (cov.aa / n_paths as f64).sqrt(),
        (cov.cc / n_paths as f64).sqrt(),
    ]
}

/// Limit variances `f0 fbar0 / P(Z_k = i)` of `sqrt(N) (p_N - f0)`.
pub fn gamma0(params: &ModelParams, n: usize) -> TriangularArray {
    let occ = occupancy(params, n);
    TriangularArray::from_fn(n, |k, i| {
        let (f, fbar) = logistic_pair(log_odds(params, i, k - i));
        f * fbar / occ.prob(k, i)
    })
}

/// Occupancy law of the Polya urn (`alpha = 1`) from its closed form
/// `C(k,i) (c)_i (c)_{k-i} / (2c)_k`, accumulated in log space.
pub fn polya_occupancy(c: f64, n: usize) -> OccupancyDistribution {
    let mut rows = TriangularArray::zeros(n);
    let lg_c = ln_gamma(c);
    let lg_2c = ln_gamma(2.0 * c);
    for k in 0..n {
        let kf = k as f64;
        // log P(Z_k = 0) = ln (c)_k - ln (2c)_k
        let mut log_p = ln_gamma(c + kf) - lg_c - ln_gamma(2.0 * c + kf) + lg_2c;
        let row = rows.row_mut(k);
        row[0] = log_p.exp();
        for i in 0..k {
            let fi = i as f64;
            // ratio P(i+1)/P(i) = (k-i)/(i+1) * (c+i)/(c+k-i-1)
            log_p += ((kf - fi) / (fi + 1.0)).ln() + ((c + fi) / (c + kf - fi - 1.0)).ln();
            row[i + 1] = log_p.exp();
        }
    }
    OccupancyDistribution::from_rows(rows)
}

/// Fisher information about `c` carried by a single Polya path of length `n`:
/// `sum_k (2c+k)^-1 { E[1/(c+Z_k)] + E[1/(c+k-Z_k)] - 4/(2c+k) }`.
pub fn polya_single_path_fisher(c: f64, n: usize) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParams(format!("c must be positive, got {c}")));
    }
    let occ = polya_occupancy(c, n);
    let mut total = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let row = occ.row(k);
        let mut e_red = 0.0;
        let mut e_green = 0.0;
        for (i, &p) in row.iter().enumerate() {
            e_red += p / (c + i as f64);
            e_green += p / (c + kf - i as f64);
        }
        total += (e_red + e_green - 4.0 / (2.0 * c + kf)) / (2.0 * c + kf);
    }
    Ok(total.max(0.0))
}
