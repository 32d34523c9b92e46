//! Pivotal bootstrap intervals (whole paths resampled) and Monte-Carlo
//! reference intervals.
//!
//! Quantiles are type-1 order statistics: the `q` quantile of `B` sorted
//! values is the one at 1-based rank `ceil(q * B)`, clamped to `1..=B`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::CellStats;
use crate::error::{Error, Result};
use crate::estimate::{fit_stats, EstimateResult, Method, OptimizerConfig, ParamBox};
use crate::model::ModelParams;
use crate::simulate::{simulate_paths, PathSet, Seed};

pub const MIN_BOOTSTRAP: usize = 50;
pub const MIN_MONTE_CARLO: usize = 100;
/// Share of replicate fits that must converge.
pub const MIN_CONVERGED_SHARE: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    Pivotal,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicateDiagnostics {
    pub requested: usize,
    /// Fits that returned an estimate (these enter the quantiles).
    pub fitted: usize,
    pub converged: usize,
    pub failed: usize,
    pub boundary_hits: usize,
    /// The reflected interval had a negative endpoint that was raised to 0.
    pub clipped_alpha: bool,
    pub clipped_c: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalPair {
    pub alpha_ci: [f64; 2],
    pub c_ci: [f64; 2],
    pub level: f64,
    pub replicates: usize,
    pub kind: IntervalKind,
    pub diagnostics: ReplicateDiagnostics,
}

/// Output of [`pivotal_ci`]: the interval, the point estimate it is
/// centred on and the replicate estimates (for scatter plots).
#[derive(Debug, Clone)]
pub struct BootstrapRun {
    pub interval: IntervalPair,
    pub estimate: EstimateResult,
    pub replicates: Vec<ModelParams>,
}

/// Output of [`monte_carlo_ci`].
#[derive(Debug, Clone)]
pub struct MonteCarloRun {
    pub interval: IntervalPair,
    pub estimates: Vec<ModelParams>,
}

/// Type-1 empirical quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let b = sorted.len();
    let rank = ((q * b as f64).ceil() as usize).clamp(1, b);
    sorted[rank - 1]
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "level must lie in (0, 1), got {level}"
        )))
    }
}

fn sorted_coordinate(values: &[ModelParams], d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|p| p.as_array()[d]).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `(2 theta - q_{1-g/2}, 2 theta - q_{g/2})` per coordinate, with `g = 1 - level`.
/// Negative endpoints are raised to 0 and flagged.
pub fn pivotal_interval(
    theta_hat: &ModelParams,
    replicates: &[ModelParams],
    level: f64,
) -> Result<IntervalPair> {
    check_level(level)?;
    if replicates.is_empty() {
        return Err(Error::EmptyData);
    }
    let g = 1.0 - level;
    let centre = theta_hat.as_array();
    let mut ci = [[0.0; 2]; 2];
    let mut clipped = [false; 2];
    for d in 0..2 {
        let s = sorted_coordinate(replicates, d);
        let lo = 2.0 * centre[d] - quantile(&s, 1.0 - g / 2.0);
        let hi = 2.0 * centre[d] - quantile(&s, g / 2.0);
        clipped[d] = lo < 0.0 || hi < 0.0;
        ci[d] = [lo.max(0.0), hi.max(0.0)];
    }
    Ok(IntervalPair {
        alpha_ci: ci[0],
        c_ci: ci[1],
        level,
        replicates: replicates.len(),
        kind: IntervalKind::Pivotal,
        diagnostics: ReplicateDiagnostics {
            clipped_alpha: clipped[0],
            clipped_c: clipped[1],
            ..Default::default()
        },
    })
}

/// Empirical `(g/2, 1 - g/2)` quantiles of the estimates.
pub fn percentile_interval(estimates: &[ModelParams], level: f64) -> Result<IntervalPair> {
    check_level(level)?;
    if estimates.is_empty() {
        return Err(Error::EmptyData);
    }
    let g = 1.0 - level;
    let mut ci = [[0.0; 2]; 2];
    for (d, slot) in ci.iter_mut().enumerate() {
        let s = sorted_coordinate(estimates, d);
        *slot = [quantile(&s, g / 2.0), quantile(&s, 1.0 - g / 2.0)];
    }
    Ok(IntervalPair {
        alpha_ci: ci[0],
        c_ci: ci[1],
        level,
        replicates: estimates.len(),
        kind: IntervalKind::MonteCarlo,
        diagnostics: ReplicateDiagnostics::default(),
    })
}

/// Tallies replicate fits and keeps the estimates of the successful ones.
fn collect(fits: Vec<Result<EstimateResult>>) -> Result<(Vec<ModelParams>, ReplicateDiagnostics)> {
    let mut diag = ReplicateDiagnostics {
        requested: fits.len(),
        ..Default::default()
    };
    let mut estimates = Vec::with_capacity(fits.len());
    for fit in fits {
        match fit {
            Ok(r) => {
                diag.fitted += 1;
                diag.converged += r.converged as usize;
                diag.boundary_hits += r.at_boundary as usize;
                estimates.push(r.theta_hat);
            }
            Err(_) => diag.failed += 1,
        }
    }
    if (diag.converged as f64) < MIN_CONVERGED_SHARE * diag.requested as f64 {
        return Err(Error::TooFewReplicates {
            converged: diag.converged,
            requested: diag.requested,
        });
    }
    Ok((estimates, diag))
}

/// Path indices of bootstrap sample `b`, drawn from stream `b` of `seed`.
pub fn resample_indices(n_paths: usize, b: usize, seed: Seed) -> Vec<usize> {
    let mut rng = seed.stream(b as u64);
    (0..n_paths).map(|_| rng.random_range(0..n_paths)).collect()
}

/// Pivotal bootstrap interval from `b` resamples of whole paths.
#[allow(clippy::too_many_arguments)]
pub fn pivotal_ci(
    paths: &PathSet,
    method: Method,
    b: usize,
    level: f64,
    seed: Seed,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> Result<BootstrapRun> {
    check_level(level)?;
    if b < MIN_BOOTSTRAP {
        return Err(Error::TooFewReplicates {
            converged: 0,
            requested: b,
        });
    }
    let estimate = fit_stats(&CellStats::from_paths(paths), method, bx, None, cfg)?;
    let n_paths = paths.n_paths();
    let fits: Vec<Result<EstimateResult>> = (0..b)
        .into_par_iter()
        .map(|r| {
            let sample = paths.select(&resample_indices(n_paths, r, seed));
            fit_stats(&CellStats::from_paths(&sample), method, bx, None, cfg)
        })
        .collect();
    let (replicates, diag) = collect(fits)?;
    let mut interval = pivotal_interval(&estimate.theta_hat, &replicates, level)?;
    interval.diagnostics = ReplicateDiagnostics {
        clipped_alpha: interval.diagnostics.clipped_alpha,
        clipped_c: interval.diagnostics.clipped_c,
        ..diag
    };
    Ok(BootstrapRun {
        interval,
        estimate,
        replicates,
    })
}

/// Fits of `reps` independent simulated experiments; experiment `r` is
/// simulated from `seed.child(r)`. Results are in experiment order.
#[allow(clippy::too_many_arguments)]
pub fn replicate_fits(
    truth: &ModelParams,
    n_paths: usize,
    n: usize,
    reps: usize,
    method: Method,
    seed: Seed,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> Vec<Result<EstimateResult>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let paths = simulate_paths(truth, n_paths, n, seed.child(r as u64))?;
            fit_stats(&CellStats::from_paths(&paths), method, bx, None, cfg)
        })
        .collect()
}

/// Monte-Carlo interval: quantiles of the estimates over `reps` experiments.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_ci(
    truth: &ModelParams,
    n_paths: usize,
    n: usize,
    reps: usize,
    method: Method,
    level: f64,
    seed: Seed,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> Result<MonteCarloRun> {
    check_level(level)?;
    if reps < MIN_MONTE_CARLO {
        return Err(Error::TooFewReplicates {
            converged: 0,
            requested: reps,
        });
    }
    let (estimates, diag) = collect(replicate_fits(
        truth, n_paths, n, reps, method, seed, bx, cfg,
    ))?;
    let mut interval = percentile_interval(&estimates, level)?;
    interval.diagnostics = diag;
    Ok(MonteCarloRun {
        interval,
        estimates,
    })
}
