//! Study harness: theoretical standard deviations, Monte-Carlo accuracy
//! (root MSE and deciles), interval comparisons and phase checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;

use crate::asymptotics::{mle_covariance, standard_errors, wlse_covariance};
use crate::bootstrap::{monte_carlo_ci, pivotal_ci, quantile, replicate_fits, IntervalPair};
use crate::empirical::discarded_count;
use crate::error::{Error, Result};
use crate::estimate::{Method, OptimizerConfig, ParamBox, WeightMode};
use crate::model::{CellMatrix2, ModelParams};
use crate::simulate::{simulate_paths, Seed};

fn default_n_paths() -> usize {
    50
}
fn default_length() -> usize {
    100
}
fn default_reps_mle() -> usize {
    500
}
fn default_reps_wlse() -> usize {
    1000
}
fn default_methods() -> Vec<Method> {
    vec![Method::Mle, Method::WLSE]
}
fn default_bootstrap() -> usize {
    500
}
fn default_level() -> f64 {
    0.95
}
fn default_phase_reps() -> usize {
    10_000
}
fn default_threshold() -> usize {
    10
}

/// Settings shared by all studies. Only `params` is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// `(alpha, c)` pairs.
    pub params: Vec<[f64; 2]>,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default = "default_length")]
    pub length: usize,
    /// Experiments per row for the MLE.
    #[serde(default = "default_reps_mle")]
    pub reps_mle: usize,
    /// Experiments per row for least-squares methods.
    #[serde(default = "default_reps_wlse")]
    pub reps_wlse: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
    /// Paths per phase check.
    #[serde(default = "default_phase_reps")]
    pub phase_reps: usize,
    /// Selection is declared when `Q_n <= threshold`.
    #[serde(default = "default_threshold")]
    pub threshold: usize,
    #[serde(default)]
    pub param_box: ParamBox,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl StudyConfig {
    pub fn new(params: Vec<[f64; 2]>) -> Self {
        Self {
            params,
            n_paths: default_n_paths(),
            length: default_length(),
            reps_mle: default_reps_mle(),
            reps_wlse: default_reps_wlse(),
            methods: default_methods(),
            bootstrap: default_bootstrap(),
            level: default_level(),
            seed: 0,
            phase_reps: default_phase_reps(),
            threshold: default_threshold(),
            param_box: ParamBox::default(),
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::InvalidArgument(
                "study needs at least one (alpha, c) pair".into(),
            ));
        }
        for &[a, c] in &self.params {
            ModelParams::new(a, c)?;
        }
        if self.n_paths == 0 || self.length == 0 || self.reps_mle == 0 || self.reps_wlse == 0 {
            return Err(Error::InvalidArgument("counts must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no estimator selected".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        let b = self.param_box;
        ParamBox::new(b.alpha_lo, b.alpha_hi, b.c_lo, b.c_hi)?;
        Ok(())
    }

    pub fn reps_for(&self, method: Method) -> usize {
        match method {
            Method::Mle => self.reps_mle,
            Method::Wlse { .. } => self.reps_wlse,
        }
    }

    fn thetas(&self) -> Result<Vec<ModelParams>> {
        self.validate()?;
        self.params
            .iter()
            .map(|&[a, c]| ModelParams::new(a, c))
            .collect()
    }

    /// Seed of row `r`; every estimator of a row sees the same experiments.
    fn row_seed(&self, r: usize) -> Seed {
        Seed(self.seed).child(r as u64)
    }
}

/// Rows that can be written as CSV.
pub trait CsvRecord {
    fn header() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

fn num(v: f64) -> String {
    format!("{v:.6e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Theoretical `sigma / sqrt(N)` for one parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdRow {
    pub alpha: f64,
    pub c: f64,
    /// `[alpha, c]`, from the inverse Fisher information.
    pub sd_mle: Option<[f64; 2]>,
    /// `[alpha, c]`, from the occupancy-weighted least-squares sandwich.
    pub sd_wlse: Option<[f64; 2]>,
    pub cov_mle: Option<CellMatrix2>,
    pub cov_wlse: Option<CellMatrix2>,
    pub error: Option<String>,
}

impl CsvRecord for StdRow {
    fn header() -> Vec<&'static str> {
        vec![
            "alpha",
            "c",
            "sd_mle_alpha",
            "sd_wlse_alpha",
            "sd_mle_c",
            "sd_wlse_c",
            "error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let pick = |v: Option<[f64; 2]>, d: usize| opt(v.map(|x| x[d]));
        vec![
            self.alpha.to_string(),
            self.c.to_string(),
            pick(self.sd_mle, 0),
            pick(self.sd_wlse, 0),
            pick(self.sd_mle, 1),
            pick(self.sd_wlse, 1),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Theoretical standard deviations for `N = n_paths` paths of length `length`.
/// Exact and deterministic; a singular row is reported, not fatal.
pub fn std_table(cfg: &StudyConfig) -> Result<Vec<StdRow>> {
    let thetas = cfg.thetas()?;
    if cfg.length < 3 {
        return Err(Error::InvalidArgument(
            "standard deviations need length >= 3".into(),
        ));
    }
    Ok(thetas
        .par_iter()
        .map(|theta| {
            let mle = mle_covariance(theta, cfg.length);
            let wlse = wlse_covariance(theta, cfg.length, WeightMode::Occupancy);
            let error = mle
                .as_ref()
                .err()
                .or(wlse.as_ref().err())
                .map(|e| e.to_string());
            StdRow {
                alpha: theta.alpha(),
                c: theta.c(),
                sd_mle: mle.as_ref().ok().map(|m| standard_errors(m, cfg.n_paths)),
                sd_wlse: wlse.as_ref().ok().map(|m| standard_errors(m, cfg.n_paths)),
                cov_mle: mle.ok(),
                cov_wlse: wlse.ok(),
                error,
            }
        })
        .collect())
}

/// Monte-Carlo accuracy of one estimator at one parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub alpha: f64,
    pub c: f64,
    pub method: Method,
    pub reps: usize,
    pub fitted: usize,
    pub failed: usize,
    pub not_converged: usize,
    pub boundary_hits: usize,
    /// `[alpha, c]`; absent when no replicate could be fitted.
    pub rmse: Option<[f64; 2]>,
    pub bias: Option<[f64; 2]>,
    pub d1: Option<[f64; 2]>,
    pub d9: Option<[f64; 2]>,
    #[serde(skip)]
    pub estimates: Vec<ModelParams>,
}

impl CsvRecord for MseRow {
    fn header() -> Vec<&'static str> {
        vec![
            "alpha",
            "c",
            "method",
            "reps",
            "fitted",
            "failed",
            "not_converged",
            "boundary_hits",
            "rmse_alpha",
            "rmse_c",
            "bias_alpha",
            "bias_c",
            "d1_alpha",
            "d9_alpha",
            "d1_c",
            "d9_c",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let pick = |v: Option<[f64; 2]>, d: usize| opt(v.map(|x| x[d]));
        vec![
            self.alpha.to_string(),
            self.c.to_string(),
            self.method.to_string(),
            self.reps.to_string(),
            self.fitted.to_string(),
            self.failed.to_string(),
            self.not_converged.to_string(),
            self.boundary_hits.to_string(),
            pick(self.rmse, 0),
            pick(self.rmse, 1),
            pick(self.bias, 0),
            pick(self.bias, 1),
            pick(self.d1, 0),
            pick(self.d9, 0),
            pick(self.d1, 1),
            pick(self.d9, 1),
        ]
    }
}

/// Root MSE, bias and deciles of `reps` fits for one row and method.
#[allow(clippy::too_many_arguments)]
pub fn mse_row(
    truth: &ModelParams,
    method: Method,
    reps: usize,
    n_paths: usize,
    n: usize,
    seed: Seed,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> MseRow {
    let fits = replicate_fits(truth, n_paths, n, reps, method, seed, bx, cfg);
    let mut row = MseRow {
        alpha: truth.alpha(),
        c: truth.c(),
        method,
        reps,
        fitted: 0,
        failed: 0,
        not_converged: 0,
        boundary_hits: 0,
        rmse: None,
        bias: None,
        d1: None,
        d9: None,
        estimates: Vec::new(),
    };
    for fit in fits {
        match fit {
            Ok(r) => {
                row.fitted += 1;
                row.not_converged += !r.converged as usize;
                row.boundary_hits += r.at_boundary as usize;
                row.estimates.push(r.theta_hat);
            }
            Err(_) => row.failed += 1,
        }
    }
    if row.estimates.is_empty() {
        return row;
    }
    let m = row.estimates.len() as f64;
    let t = truth.as_array();
    let mut rmse = [0.0; 2];
    let mut bias = [0.0; 2];
    let mut d1 = [0.0; 2];
    let mut d9 = [0.0; 2];
    for d in 0..2 {
        let mut v: Vec<f64> = row.estimates.iter().map(|p| p.as_array()[d]).collect();
        bias[d] = v.iter().map(|x| x - t[d]).sum::<f64>() / m;
        rmse[d] = (v.iter().map(|x| (x - t[d]).powi(2)).sum::<f64>() / m).sqrt();
        v.sort_by(f64::total_cmp);
        d1[d] = quantile(&v, 0.1);
        d9[d] = quantile(&v, 0.9);
    }
    row.rmse = Some(rmse);
    row.bias = Some(bias);
    row.d1 = Some(d1);
    row.d9 = Some(d9);
    row
}

/// [`mse_row`] for every pair and selected method. Row `r` simulates its
/// experiments from `seed.child(r)`, so the MLE experiments are the first
/// `reps_mle` of the least-squares ones.
pub fn mse_study(cfg: &StudyConfig) -> Result<Vec<MseRow>> {
    let thetas = cfg.thetas()?;
    let mut rows = Vec::new();
    for (r, theta) in thetas.iter().enumerate() {
        for &method in &cfg.methods {
            rows.push(mse_row(
                theta,
                method,
                cfg.reps_for(method),
                cfg.n_paths,
                cfg.length,
                cfg.row_seed(r),
                &cfg.param_box,
                &cfg.optimizer,
            ));
        }
    }
    Ok(rows)
}

/// Monte-Carlo interval over many experiments next to the bootstrap
/// interval of a single experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRow {
    pub alpha: f64,
    pub c: f64,
    pub method: Method,
    pub monte_carlo: Option<IntervalPair>,
    pub bootstrap: Option<IntervalPair>,
    pub error: Option<String>,
}

impl CsvRecord for CiRow {
    fn header() -> Vec<&'static str> {
        vec![
            "alpha",
            "c",
            "method",
            "mc_alpha_lo",
            "mc_alpha_hi",
            "boot_alpha_lo",
            "boot_alpha_hi",
            "mc_c_lo",
            "mc_c_hi",
            "boot_c_lo",
            "boot_c_hi",
            "error",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let end = |ci: &Option<IntervalPair>, alpha: bool, hi: bool| {
            opt(ci.map(|c| if alpha { c.alpha_ci } else { c.c_ci }[hi as usize]))
        };
        vec![
            self.alpha.to_string(),
            self.c.to_string(),
            self.method.to_string(),
            end(&self.monte_carlo, true, false),
            end(&self.monte_carlo, true, true),
            end(&self.bootstrap, true, false),
            end(&self.bootstrap, true, true),
            end(&self.monte_carlo, false, false),
            end(&self.monte_carlo, false, true),
            end(&self.bootstrap, false, false),
            end(&self.bootstrap, false, true),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Interval comparison for every pair and method. The bootstrap data set of
/// row `r` is simulated from `seed.child(r).child(u64::MAX)`, which no
/// Monte-Carlo experiment uses.
pub fn ci_study(cfg: &StudyConfig) -> Result<Vec<CiRow>> {
    let thetas = cfg.thetas()?;
    let mut rows = Vec::new();
    for (r, theta) in thetas.iter().enumerate() {
        let seed = cfg.row_seed(r);
        let data = simulate_paths(theta, cfg.n_paths, cfg.length, seed.child(u64::MAX))?;
        for &method in &cfg.methods {
            let (bx, opt) = (&cfg.param_box, &cfg.optimizer);
            let mc = monte_carlo_ci(
                theta,
                cfg.n_paths,
                cfg.length,
                cfg.reps_for(method),
                method,
                cfg.level,
                seed,
                bx,
                opt,
            );
            let boot = pivotal_ci(&data, method, cfg.bootstrap, cfg.level, seed, bx, opt);
            let error = mc
                .as_ref()
                .err()
                .or(boot.as_ref().err())
                .map(|e| e.to_string());
            rows.push(CiRow {
                alpha: theta.alpha(),
                c: theta.c(),
                method,
                monte_carlo: mc.ok().map(|m| m.interval),
                bootstrap: boot.ok().map(|b| b.interval),
                error,
            });
        }
    }
    Ok(rows)
}

/// Summary of `Z_n / n` over independent paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub alpha: f64,
    pub c: f64,
    pub length: usize,
    pub reps: usize,
    pub mean: f64,
    pub sd: f64,
    /// Kolmogorov-Smirnov distance to Beta(c, c); only for `alpha = 1`.
    pub ks_beta: Option<f64>,
    pub threshold: usize,
    /// Fraction of paths with `Q_n <= threshold`.
    pub selection_freq: f64,
}

impl CsvRecord for PhaseSummary {
    fn header() -> Vec<&'static str> {
        vec![
            "alpha",
            "c",
            "length",
            "reps",
            "mean",
            "sd",
            "ks_beta",
            "threshold",
            "selection_freq",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.alpha.to_string(),
            self.c.to_string(),
            self.length.to_string(),
            self.reps.to_string(),
            num(self.mean),
            num(self.sd),
            opt(self.ks_beta),
            self.threshold.to_string(),
            num(self.selection_freq),
        ]
    }
}

pub const MIN_PHASE_REPS: usize = 1000;

/// CDF of Beta(a, b) at `x`, clamped outside `[0, 1]`.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    checked_beta_reg(a, b, x).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// `sup_x |F_sample(x) - cdf(x)|` for a continuous reference `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    d
}

/// Empirical phase behaviour of `reps` paths of length `n`.
pub fn phase_check(
    params: &ModelParams,
    reps: usize,
    n: usize,
    seed: Seed,
    threshold: usize,
) -> Result<PhaseSummary> {
    if reps < MIN_PHASE_REPS {
        return Err(Error::InvalidArgument(format!(
            "phase checks need at least {MIN_PHASE_REPS} paths, got {reps}"
        )));
    }
    let paths = simulate_paths(params, reps, n, seed)?;
    let fractions: Vec<f64> = paths
        .final_counts()
        .iter()
        .map(|&z| z as f64 / n as f64)
        .collect();
    let m = reps as f64;
    let mean = fractions.iter().sum::<f64>() / m;
    let sd = (fractions.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let selected = paths
        .iter()
        .filter(|p| discarded_count(p) <= threshold)
        .count();
    let ks_beta = if params.alpha() == 1.0 {
        let c = params.c();
        beta_cdf(c, c, 0.5)?;
        Some(ks_statistic(&fractions, |x| {
            beta_cdf(c, c, x).unwrap_or(f64::NAN)
        }))
    } else {
        None
    };
    Ok(PhaseSummary {
        alpha: params.alpha(),
        c: params.c(),
        length: n,
        reps,
        mean,
        sd,
        ks_beta,
        threshold,
        selection_freq: selected as f64 / m,
    })
}

/// [`phase_check`] for every pair, paths of length `length`; row `r` uses
/// `seed.child(r)`.
pub fn phase_study(cfg: &StudyConfig) -> Result<Vec<PhaseSummary>> {
    let thetas = cfg.thetas()?;
    thetas
        .iter()
        .enumerate()
        .map(|(r, t)| {
            phase_check(
                t,
                cfg.phase_reps,
                cfg.length,
                cfg.row_seed(r),
                cfg.threshold,
            )
        })
        .collect()
}
