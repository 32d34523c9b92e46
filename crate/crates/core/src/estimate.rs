//! Minimum-contrast estimation of `(alpha, c)`.
//!
//! Every estimator minimizes `W(theta) = sum_cells w * G(p, f(theta, cell))`
//! over a box. With the Kullback contrast and occupancy weights `W` is
//! `-L_N / N`, so the MLE is a special case; the weighted least squares
//! estimators use `G(p, q) = (p - q)^2`.
//!
//! The search runs in `(ln alpha, ln c)`: a fixed log-spaced grid of starts,
//! each followed by a projected damped Newton descent with the exact
//! Hessian. The best local optimum wins; ties go to the smallest `(alpha, c)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::empirical::CellStats;
use crate::error::{Error, Result};
use crate::model::{logistic_pair, ModelParams};
use crate::simulate::PathSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

impl Default for ParamBox {
    fn default() -> Self {
        Self {
            alpha_lo: 0.05,
            alpha_hi: 20.0,
            c_lo: 0.05,
            c_hi: 500.0,
        }
    }
}

impl ParamBox {
    pub fn new(alpha_lo: f64, alpha_hi: f64, c_lo: f64, c_hi: f64) -> Result<Self> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi;
        if !ok(alpha_lo, alpha_hi) || !ok(c_lo, c_hi) {
            return Err(Error::InvalidArgument(format!(
                "invalid box [{alpha_lo}, {alpha_hi}] x [{c_lo}, {c_hi}]"
            )));
        }
        Ok(Self {
            alpha_lo,
            alpha_hi,
            c_lo,
            c_hi,
        })
    }

    pub fn contains(&self, p: &ModelParams) -> bool {
        (self.alpha_lo..=self.alpha_hi).contains(&p.alpha())
            && (self.c_lo..=self.c_hi).contains(&p.c())
    }
}

/// Cell weights `w_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// `w = a`
    Occupancy,
    /// `w = a / (p q)`; cells with `p` in `{0, 1}` are skipped.
    Efficient,
    /// `w = 1` on every visited cell.
    Unit,
}

/// Estimator selector. Serialized by name (`"mle"`, `"wlse-sym"`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    Mle,
    Wlse {
        weights: WeightMode,
        symmetrized: bool,
    },
}

impl Method {
    /// Occupancy-weighted, symmetrized least squares.
    pub const WLSE: Method = Method::Wlse {
        weights: WeightMode::Occupancy,
        symmetrized: true,
    };
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Mle => write!(f, "mle"),
            Method::Wlse {
                weights,
                symmetrized,
            } => {
                let base = match weights {
                    WeightMode::Occupancy => "wlse",
                    WeightMode::Efficient => "wlse-eff",
                    WeightMode::Unit => "wlse-unit",
                };
                if *symmetrized {
                    write!(f, "{base}-sym")
                } else {
                    write!(f, "{base}")
                }
            }
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, symmetrized) = match s.strip_suffix("-sym") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let weights = match base {
            "mle" if !symmetrized => return Ok(Method::Mle),
            "wlse" => WeightMode::Occupancy,
            "wlse-eff" => WeightMode::Efficient,
            "wlse-unit" => WeightMode::Unit,
            _ => return Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        };
        Ok(Method::Wlse {
            weights,
            symmetrized,
        })
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Starts per coordinate; the grid has `grid^2` points (or `grid` when
    /// one coordinate is fixed).
    pub grid: usize,
    pub max_iter: usize,
    /// Projected-gradient tolerance in log coordinates, relative to
    /// `max(1, |objective|)`.
    pub gtol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid: 5,
            max_iter: 200,
            gtol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_hat: ModelParams,
    pub method: Method,
    pub objective: f64,
    /// The winning local search met the gradient tolerance.
    pub converged: bool,
    pub n_restarts_used: usize,
    pub n_local_converged: usize,
    pub at_boundary: bool,
    /// Visited cells dropped because their efficient weight is infinite.
    pub skipped_cells: usize,
    /// Projected gradient norm at the solution, log coordinates.
    pub grad_norm: f64,
}

/// Per-cell divergence `G(p, q)` between an empirical frequency `p` and a
/// model probability `q`. `q_bar` is `1 - q` computed without cancellation.
pub trait Contrast: Sync {
    fn value(&self, p: f64, q: f64, q_bar: f64) -> f64;
    fn dq(&self, p: f64, q: f64, q_bar: f64) -> f64;
    fn dqq(&self, p: f64, q: f64, q_bar: f64) -> f64;

    /// `G` and its first two derivatives with respect to the log-odds of `q`.
    fn log_odds_derivs(&self, p: f64, eta: f64) -> [f64; 3] {
        let (q, q_bar) = logistic_pair(eta);
        let s = q * q_bar;
        let d1 = self.dq(p, q, q_bar);
        [
            self.value(p, q, q_bar),
            d1 * s,
            self.dqq(p, q, q_bar) * s * s + d1 * s * (q_bar - q),
        ]
    }
}

/// `-p ln q - (1 - p) ln(1 - q)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kullback;

impl Contrast for Kullback {
    fn value(&self, p: f64, q: f64, q_bar: f64) -> f64 {
        -p * q.ln() - (1.0 - p) * q_bar.ln()
    }

    fn dq(&self, p: f64, q: f64, q_bar: f64) -> f64 {
        -p / q + (1.0 - p) / q_bar
    }

    fn dqq(&self, p: f64, q: f64, q_bar: f64) -> f64 {
        p / (q * q) + (1.0 - p) / (q_bar * q_bar)
    }

    fn log_odds_derivs(&self, p: f64, eta: f64) -> [f64; 3] {
        // softplus(|eta|) = |eta| + ln(1 + e), softplus(-|eta|) = ln(1 + e)
        let e = (-eta.abs()).exp();
        let small = e / (1.0 + e);
        let tail = e.ln_1p();
        let (q, q_bar, sp_neg, sp_pos) = if eta >= 0.0 {
            (1.0 - small, small, tail, eta + tail)
        } else {
            (small, 1.0 - small, tail - eta, tail)
        };
        [p * sp_neg + (1.0 - p) * sp_pos, q - p, q * q_bar]
    }
}

/// `(p - q)^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredError;

impl Contrast for SquaredError {
    fn value(&self, p: f64, q: f64, _q_bar: f64) -> f64 {
        (p - q) * (p - q)
    }

    fn dq(&self, p: f64, q: f64, _q_bar: f64) -> f64 {
        2.0 * (q - p)
    }

    fn dqq(&self, _p: f64, _q: f64, _q_bar: f64) -> f64 {
        2.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    red: u32,
    green: u32,
    weight: f64,
    target: f64,
}

/// The empirical contrast `W_N` built from cell statistics.
#[derive(Debug, Clone)]
pub struct ContrastObjective<'c, C> {
    contrast: &'c C,
    terms: Vec<Term>,
    max_count: usize,
    skipped: usize,
}

#[derive(Debug, Clone, Copy)]
struct Derivs {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

impl<'c, C: Contrast> ContrastObjective<'c, C> {
    /// Unfolded (`symmetrized = false`) or folded objective. The folded form
    /// sums over `i <= k/2` with weight `w(k,i) + w(k,k-i)` against `ptilde`;
    /// a diagonal cell keeps its own weight, so for contrasts linear in `p`
    /// (Kullback) both forms have the same value, not just the same argmin.
    pub fn new(
        stats: &CellStats,
        contrast: &'c C,
        weights: WeightMode,
        symmetrized: bool,
    ) -> Result<Self> {
        let n = stats.n();
        let mut skipped = 0usize;
        let mut identifying = 0usize;
        let mut weight_of = |k: usize, i: usize| -> f64 {
            let a = stats.a(k, i);
            if a <= 0.0 {
                return 0.0;
            }
            match weights {
                WeightMode::Occupancy => a,
                WeightMode::Unit => 1.0,
                WeightMode::Efficient => {
                    let p = stats.p(k, i);
                    if p <= 0.0 || p >= 1.0 {
                        skipped += 1;
                        0.0
                    } else {
                        a / (p * (1.0 - p))
                    }
                }
            }
        };
        let mut terms = Vec::new();
        let mut visited_off_diagonal = 0usize;
        for k in 0..n {
            if symmetrized {
                for i in 0..=k / 2 {
                    let m = k - i;
                    let w_here = weight_of(k, i);
                    let w_mirror = if m == i { 0.0 } else { weight_of(k, m) };
                    if m != i && (stats.occupied(k, i) || stats.occupied(k, m)) {
                        visited_off_diagonal += 1;
                    }
                    let w = w_here + w_mirror;
                    if w > 0.0 {
                        identifying += (m != i) as usize;
                        terms.push(Term {
                            red: i as u32,
                            green: m as u32,
                            weight: w,
                            target: stats.ptilde(k, i),
                        });
                    }
                }
            } else {
                for i in 0..=k {
                    let w = weight_of(k, i);
                    if 2 * i != k && stats.occupied(k, i) {
                        visited_off_diagonal += 1;
                    }
                    if w > 0.0 {
                        identifying += (2 * i != k) as usize;
                        terms.push(Term {
                            red: i as u32,
                            green: (k - i) as u32,
                            weight: w,
                            target: stats.p(k, i),
                        });
                    }
                }
            }
        }
        if visited_off_diagonal == 0 {
            return Err(Error::EmptyData);
        }
        if identifying == 0 {
            return Err(match weights {
                WeightMode::Efficient => Error::DegenerateWeights,
                _ => Error::EmptyData,
            });
        }
        Ok(Self {
            contrast,
            terms,
            max_count: n,
            skipped,
        })
    }

    pub fn skipped_cells(&self) -> usize {
        self.skipped
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn value(&self, params: &ModelParams) -> f64 {
        self.value_at(params.alpha(), params.c())
    }

    /// Gradient with respect to `(alpha, c)`.
    pub fn gradient(&self, params: &ModelParams) -> [f64; 2] {
        self.derivs(params.alpha(), params.c()).grad
    }

    /// Hessian with respect to `(alpha, c)`.
    pub fn hessian(&self, params: &ModelParams) -> [[f64; 2]; 2] {
        self.derivs(params.alpha(), params.c()).hess
    }

    fn value_at(&self, alpha: f64, c: f64) -> f64 {
        let ln_shift: Vec<f64> = (0..self.max_count).map(|m| (c + m as f64).ln()).collect();
        let mut total = 0.0;
        for t in &self.terms {
            let eta = alpha * (ln_shift[t.red as usize] - ln_shift[t.green as usize]);
            total += t.weight * self.contrast.log_odds_derivs(t.target, eta)[0];
        }
        total
    }

    fn derivs(&self, alpha: f64, c: f64) -> Derivs {
        let ln_shift: Vec<f64> = (0..self.max_count).map(|m| (c + m as f64).ln()).collect();
        let inv_shift: Vec<f64> = (0..self.max_count).map(|m| 1.0 / (c + m as f64)).collect();
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        let mut hess = [[0.0; 2]; 2];
        for t in &self.terms {
            let (i, j) = (t.red as usize, t.green as usize);
            let log_ratio = ln_shift[i] - ln_shift[j];
            let eta = alpha * log_ratio;
            let [g0, g1, g2] = self.contrast.log_odds_derivs(t.target, eta);
            value += t.weight * g0;
            if i == j {
                continue;
            }
            // eta = alpha * L, L = ln(c+i) - ln(c+j)
            let dl_dc = inv_shift[i] - inv_shift[j];
            let d2l_dc2 = inv_shift[j] * inv_shift[j] - inv_shift[i] * inv_shift[i];
            let e_a = log_ratio;
            let e_c = alpha * dl_dc;
            let w1 = t.weight * g1;
            let w2 = t.weight * g2;
            grad[0] += w1 * e_a;
            grad[1] += w1 * e_c;
            hess[0][0] += w2 * e_a * e_a;
            hess[0][1] += w2 * e_a * e_c + w1 * dl_dc;
            hess[1][1] += w2 * e_c * e_c + w1 * alpha * d2l_dc2;
        }
        hess[1][0] = hess[0][1];
        Derivs { value, grad, hess }
    }

    /// Value, gradient and Hessian in `(ln alpha, ln c)`.
    fn log_derivs(&self, x: [f64; 2]) -> Derivs {
        let (alpha, c) = (x[0].exp(), x[1].exp());
        let d = self.derivs(alpha, c);
        let s = [alpha, c];
        let grad = [s[0] * d.grad[0], s[1] * d.grad[1]];
        let hess = [
            [
                s[0] * s[0] * d.hess[0][0] + grad[0],
                s[0] * s[1] * d.hess[0][1],
            ],
            [
                s[0] * s[1] * d.hess[0][1],
                s[1] * s[1] * d.hess[1][1] + grad[1],
            ],
        ];
        Derivs {
            value: d.value,
            grad,
            hess,
        }
    }
}

/// Search region in log coordinates; a fixed coordinate has `lo == hi`.
#[derive(Debug, Clone, Copy)]
struct LogBounds {
    lo: [f64; 2],
    hi: [f64; 2],
    /// Bounds on the natural scale, returned verbatim for boundary solutions.
    lo_raw: [f64; 2],
    hi_raw: [f64; 2],
}

impl LogBounds {
    fn from_box(b: &ParamBox) -> Self {
        Self {
            lo: [b.alpha_lo.ln(), b.c_lo.ln()],
            hi: [b.alpha_hi.ln(), b.c_hi.ln()],
            lo_raw: [b.alpha_lo, b.c_lo],
            hi_raw: [b.alpha_hi, b.c_hi],
        }
    }

    fn fix(&mut self, d: usize, value: f64) {
        self.lo[d] = value.ln();
        self.hi[d] = value.ln();
        self.lo_raw[d] = value;
        self.hi_raw[d] = value;
    }

    fn params_at(&self, x: [f64; 2]) -> Result<ModelParams> {
        let natural = |d: usize| {
            if x[d] <= self.lo[d] {
                self.lo_raw[d]
            } else if x[d] >= self.hi[d] {
                self.hi_raw[d]
            } else {
                x[d].exp()
            }
        };
        ModelParams::new(natural(0), natural(1))
    }

    fn free(&self, d: usize) -> bool {
        self.hi[d] > self.lo[d]
    }

    fn project(&self, x: [f64; 2]) -> [f64; 2] {
        [
            x[0].clamp(self.lo[0], self.hi[0]),
            x[1].clamp(self.lo[1], self.hi[1]),
        ]
    }

    fn projected_gradient(&self, x: [f64; 2], g: [f64; 2]) -> [f64; 2] {
        let mut pg = [0.0; 2];
        for d in 0..2 {
            if !self.free(d)
                || (x[d] <= self.lo[d] && g[d] > 0.0)
                || (x[d] >= self.hi[d] && g[d] < 0.0)
            {
                continue;
            }
            pg[d] = g[d];
        }
        pg
    }

    fn on_boundary(&self, x: [f64; 2]) -> bool {
        (0..2).any(|d| self.free(d) && (x[d] - self.lo[d] <= 1e-9 || self.hi[d] - x[d] <= 1e-9))
    }

    fn starts(&self, per_axis: usize) -> Vec<[f64; 2]> {
        let axis = |d: usize| -> Vec<f64> {
            if !self.free(d) {
                return vec![self.lo[d]];
            }
            (0..per_axis)
                .map(|g| {
                    self.lo[d] + (self.hi[d] - self.lo[d]) * (g as f64 + 0.5) / per_axis as f64
                })
                .collect()
        };
        let (xs, ys) = (axis(0), axis(1));
        xs.iter()
            .flat_map(|&a| ys.iter().map(move |&c| [a, c]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct LocalRun {
    x: [f64; 2],
    value: f64,
    grad_norm: f64,
    converged: bool,
}

fn inf_norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Newton direction on the free coordinates, Levenberg-shifted until the
/// reduced Hessian is positive definite.
fn newton_direction(h: [[f64; 2]; 2], pg: [f64; 2]) -> [f64; 2] {
    let active = [pg[0] != 0.0, pg[1] != 0.0];
    let scale = h[0][0].abs().max(h[1][1].abs()).max(1e-12);
    let mut mu = 0.0;
    for _ in 0..60 {
        let a = if active[0] { h[0][0] + mu } else { 1.0 };
        let d = if active[1] { h[1][1] + mu } else { 1.0 };
        let b = if active[0] && active[1] { h[0][1] } else { 0.0 };
        let det = a * d - b * b;
        if a > 0.0 && det > 0.0 {
            let dir0 = -(d * pg[0] - b * pg[1]) / det;
            let dir1 = -(a * pg[1] - b * pg[0]) / det;
            return [dir0, dir1];
        }
        mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 };
    }
    [-pg[0], -pg[1]]
}

/// Radius (log coordinates) inside which a run joins an earlier optimum.
const BASIN_RADIUS: f64 = 1e-2;

fn local_search<C: Contrast>(
    obj: &ContrastObjective<'_, C>,
    bounds: &LogBounds,
    start: [f64; 2],
    cfg: &OptimizerConfig,
    known: &[LocalRun],
) -> LocalRun {
    const MAX_STEP: f64 = 2.0;
    let mut x = bounds.project(start);
    let mut d = obj.log_derivs(x);
    let mut pg = bounds.projected_gradient(x, d.grad);
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        if !d.value.is_finite() {
            break;
        }
        let tol = cfg.gtol * d.value.abs().max(1.0);
        let newton = newton_direction(d.hess, pg);
        // A small gradient alone is not enough: on slopes that decay
        // exponentially towards the boundary the Newton step stays large.
        if inf_norm(pg) <= tol && inf_norm(newton) <= 1e-6 {
            converged = true;
            break;
        }
        let gradient = [-pg[0], -pg[1]];
        let mut moved = false;
        for dir in [newton, gradient] {
            let len = inf_norm(dir);
            let dir = if len > MAX_STEP {
                [dir[0] * MAX_STEP / len, dir[1] * MAX_STEP / len]
            } else {
                dir
            };
            let mut t = 1.0;
            for _ in 0..50 {
                let trial = bounds.project([x[0] + t * dir[0], x[1] + t * dir[1]]);
                let step = [trial[0] - x[0], trial[1] - x[1]];
                if inf_norm(step) == 0.0 {
                    break;
                }
                let slope = d.grad[0] * step[0] + d.grad[1] * step[1];
                let v = obj.value_at(trial[0].exp(), trial[1].exp());
                if v.is_finite()
                    && v <= d.value + 1e-4 * slope + 4.0 * f64::EPSILON * d.value.abs()
                    && slope < 0.0
                {
                    x = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if moved {
                break;
            }
        }
        if !moved {
            break;
        }
        if let Some(hit) = known
            .iter()
            .find(|r| inf_norm([x[0] - r.x[0], x[1] - r.x[1]]) < BASIN_RADIUS)
        {
            return *hit;
        }
        d = obj.log_derivs(x);
        pg = bounds.projected_gradient(x, d.grad);
    }
    if !converged && d.value.is_finite() {
        converged = inf_norm(pg) <= cfg.gtol * d.value.abs().max(1.0);
    }
    LocalRun {
        x,
        value: d.value,
        grad_norm: inf_norm(pg),
        converged,
    }
}

fn run_multistart<C: Contrast>(
    obj: &ContrastObjective<'_, C>,
    bounds: &LogBounds,
    cfg: &OptimizerConfig,
    method: Method,
) -> Result<EstimateResult> {
    if cfg.grid == 0 || cfg.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "optimizer grid and max_iter must be positive".into(),
        ));
    }
    let starts = bounds.starts(cfg.grid);
    // Sequential on purpose: a later run stops as soon as it enters the
    // basin of an optimum that is already known.
    let mut runs: Vec<LocalRun> = Vec::with_capacity(starts.len());
    let mut optima: Vec<LocalRun> = Vec::new();
    for &s in &starts {
        let run = local_search(obj, bounds, s, cfg, &optima);
        if run.converged && !optima.iter().any(|o| o.x == run.x) {
            optima.push(run);
        }
        runs.push(run);
    }
    let best = runs
        .iter()
        .filter(|r| r.value.is_finite())
        .min_by(|a, b| {
            let tie = 1e-12 * a.value.abs().max(b.value.abs()).max(1.0);
            if (a.value - b.value).abs() <= tie {
                a.x[0].total_cmp(&b.x[0]).then(a.x[1].total_cmp(&b.x[1]))
            } else {
                a.value.total_cmp(&b.value)
            }
        })
        .copied()
        .ok_or(Error::NonFinite)?;
    let theta_hat = bounds.params_at(best.x)?;
    Ok(EstimateResult {
        theta_hat,
        method,
        objective: best.value,
        converged: best.converged,
        n_restarts_used: runs.len(),
        n_local_converged: runs.iter().filter(|r| r.converged).count(),
        at_boundary: bounds.on_boundary(best.x),
        skipped_cells: obj.skipped_cells(),
        grad_norm: best.grad_norm,
    })
}

/// Minimizes the unfolded contrast `sum w * G(p, f(theta))` over `bx`.
pub fn minimize_contrast<C: Contrast>(
    stats: &CellStats,
    contrast: &C,
    weights: WeightMode,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    let obj = ContrastObjective::new(stats, contrast, weights, false)?;
    let method = Method::Wlse {
        weights,
        symmetrized: false,
    };
    run_multistart(&obj, &LogBounds::from_box(bx), cfg, method)
}

/// Fits `method` to precomputed statistics. `fixed_c` freezes `c`.
pub fn fit_stats(
    stats: &CellStats,
    method: Method,
    bx: &ParamBox,
    fixed_c: Option<f64>,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    let mut bounds = LogBounds::from_box(bx);
    if let Some(c) = fixed_c {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "fixed c must be positive, got {c}"
            )));
        }
        bounds.fix(1, c);
    }
    match method {
        Method::Mle => {
            // Kullback is linear in p: folding mirror cells is exact and halves the work.
            let obj = ContrastObjective::new(stats, &Kullback, WeightMode::Occupancy, true)?;
            run_multistart(&obj, &bounds, cfg, method)
        }
        Method::Wlse {
            weights,
            symmetrized,
        } => {
            let obj = ContrastObjective::new(stats, &SquaredError, weights, symmetrized)?;
            run_multistart(&obj, &bounds, cfg, method)
        }
    }
}

/// Maximum likelihood estimate over `bx`.
pub fn fit_mle(paths: &PathSet, bx: &ParamBox, cfg: &OptimizerConfig) -> Result<EstimateResult> {
    fit_stats(&CellStats::from_paths(paths), Method::Mle, bx, None, cfg)
}

/// Weighted least squares estimate, optionally in the symmetrized form.
pub fn fit_wlse(
    paths: &PathSet,
    weights: WeightMode,
    symmetrized: bool,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    fit_stats(
        &CellStats::from_paths(paths),
        Method::Wlse {
            weights,
            symmetrized,
        },
        bx,
        None,
        cfg,
    )
}

/// One-dimensional fit of `alpha` with `c` frozen at `c_fixed`.
pub fn profile_alpha(
    paths: &PathSet,
    c_fixed: f64,
    bx: &ParamBox,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    fit_stats(
        &CellStats::from_paths(paths),
        method,
        bx,
        Some(c_fixed),
        cfg,
    )
}

pub fn fit(
    paths: &PathSet,
    method: Method,
    bx: &ParamBox,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    fit_stats(&CellStats::from_paths(paths), method, bx, None, cfg)
}
