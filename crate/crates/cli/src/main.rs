//! `rrw`: simulate, fit and study two-parameter reinforced random walks.
//!
//! Exit codes: 0 success, 2 usage error, 1 data or numerical error.
//! `RRW_THREADS` sets the worker thread count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rrw_core::asymptotics::{fisher_info, mle_covariance, standard_errors, wlse_covariance};
use rrw_core::bootstrap::pivotal_ci;
use rrw_core::empirical::CellStats;
use rrw_core::estimate::{fit_stats, Method, OptimizerConfig, ParamBox, WeightMode};
use rrw_core::experiments::{ci_study, mse_study, phase_study, std_table, CsvRecord, StudyConfig};
use rrw_core::io::{
    read_paths, write_csv, write_estimates_csv, write_paths, ResultJson, TOOL_VERSION,
};
use rrw_core::simulate::simulate_paths;
use rrw_core::{CellMatrix2, Error, ModelParams, PathSet, Seed};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "rrw",
    version,
    about = "Reinforced random walks: simulation, estimation, asymptotics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate independent paths and write them as CSV.
    Simulate {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        c: f64,
        /// Number of paths N.
        #[arg(long)]
        paths: usize,
        /// Path length n.
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit (alpha, c) to a path file.
    Fit {
        #[command(flatten)]
        est: EstimatorArgs,
        /// Freeze c at this value and fit alpha only.
        #[arg(long)]
        fix_c: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Fisher information, its inverse and standard deviations.
    Fisher {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        paths: usize,
    },
    /// Pivotal bootstrap confidence intervals.
    Bootstrap {
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long = "B", default_value_t = 500)]
        b: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replicate estimates as CSV; defaults to `<out>.replicates.csv`.
        #[arg(long)]
        replicates: Option<PathBuf>,
    },
    /// Profile of alpha over a list of fixed c values, as CSV.
    Profile {
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        c_values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Batch studies driven by a TOML or JSON config.
    Study {
        kind: StudyKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long)]
    input: PathBuf,
    /// mle, wlse, wlse-eff or wlse-unit (a `-sym` suffix folds mirror cells).
    #[arg(long, default_value = "mle", value_parser = parse_method)]
    method: Method,
    #[arg(long)]
    symmetrized: bool,
    /// Parameter box `a_lo,a_hi,c_lo,c_hi`.
    #[arg(long = "box", value_parser = parse_box)]
    param_box: Option<ParamBox>,
}

impl EstimatorArgs {
    fn method(&self) -> Method {
        match self.method {
            Method::Wlse { weights, .. } if self.symmetrized => Method::Wlse {
                weights,
                symmetrized: true,
            },
            m => m,
        }
    }

    fn param_box(&self) -> ParamBox {
        self.param_box.unwrap_or_default()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    Std,
    Mse,
    Phase,
    Ci,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_box(s: &str) -> Result<ParamBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err(format!(
            "expected 4 comma-separated numbers, got {}",
            v.len()
        ));
    }
    ParamBox::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

/// Errors carry their exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::InvalidArgument(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: format!("error[{}]: {e}", e.code()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: format!("error[Io]: {}: {e}", path.display()),
    }
}

type CliResult<T> = Result<T, Failure>;

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn create(path: &Path) -> CliResult<fs::File> {
    fs::File::create(path).map_err(|e| io_failure(path, e))
}

fn load_paths(path: &Path) -> CliResult<PathSet> {
    read_paths(path).map_err(|e| match e {
        Error::Io(msg) => io_failure(path, msg),
        other => other.into(),
    })
}

/// Plug-in covariance of the estimate (`Sigma(theta_hat) / N`).
fn plug_in_covariance(
    method: Method,
    theta: &ModelParams,
    n: usize,
    n_paths: usize,
) -> Result<CellMatrix2, Error> {
    let cov = match method {
        Method::Mle => mle_covariance(theta, n)?,
        Method::Wlse { weights, .. } => wlse_covariance(theta, n, weights)?,
    };
    Ok(cov.scaled(1.0 / n_paths as f64))
}

fn print_estimate(r: &ResultJson) {
    println!("method      {}", r.method);
    println!("alpha_hat   {:.6}", r.theta_hat.alpha);
    println!("c_hat       {:.6}", r.theta_hat.c);
    println!("objective   {:.10e}", r.objective);
    println!("converged   {}", r.converged);
    println!("at_boundary {}", r.at_boundary);
    if let Some(c) = r.covariance {
        println!(
            "std error   alpha {:.3e}  c {:.3e}",
            c[0][0].sqrt(),
            c[1][1].sqrt()
        );
    }
}

fn run_simulate(
    alpha: f64,
    c: f64,
    n_paths: usize,
    length: usize,
    seed: u64,
    out: &Path,
) -> CliResult<()> {
    let theta = ModelParams::new(alpha, c)?;
    let paths = simulate_paths(&theta, n_paths, length, Seed(seed))?;
    write_paths(out, &paths).map_err(|e| io_failure(out, e))?;
    let reds: usize = paths.final_counts().iter().sum();
    println!(
        "wrote {n_paths} paths of length {length} to {} (red share {:.4})",
        out.display(),
        reds as f64 / (n_paths * length) as f64
    );
    Ok(())
}

fn run_fit(est: &EstimatorArgs, fix_c: Option<f64>, out: Option<&Path>) -> CliResult<()> {
    let paths = load_paths(&est.input)?;
    let method = est.method();
    let r = fit_stats(
        &CellStats::from_paths(&paths),
        method,
        &est.param_box(),
        fix_c,
        &OptimizerConfig::default(),
    )?;
    let mut json = ResultJson::from_estimate(&r);
    json.note("n_paths", paths.n_paths());
    json.note("length", paths.len());
    if let Some(c) = fix_c {
        json.note("fixed_c", c);
    } else {
        match plug_in_covariance(method, &r.theta_hat, paths.len(), paths.n_paths()) {
            Ok(cov) => json = json.with_covariance(&cov),
            Err(e) => json.note("covariance_error", e.code()),
        }
    }
    print_estimate(&json);
    if let Some(out) = out {
        write_text(out, &json.to_json()?)?;
    }
    Ok(())
}

fn print_matrix(name: &str, m: &CellMatrix2) {
    println!("{name}");
    println!("  [{:>14.6e} {:>14.6e}]", m.aa, m.ac);
    println!("  [{:>14.6e} {:>14.6e}]", m.ac, m.cc);
}

fn run_fisher(alpha: f64, c: f64, length: usize, n_paths: usize) -> CliResult<()> {
    if n_paths == 0 {
        return Err(Error::InvalidArgument("--paths must be positive".into()).into());
    }
    let theta = ModelParams::new(alpha, c)?;
    let info = fisher_info(&theta, length);
    println!("alpha = {alpha}, c = {c}, n = {length}, N = {n_paths}");
    print_matrix("Fisher information I_n", &info);
    match mle_covariance(&theta, length) {
        Ok(inv) => {
            print_matrix("inverse I_n^-1", &inv);
            let [sa, sc] = standard_errors(&inv, n_paths);
            println!("MLE  sigma_alpha/sqrt(N) = {sa:.2e}   sigma_c/sqrt(N) = {sc:.2e}");
        }
        Err(e) => println!("inverse I_n^-1: {e}"),
    }
    if let Ok(cov) = wlse_covariance(&theta, length, WeightMode::Occupancy) {
        let [sa, sc] = standard_errors(&cov, n_paths);
        println!("WLSE sigma_alpha/sqrt(N) = {sa:.2e}   sigma_c/sqrt(N) = {sc:.2e}");
    }
    Ok(())
}

fn replicates_path(out: Option<&Path>, explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| out.map(|o| o.with_extension("replicates.csv")))
}

fn run_bootstrap(
    est: &EstimatorArgs,
    b: usize,
    level: f64,
    seed: u64,
    out: Option<&Path>,
    replicates: Option<&Path>,
) -> CliResult<()> {
    let paths = load_paths(&est.input)?;
    let method = est.method();
    let run = pivotal_ci(
        &paths,
        method,
        b,
        level,
        Seed(seed),
        &est.param_box(),
        &OptimizerConfig::default(),
    )?;
    let mut json = ResultJson::from_estimate(&run.estimate)
        .with_interval(&run.interval)
        .with_seed(seed);
    let d = run.interval.diagnostics;
    json.note("bootstrap_replicates", d.requested);
    json.note("replicates_converged", d.converged);
    json.note("replicates_failed", d.failed);
    json.note("replicate_boundary_hits", d.boundary_hits);
    json.note("clipped_alpha", d.clipped_alpha);
    json.note("clipped_c", d.clipped_c);
    print_estimate(&json);
    let ci = run.interval;
    println!("{:.0}% pivotal interval, B = {b}", 100.0 * level);
    println!("  alpha ({:.4}, {:.4})", ci.alpha_ci[0], ci.alpha_ci[1]);
    println!("  c     ({:.4}, {:.4})", ci.c_ci[0], ci.c_ci[1]);
    if let Some(out) = out {
        write_text(out, &json.to_json()?)?;
    }
    if let Some(rep) = replicates_path(out, replicates) {
        write_estimates_csv(create(&rep)?, &run.replicates)?;
    }
    Ok(())
}

fn run_profile(est: &EstimatorArgs, c_values: &[f64], out: Option<&Path>) -> CliResult<()> {
    let paths = load_paths(&est.input)?;
    let stats = CellStats::from_paths(&paths);
    let (method, bx, cfg) = (est.method(), est.param_box(), OptimizerConfig::default());
    let mut text = String::from("c,alpha_hat,objective,at_boundary\n");
    for &c in c_values {
        let r = fit_stats(&stats, method, &bx, Some(c), &cfg)?;
        text.push_str(&format!(
            "{c},{},{},{}\n",
            r.theta_hat.alpha(),
            r.objective,
            r.at_boundary
        ));
    }
    match out {
        Some(out) => write_text(out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> CliResult<StudyConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let usage = |msg: String| Failure {
        code: 2,
        message: format!("error[InvalidArgument]: {}: {msg}", path.display()),
    };
    let cfg: StudyConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| usage(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| usage(e.to_string()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit<R: CsvRecord + serde::Serialize>(
    dir: &Path,
    name: &str,
    cfg: &StudyConfig,
    rows: &[R],
) -> CliResult<()> {
    let csv_path = dir.join(format!("{name}.csv"));
    write_csv(create(&csv_path)?, rows)?;
    let report =
        json!({ "study": name, "tool_version": TOOL_VERSION, "config": cfg, "rows": rows });
    let json_path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(&report).map_err(|e| io_failure(&json_path, e))?;
    write_text(&json_path, &text)?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn run_study(kind: StudyKind, config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load_config(config)?;
    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    match kind {
        StudyKind::Std => {
            let rows = std_table(&cfg)?;
            for r in &rows {
                let f = |v: Option<[f64; 2]>, d: usize| {
                    v.map_or("-".to_string(), |x| format!("{:.3e}", x[d]))
                };
                println!(
                    "({}, {})  alpha: MLE {} WLSE {}   c: MLE {} WLSE {}",
                    r.alpha,
                    r.c,
                    f(r.sd_mle, 0),
                    f(r.sd_wlse, 0),
                    f(r.sd_mle, 1),
                    f(r.sd_wlse, 1)
                );
            }
            emit(out, "std", &cfg, &rows)
        }
        StudyKind::Mse => {
            let rows = mse_study(&cfg)?;
            let scatter = out.join("mse_estimates.csv");
            let mut w = create(&scatter)?;
            let mut text = String::from("alpha,c,method,alpha_hat,c_hat\n");
            for r in &rows {
                for e in &r.estimates {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.alpha,
                        r.c,
                        r.method,
                        e.alpha(),
                        e.c()
                    ));
                }
            }
            w.write_all(text.as_bytes())
                .map_err(|e| io_failure(&scatter, e))?;
            emit(out, "mse", &cfg, &rows)
        }
        StudyKind::Phase => emit(out, "phase", &cfg, &phase_study(&cfg)?),
        StudyKind::Ci => emit(out, "ci", &cfg, &ci_study(&cfg)?),
    }
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("RRW_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure {
            code: 2,
            message: format!(
                "error[InvalidArgument]: RRW_THREADS must be a positive integer, got '{v}'"
            ),
        })?;
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate {
            alpha,
            c,
            paths,
            length,
            seed,
            out,
        } => run_simulate(alpha, c, paths, length, seed, &out),
        Command::Fit { est, fix_c, out } => run_fit(&est, fix_c, out.as_deref()),
        Command::Fisher {
            alpha,
            c,
            length,
            paths,
        } => run_fisher(alpha, c, length, paths),
        Command::Bootstrap {
            est,
            b,
            level,
            seed,
            out,
            replicates,
        } => run_bootstrap(&est, b, level, seed, out.as_deref(), replicates.as_deref()),
        Command::Profile { est, c_values, out } => run_profile(&est, &c_values, out.as_deref()),
        Command::Study { kind, config, out } => run_study(kind, &config, &out),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
