use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathlens::pareto::{default_grid, find_dominated, log_grid, read_front_csv};
use pathlens::{
    direct_path, exact_path, expected_cost_path, greedy_path, local_improvement, sweep, Error,
    LinearModel, Moments, OptimizerConfig, SolverKind, StepMode, SufficientStats, WeightSchedule,
};

mod render;

/// Coordinate-path explanations of linear models.
#[derive(Parser, Debug)]
#[command(name = "pathlens", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summarize the second moments and the least-squares fit.
    Stats,
    /// Compute a coordinate path with the chosen method.
    Path {
        #[arg(value_enum)]
        method: Method,
    },
    /// Find the most interpretable path to the model in FILE (model JSON).
    Explain { model: PathBuf },
    /// Sweep the tradeoff parameter and report the Pareto front.
    Pareto,
    /// Find a path minimizing the expected cost under --dist.
    ExpectedCost,
    /// Check that a front CSV contains no dominated point.
    Verify { front: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Greedy,
    Direct,
    Exact,
    Local,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Solver {
    Exact,
    Local,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Continuous,
    Unit,
}

#[derive(Args, Debug)]
struct Opts {
    /// Data CSV with a header row.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "moments")]
    input: Option<PathBuf>,
    /// Target column of the --input CSV.
    #[arg(long, global = true, value_name = "COLUMN")]
    target: Option<String>,
    /// Moments JSON: {"gram": [[..]], "cross": [..], "tsm": x, "names": [..]}.
    #[arg(long, global = true, value_name = "FILE")]
    moments: Option<PathBuf>,
    /// Use the CSV columns as they are instead of standardizing them.
    #[arg(long, global = true)]
    no_standardize: bool,
    /// Path length (maximum path length for explain and pareto).
    #[arg(long = "K", global = true, value_name = "K")]
    k: Option<usize>,
    /// Geometric schedule: step k weighs gamma^k.
    #[arg(long, global = true, conflicts_with_all = ["weights", "dist"])]
    gamma: Option<f64>,
    /// Explicit schedule, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1.., conflicts_with = "dist")]
    weights: Option<Vec<f64>>,
    /// Stopping distribution over steps 1..K, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    dist: Option<Vec<f64>>,
    /// Comma-separated values, or log:LO:HI:COUNT.
    #[arg(long, global = true, value_name = "SPEC")]
    lambda_grid: Option<String>,
    /// Local improvement batch size.
    #[arg(long, global = true, default_value_t = 1)]
    q: usize,
    /// Local improvement iterations.
    #[arg(long = "T", global = true, value_name = "T", default_value_t = 100)]
    t: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Base model JSON; features it omits start at zero.
    #[arg(long, global = true, value_name = "FILE")]
    base: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Continuous)]
    step_mode: Mode,
    /// Optimizer behind explain, pareto and expected-cost.
    #[arg(long, global = true, value_enum, default_value_t = Solver::Exact)]
    solver: Solver,
    /// Output file (JSON; pareto also writes a CSV next to it).
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Where exact and local paths must end: `ols` (the least-squares fit),
    /// `free`, or a model JSON file.
    #[arg(
        long,
        global = true,
        value_name = "ols|free|FILE",
        default_value = "ols"
    )]
    endpoint: String,
    /// Decimals in printed numbers.
    #[arg(long, global = true, default_value_t = 4)]
    precision: usize,
}

enum Failure {
    Config(String),
    Infeasible(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::BudgetExceeded { .. } => {
                Failure::Infeasible(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Violation(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Outcome<()> {
    let Ok(value) = std::env::var("PATHLENS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::Config(format!(
                "PATHLENS_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: &Cli) -> Outcome<String> {
    let o = &cli.opts;
    if let Command::Verify { front } = &cli.command {
        return verify(front);
    }
    let stats = load_stats(o)?;
    let base = match &o.base {
        Some(file) => load_model(file, &stats)?,
        None => stats.zero_model(),
    };
    let p = o.precision;
    match &cli.command {
        Command::Stats => {
            write_out(
                o,
                &serde_json::to_string_pretty(&stats.to_moments_doc()).expect("plain data"),
            )?;
            Ok(render::stats(&stats, &base, p)?)
        }
        Command::Path { method } => {
            let k = o.k.unwrap_or(2);
            let (path, note) = match method {
                Method::Greedy => (greedy_path(&stats, &base, k)?, String::new()),
                Method::Direct => (direct_path(&stats, &base, k)?, String::new()),
                Method::Exact | Method::Local => {
                    let mut cfg = optimizer(o, k)?;
                    cfg.endpoint = match o.endpoint.as_str() {
                        "free" => None,
                        "ols" => Some(stats.ols()),
                        file => Some(load_model(Path::new(file), &stats)?),
                    };
                    let sol = if *method == Method::Exact {
                        exact_path(&stats, &base, &cfg)?
                    } else {
                        local_improvement(&stats, &base, None, &cfg)?
                    };
                    (sol.path, format!("evaluations: {}\n", sol.evaluations))
                }
            };
            let schedule = schedule(o, path.len().max(1))?;
            write_out(o, &path.to_json())?;
            let mut text = render::path_table(&stats, &path, p)?;
            let loss = path.weighted_loss(&stats, &schedule)?;
            writeln!(text, "weighted loss: {}", render::num(loss, p)).unwrap();
            text += &note;
            Ok(text)
        }
        Command::Explain { model } => {
            let target = load_model(model, &stats)?;
            let k_max = match o.k {
                Some(k) => k,
                None => pathlens::model_complexity(&base, &target)?,
            };
            let cfg = optimizer(o, k_max)?;
            let e = pathlens::search::explain(&stats, &base, &target, &cfg, k_max, solver(o))?;
            write_out(o, &e.path.to_json())?;
            let mut text = render::path_table(&stats, &e.path, p)?;
            writeln!(text, "interpretability loss: {}", render::num(e.loss, p)).unwrap();
            Ok(text)
        }
        Command::Pareto => {
            let k_max = o.k.unwrap_or(3);
            let cfg = optimizer(o, k_max)?;
            let lambdas = match &o.lambda_grid {
                Some(spec) => parse_grid(spec)?,
                None => default_grid(),
            };
            let report = sweep(&stats, &base, &cfg, &lambdas, k_max, solver(o))?;
            if let Some(out) = &o.out {
                write_file(out, &report.to_json())?;
                write_file(&out.with_extension("csv"), &report.to_csv())?;
            }
            Ok(render::front(&report, p))
        }
        Command::ExpectedCost => {
            let dist = match (&o.dist, o.k) {
                (Some(d), _) => d.clone(),
                (None, Some(k)) if k > 0 => vec![1.0 / k as f64; k],
                _ => return Err(Failure::Config("expected-cost needs --dist or --K".into())),
            };
            let cfg = optimizer(o, dist.len())?;
            let r = expected_cost_path(&stats, &base, &dist, &cfg, solver(o))?;
            write_out(o, &r.path.to_json())?;
            let mut text = render::path_table(&stats, &r.path, p)?;
            writeln!(text, "expected cost: {}", render::num(r.expected_cost, p)).unwrap();
            Ok(text)
        }
        Command::Verify { .. } => unreachable!("handled above"),
    }
}

fn load_stats(o: &Opts) -> Outcome<SufficientStats> {
    match (&o.input, &o.moments) {
        (Some(file), None) => {
            let target = o
                .target
                .as_deref()
                .ok_or_else(|| Failure::Config("--input needs --target".into()))?;
            let data = pathlens::load_csv(file, target)?;
            let data = if o.no_standardize {
                data
            } else {
                data.standardize()?.0
            };
            Ok(SufficientStats::from_dataset(&data))
        }
        (None, Some(file)) => {
            if o.target.is_some() || o.no_standardize {
                return Err(Failure::Config(
                    "--target and --no-standardize apply to --input only".into(),
                ));
            }
            let doc: Moments = serde_json::from_str(&read_file(file)?)
                .map_err(|e| Failure::Config(format!("{}: {e}", file.display())))?;
            Ok(SufficientStats::from_moments_doc(&doc)?)
        }
        _ => Err(Failure::Config(
            "give exactly one of --input or --moments".into(),
        )),
    }
}

/// Reads a model JSON and lays it out over the features of `stats`.
fn load_model(file: &Path, stats: &SufficientStats) -> Outcome<LinearModel> {
    let model = LinearModel::from_json(&read_file(file)?)
        .map_err(|e| Failure::Config(format!("{}: {e}", file.display())))?;
    let mut coefficients = vec![0.0; stats.d()];
    for (name, &value) in model.feature_names().iter().zip(model.coefficients()) {
        coefficients[stats.feature_index(name)?] = value;
    }
    Ok(stats.model(coefficients)?)
}

fn schedule(o: &Opts, k: usize) -> Outcome<WeightSchedule> {
    let s = match (&o.gamma, &o.weights, &o.dist) {
        (Some(g), None, None) => WeightSchedule::geometric(*g)?,
        (None, Some(w), None) => WeightSchedule::explicit(w.clone())?,
        (None, None, Some(p)) => WeightSchedule::distribution(p.clone())?,
        (None, None, None) => WeightSchedule::geometric(1.0)?,
        _ => {
            return Err(Failure::Config(
                "give at most one of --gamma, --weights, --dist".into(),
            ))
        }
    };
    s.weights(k)?;
    Ok(s)
}

fn optimizer(o: &Opts, k: usize) -> Outcome<OptimizerConfig> {
    let mode = match o.step_mode {
        Mode::Continuous => StepMode::Continuous,
        Mode::Unit => StepMode::Unit,
    };
    Ok(OptimizerConfig::new(k, schedule(o, k.max(1))?)
        .with_step_mode(mode)
        .with_seed(o.seed)
        .with_batch(o.q)
        .with_iterations(o.t))
}

fn solver(o: &Opts) -> SolverKind {
    match o.solver {
        Solver::Exact => SolverKind::Exact,
        Solver::Local => SolverKind::Local,
    }
}

fn parse_grid(spec: &str) -> Outcome<Vec<f64>> {
    let bad = || Failure::Config(format!("cannot parse lambda grid {spec:?}"));
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(bad());
        };
        let lo = lo.parse().map_err(|_| bad())?;
        let hi = hi.parse().map_err(|_| bad())?;
        let count = count.parse().map_err(|_| bad())?;
        return Ok(log_grid(lo, hi, count)?);
    }
    spec.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn verify(front: &Path) -> Outcome<String> {
    let rows = read_front_csv(&read_file(front)?)?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.interp_loss, r.cost)).collect();
    match find_dominated(&points) {
        None => Ok(format!("ok: {} points, none dominated\n", rows.len())),
        Some((i, j)) => Err(Failure::Violation(format!(
            "violation: row {} (loss {}, cost {}) is dominated by row {} (loss {}, cost {})",
            i + 2,
            points[i].0,
            points[i].1,
            j + 2,
            points[j].0,
            points[j].1
        ))),
    }
}

fn read_file(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_out(o: &Opts, text: &str) -> Outcome<()> {
    match &o.out {
        Some(out) => write_file(out, text),
        None => Ok(()),
    }
}
