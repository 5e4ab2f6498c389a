//! Command-line harness: configures problem/schedule/averaging combinations,
//! executes runs, and emits machine-readable traces and verdicts.
//!
//! Exit statuses: 0 success, 1 usage error, 2 invariant or bound violation,
//! 3 numeric failure (non-finite oracle values or weight overflow).

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgAction, Args, Parser, Subcommand};

use psg_core::{
    make_l1_distance, make_l1_regression, make_linf_distance, make_piecewise_linear_max, run,
    sqrt_decay_mean_rate, step_weighted_log_rate, BoundAccumulator, Error, FeasibleSet,
    ProblemInstance, RunOptions, SolverTrace, StepSchedule, StridePolicy, Vector, BOUND_REL_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Absolute slack on the best-iterate-vs-averages cross check.
const MIN_DOM_ABS_TOL: f64 = 1e-12;

/// Maps library errors onto the exit-status contract.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::OracleFailure { .. } | Error::WeightOverflow { .. } => EXIT_NUMERIC,
        Error::InvariantViolation { .. } => EXIT_VIOLATION,
        _ => EXIT_USAGE,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "psg",
    version,
    about = "Projected subgradient runs with weighted ergodic averaging and rate certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)] // constructed once at startup
pub enum Command {
    /// Execute a solver run and emit a CSV trace plus a summary
    Run(RunArgs),
    /// Tabulate the closed-form rates side by side over a grid of t values
    CompareBounds(CompareArgs),
    /// Validate a custom schedule file (positive, non-increasing)
    ValidateSchedule(ValidateArgs),
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// l1-distance | linf-distance | piecewise-max | l1-regression
    #[arg(long)]
    pub problem: Option<String>,
    /// Problem dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of affine pieces (piecewise-max only)
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of residual rows (l1-regression only)
    #[arg(long)]
    pub rows: Option<usize>,
    /// Seed for the instance generator (ChaCha8)
    #[arg(long)]
    pub seed: Option<u64>,
    /// box | box:LO:HI | ball | ball:RADIUS | simplex | simplex:SCALE
    #[arg(long)]
    pub set: Option<String>,
    /// sqrt-decay | constant | custom:PATH
    #[arg(long)]
    pub schedule: Option<String>,
    /// Number of solver steps
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Averaging exponent; repeatable, each >= -1
    #[arg(long = "k", value_name = "K", allow_hyphen_values = true)]
    pub k: Vec<f64>,
    /// Check the per-iteration certificate inequality online
    #[arg(long, action = ArgAction::SetTrue)]
    pub check_invariants: bool,
    /// full | auto | N (log every N-th iteration)
    #[arg(long)]
    pub stride: Option<String>,
    /// Trace CSV destination (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Start point as comma-separated coordinates (projected onto the set);
    /// defaults to the projection of the origin
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    /// key=value defaults file; explicit flags win on conflict
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    /// Comma-separated prefix lengths
    #[arg(long = "t-grid", default_value = "10,100,1000,10000,100000,1000000")]
    pub t_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Custom schedule file: one positive decimal per line
    #[arg(long)]
    pub file: PathBuf,
    /// Horizon to validate over (defaults to the file length)
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    L1Distance,
    LinfDistance,
    PiecewiseMax,
    L1Regression,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Box { lo: f64, hi: f64 },
    Ball { radius: f64 },
    Simplex { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    SqrtDecay,
    Constant,
    Custom(PathBuf),
}

/// Fully resolved run configuration (flags merged over config-file values
/// merged over defaults).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub n: usize,
    pub m: Option<usize>,
    pub rows: Option<usize>,
    pub seed: u64,
    pub set: SetSpec,
    pub schedule: ScheduleKind,
    pub horizon: usize,
    pub ks: Vec<f64>,
    pub check_invariants: bool,
    pub stride: StridePolicy,
    pub out: Option<PathBuf>,
    pub start: Option<Vec<f64>>,
}

fn usage(msg: impl Into<String>) -> String {
    msg.into()
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    match s {
        "l1-distance" => Ok(ProblemKind::L1Distance),
        "linf-distance" => Ok(ProblemKind::LinfDistance),
        "piecewise-max" | "piecewise-linear-max" => Ok(ProblemKind::PiecewiseMax),
        "l1-regression" => Ok(ProblemKind::L1Regression),
        other => Err(usage(format!(
            "unknown problem {other:?}; expected l1-distance, linf-distance, \
             piecewise-max or l1-regression"
        ))),
    }
}

fn parse_set(s: &str) -> Result<SetSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = |detail: &str| Err(usage(format!("invalid --set {s:?}: {detail}")));
    match parts[0] {
        "box" => match parts.len() {
            1 => Ok(SetSpec::Box { lo: -1.0, hi: 1.0 }),
            3 => {
                let lo: f64 = match parts[1].parse() {
                    Ok(v) => v,
                    Err(_) => return bad("lo is not a number"),
                };
                let hi: f64 = match parts[2].parse() {
                    Ok(v) => v,
                    Err(_) => return bad("hi is not a number"),
                };
                Ok(SetSpec::Box { lo, hi })
            }
            _ => bad("expected box or box:LO:HI"),
        },
        "ball" => match parts.len() {
            1 => Ok(SetSpec::Ball { radius: 1.0 }),
            2 => match parts[1].parse() {
                Ok(radius) => Ok(SetSpec::Ball { radius }),
                Err(_) => bad("radius is not a number"),
            },
            _ => bad("expected ball or ball:RADIUS"),
        },
        "simplex" => match parts.len() {
            1 => Ok(SetSpec::Simplex { scale: 1.0 }),
            2 => match parts[1].parse() {
                Ok(scale) => Ok(SetSpec::Simplex { scale }),
                Err(_) => bad("scale is not a number"),
            },
            _ => bad("expected simplex or simplex:SCALE"),
        },
        _ => bad("expected box, ball or simplex"),
    }
}

fn parse_schedule(s: &str) -> Result<ScheduleKind, String> {
    match s {
        "sqrt-decay" => Ok(ScheduleKind::SqrtDecay),
        "constant" => Ok(ScheduleKind::Constant),
        other => match other.strip_prefix("custom:") {
            Some(path) if !path.is_empty() => Ok(ScheduleKind::Custom(PathBuf::from(path))),
            _ => Err(usage(format!(
                "unknown schedule {other:?}; expected sqrt-decay, constant or custom:PATH"
            ))),
        },
    }
}

fn parse_stride(s: &str) -> Result<StridePolicy, String> {
    match s {
        "full" => Ok(StridePolicy::Full),
        "auto" => Ok(StridePolicy::Auto),
        other => match other.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(StridePolicy::EveryN(n)),
            _ => Err(usage(format!(
                "invalid --stride {other:?}; expected full, auto or a positive integer"
            ))),
        },
    }
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid {what} entry {p:?}")))
        })
        .collect()
}

/// Parses the plain `key=value` config-file format. Blank lines and lines
/// starting with `#` are ignored.
fn parse_config_file(text: &str) -> Result<HashMap<String, String>, String> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
            None => {
                return Err(usage(format!(
                    "config line {}: expected key=value, got {line:?}",
                    i + 1
                )))
            }
        }
    }
    Ok(map)
}

const CONFIG_KEYS: &[&str] = &[
    "problem",
    "n",
    "m",
    "rows",
    "seed",
    "set",
    "schedule",
    "horizon",
    "k",
    "check-invariants",
    "stride",
    "out",
    "start",
];

/// Resolves flags over config-file values over defaults.
pub fn resolve_run_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let file_map = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            let map = parse_config_file(&text)?;
            if let Some(bad) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
                return Err(usage(format!("config: unknown key {bad:?}")));
            }
            map
        }
        None => HashMap::new(),
    };
    let from_file = |key: &str| file_map.get(key).map(String::as_str);

    let problem = match args.problem.as_deref().or_else(|| from_file("problem")) {
        Some(s) => parse_problem(s)?,
        None => ProblemKind::L1Distance,
    };
    let parse_usize = |key: &'static str, flag: Option<usize>| -> Result<Option<usize>, String> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match from_file(key) {
                Some(s) => s
                    .parse::<usize>()
                    .map(Some)
                    .map_err(|_| usage(format!("config {key}: invalid integer {s:?}"))),
                None => Ok(None),
            },
        }
    };
    let n = parse_usize("n", args.n)?.unwrap_or(10);
    let m = parse_usize("m", args.m)?;
    let rows = parse_usize("rows", args.rows)?;
    let horizon = parse_usize("horizon", args.horizon)?.unwrap_or(1000);
    if horizon < 1 {
        return Err(usage("horizon must be at least 1"));
    }
    if n < 1 {
        return Err(usage("n must be at least 1"));
    }

    let seed = match args.seed {
        Some(v) => v,
        None => match from_file("seed") {
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| usage(format!("config seed: invalid integer {s:?}")))?,
            None => 0,
        },
    };

    let set = match args.set.as_deref().or_else(|| from_file("set")) {
        Some(s) => parse_set(s)?,
        None => SetSpec::Box { lo: -1.0, hi: 1.0 },
    };
    let schedule = match args.schedule.as_deref().or_else(|| from_file("schedule")) {
        Some(s) => parse_schedule(s)?,
        None => ScheduleKind::SqrtDecay,
    };
    let ks = if !args.k.is_empty() {
        args.k.clone()
    } else if let Some(s) = from_file("k") {
        parse_f64_list(s, "k")?
    } else {
        vec![0.0]
    };
    if ks.is_empty() {
        return Err(usage("at least one k is required"));
    }
    for &k in &ks {
        if !(k.is_finite() && k >= -1.0) {
            return Err(usage(format!("k must be >= -1, got {k}")));
        }
    }

    let check_invariants = args.check_invariants
        || match from_file("check-invariants") {
            Some("true") | Some("1") => true,
            Some("false") | Some("0") | None => false,
            Some(other) => {
                return Err(usage(format!(
                    "config check-invariants: expected true/false, got {other:?}"
                )))
            }
        };
    let stride = match args.stride.as_deref().or_else(|| from_file("stride")) {
        Some(s) => parse_stride(s)?,
        None => StridePolicy::Auto,
    };
    let out = args
        .out
        .clone()
        .or_else(|| from_file("out").map(PathBuf::from));
    let start = match args.start.as_deref().or_else(|| from_file("start")) {
        Some(s) => Some(parse_f64_list(s, "start")?),
        None => None,
    };

    Ok(ExperimentConfig {
        problem,
        n,
        m,
        rows,
        seed,
        set,
        schedule,
        horizon,
        ks,
        check_invariants,
        stride,
        out,
        start,
    })
}

fn build_set(spec: &SetSpec, n: usize) -> Result<FeasibleSet, Error> {
    match *spec {
        SetSpec::Box { lo, hi } => FeasibleSet::uniform_box(n, lo, hi),
        SetSpec::Ball { radius } => FeasibleSet::ball(Vector::zeros(n), radius),
        SetSpec::Simplex { scale } => FeasibleSet::simplex(n, scale),
    }
}

/// Instantiates the configured problem. Distance problems center at the
/// box midpoint; the constructed problems place their optimum at the set's
/// canonical interior point.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<ProblemInstance, String> {
    let set = build_set(&cfg.set, cfg.n).map_err(|e| e.to_string())?;
    let result = match cfg.problem {
        ProblemKind::L1Distance | ProblemKind::LinfDistance => {
            let (lo, hi) = match cfg.set {
                SetSpec::Box { lo, hi } => (lo, hi),
                _ => {
                    return Err(usage(
                        "l1-distance and linf-distance require a box feasible set",
                    ))
                }
            };
            let c = set.interior_point();
            if cfg.problem == ProblemKind::L1Distance {
                make_l1_distance(cfg.n, &c, lo, hi)
            } else {
                make_linf_distance(cfg.n, &c, lo, hi)
            }
        }
        ProblemKind::PiecewiseMax => {
            let m = cfg.m.unwrap_or(2 * cfg.n + 2);
            let x_star = set.interior_point();
            make_piecewise_linear_max(cfg.n, m, cfg.seed, &x_star, 0.0, &set)
        }
        ProblemKind::L1Regression => {
            let rows = cfg.rows.unwrap_or(2 * cfg.n);
            make_l1_regression(rows, cfg.n, cfg.seed, &set)
        }
    };
    result.map_err(|e| e.to_string())
}

fn build_schedule(
    cfg: &ExperimentConfig,
    problem: &ProblemInstance,
) -> Result<StepSchedule, Error> {
    match &cfg.schedule {
        ScheduleKind::SqrtDecay => StepSchedule::sqrt_decay(problem.radius, problem.lipschitz),
        ScheduleKind::Constant => {
            StepSchedule::constant(problem.radius, problem.lipschitz, cfg.horizon)
        }
        ScheduleKind::Custom(path) => StepSchedule::from_file(path),
    }
}

/// 17-significant-digit decimal form; round-trips any f64 exactly.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn clamp0(v: f64) -> f64 {
    v.max(0.0)
}

fn stride_label(stride: StridePolicy) -> String {
    match stride {
        StridePolicy::Full => "full".into(),
        StridePolicy::Auto => "auto".into(),
        StridePolicy::EveryN(n) => format!("every:{n}"),
    }
}

/// Renders the trace CSV: `#`-prefixed header metadata, a column header, and
/// one row per logged iteration. Gaps are clamped at zero for reporting.
pub fn render_trace_csv(
    problem: &ProblemInstance,
    schedule: &StepSchedule,
    cfg: &ExperimentConfig,
    trace: &SolverTrace,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# instance={}", problem.descriptor);
    let _ = writeln!(out, "# dimension={}", problem.dimension);
    let _ = writeln!(out, "# R={}", full(problem.radius));
    let _ = writeln!(out, "# L={}", full(problem.lipschitz));
    let _ = writeln!(out, "# f_star={}", full(problem.f_star));
    let _ = writeln!(out, "# schedule={}", schedule.label());
    let ks: Vec<String> = trace.ks.iter().map(|k| format!("{k}")).collect();
    let _ = writeln!(out, "# ks={}", ks.join(","));
    match problem.seed {
        Some(seed) => {
            let _ = writeln!(out, "# seed={seed}");
        }
        None => {
            let _ = writeln!(out, "# seed=none");
        }
    }
    let start = match &cfg.start {
        Some(coords) => coords
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(","),
        None => "origin-projection".into(),
    };
    let _ = writeln!(out, "# start={start}");
    let _ = writeln!(out, "# stride={}", stride_label(cfg.stride));
    let _ = writeln!(out, "# check_invariants={}", cfg.check_invariants);
    let _ = writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"));

    let mut header = String::from("s,eta,f_x,gap_min");
    for k in &trace.ks {
        let _ = write!(header, ",gap_avg(k={k}),bound(k={k})");
    }
    let _ = writeln!(out, "{header}");

    for row in &trace.rows {
        let _ = write!(
            out,
            "{},{},{},{}",
            row.s,
            full(row.eta),
            full(row.f_x),
            full(clamp0(row.gap_min))
        );
        for (gap, bound) in row.gap_avg.iter().zip(row.bound.iter()) {
            let _ = write!(out, ",{},{}", full(clamp0(*gap)), full(*bound));
        }
        out.push('\n');
    }
    out
}

/// Decides the verdict for a completed run: any certificate exceeded beyond
/// relative slack, or the best iterate losing to every average beyond
/// absolute slack, is a violation.
pub fn trace_verdict(trace: &SolverTrace) -> Result<(), String> {
    if let Some(m) = trace.summary.max_bound_margin {
        // recover the bound at that row to apply the relative tolerance
        let row = trace
            .rows
            .iter()
            .find(|r| r.s == m.s)
            .expect("margin points at a logged row");
        let idx = trace.ks.iter().position(|&k| k == m.k).expect("known k");
        let bound = row.bound[idx];
        if m.value > BOUND_REL_TOL * bound.abs() {
            return Err(format!(
                "gap exceeded certificate at s={} k={} by {:e}",
                m.s, m.k, m.value
            ));
        }
    }
    if let Some(m) = trace.summary.max_min_dom_margin {
        if m.value > MIN_DOM_ABS_TOL {
            return Err(format!(
                "best iterate above every weighted value mean at s={} by {:e}",
                m.s, m.value
            ));
        }
    }
    Ok(())
}

/// Renders the human-readable run summary.
pub fn render_summary(
    problem: &ProblemInstance,
    trace: &SolverTrace,
    verdict: &Result<(), String>,
) -> String {
    let mut out = String::new();
    let s = &trace.summary;
    let _ = writeln!(out, "instance: {}", problem.descriptor);
    let _ = writeln!(out, "horizon: {}", s.horizon);
    let _ = writeln!(out, "rows_logged: {}", trace.rows.len());
    let _ = writeln!(out, "gap_min_final: {}", full(clamp0(s.final_gap_min)));
    for (i, k) in trace.ks.iter().enumerate() {
        let _ = writeln!(out, "final_gap(k={k}): {}", full(clamp0(s.final_gap[i])));
        let _ = writeln!(out, "final_bound(k={k}): {}", full(s.final_bound[i]));
    }
    if let Some(m) = s.max_bound_margin {
        let _ = writeln!(
            out,
            "max_bound_margin: {:.3e} (s={}, k={})",
            m.value, m.s, m.k
        );
    }
    if let Some(m) = s.max_min_dom_margin {
        let _ = writeln!(out, "max_min_dom_margin: {:.3e} (s={})", m.value, m.s);
    }
    if let Some(m) = s.max_proof_residual {
        let _ = writeln!(out, "max_proof_residual: {:.3e} (s={})", m.value, m.s);
    }
    match verdict {
        Ok(()) => {
            let _ = writeln!(out, "verdict: ok");
        }
        Err(detail) => {
            let _ = writeln!(out, "verdict: violation ({detail})");
        }
    }
    out
}

/// Executes a resolved run config end to end. Returns the exit status; the
/// trace CSV goes to `cfg.out` (or stdout) and the summary to stdout (or
/// stderr when the trace occupies stdout).
pub fn run_experiment(cfg: &ExperimentConfig) -> i32 {
    let problem = match build_problem(cfg) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let schedule = match build_schedule(cfg, &problem) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let options = RunOptions {
        start: cfg.start.as_ref().map(|v| Vector::from_vec(v.clone())),
        check_invariants: cfg.check_invariants,
        stride: cfg.stride,
    };
    if let Some(start) = &cfg.start {
        if start.len() != problem.dimension {
            eprintln!(
                "error: start has {} coordinates, problem has dimension {}",
                start.len(),
                problem.dimension
            );
            return EXIT_USAGE;
        }
    }

    let trace = match run(&problem, &schedule, &cfg.ks, cfg.horizon, &options) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };

    let csv = render_trace_csv(&problem, &schedule, cfg, &trace);
    let verdict = trace_verdict(&trace);
    let summary = render_summary(&problem, &trace, &verdict);

    match &cfg.out {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }

    match verdict {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_VIOLATION,
    }
}

/// One row of the rate-comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub t: usize,
    /// `RL/sqrt(t)` (constant step anchored to `t`).
    pub constant_step: f64,
    /// `3RL/(2 sqrt(t))` (plain average, decay schedule).
    pub sqrt_decay_mean: f64,
    /// General certificate at `k = 0` under the decay schedule.
    pub weighted_k0: f64,
    /// General certificate at `k = -1` under the decay schedule.
    pub weighted_km1: f64,
    /// `(2RL + RL ln t)/(4(sqrt(t+1)-1))`, the `k = -1` closed form.
    pub step_weighted_log: f64,
    /// `weighted_km1 / weighted_k0`: the measured log-factor separation.
    pub ratio_km1_over_k0: f64,
}

/// Evaluates all rates for the decay schedule at each grid point, walking the
/// prefix once up to the largest `t`.
pub fn compare_bounds(r: f64, l: f64, t_grid: &[usize]) -> Result<Vec<CompareRow>, Error> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "t-grid",
            detail: "must be nonempty".into(),
        });
    }
    if t_grid.iter().any(|&t| t < 1) {
        return Err(Error::InvalidParameter {
            name: "t-grid",
            detail: "every t must be at least 1".into(),
        });
    }
    let schedule = StepSchedule::sqrt_decay(r, l)?;
    let max_t = *t_grid.iter().max().expect("nonempty");
    let mut k0 = BoundAccumulator::new(r, l, 0.0)?;
    let mut km1 = BoundAccumulator::new(r, l, -1.0)?;
    let mut at: HashMap<usize, (f64, f64)> = HashMap::new();
    for t in 1..=max_t {
        let eta = schedule.eta(t)?;
        let b0 = k0.push(eta)?;
        let bm1 = km1.push(eta)?;
        if t_grid.contains(&t) {
            at.insert(t, (b0, bm1));
        }
    }
    t_grid
        .iter()
        .map(|&t| {
            let (b0, bm1) = at[&t];
            Ok(CompareRow {
                t,
                constant_step: psg_core::constant_step_rate(r, l, t)?,
                sqrt_decay_mean: sqrt_decay_mean_rate(r, l, t)?,
                weighted_k0: b0,
                weighted_km1: bm1,
                step_weighted_log: step_weighted_log_rate(r, l, t)?,
                ratio_km1_over_k0: bm1 / b0,
            })
        })
        .collect()
}

pub fn render_compare_csv(r: f64, l: f64, rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# R={}", full(r));
    let _ = writeln!(out, "# L={}", full(l));
    let _ = writeln!(out, "# schedule=sqrt-decay(R={r},L={l})");
    let _ = writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        "t,constant_step,sqrt_decay_mean,weighted_k0,weighted_km1,step_weighted_log,ratio_km1_over_k0"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.t,
            full(row.constant_step),
            full(row.sqrt_decay_mean),
            full(row.weighted_k0),
            full(row.weighted_km1),
            full(row.step_weighted_log),
            full(row.ratio_km1_over_k0)
        );
    }
    out
}

fn cmd_compare_bounds(args: &CompareArgs) -> i32 {
    let t_grid: Vec<usize> = {
        let mut grid = Vec::new();
        for part in args.t_grid.split(',') {
            match part.trim().parse::<usize>() {
                Ok(t) => grid.push(t),
                Err(_) => {
                    eprintln!("error: invalid t-grid entry {part:?}");
                    return EXIT_USAGE;
                }
            }
        }
        grid
    };
    let rows = match compare_bounds(args.r, args.l, &t_grid) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let csv = render_compare_csv(args.r, args.l, &rows);
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{csv}"),
    }
    EXIT_OK
}

fn cmd_validate_schedule(args: &ValidateArgs) -> i32 {
    let schedule = match StepSchedule::from_file(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let horizon = args
        .horizon
        .unwrap_or_else(|| schedule.max_horizon().expect("custom schedules are finite"));
    match schedule.validate(horizon) {
        Ok(()) => {
            println!("ok: {horizon} steps validated (positive, non-increasing)");
            EXIT_OK
        }
        Err(v) => {
            println!("{v}");
            EXIT_VIOLATION
        }
    }
}

/// Full CLI entry point; returns the process exit status.
pub fn run_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    EXIT_USAGE
                }
            }
        }
    };
    match &cli.command {
        Command::Run(args) => match resolve_run_config(args) {
            Ok(cfg) => run_experiment(&cfg),
            Err(msg) => {
                eprintln!("error: {msg}");
                EXIT_USAGE
            }
        },
        Command::CompareBounds(args) => cmd_compare_bounds(args),
        Command::ValidateSchedule(args) => cmd_validate_schedule(args),
    }
}
