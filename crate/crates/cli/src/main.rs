//! `raysweep` — compute Pareto frontiers for bi-objective minimization
//! problems by sweeping rays in objective space.
//!
//! Subcommands: `anchors`, `frontier`, `map`, `check-b`, `filter`.
//! Exit codes: 0 success, 1 usage error, 2 solve failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use raysweep_core::anchors::{check_condition_b, solve_anchor, AnchorError};
use raysweep_core::directions::sweep_2d;
use raysweep_core::frontier::{sweep, Frontier, Method, PointStatus, SweepConfig};
use raysweep_core::mapping::image_sample;
use raysweep_core::problem::{Problem, ProblemKind};
use raysweep_core::rayscan::ScanConfig;
use raysweep_core::{AnchorSolution, IdealPoint};

#[derive(Parser)]
#[command(name = "raysweep", version, about = "Pareto frontiers by ray sweeps in objective space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the two single-coordinate minimizations and report the ideal point.
    Anchors(AnchorsArgs),
    /// Sweep ray directions and write the frontier as CSV or JSON.
    Frontier(FrontierArgs),
    /// Sample the objective-space image of a decision-space problem.
    Map(MapArgs),
    /// Evaluate the condition-(B) diagnostic and write the report.
    CheckB(CheckBArgs),
    /// Keep only the non-dominated rows of a points CSV.
    Filter(FilterArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Scan window upper bound for the ray parameter.
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    /// Coarse scan grid spacing.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Bisection width target for boundary roots.
    #[arg(long, default_value_t = 1e-9)]
    tol_root: f64,
    /// Feasibility slack.
    #[arg(long, default_value_t = 1e-9)]
    tol_feas: f64,
}

impl ScanArgs {
    fn to_config(&self) -> Result<ScanConfig, Failure> {
        if self.t_max <= 0.0 || self.step <= 0.0 || self.tol_root <= 0.0 || self.tol_feas <= 0.0 {
            return Err(Failure::Usage("scan parameters must be positive".to_string()));
        }
        if self.step >= self.t_max {
            return Err(Failure::Usage("--step must be smaller than --t-max".to_string()));
        }
        Ok(ScanConfig {
            t_max: self.t_max,
            step: self.step,
            tol_root: self.tol_root,
            tol_feas: self.tol_feas,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Scan,
    Lp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Scan => Method::Scan,
            MethodArg::Lp => Method::Lp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct AnchorsArgs {
    problem: PathBuf,
    /// Offset-grid resolution for nonlinear anchor solves.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[command(flatten)]
    scan: ScanArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FrontierArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 150)]
    angles: usize,
    #[arg(long, default_value_t = 0.01)]
    phi_lo: f64,
    #[arg(long, default_value_t = 1.5607)]
    phi_hi: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Move the sweep origin to the ideal point.
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    shift: Toggle,
    /// Feasible-sample budget for downstream certificates (recorded in the
    /// sidecar; sampling itself happens in `check-b`/library calls).
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Offset-grid resolution for nonlinear anchor solves.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Lines per orientation for the condition-(B) scan.
    #[arg(long, default_value_t = 100)]
    lines: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted. The condition-(B) sidecar goes to
    /// `<out>.json`, or stderr when writing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Args)]
struct MapArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 150)]
    angles: usize,
    #[arg(long, default_value_t = 0.01)]
    phi_lo: f64,
    #[arg(long, default_value_t = 1.5607)]
    phi_hi: f64,
    /// Evenly spaced parameter samples per feasible interval.
    #[arg(long, default_value_t = 40)]
    tau_per_interval: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Args)]
struct CheckBArgs {
    problem: PathBuf,
    /// Lines per orientation for the condition-(B) scan.
    #[arg(long, default_value_t = 100)]
    lines: usize,
    /// Offset-grid resolution for nonlinear anchor solves.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Args)]
struct FilterArgs {
    /// Points CSV: either bare `y1,y2` rows or a headed frontier CSV.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Solve(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solve(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solve(m) => m,
        }
    }
}

impl From<AnchorError> for Failure {
    fn from(err: AnchorError) -> Failure {
        Failure::Solve(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Anchors(args) => run_anchors(&args),
        Command::Frontier(args) => run_frontier(&args),
        Command::Map(args) => run_map(&args),
        Command::CheckB(args) => run_check_b(&args),
        Command::Filter(args) => run_filter(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|err| Failure::Usage(format!("cannot read {}: {err}", path.display())))?;
    Problem::load(&text)
        .map_err(|err| Failure::Usage(format!("{}: {err}", path.display())))
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|err| Failure::Usage(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct AnchorsOutput<'a> {
    min_y1: &'a AnchorSolution,
    min_y2: &'a AnchorSolution,
    ideal: IdealPoint,
}

fn run_anchors(args: &AnchorsArgs) -> Result<(), Failure> {
    let p = load_problem(&args.problem)?;
    let cfg = args.scan.to_config()?;
    let a1 = solve_anchor(&p, 1, &cfg, args.grid)?;
    let a2 = solve_anchor(&p, 2, &cfg, args.grid)?;
    let ideal = IdealPoint::from_anchors(&a1, &a2);
    let json = to_json(&AnchorsOutput { min_y1: &a1, min_y2: &a2, ideal });
    write_output(&args.out, &json)
}

fn status_str(status: PointStatus) -> &'static str {
    match status {
        PointStatus::Boundary => "boundary",
        PointStatus::NoIntersection => "no-intersection",
        PointStatus::ScanLimit => "scan-limit",
    }
}

fn frontier_csv(f: &Frontier) -> String {
    let mut csv = String::from("phi,t_star,y1,y2,h_residual,status\n");
    for pt in &f.points {
        // Rows without a frontier point carry no plottable data.
        let Some(y) = pt.y_star else { continue };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            pt.angle,
            pt.t_star.unwrap_or(f64::NAN),
            y[0],
            y[1],
            pt.h_residual.unwrap_or(f64::NAN),
            status_str(pt.status),
        );
    }
    csv
}

#[derive(Serialize)]
struct FrontierSidecar<'a> {
    condition_b: &'a raysweep_core::ConditionBReport,
    filtered: bool,
    removed_by_filter: usize,
    anchors: &'a (AnchorSolution, AnchorSolution),
    ideal: &'a IdealPoint,
}

fn run_frontier(args: &FrontierArgs) -> Result<(), Failure> {
    let p = load_problem(&args.problem)?;
    let scan_cfg = args.scan.to_config()?;
    let sweep_cfg = SweepConfig {
        angles: args.angles,
        phi_lo: args.phi_lo,
        phi_hi: args.phi_hi,
        method: args.method.into(),
        shift: matches!(args.shift, Toggle::On),
        anchor_grid: args.grid,
        b_lines: args.lines,
        samples: args.samples,
        seed: args.seed,
    };
    let frontier =
        sweep(&p, &sweep_cfg, &scan_cfg).map_err(|err| Failure::Solve(err.to_string()))?;
    if !frontier.points.iter().any(|pt| pt.y_star.is_some()) {
        return Err(Failure::Solve(
            "frontier is empty: no sweep ray intersects the feasible set".to_string(),
        ));
    }
    match args.format {
        Format::Json => write_output(&args.out, &to_json(&frontier)),
        Format::Csv => {
            write_output(&args.out, &frontier_csv(&frontier))?;
            let sidecar = to_json(&FrontierSidecar {
                condition_b: &frontier.condition_b,
                filtered: frontier.filtered,
                removed_by_filter: frontier.removed_by_filter,
                anchors: &frontier.anchors,
                ideal: &frontier.ideal,
            });
            match &args.out {
                Some(path) => {
                    let mut sidecar_path = path.as_os_str().to_owned();
                    sidecar_path.push(".json");
                    write_output(&Some(PathBuf::from(sidecar_path)), &sidecar)
                }
                None => {
                    eprint!("{sidecar}");
                    Ok(())
                }
            }
        }
    }
}

fn run_map(args: &MapArgs) -> Result<(), Failure> {
    let p = load_problem(&args.problem)?;
    if p.kind() != ProblemKind::DecisionSpace {
        return Err(Failure::Usage(format!(
            "{} declares no objectives; `map` needs a decision-space problem",
            args.problem.display()
        )));
    }
    if p.dim() != 2 {
        return Err(Failure::Usage(format!(
            "`map` supports 2-variable problems, {} has {}",
            args.problem.display(),
            p.dim()
        )));
    }
    let cfg = args.scan.to_config()?;
    let grid = sweep_2d(args.angles, args.phi_lo, args.phi_hi)
        .map_err(|err| Failure::Usage(err.to_string()))?;
    let cloud = image_sample(&p, &grid, args.tau_per_interval, &cfg)
        .map_err(|err| Failure::Solve(err.to_string()))?;
    if cloud.points.is_empty() {
        return Err(Failure::Solve("image is empty: no ray meets the feasible set".to_string()));
    }
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct JsonPoint<'a> {
                phi: &'a [f64],
                tau: f64,
                preimage: &'a [f64],
                values: &'a [f64],
            }
            let points: Vec<JsonPoint> = cloud
                .points
                .iter()
                .map(|pt| JsonPoint {
                    phi: pt.angles.values(),
                    tau: pt.tau,
                    preimage: &pt.preimage,
                    values: &pt.values,
                })
                .collect();
            write_output(&args.out, &to_json(&points))
        }
        Format::Csv => {
            let k = p.objectives.len();
            let mut csv = String::new();
            for i in 1..p.dim() {
                let _ = write!(csv, "phi_{i},");
            }
            csv.push_str("tau");
            for i in 1..=k {
                let _ = write!(csv, ",y_{i}");
            }
            csv.push('\n');
            for pt in &cloud.points {
                for phi in pt.angles.values() {
                    let _ = write!(csv, "{phi},");
                }
                let _ = write!(csv, "{}", pt.tau);
                for v in &pt.values {
                    let _ = write!(csv, ",{v}");
                }
                csv.push('\n');
            }
            write_output(&args.out, &csv)?;
            if cloud.truncated_directions > 0 {
                eprintln!(
                    "note: {} direction(s) truncated at the scan window t_max = {}",
                    cloud.truncated_directions, args.scan.t_max
                );
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CheckBOutput<'a> {
    ideal: IdealPoint,
    report: &'a raysweep_core::ConditionBReport,
}

fn run_check_b(args: &CheckBArgs) -> Result<(), Failure> {
    let p = load_problem(&args.problem)?;
    let cfg = args.scan.to_config()?;
    let a1 = solve_anchor(&p, 1, &cfg, args.grid)?;
    let a2 = solve_anchor(&p, 2, &cfg, args.grid)?;
    let ideal = IdealPoint::from_anchors(&a1, &a2);
    let report = check_condition_b(&p, &a1, &a2, args.lines, &cfg);
    write_output(&args.out, &to_json(&CheckBOutput { ideal, report: &report }))
}

/// Locate the `(y1, y2)` columns of a points CSV: a header row naming `y1`
/// is honored, otherwise the first two fields are the coordinates.
fn filter_columns(header: &str) -> Option<(usize, usize)> {
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let y1 = fields.iter().position(|f| *f == "y1")?;
    let y2 = fields.iter().position(|f| *f == "y2")?;
    Some((y1, y2))
}

fn run_filter(args: &FilterArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|err| Failure::Usage(format!("cannot read {}: {err}", args.input.display())))?;
    let mut lines = text.lines().peekable();
    let mut out = String::new();
    let cols = lines.peek().and_then(|first| filter_columns(first));
    if cols.is_some() {
        out.push_str(lines.next().unwrap());
        out.push('\n');
    }
    let (c1, c2) = cols.unwrap_or((0, 1));

    // Parse the points, keeping the raw line so surviving rows are echoed
    // byte-for-byte in input order.
    let mut rows: Vec<(&str, [f64; 2])> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| fields.get(i).and_then(|f| f.trim().parse::<f64>().ok());
        match (parse(c1), parse(c2)) {
            (Some(y1), Some(y2)) => rows.push((line, [y1, y2])),
            _ => {
                return Err(Failure::Usage(format!(
                    "{}: row `{line}` has no numeric point columns",
                    args.input.display()
                )))
            }
        }
    }

    let mut seen: Vec<[f64; 2]> = Vec::new();
    for (line, y) in &rows {
        let dominated = rows.iter().any(|(_, z)| {
            (z[0] <= y[0] && z[1] <= y[1]) && (z[0] < y[0] || z[1] < y[1])
        });
        let duplicate = seen.contains(y);
        if !dominated && !duplicate {
            seen.push(*y);
            out.push_str(line);
            out.push('\n');
        }
    }
    write_output(&args.out, &out)
}
