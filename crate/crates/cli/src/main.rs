mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dlscape::corays::{representation_check, trace_corays, verify_gradient};
use dlscape::dlfield::{busemann, gromov_check, horofunction, level_set, u_point_assigned, u_r, ScalarField};
use dlscape::gh::{
    build_eps_isometry, corr_from_isometry, eps_delta_certificate, exact, gh_bounds, pa_gh_experiment, Budget,
    ExperimentVerdict, PaGhParams, DEFAULT_MAX_NODES, DEFAULT_MAX_POINTS,
};
use dlscape::pseudometric::{equivalence_classes, rho_matrix, FieldParams};
use dlscape::suites::{self, Suite, DEFAULT_SEED, DEFAULT_TRIALS};
use dlscape::{zoo, Error, FieldExport, FiniteMetricSpace, GraphSpace, Vertex, Window};

use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "dlscape", version, about = "Distance-like functions on discrete geodesic spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point-assigned field u_x0 (or a single u^r) on a window
    Field(FieldArgs),
    /// Busemann field along a geodesic ray
    Busemann(RayArgs),
    /// Horofunction along a diverging point sequence
    Horo(HoroArgs),
    /// Co-rays of an exported field from a start vertex
    Coray(CorayArgs),
    /// The pseudo-metric rho on a sample, with its equivalence classes
    Rho(RhoArgs),
    /// GH bounds between two finite pointed metric spaces
    Gh(GhArgs),
    /// Experiments
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Level set {u = c} of an exported field
    LevelSet(LevelSetArgs),
    /// Seeded invariant suites
    Check(CheckArgs),
    /// Generator catalog
    Zoo {
        #[command(subcommand)]
        which: ZooCommand,
    },
    /// Window export (vertices, edges, distance from the base)
    Window(WindowArgs),
}

#[derive(Subcommand)]
enum Experiment {
    /// Compare point-assigned fields through a known 2 eps-isometry
    PaGh(PaGhArgs),
}

#[derive(Subcommand)]
enum ZooCommand {
    List,
}

#[derive(Args)]
struct SpaceArgs {
    /// Inline spec (`tree:2`), JSON spec, or a path to a JSON spec
    #[arg(long)]
    space: String,
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    base: Vertex,
    #[arg(long)]
    radius: u32,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKindArg {
    PointAssigned,
    #[value(name = "u-r")]
    UR,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, value_enum, default_value_t = FieldKindArg::PointAssigned)]
    kind: FieldKindArg,
    /// Largest radius of the schedule (default: --radius)
    #[arg(long)]
    r_max: Option<u32>,
    #[arg(long, default_value_t = 2)]
    r_step: u32,
    /// Explicit comma-separated schedule, overrides --r-max/--r-step
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<u32>>,
    /// Radius for --kind u-r
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    zone: u32,
    /// Convergence tail in schedule units (default 2 * zone)
    #[arg(long)]
    tail: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RayArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Ray vertices `x,y;x,y;...` or @file with a JSON array of [x, y]
    #[arg(long, allow_hyphen_values = true)]
    ray: String,
    #[arg(long, default_value_t = 1)]
    t_step: u32,
    #[arg(long)]
    zone: u32,
    #[arg(long)]
    tail: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct HoroArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Points `x,y;x,y;...` or @file with a JSON array of [x, y]
    #[arg(long, allow_hyphen_values = true)]
    points: String,
    #[arg(long)]
    zone: u32,
    #[arg(long)]
    tail: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CorayArgs {
    /// Field JSON written by `field`, `busemann` or `horo`
    #[arg(long)]
    field: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    start: Vertex,
    #[arg(long, visible_alias = "max", default_value_t = dlscape::corays::DEFAULT_MAX_PATHS)]
    max_paths: usize,
    /// Steps over which b_T must be constant to call equality
    #[arg(long, default_value_t = 1)]
    tail: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RhoArgs {
    #[arg(long)]
    space: String,
    /// Sample points `x,y;x,y;...`
    #[arg(long, allow_hyphen_values = true)]
    sample: String,
    #[arg(long)]
    radius: u32,
    #[arg(long, default_value_t = 2)]
    r_step: u32,
    /// Default radius / 5
    #[arg(long)]
    zone: Option<u32>,
    #[arg(long)]
    tail: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GhArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
    max_points: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    max_nodes: u64,
    /// Net in X for an (eps, delta) certificate, comma-separated indices
    #[arg(long, value_delimiter = ',', requires_all = ["net_y", "eps", "delta"])]
    net_x: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    net_y: Option<Vec<usize>>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PaGhArgs {
    #[arg(long)]
    space_x: String,
    #[arg(long)]
    space_y: String,
    /// Rational, e.g. `1`, `1/2`, `0.25`
    #[arg(long)]
    eps: String,
    #[arg(long)]
    radius: u32,
    /// Default radius / 5
    #[arg(long)]
    zone: Option<u32>,
    #[arg(long, default_value_t = 2)]
    r_step: u32,
    #[arg(long)]
    tail: Option<u32>,
    /// Include the per-vertex comparison table
    #[arg(long)]
    rows: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LevelSetArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    value: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long)]
    space: String,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WindowArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    /// Exit 1, with a JSON witness already written.
    Violation,
    /// Exit 2.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoDescent(_) | Error::Inconsistent(_) => {
                eprintln!("error: {e}");
                Failure::Violation
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) | Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Field(a) => field(a),
        Command::Busemann(a) => busemann_cmd(a),
        Command::Horo(a) => horo(a),
        Command::Coray(a) => coray(a),
        Command::Rho(a) => rho(a),
        Command::Gh(a) => gh(a),
        Command::Experiment {
            which: Experiment::PaGh(a),
        } => pa_gh(a),
        Command::LevelSet(a) => level_set_cmd(a),
        Command::Check(a) => check(a),
        Command::Zoo {
            which: ZooCommand::List,
        } => {
            Sink::new(None).json(&zoo::catalog())?;
            Ok(true)
        }
        Command::Window(a) => window_cmd(a),
    }
}

fn parse_space(text: &str) -> Result<GraphSpace, Failure> {
    let path = Path::new(text);
    if path.is_file() {
        let body = read(path)?;
        return Ok(GraphSpace::parse(&body)?);
    }
    Ok(GraphSpace::parse(text)?)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// `x,y;x,y;...` or `@file` holding a JSON array of `[x, y]` pairs.
fn parse_vertices(text: &str) -> Result<Vec<Vertex>, Failure> {
    if let Some(path) = text.strip_prefix('@') {
        let pairs: Vec<Vertex> = read_json(Path::new(path))?;
        return Ok(pairs);
    }
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<Vertex>().map_err(Failure::from))
        .collect()
}

fn window(space: &SpaceArgs) -> Result<Arc<Window>, Failure> {
    let s = parse_space(&space.space)?;
    Ok(Arc::new(Window::materialize(s, space.base, space.radius)?))
}

fn emit_field(field: &ScalarField, out: &OutArgs) -> Outcome {
    let sink = Sink::new(out.out.as_deref());
    match out.format {
        Format::Json => sink.json(&field.export())?,
        Format::Csv => sink.field_csv(&field.export())?,
    }
    Ok(true)
}

fn field(a: FieldArgs) -> Outcome {
    let w = window(&a.space)?;
    let tail = a.tail.unwrap_or(2 * a.zone);
    let f = match a.kind {
        FieldKindArg::UR => {
            let r = a.r.ok_or_else(|| Failure::Usage("--kind u-r needs --r".into()))?;
            u_r(w, r, a.zone)?
        }
        FieldKindArg::PointAssigned => {
            let schedule = match a.schedule {
                Some(s) => s,
                None => {
                    let max = a.r_max.unwrap_or(a.space.radius);
                    FieldParams::stepped(max, a.r_step, a.zone, tail).schedule
                }
            };
            u_point_assigned(w, &schedule, a.zone, tail)?.0
        }
    };
    emit_field(&f, &a.out)
}

fn busemann_cmd(a: RayArgs) -> Outcome {
    let w = window(&a.space)?;
    let ray = parse_vertices(&a.ray)?;
    let last = ray.len().saturating_sub(1) as u32;
    let step = a.t_step.max(1);
    let mut schedule: Vec<u32> = (1..=last).filter(|t| t % step == 0).collect();
    if schedule.last() != Some(&last) && last > 0 {
        schedule.push(last);
    }
    let tail = a.tail.unwrap_or((last / 3).max(1));
    let (f, _) = busemann(w, &ray, &schedule, a.zone, tail)?;
    emit_field(&f, &a.out)
}

fn horo(a: HoroArgs) -> Outcome {
    let w = window(&a.space)?;
    let points = parse_vertices(&a.points)?;
    let tail = a.tail.unwrap_or(2 * a.zone);
    let (f, _) = horofunction(w, &points, a.zone, tail)?;
    emit_field(&f, &a.out)
}

fn load_field(path: &Path) -> Result<ScalarField, Failure> {
    let export: FieldExport = read_json(path)?;
    Ok(ScalarField::from_export(&export)?)
}

fn coray(a: CorayArgs) -> Outcome {
    let f = load_field(&a.field)?;
    let sink = Sink::new(a.out.as_deref());
    let trace = match trace_corays(&f, a.start, a.max_paths) {
        Ok(t) => t,
        Err(Error::NoDescent(v)) => {
            sink.json(&json!({ "violation": "no descending neighbor", "vertex": v, "value": f.value_at(v) }))?;
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let gradient: Vec<bool> = trace
        .rays
        .iter()
        .map(|r| verify_gradient(r, &f))
        .collect::<Result<_, _>>()?;
    let own = &trace.rays[..trace.rays.len().min(1)];
    let representation = representation_check(&f, a.start, own, a.tail)?;
    let ok = gradient.iter().all(|&g| g) && representation.violations() == 0;
    sink.json(&json!({
        "start": a.start,
        "trace": trace,
        "gradient_ok": gradient,
        "representation": representation,
    }))?;
    Ok(ok)
}

fn rho(a: RhoArgs) -> Outcome {
    let space = parse_space(&a.space)?;
    let sample = parse_vertices(&a.sample)?;
    let zone = a.zone.unwrap_or(a.radius / 5);
    let params = FieldParams::stepped(a.radius, a.r_step, zone, a.tail.unwrap_or(2 * zone));
    let (matrix, fields) = rho_matrix(space, &sample, &params)?;
    let violations = matrix.axiom_violations();
    let rho: Vec<Vec<String>> = (0..matrix.len())
        .map(|i| (0..matrix.len()).map(|j| matrix.rho(i, j).to_string()).collect())
        .collect();
    let classes = equivalence_classes(&fields)?;
    let sink = Sink::new(a.out.as_deref());
    sink.json(&json!({
        "sample": matrix.sample,
        "rho": rho,
        "twice_rho": matrix.twice_rho,
        "stable": matrix.stable,
        "distance": matrix.distance,
        "classes": classes,
        "violations": violations,
    }))?;
    Ok(violations.is_empty())
}

fn gh(a: GhArgs) -> Outcome {
    let x: FiniteMetricSpace = read_json(&a.x)?;
    let y: FiniteMetricSpace = read_json(&a.y)?;
    let budget = Budget {
        max_points: a.max_points,
        max_nodes: a.max_nodes,
    };
    let bounds = gh_bounds(&x, &y, budget)?;
    let f = build_eps_isometry(&x, &y, &bounds.correspondence)?;
    let roundtrip = corr_from_isometry(&x, &y, &f, bounds.upper)?;
    let mut ok = roundtrip.distortion <= bounds.upper * 3;
    let mut report = json!({
        "lower": bounds.lower.to_string(),
        "upper": bounds.upper.to_string(),
        "proved": bounds.proved,
        "correspondence": bounds.correspondence,
        "isometry": f,
        "roundtrip": roundtrip,
    });
    if let (Some(nx), Some(ny), Some(eps), Some(delta)) = (a.net_x, a.net_y, a.eps, a.delta) {
        let cert = eps_delta_certificate(&x, &y, &nx, &ny, exact::parse(&eps)?, exact::parse(&delta)?)?;
        if cert.certified && cert.bound <= bounds.lower {
            // d_GH < bound <= D*/2 would contradict the sandwich
            ok = false;
        }
        report["certificate"] = serde_json::to_value(cert).expect("serializable");
    }
    if !bounds.proved {
        report["flag"] = Value::from("LOWER-BOUND-NOT-PROVED");
    }
    Sink::new(a.out.as_deref()).json(&report)?;
    Ok(ok)
}

fn pa_gh(a: PaGhArgs) -> Outcome {
    let sx = parse_space(&a.space_x)?;
    let sy = parse_space(&a.space_y)?;
    let eps = exact::parse(&a.eps)?;
    let zone = a.zone.unwrap_or(a.radius / 5);
    let tail = a.tail.unwrap_or(2 * zone);
    let params = PaGhParams {
        radius: a.radius,
        zone,
        schedule: FieldParams::stepped(a.radius, a.r_step, zone, tail).schedule,
        tail,
    };
    let mut report = pa_gh_experiment(sx, sy, eps, &params)?;
    if !a.rows {
        report.rows.clear();
    }
    Sink::new(a.out.as_deref()).json(&report)?;
    Ok(report.verdict != ExperimentVerdict::Violated)
}

fn level_set_cmd(a: LevelSetArgs) -> Outcome {
    let f = load_field(&a.field)?;
    let set = level_set(&f, a.value);
    let vertices: Vec<Value> = set
        .ids()
        .iter()
        .map(|&id| json!({ "coords": f.window().vertex(id), "stable": f.is_stable(id) }))
        .collect();
    let gromov = gromov_check(&f, &[a.value]);
    Sink::new(a.out.as_deref()).json(&json!({
        "value": a.value,
        "count": vertices.len(),
        "vertices": vertices,
        "gromov": gromov,
    }))?;
    Ok(gromov.passed())
}

fn check(a: CheckArgs) -> Outcome {
    let space = parse_space(&a.space)?;
    let report = suites::run(a.suite, space, a.trials, a.seed)?;
    Sink::new(a.out.as_deref()).json(&report)?;
    Ok(report.passed())
}

fn window_cmd(a: WindowArgs) -> Outcome {
    let w = window(&a.space)?;
    Sink::new(a.out.as_deref()).json(&w.export())?;
    Ok(true)
}
