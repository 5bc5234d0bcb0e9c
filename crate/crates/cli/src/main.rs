use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carleson::boxes::{box_ratio_circular, BoxReport};
use carleson::conformal::{pushforward_measure, pushforward_to_image};
use carleson::harmonic::{harmonic_measure_mc, Arc, WalkConfig};
use carleson::norms::{ConstantEstimator, NormConfig};
use carleson::open_set::OpenSetAnalyzer;
use carleson::suite::{run_criterion, run_suite, SuiteConfig, SuiteReport, CRITERIA};
use carleson::trend::{trend_of, TrendReport};
use carleson::{
    AtomicMeasure, BoundaryPartition, CarlesonError, CircularDomain, ConformalMap, OpenSetDomain, PresentedDomain,
};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "carleson", version, about = "Carleson measure diagnostics on circular and presented domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact box ratio κ of a measure (or of each member of a family).
    Box(BoxArgs),
    /// Estimated embedding constant c_hat against harmonic measure.
    Constant(ConstantArgs),
    /// Walk-on-spheres harmonic measure of boundary arcs.
    Harmonic(HarmonicArgs),
    /// Move a measure between a presented domain and its circular base.
    Pushforward(PushforwardArgs),
    /// Per-component constants and the weighted criterion on an open set.
    Openset(OpensetArgs),
    /// Run the acceptance batteries.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of stdout (atomically).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trend CSV (index,value) for family inputs; defaults to the --out path with a .csv extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BoxArgs {
    /// Circular domain spec, or presented domain spec {"base", "chart"}.
    #[arg(long)]
    domain: PathBuf,
    /// Measure spec, or a JSON array of measure specs (a family).
    #[arg(long)]
    measure: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 3)]
    level: u8,
    /// Evaluation point "x,y" in the domain (default: the base's default point).
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    /// Walks for the boundary density on multiply connected bases.
    #[arg(long, default_value_t = 100_000)]
    walks: usize,
    #[arg(long, default_value_t = 64)]
    arcs_per_circle: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct HarmonicArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Evaluation point "x,y".
    #[arg(long, allow_hyphen_values = true)]
    z0: String,
    /// Boundary partition spec (array of {component, start, end}); overrides --arcs-per-circle.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    arcs_per_circle: usize,
    #[arg(long, default_value_t = 10_000)]
    walks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PushforwardArgs {
    /// Base circular domain, or presented domain spec.
    #[arg(long)]
    domain: PathBuf,
    /// Chart spec replacing the domain's chart.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    measure: PathBuf,
    /// Push from the base onto the presented domain instead of pulling back.
    #[arg(long)]
    inverse: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OpensetArgs {
    #[arg(long)]
    openset: PathBuf,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 2)]
    level: u8,
    /// Comma-separated component weights b_n replacing 2^{-n}.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    #[arg(long, default_value_t = 100_000)]
    walks: usize,
    #[arg(long, default_value_t = 64)]
    arcs_per_circle: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SuiteArgs {
    /// Multiplies every pass threshold.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    /// Run only these criteria (repeatable).
    #[arg(long)]
    criterion: Vec<u8>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Unreadable or invalid input, bad flags, unwritable output: exit 2.
    Validation(String),
    /// The computation itself failed: exit 3.
    Numeric(String),
}

impl From<CarlesonError> for Failure {
    fn from(e: CarlesonError) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

/// A presented domain spec (has "base"), or a bare circular domain.
fn read_domain(path: &Path) -> CliResult<PresentedDomain> {
    let value: serde_json::Value = read_json(path)?;
    let invalid = |e: serde_json::Error| Failure::Validation(format!("{}: {e}", path.display()));
    if value.get("base").is_some() {
        serde_json::from_value(value).map_err(invalid)
    } else {
        serde_json::from_value::<CircularDomain>(value).map(PresentedDomain::circular).map_err(invalid)
    }
}

fn read_measures(path: &Path) -> CliResult<(Vec<AtomicMeasure>, bool)> {
    let value: serde_json::Value = read_json(path)?;
    let family = value.is_array();
    let parse = |v: serde_json::Value| {
        serde_json::from_value::<AtomicMeasure>(v).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
    };
    let members = match value {
        serde_json::Value::Array(items) => items.into_iter().map(parse).collect::<CliResult<Vec<_>>>()?,
        single => vec![parse(single)?],
    };
    Ok((members, family))
}

fn parse_point(s: &str) -> CliResult<Complex64> {
    let bad = || Failure::Validation(format!("expected a point \"x,y\", got {s:?}"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(x, y))
}

fn check_q(q: f64) -> CliResult<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Failure::Validation(format!("--q must be a finite number >= 1, got {q}")))
    }
}

/// Writes to a temporary file next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| Failure::Validation(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit<T: Serialize>(report: &T, output: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    match output {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_csv(values: &[f64], output: &Output) -> CliResult<()> {
    let path = match (&output.csv, &output.out) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => out.with_extension("csv"),
        (None, None) => return Ok(()),
    };
    let mut text = String::from("index,value\n");
    for (k, v) in values.iter().enumerate() {
        text.push_str(&format!("{k},{v:e}\n"));
    }
    write_atomic(&path, text.as_bytes())
}

#[derive(Serialize)]
struct FamilyReport<T: Serialize> {
    trend: TrendReport,
    members: Vec<T>,
}

fn cmd_box(args: BoxArgs) -> CliResult<()> {
    let domain = read_domain(&args.domain)?;
    let (measures, family) = read_measures(&args.measure)?;
    let reports = measures
        .iter()
        .map(|m| {
            let pulled = pushforward_measure(&domain, m)?;
            box_ratio_circular(domain.base(), &pulled)
        })
        .collect::<Result<Vec<BoxReport>, _>>()?;
    if !family {
        return emit(&reports[0], args.output.out.as_deref());
    }
    let values: Vec<f64> = reports.iter().map(|r| r.kappa).collect();
    emit_csv(&values, &args.output)?;
    emit(&FamilyReport { trend: trend_of(values), members: reports }, args.output.out.as_deref())
}

fn norm_config(
    domain: Option<&PresentedDomain>,
    z0: Option<&str>,
    nodes: usize,
    walks: usize,
    arcs_per_circle: usize,
    seed: u64,
) -> CliResult<NormConfig> {
    let evaluation = match (domain, z0) {
        (Some(d), Some(s)) => {
            let z = parse_point(s)?;
            let u = d.preimage(z)?.ok_or(CarlesonError::EvaluationPointOutsideDomain { z })?;
            Some(u)
        }
        _ => None,
    };
    if arcs_per_circle == 0 || walks == 0 || nodes == 0 {
        return Err(Failure::Validation("--nodes, --walks and --arcs-per-circle must be positive".into()));
    }
    Ok(NormConfig { nodes, evaluation, walks, arcs_per_circle, seed })
}

fn cmd_constant(args: ConstantArgs) -> CliResult<()> {
    check_q(args.q)?;
    let domain = read_domain(&args.domain)?;
    let (measures, family) = read_measures(&args.measure)?;
    let config = norm_config(Some(&domain), args.z0.as_deref(), args.nodes, args.walks, args.arcs_per_circle, args.seed)?;
    let estimator = ConstantEstimator::new(&domain, args.level, args.q, &config)?;
    let estimates = measures.iter().map(|m| estimator.estimate(m)).collect::<Result<Vec<_>, _>>()?;
    if !family {
        return emit(&estimates[0], args.output.out.as_deref());
    }
    // trends are read off c_hat^q, the quantity comparable with κ
    let values: Vec<f64> = estimates.iter().map(|e| e.c_hat.powf(args.q)).collect();
    emit_csv(&values, &args.output)?;
    emit(&FamilyReport { trend: trend_of(values), members: estimates }, args.output.out.as_deref())
}

fn cmd_harmonic(args: HarmonicArgs) -> CliResult<()> {
    let domain = read_domain(&args.domain)?;
    let base = domain.base();
    let partition = match &args.partition {
        Some(path) => read_json::<BoundaryPartition>(path)?,
        None if args.arcs_per_circle == 0 => {
            return Err(Failure::Validation("--arcs-per-circle must be positive".into()));
        }
        None => BoundaryPartition::uniform(base, args.arcs_per_circle),
    };
    let z0 = parse_point(&args.z0)?;
    let u0 = domain.preimage(z0)?.ok_or(CarlesonError::EvaluationPointOutsideDomain { z: z0 })?;
    let config = WalkConfig { walks: args.walks, seed: args.seed, ..WalkConfig::default() };
    let mut estimate = harmonic_measure_mc(base, u0, &partition, &config)?;
    estimate.z0 = z0;

    #[derive(Serialize)]
    struct HarmonicReport {
        arcs: Vec<Arc>,
        #[serde(flatten)]
        estimate: carleson::HarmonicEstimate,
    }
    emit(&HarmonicReport { arcs: partition.arcs().to_vec(), estimate }, args.output.out.as_deref())
}

fn cmd_pushforward(args: PushforwardArgs) -> CliResult<()> {
    let mut domain = read_domain(&args.domain)?;
    if let Some(path) = &args.map {
        let chart: ConformalMap = read_json(path)?;
        domain = PresentedDomain::new(domain.base().clone(), chart)?;
    }
    let (measures, family) = read_measures(&args.measure)?;
    let moved = measures
        .iter()
        .map(|m| if args.inverse { pushforward_to_image(&domain, m) } else { pushforward_measure(&domain, m) })
        .collect::<Result<Vec<_>, _>>()?;
    if family {
        emit(&moved, args.output.out.as_deref())
    } else {
        emit(&moved[0], args.output.out.as_deref())
    }
}

fn parse_weights(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|_| Failure::Validation(format!("bad weight {w:?} in --weights"))))
        .collect()
}

fn cmd_openset(args: OpensetArgs) -> CliResult<()> {
    check_q(args.q)?;
    let mut open: OpenSetDomain = read_json(&args.openset)?;
    if let Some(w) = &args.weights {
        open = open.with_weights(parse_weights(w)?)?;
    }
    let (measures, family) = read_measures(&args.measure)?;
    let config = norm_config(None, None, args.nodes, args.walks, args.arcs_per_circle, args.seed)?;
    let analyzer = OpenSetAnalyzer::new(&open, args.q, args.level, &config)?;
    let verdicts = measures.iter().map(|m| analyzer.weighted_criterion(m)).collect::<Result<Vec<_>, _>>()?;
    if !family {
        return emit(&verdicts[0], args.output.out.as_deref());
    }
    let values: Vec<f64> = verdicts.iter().map(|v| v.c_star.powf(args.q)).collect();
    emit_csv(&values, &args.output)?;
    emit(&FamilyReport { trend: trend_of(values), members: verdicts }, args.output.out.as_deref())
}

fn cmd_suite(args: SuiteArgs) -> CliResult<bool> {
    if !(args.tolerance_scale.is_finite() && args.tolerance_scale > 0.0) {
        return Err(Failure::Validation(format!("--tolerance-scale must be positive, got {}", args.tolerance_scale)));
    }
    let config = SuiteConfig { tolerance_scale: args.tolerance_scale, seed: args.seed };
    let report = if args.criterion.is_empty() {
        run_suite(&config)
    } else {
        for id in &args.criterion {
            if !CRITERIA.iter().any(|c| c.0 == *id) {
                return Err(Failure::Validation(format!("unknown criterion {id}")));
            }
        }
        let outcomes: Vec<_> = args.criterion.iter().map(|&id| run_criterion(id, &config)).collect();
        SuiteReport {
            tolerance_scale: config.tolerance_scale,
            seed: config.seed,
            passed: outcomes.iter().all(|o| o.passed),
            outcomes,
        }
    };
    for o in &report.outcomes {
        eprintln!("{}", o.summary());
    }
    emit(&report, args.out.as_deref())?;
    Ok(report.passed)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("CARLESON_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Validation(format!("CARLESON_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    match cli.command {
        Command::Box(a) => cmd_box(a).map(|_| true),
        Command::Constant(a) => cmd_constant(a).map(|_| true),
        Command::Harmonic(a) => cmd_harmonic(a).map(|_| true),
        Command::Pushforward(a) => cmd_pushforward(a).map(|_| true),
        Command::Openset(a) => cmd_openset(a).map(|_| true),
        Command::Suite(a) => cmd_suite(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}
