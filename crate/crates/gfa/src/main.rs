//! `gfa` command line: grow clusters, measure them, render them, verify files.
//!
//! Exit codes are a stable contract: 0 success, 2 usage or input trouble,
//! 3 aborted growth (stall cap or failed launch), 4 failed `--assert` or
//! failed verification. Every file-writing run drops a manifest next to its
//! outputs with the merged config and content digests, so a run can be
//! reproduced from the manifest alone.

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfa::analysis::{
    arc_structure, beurling_scan, eps_disk_probability, growth_exponent, hit_probabilities,
    radius_convergence, ClusterFamily,
};
use gfa::flow::FlowConfig;
use gfa::geometry::{Cluster, Tolerances};
use gfa::growth::{grow_from_with, grow_with, GrowthConfig, GrowthTrace};
use gfa::io;
use gfa::render::{render_svg, ColorBy, RenderOptions};
use gfa::{GfaError, PotentialKind};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn main() -> ExitCode {
    // clap itself exits 2 on bad flags and 0 for --help/--version.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gfa",
    version,
    about = "Gradient flow aggregation: grow, measure, render, verify",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Grow a cluster by sequential aggregation
    Grow(GrowArgs),
    /// Monte Carlo and regression measurements
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Render a cluster file to a standalone SVG
    Render(RenderArgs),
    /// Check a cluster file's structural invariants
    Verify(VerifyArgs),
}

// ---------------------------------------------------------------------------
// Errors and exit codes.

#[derive(Debug)]
enum CliError {
    Gfa(GfaError),
    /// `--assert` expression evaluated false.
    AssertFailed { expr: String, actual: f64 },
    /// `verify` found violations.
    VerifyFailed { count: usize },
    Usage(String),
}

impl From<GfaError> for CliError {
    fn from(e: GfaError) -> Self {
        CliError::Gfa(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Gfa(e) => write!(f, "{e}"),
            CliError::AssertFailed { expr, actual } => {
                write!(f, "assertion `{expr}` failed (actual value {actual})")
            }
            CliError::VerifyFailed { count } => write!(f, "verification found {count} violation(s)"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            // Growth that gives up is its own documented failure mode.
            CliError::Gfa(GfaError::GrowthAborted { .. })
            | CliError::Gfa(GfaError::FlowFailed { .. }) => 3,
            CliError::AssertFailed { .. } | CliError::VerifyFailed { .. } => 4,
            _ => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ---------------------------------------------------------------------------
// Shared flag groups.

/// `--alpha` accepts a nonnegative real, `log` (the α → 0 endpoint), or
/// `inf` (nearest-particle maximum).
#[derive(Debug, Clone, Copy)]
struct Alpha(PotentialKind);

impl std::str::FromStr for Alpha {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let kind = match s {
            "log" => PotentialKind::Log,
            "inf" | "infinity" => PotentialKind::NearestMax,
            other => {
                let a: f64 = other
                    .parse()
                    .map_err(|_| format!("expected a nonnegative real, `log`, or `inf`, got {other:?}"))?;
                if a == 0.0 {
                    PotentialKind::Log
                } else if a.is_infinite() && a > 0.0 {
                    PotentialKind::NearestMax
                } else if a > 0.0 && a.is_finite() {
                    PotentialKind::Power(a)
                } else {
                    return Err(format!("alpha must be nonnegative, got {a}"));
                }
            }
        };
        Ok(Alpha(kind))
    }
}

/// Flow-integrator knobs. Precedence: flag > GFA config file > built-in
/// default (the default shown on each flag).
#[derive(Args, Debug, Clone, Default)]
struct FlowFlags {
    /// TOML config file (sections: [flow], top-level `workers`)
    #[arg(long, value_name = "FILE", help_heading = "Flow")]
    config: Option<PathBuf>,
    /// Start-radius factor K in R = K*max(n, rho+10) [default: 10]
    #[arg(long, value_name = "K", help_heading = "Flow")]
    start_radius_factor: Option<f64>,
    /// Largest integrator step [default: 0.25]
    #[arg(long, value_name = "H", help_heading = "Flow")]
    h_max: Option<f64>,
    /// Per-step field-direction change tolerance, radians [default: 0.05]
    #[arg(long, value_name = "RAD", help_heading = "Flow")]
    dir_tol: Option<f64>,
    /// Relative gradient-norm floor for stall detection [default: 1e-14]
    #[arg(long, value_name = "TOL", help_heading = "Flow")]
    stall_grad_tol: Option<f64>,
    /// Contact shell half-width [default: 1e-9]
    #[arg(long, value_name = "TOL", help_heading = "Flow")]
    contact_tol: Option<f64>,
    /// Step budget per launch [default: 10000000]
    #[arg(long, value_name = "N", help_heading = "Flow")]
    max_steps: Option<u64>,
    /// Cluster size at which field sums switch to Barnes-Hut [default: 128]
    #[arg(long, value_name = "N", help_heading = "Flow")]
    bh_threshold: Option<usize>,
    /// Barnes-Hut opening angle, 0 = exact summation [default: 0.5]
    #[arg(long, value_name = "THETA", help_heading = "Flow")]
    bh_opening: Option<f64>,
}

#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    flow: FileFlowConfig,
    workers: Option<usize>,
}

#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileFlowConfig {
    start_radius_factor: Option<f64>,
    h_max: Option<f64>,
    dir_tol: Option<f64>,
    stall_grad_tol: Option<f64>,
    contact_tol: Option<f64>,
    max_steps: Option<u64>,
    bh_threshold: Option<usize>,
    bh_opening: Option<f64>,
}

impl FlowFlags {
    /// Merge flags over the config file over the defaults. Returns the flow
    /// config and the file's `workers` value (for the measure commands).
    fn resolve(&self) -> Result<(FlowConfig, Option<usize>), CliError> {
        let file: FileConfig = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(GfaError::from)?;
                toml::from_str(&text)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let mut flow = FlowConfig::default();
        let f = &file.flow;
        if let Some(v) = self.start_radius_factor.or(f.start_radius_factor) {
            flow.start_radius_factor = v;
        }
        if let Some(v) = self.h_max.or(f.h_max) {
            flow.h_max = v;
        }
        if let Some(v) = self.dir_tol.or(f.dir_tol) {
            flow.dir_tol = v;
        }
        if let Some(v) = self.stall_grad_tol.or(f.stall_grad_tol) {
            flow.stall_grad_tol = v;
        }
        if let Some(v) = self.contact_tol.or(f.contact_tol) {
            flow.contact_tol = v;
        }
        if let Some(v) = self.max_steps.or(f.max_steps) {
            flow.max_steps = v;
        }
        if let Some(v) = self.bh_threshold.or(f.bh_threshold) {
            flow.bh_threshold = v;
        }
        if let Some(v) = self.bh_opening.or(f.bh_opening) {
            flow.bh_opening = v;
        }
        flow.validate()?;
        Ok((flow, file.workers))
    }
}

/// Flag > GFA_THREADS env > config file > 0 (the global thread pool).
fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return Ok(w);
    }
    if let Ok(v) = std::env::var("GFA_THREADS") {
        return v
            .parse()
            .map_err(|_| usage(format!("GFA_THREADS must be a thread count, got {v:?}")));
    }
    Ok(file.unwrap_or(0))
}

fn cli_argv() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(GfaError::from)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// grow

#[derive(Args)]
struct GrowArgs {
    /// Interaction exponent: nonnegative real, `log`, or `inf`
    #[arg(long)]
    alpha: Alpha,
    /// Ambient dimension (3 supports only --alpha 1 and inf)
    #[arg(long, default_value_t = 2)]
    dim: u32,
    /// Target particle count
    #[arg(long)]
    n: usize,
    /// Seed for all randomness in the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cluster sizes at which to write intermediate snapshots
    #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
    snapshots: Vec<usize>,
    /// Writes <PREFIX>.csv, <PREFIX>.trace.json, <PREFIX>.manifest.json
    #[arg(long, value_name = "PREFIX")]
    out_prefix: PathBuf,
    /// Start from this cluster instead of one particle at the origin
    #[arg(long, value_name = "FILE")]
    init: Option<PathBuf>,
    #[command(flatten)]
    flow: FlowFlags,
}

fn cmd_grow(args: GrowArgs) -> Result<(), CliError> {
    match args.dim {
        2 => grow_dim::<2>(args),
        3 => grow_dim::<3>(args),
        d => Err(usage(format!("--dim must be 2 or 3, got {d}"))),
    }
}

fn grow_dim<const D: usize>(args: GrowArgs) -> Result<(), CliError> {
    let (flow, _) = args.flow.resolve()?;
    let mut config = GrowthConfig::new(args.alpha.0, args.n, args.seed);
    config.flow = flow;
    config.snapshot_schedule = args.snapshots.clone();

    ensure_parent(&args.out_prefix)?;
    let prefix = args.out_prefix.as_os_str().to_string_lossy().into_owned();
    let schedule: BTreeSet<usize> = args.snapshots.iter().copied().collect();
    let mut snapshot_paths: Vec<PathBuf> = Vec::new();
    let mut snapshot_err: Option<GfaError> = None;
    let on_attach = |cluster: &Cluster<D>, _: &gfa::growth::TraceRecord| {
        if snapshot_err.is_none() && schedule.contains(&cluster.len()) {
            let path = PathBuf::from(format!("{prefix}_n{}.csv", cluster.len()));
            match io::write_cluster_csv(&path, cluster) {
                Ok(()) => snapshot_paths.push(path),
                Err(e) => snapshot_err = Some(e),
            }
        }
    };

    let (cluster, trace) = match &args.init {
        Some(init) => {
            let initial = io::read_cluster_csv::<D>(init)?;
            grow_from_with(initial, &config, on_attach)?
        }
        None => grow_with(&config, on_attach)?,
    };
    if let Some(e) = snapshot_err {
        return Err(e.into());
    }

    let cluster_path = PathBuf::from(format!("{prefix}.csv"));
    let trace_path = PathBuf::from(format!("{prefix}.trace.json"));
    io::write_cluster_csv(&cluster_path, &cluster)?;
    io::write_trace_json(&trace_path, &trace)?;

    let mut manifest = io::RunManifest::new(
        "grow",
        cli_argv(),
        args.seed,
        serde_json::json!({ "dim": D, "growth": &config }),
    );
    if let Some(init) = &args.init {
        manifest.add_input(init, io::CLUSTER_FORMAT)?;
    }
    for p in &snapshot_paths {
        manifest.add_output(p, io::CLUSTER_FORMAT)?;
    }
    manifest.add_output(&cluster_path, io::CLUSTER_FORMAT)?;
    manifest.add_output(&trace_path, io::TRACE_FORMAT)?;
    manifest.write(&PathBuf::from(format!("{prefix}.manifest.json")))?;

    println!(
        "grew {} particles (diameter {:.3}, {} stalled launches) -> {}",
        cluster.len(),
        cluster.diameter(),
        trace.stalls,
        cluster_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// measure

#[derive(Args)]
struct MeasureCommon {
    /// Seed for all randomness in the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads, 0 = shared pool; GFA_THREADS supplies the default
    #[arg(long)]
    workers: Option<usize>,
    /// Write the JSON report here (default: print it to stdout)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also export the report's tabular core as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Require `metric OP value` (e.g. 'max_arcs<=6'); exit 4 if violated
    #[arg(long = "assert", value_name = "EXPR")]
    asserts: Vec<String>,
    #[command(flatten)]
    flow: FlowFlags,
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Per-particle attachment probabilities with Wilson intervals
    Hitprob(HitprobArgs),
    /// Peak attachment probability across cluster sizes
    Beurling(BeurlingArgs),
    /// Per-particle shadow-arc counts on an angular grid
    Arcs(ArcsArgs),
    /// Total-variation drift of the hit distribution across start radii
    Radius(RadiusArgs),
    /// Probability that the flow crosses a small disk
    Epsdisk(EpsdiskArgs),
    /// Log-log diameter-growth exponent from recorded traces
    Exponent(ExponentArgs),
}

#[derive(Args)]
struct HitprobArgs {
    /// Cluster CSV to measure
    #[arg(long, value_name = "FILE")]
    cluster: PathBuf,
    /// Interaction exponent: nonnegative real, `log`, or `inf`
    #[arg(long)]
    alpha: Alpha,
    /// Number of launches
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[command(flatten)]
    common: MeasureCommon,
}

#[derive(Args)]
struct BeurlingArgs {
    /// Interaction exponent: nonnegative real, `log`, or `inf`
    #[arg(long)]
    alpha: Alpha,
    /// Cluster sizes to scan
    #[arg(long, value_delimiter = ',', value_name = "N,N,...", required = true)]
    n_list: Vec<usize>,
    /// Cluster family: straight line or grown with the same alpha
    #[arg(long, value_enum, default_value_t = FamilyArg::Line)]
    family: FamilyArg,
    /// Launches per cluster size
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[command(flatten)]
    common: MeasureCommon,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Line,
    Grown,
}

#[derive(Args)]
struct ArcsArgs {
    /// Cluster CSV to measure (2D)
    #[arg(long, value_name = "FILE")]
    cluster: PathBuf,
    /// Interaction exponent: nonnegative real, `log`, or `inf`
    #[arg(long)]
    alpha: Alpha,
    /// Angular grid resolution
    #[arg(long, default_value_t = 7200)]
    grid: usize,
    #[command(flatten)]
    common: MeasureCommon,
}

#[derive(Args)]
struct RadiusArgs {
    /// Cluster CSV to measure
    #[arg(long, value_name = "FILE")]
    cluster: PathBuf,
    /// Interaction exponent: nonnegative real, `log`, or `inf`
    #[arg(long)]
    alpha: Alpha,
    /// Strictly increasing start radii, smallest >= 10n
    #[arg(long, value_delimiter = ',', value_name = "R,R,...", required = true)]
    radii: Vec<f64>,
    /// Launches per radius
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[command(flatten)]
    common: MeasureCommon,
}

#[derive(Args)]
struct EpsdiskArgs {
    /// Cluster CSV to measure
    #[arg(long, value_name = "FILE")]
    cluster: PathBuf,
    /// Interaction exponent: nonnegative real, `log`, or `inf`
    #[arg(long)]
    alpha: Alpha,
    /// Disk center coordinates, comma separated (2 or 3 to match the cluster)
    #[arg(long, value_delimiter = ',', value_name = "X,Y[,Z]", required = true, allow_negative_numbers = true)]
    y: Vec<f64>,
    /// Disk radius, in (0, 0.1]
    #[arg(long)]
    eps: f64,
    /// Number of launches
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[command(flatten)]
    common: MeasureCommon,
}

#[derive(Args)]
struct ExponentArgs {
    /// Growth trace JSON files (at least 3)
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    traces: Vec<PathBuf>,
    /// Smallest cluster size in the fit window (>= 100)
    #[arg(long)]
    nmin: usize,
    /// Largest cluster size in the fit window
    #[arg(long)]
    nmax: usize,
    #[command(flatten)]
    common: MeasureCommon,
}

/// Write/print the report, record the manifest, then evaluate asserts.
/// Outputs land on disk before asserts run so a failed gate is inspectable.
fn finish_measure(
    common: &MeasureCommon,
    name: &str,
    inputs: &[&Path],
    input_format: &str,
    config: serde_json::Value,
    report: serde_json::Value,
    table: (&str, Vec<String>),
    metrics: &[(&str, f64)],
    summary: &str,
) -> Result<(), CliError> {
    if let Some(csv) = &common.csv {
        ensure_parent(csv)?;
        io::write_table_csv(csv, table.0, &table.1)?;
    }
    match &common.out {
        Some(out) => {
            ensure_parent(out)?;
            io::write_stats_json(out, name, &report)?;
            println!("{summary}");
            println!("report -> {}", out.display());
            if let Some(csv) = &common.csv {
                println!("table -> {}", csv.display());
            }
        }
        None => {
            // Keep stdout a single pipeable JSON document; a CSV requested
            // alongside is written silently.
            let doc = serde_json::json!({
                "format": io::STATS_FORMAT,
                "kind": name,
                "data": report,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }
    // One manifest next to the primary output (the JSON report if written,
    // else the CSV), covering everything the run produced.
    if let Some(anchor) = common.out.as_ref().or(common.csv.as_ref()) {
        let mut manifest =
            io::RunManifest::new(&format!("measure {name}"), cli_argv(), common.seed, config);
        for input in inputs {
            manifest.add_input(input, input_format)?;
        }
        if let Some(out) = &common.out {
            manifest.add_output(out, io::STATS_FORMAT)?;
        }
        if let Some(csv) = &common.csv {
            manifest.add_output(csv, io::TABLE_FORMAT)?;
        }
        manifest.write(&manifest_path(anchor))?;
    }
    for expr in &common.asserts {
        let actual = check_assert(expr, metrics)?;
        println!("assert ok: {expr} (actual value {actual})");
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}

/// `metric OP value` with OP in {<=, >=, ==, !=, <, >}. Returns the actual
/// value on success.
fn check_assert(expr: &str, metrics: &[(&str, f64)]) -> Result<f64, CliError> {
    let ops = ["<=", ">=", "==", "!=", "<", ">"];
    let (op, at) = ops
        .iter()
        .filter_map(|op| expr.find(op).map(|at| (*op, at)))
        .min_by_key(|&(op, at)| (at, std::cmp::Reverse(op.len())))
        .ok_or_else(|| usage(format!("assert `{expr}` has no comparison operator")))?;
    let name = expr[..at].trim();
    let value: f64 = expr[at + op.len()..]
        .trim()
        .parse()
        .map_err(|_| usage(format!("assert `{expr}` has no numeric right-hand side")))?;
    let actual = metrics
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let known: Vec<&str> = metrics.iter().map(|(n, _)| *n).collect();
            usage(format!("unknown metric `{name}`; available: {}", known.join(", ")))
        })?;
    let pass = match op {
        "<=" => actual <= value,
        ">=" => actual >= value,
        "==" => actual == value,
        "!=" => actual != value,
        "<" => actual < value,
        ">" => actual > value,
        _ => unreachable!(),
    };
    if pass {
        Ok(actual)
    } else {
        Err(CliError::AssertFailed { expr: expr.to_string(), actual })
    }
}

fn cmd_hitprob(args: HitprobArgs) -> Result<(), CliError> {
    let (flow, file_workers) = args.common.flow.resolve()?;
    let workers = resolve_workers(args.common.workers, file_workers)?;
    let stats = match io::cluster_csv_dim(&args.cluster)? {
        2 => {
            let c = io::read_cluster_csv::<2>(&args.cluster)?;
            hit_probabilities(&c, args.alpha.0, args.samples, args.common.seed, &flow, workers)?
        }
        _ => {
            let c = io::read_cluster_csv::<3>(&args.cluster)?;
            hit_probabilities(&c, args.alpha.0, args.samples, args.common.seed, &flow, workers)?
        }
    };
    let best = stats.max_particle().expect("cluster is nonempty").clone();
    let metrics = [
        ("max_p", best.p_hat),
        ("attached_fraction", stats.attached_fraction()),
        ("stalls", stats.stall_count as f64),
        ("failures", stats.failure_count as f64),
    ];
    let summary = format!(
        "{} launches: attached {:.4}, max p_hat {:.5} [{:.5}, {:.5}] at particle {}",
        stats.total_samples,
        stats.attached_fraction(),
        best.p_hat,
        best.wilson_low,
        best.wilson_high,
        best.id
    );
    let config = serde_json::json!({
        "kind": args.alpha.0, "samples": args.samples, "seed": args.common.seed,
        "workers": workers, "flow": &flow,
    });
    let table = (
        "id,hits,p_hat,wilson_low,wilson_high",
        stats
            .per_particle
            .iter()
            .map(|p| format!("{},{},{},{},{}", p.id, p.hits, p.p_hat, p.wilson_low, p.wilson_high))
            .collect(),
    );
    finish_measure(
        &args.common,
        "hitprob",
        &[&args.cluster],
        io::CLUSTER_FORMAT,
        config,
        serde_json::to_value(&stats).unwrap(),
        table,
        &metrics,
        &summary,
    )
}

fn cmd_beurling(args: BeurlingArgs) -> Result<(), CliError> {
    let (flow, file_workers) = args.common.flow.resolve()?;
    let workers = resolve_workers(args.common.workers, file_workers)?;
    let family = match args.family {
        FamilyArg::Line => ClusterFamily::Line,
        FamilyArg::Grown => ClusterFamily::Grown,
    };
    let rows = beurling_scan(
        args.alpha.0,
        &args.n_list,
        family,
        args.samples,
        args.common.seed,
        &flow,
        workers,
    )?;
    let first = rows.first().expect("n_list is nonempty");
    let last = rows.last().expect("n_list is nonempty");
    let metrics = [
        ("first_max_p", first.max_p_hat),
        ("last_max_p", last.max_p_hat),
        ("ratio", last.max_p_hat / first.max_p_hat),
    ];
    let mut summary = String::new();
    for row in &rows {
        summary.push_str(&format!(
            "n={}: max p_hat {:.6} [{:.6}, {:.6}] at particle {}\n",
            row.n, row.max_p_hat, row.wilson_low, row.wilson_high, row.max_particle
        ));
    }
    summary.push_str(&format!("ratio last/first = {:.4}", last.max_p_hat / first.max_p_hat));
    let config = serde_json::json!({
        "kind": args.alpha.0, "n_list": args.n_list, "family": family,
        "samples": args.samples, "seed": args.common.seed, "workers": workers, "flow": &flow,
    });
    let table = (
        "n,max_particle,max_p_hat,wilson_low,wilson_high,stall_count,failure_count",
        rows.iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.max_particle,
                    r.max_p_hat,
                    r.wilson_low,
                    r.wilson_high,
                    r.stall_count,
                    r.failure_count
                )
            })
            .collect(),
    );
    finish_measure(
        &args.common,
        "beurling",
        &[],
        "",
        config,
        serde_json::to_value(&rows).unwrap(),
        table,
        &metrics,
        &summary,
    )
}

fn cmd_arcs(args: ArcsArgs) -> Result<(), CliError> {
    let (flow, file_workers) = args.common.flow.resolve()?;
    let workers = resolve_workers(args.common.workers, file_workers)?;
    if io::cluster_csv_dim(&args.cluster)? != 2 {
        return Err(usage("arc structure is defined for 2D clusters only"));
    }
    let cluster = io::read_cluster_csv::<2>(&args.cluster)?;
    let report = arc_structure(&cluster, args.alpha.0, args.grid, &flow, workers)?;
    let metrics = [
        ("max_arcs", report.max_arcs() as f64),
        ("stalled_angles", report.stalled_angles as f64),
        ("failed_angles", report.failed_angles as f64),
    ];
    let summary = format!(
        "grid {}: max arcs per particle {}, stalled angles {}, failed angles {}",
        report.grid,
        report.max_arcs(),
        report.stalled_angles,
        report.failed_angles
    );
    let config = serde_json::json!({
        "kind": args.alpha.0, "grid": args.grid, "seed": args.common.seed,
        "workers": workers, "flow": &flow,
    });
    let table = (
        "id,arcs",
        report.arcs.iter().enumerate().map(|(id, a)| format!("{id},{a}")).collect(),
    );
    finish_measure(
        &args.common,
        "arcs",
        &[&args.cluster],
        io::CLUSTER_FORMAT,
        config,
        serde_json::to_value(&report).unwrap(),
        table,
        &metrics,
        &summary,
    )
}

fn cmd_radius(args: RadiusArgs) -> Result<(), CliError> {
    let (flow, file_workers) = args.common.flow.resolve()?;
    let workers = resolve_workers(args.common.workers, file_workers)?;
    let report = match io::cluster_csv_dim(&args.cluster)? {
        2 => {
            let c = io::read_cluster_csv::<2>(&args.cluster)?;
            radius_convergence(&c, args.alpha.0, args.samples, &args.radii, args.common.seed, &flow, workers)?
        }
        _ => {
            let c = io::read_cluster_csv::<3>(&args.cluster)?;
            radius_convergence(&c, args.alpha.0, args.samples, &args.radii, args.common.seed, &flow, workers)?
        }
    };
    let max_tv = report.rows.iter().map(|r| r.tv).fold(0.0, f64::max);
    let last_tv = report.rows.last().map(|r| r.tv).unwrap_or(0.0);
    let metrics = [("max_tv", max_tv), ("last_tv", last_tv)];
    let mut summary = String::new();
    for row in &report.rows {
        summary.push_str(&format!(
            "r {} -> {}: TV {:.6} (se bound {:.6})\n",
            row.r_lo, row.r_hi, row.tv, row.tv_se
        ));
    }
    summary.push_str(&format!("max TV {max_tv:.6}"));
    let config = serde_json::json!({
        "kind": args.alpha.0, "radii": args.radii, "samples": args.samples,
        "seed": args.common.seed, "workers": workers, "flow": &flow,
    });
    let table = (
        "r_lo,r_hi,tv,tv_se",
        report
            .rows
            .iter()
            .map(|r| format!("{},{},{},{}", r.r_lo, r.r_hi, r.tv, r.tv_se))
            .collect(),
    );
    finish_measure(
        &args.common,
        "radius",
        &[&args.cluster],
        io::CLUSTER_FORMAT,
        config,
        serde_json::to_value(&report).unwrap(),
        table,
        &metrics,
        &summary,
    )
}

fn cmd_epsdisk(args: EpsdiskArgs) -> Result<(), CliError> {
    let (flow, file_workers) = args.common.flow.resolve()?;
    let workers = resolve_workers(args.common.workers, file_workers)?;
    let dim = io::cluster_csv_dim(&args.cluster)?;
    if args.y.len() != dim {
        return Err(usage(format!(
            "--y has {} coordinates but the cluster is {dim}D",
            args.y.len()
        )));
    }
    let stat = match dim {
        2 => {
            let c = io::read_cluster_csv::<2>(&args.cluster)?;
            eps_disk_probability(
                &c,
                args.alpha.0,
                [args.y[0], args.y[1]],
                args.eps,
                args.samples,
                args.common.seed,
                &flow,
                workers,
            )?
        }
        _ => {
            let c = io::read_cluster_csv::<3>(&args.cluster)?;
            eps_disk_probability(
                &c,
                args.alpha.0,
                [args.y[0], args.y[1], args.y[2]],
                args.eps,
                args.samples,
                args.common.seed,
                &flow,
                workers,
            )?
        }
    };
    let metrics = [
        ("p_hat", stat.p_hat),
        ("absorbed", stat.absorbed as f64),
        ("wilson_low", stat.wilson_low),
        ("wilson_high", stat.wilson_high),
    ];
    let summary = format!(
        "absorbed {}/{} launches: p_hat {:.6} [{:.6}, {:.6}]",
        stat.absorbed, stat.samples, stat.p_hat, stat.wilson_low, stat.wilson_high
    );
    let config = serde_json::json!({
        "kind": args.alpha.0, "y": args.y, "eps": args.eps, "samples": args.samples,
        "seed": args.common.seed, "workers": workers, "flow": &flow,
    });
    let table = (
        "p_hat,absorbed,attached,stall_count,failure_count,samples,wilson_low,wilson_high",
        vec![format!(
            "{},{},{},{},{},{},{},{}",
            stat.p_hat,
            stat.absorbed,
            stat.attached,
            stat.stall_count,
            stat.failure_count,
            stat.samples,
            stat.wilson_low,
            stat.wilson_high
        )],
    );
    finish_measure(
        &args.common,
        "epsdisk",
        &[&args.cluster],
        io::CLUSTER_FORMAT,
        config,
        serde_json::to_value(&stat).unwrap(),
        table,
        &metrics,
        &summary,
    )
}

fn cmd_exponent(args: ExponentArgs) -> Result<(), CliError> {
    let traces: Vec<GrowthTrace> = args
        .traces
        .iter()
        .map(|p| io::read_trace_json(p))
        .collect::<Result<_, _>>()?;
    let fit = growth_exponent(&traces, args.nmin, args.nmax)?;
    let metrics = [
        ("slope", fit.slope),
        ("r_squared", fit.r_squared),
        ("min_seed_slope", fit.per_seed_slopes.iter().copied().fold(f64::INFINITY, f64::min)),
        ("max_seed_slope", fit.per_seed_slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    ];
    let per_seed: Vec<String> =
        fit.per_seed_slopes.iter().map(|s| format!("{s:.4}")).collect();
    let summary = format!(
        "slope {:.4} (r^2 {:.4}) over n in [{}, {}]; per-seed slopes [{}]",
        fit.slope,
        fit.r_squared,
        fit.n_min,
        fit.n_max,
        per_seed.join(", ")
    );
    let config = serde_json::json!({
        "traces": args.traces, "nmin": args.nmin, "nmax": args.nmax, "seed": args.common.seed,
    });
    let inputs: Vec<&Path> = args.traces.iter().map(|p| p.as_path()).collect();
    let table = (
        "n,median_diam",
        fit.grid.iter().zip(&fit.medians).map(|(n, d)| format!("{n},{d}")).collect(),
    );
    finish_measure(
        &args.common,
        "exponent",
        &inputs,
        io::TRACE_FORMAT,
        config,
        serde_json::to_value(&fit).unwrap(),
        table,
        &metrics,
        &summary,
    )
}

// ---------------------------------------------------------------------------
// render

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ColorByArg {
    Flat,
    Parent,
    Order,
    AttachAngle,
}

#[derive(Args)]
struct RenderArgs {
    /// Cluster CSV to draw
    #[arg(long, value_name = "FILE")]
    cluster: PathBuf,
    /// Output SVG path [default: the cluster path with .svg]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Overlay this many equispaced-angle trajectories (2D only)
    #[arg(long, default_value_t = 0, value_name = "K")]
    flow_lines: usize,
    /// Fill color scheme
    #[arg(long, value_enum, default_value_t = ColorByArg::Order)]
    color_by: ColorByArg,
    /// Potential for the trajectory overlay
    #[arg(long, default_value = "log")]
    alpha: Alpha,
    #[command(flatten)]
    flow: FlowFlags,
}

fn cmd_render(args: RenderArgs) -> Result<(), CliError> {
    let (flow, _) = args.flow.resolve()?;
    let opts = RenderOptions {
        color_by: match args.color_by {
            ColorByArg::Flat => ColorBy::Flat,
            ColorByArg::Parent => ColorBy::Parent,
            ColorByArg::Order => ColorBy::Order,
            ColorByArg::AttachAngle => ColorBy::AttachAngle,
        },
        flow_lines: args.flow_lines,
        flow,
    };
    let svg = match io::cluster_csv_dim(&args.cluster)? {
        2 => render_svg(&io::read_cluster_csv::<2>(&args.cluster)?, args.alpha.0, &opts)?,
        _ => render_svg(&io::read_cluster_csv::<3>(&args.cluster)?, args.alpha.0, &opts)?,
    };
    let out = args.out.clone().unwrap_or_else(|| args.cluster.with_extension("svg"));
    ensure_parent(&out)?;
    std::fs::write(&out, &svg).map_err(GfaError::from)?;

    let config = serde_json::json!({
        "flow_lines": args.flow_lines,
        "color_by": format!("{:?}", args.color_by),
        "kind": args.alpha.0,
    });
    let mut manifest = io::RunManifest::new("render", cli_argv(), 0, config);
    manifest.add_input(&args.cluster, io::CLUSTER_FORMAT)?;
    manifest.add_output(&out, "svg")?;
    manifest.write(&manifest_path(&out))?;
    println!("{} -> {} (sha256 {})", args.cluster.display(), out.display(), io::sha256_hex(svg.as_bytes()));
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Args)]
struct VerifyArgs {
    /// Cluster CSV to check
    #[arg(long, value_name = "FILE")]
    cluster: PathBuf,
    /// Contact tolerance for parent-distance checks [default: 1e-9]
    #[arg(long)]
    contact_tol: Option<f64>,
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let tol = Tolerances { contact: args.contact_tol.unwrap_or_else(|| FlowConfig::default().contact_tol) };
    let violations = match io::cluster_csv_dim(&args.cluster)? {
        2 => verify_dim(&io::read_cluster_csv::<2>(&args.cluster)?, &tol),
        _ => verify_dim(&io::read_cluster_csv::<3>(&args.cluster)?, &tol),
    };
    match violations {
        (n, v) if v.is_empty() => {
            println!("ok: {n} particles, 0 violations");
            Ok(())
        }
        (n, v) => {
            for violation in &v {
                println!("violation: {violation}");
            }
            println!("{n} particles, {} violations", v.len());
            Err(CliError::VerifyFailed { count: v.len() })
        }
    }
}

fn verify_dim<const D: usize>(cluster: &Cluster<D>, tol: &Tolerances) -> (usize, Vec<String>) {
    let violations = cluster.verify(tol).iter().map(|v| v.to_string()).collect();
    (cluster.len(), violations)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Grow(args) => cmd_grow(args),
        Cmd::Measure(MeasureCmd::Hitprob(args)) => cmd_hitprob(args),
        Cmd::Measure(MeasureCmd::Beurling(args)) => cmd_beurling(args),
        Cmd::Measure(MeasureCmd::Arcs(args)) => cmd_arcs(args),
        Cmd::Measure(MeasureCmd::Radius(args)) => cmd_radius(args),
        Cmd::Measure(MeasureCmd::Epsdisk(args)) => cmd_epsdisk(args),
        Cmd::Measure(MeasureCmd::Exponent(args)) => cmd_exponent(args),
        Cmd::Render(args) => cmd_render(args),
        Cmd::Verify(args) => cmd_verify(args),
    }
}
