//! `coarsedeg`: coarse degree, homotopy checks and fixed point witnesses from
//! the command line.
//!
//! Exit codes: 0 success, stable degree or witness found; 1 usage or
//! evaluation error; 2 unstable degree; 3 refuted at budget; 4 demo failure.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coarsedeg::cfpp;
use coarsedeg::chains::boundary;
use coarsedeg::degree::{self, pushforward};
use coarsedeg::demo::{self, Bundle};
use coarsedeg::homotopy::{self, HomotopyConfig};
use coarsedeg::lattice::{fundamental_cycle, Window};
use coarsedeg::maps::{self, implied_dim, parse_map, vertex_map, MapSpec};
use serde::Serialize;
use thiserror::Error;

use output::{Envelope, Table};

const EXIT_ERROR: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_REFUTED: u8 = 3;
const EXIT_DEMO_FAILED: u8 = 4;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Map(#[from] maps::MapError),
    #[error(transparent)]
    Degree(#[from] degree::DegreeError),
    #[error(transparent)]
    Cfpp(#[from] cfpp::CfppError),
    #[error(transparent)]
    Demo(#[from] demo::DemoError),
    #[error(transparent)]
    Lattice(#[from] coarsedeg::lattice::LatticeError),
    #[error(transparent)]
    Chain(#[from] coarsedeg::chains::ChainError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Parser, Debug)]
#[command(name = "coarsedeg", version, about = "Coarse degree, coarse homotopy and coarse fixed point tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Degree of a map via signed covering counts of the pushed-forward fundamental cycle.
    Degree(DegreeArgs),
    /// Search for a coarse fixed point witness along a radius ladder.
    Cfpp(CfppArgs),
    /// Uniform checks for the linear homotopy from the antipodal map, plus the triangle bound.
    Homotopy(HomotopyArgs),
    /// Sampled bornologous modulus and properness ladder of a map.
    CoarseCheck(CoarseCheckArgs),
    /// Run a reproduction bundle and print a pass/fail table.
    Demo(DemoArgs),
    /// Print the windowed fundamental cycle, optionally pushed forward or with its boundary.
    DumpChain(DumpChainArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for every sampled quantity.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Add wall-clock duration to the report (makes output run-dependent).
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// Builtin map or expression, e.g. "reflect(0)", "fold{translate(1)}", "(x1+1, abs(x2))".
    #[arg(long)]
    map: String,
    /// Ambient dimension [default: implied by the map text, else 2].
    #[arg(long)]
    dim: Option<usize>,
}

impl MapArgs {
    fn resolve(&self) -> Result<(MapSpec, usize), CliError> {
        let dim = self.dim.or_else(|| implied_dim(&self.map)).unwrap_or(2);
        Ok((parse_map(&self.map, dim)?, dim))
    }
}

#[derive(Args, Debug)]
struct DegreeArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Window half-width in lattice units.
    #[arg(long, default_value_t = 8)]
    window: i64,
    /// Lattice spacing in world units.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Number of covering test points.
    #[arg(long, default_value_t = degree::DEFAULT_TEST_POINTS)]
    test_points: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CfppArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Ray distance budget R.
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    /// Radius ladder start:stop:step.
    #[arg(long, default_value = "10:100:10")]
    radii: String,
    /// Quasi-uniform points scanned per sphere.
    #[arg(long, default_value_t = 256)]
    points_per_sphere: usize,
    /// Scan only the closed upper half-space (last coordinate >= 0).
    #[arg(long, default_value_t = false)]
    halfspace: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct HomotopyArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Sampling window half-width for bornology, pseudocontinuity and the triangle bound.
    #[arg(long, default_value_t = 16)]
    window: i64,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Ball radius T.
    #[arg(long, default_value_t = 1.0)]
    ball: f64,
    /// Number of t-grid steps on [0, 1].
    #[arg(long, default_value_t = 16)]
    t_steps: usize,
    /// Properness window ladder, comma-separated half-widths.
    #[arg(long, default_value = "4,8,16")]
    ladder: String,
    /// Bornology radii, comma-separated.
    #[arg(long, default_value = "0.5,1,2,4")]
    radii: String,
    /// Seeded pairs per bornology radius.
    #[arg(long, default_value_t = 256)]
    pairs: usize,
    /// Seeded samples for the triangle bound.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CoarseCheckArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Sampling window half-width for the bornologous modulus.
    #[arg(long, default_value_t = 16)]
    window: i64,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Bornology radii, comma-separated.
    #[arg(long, default_value = "0.5,1,2,4,8")]
    radii: String,
    #[arg(long, default_value_t = 256)]
    pairs: usize,
    /// Ball radius T for the properness ladder.
    #[arg(long, default_value_t = 1.0)]
    ball: f64,
    /// Properness window ladder, comma-separated half-widths.
    #[arg(long, default_value = "4,8,16")]
    ladder: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DemoArgs {
    /// lemma1, lemma2, lemma3 or theorem.
    bundle: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DumpChainArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    window: i64,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Push the cycle forward along this map's vertex map first.
    #[arg(long)]
    map: Option<String>,
    /// Print the boundary instead of the chain.
    #[arg(long, default_value_t = false)]
    boundary: bool,
    #[command(flatten)]
    common: Common,
}

/// Every resolved setting of a run; embedded in each report.
#[derive(Debug, Serialize, Default)]
struct RunConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    window: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_points: Option<usize>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radii: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points_per_sphere: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    halfspace: Option<bool>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    ball: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bundle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<bool>,
    format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
}

impl RunConfig {
    fn new(command: &'static str, common: &Common) -> Self {
        RunConfig {
            command,
            seed: common.seed,
            format: Some(common.format),
            output: common.output.clone(),
            ..Default::default()
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry {s:?} in {text:?}"))))
        .collect()
}

fn window(dim: usize, half_width: i64, spacing: f64) -> Result<Window, CliError> {
    let w = Window::new(dim, half_width).with_spacing(spacing);
    w.validate()?;
    Ok(w)
}

fn ladder(dim: usize, text: &str, spacing: f64) -> Result<(Vec<i64>, Vec<Window>), CliError> {
    let widths: Vec<i64> = parse_list(text, "ladder")?;
    let ws = widths.iter().map(|&l| window(dim, l, spacing)).collect::<Result<_, _>>()?;
    Ok((widths, ws))
}

/// A finished run: the report body, an optional flat table and the exit code.
struct Outcome {
    config: RunConfig,
    result: serde_json::Value,
    table: Table,
    code: u8,
    /// Human-readable summary printed to stderr.
    summary: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn cmd_degree(a: &DegreeArgs) -> Result<Outcome, CliError> {
    let (m, dim) = a.map.resolve()?;
    let w = window(dim, a.window, a.spacing)?;
    let r = degree::degree(&m, &w, a.test_points, a.common.seed)?;
    let mut config = RunConfig::new("degree", &a.common);
    config.map = Some(m.to_string());
    config.n = Some(dim);
    config.window = Some(a.window);
    config.spacing = Some(a.spacing);
    config.test_points = Some(a.test_points);

    let mut header = vec!["index".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.extend(["covering".into(), "covering_half".into()]);
    let rows = r
        .test_points
        .iter()
        .enumerate()
        .map(|(i, tp)| {
            let mut row = vec![i.to_string()];
            row.extend(tp.p.iter().map(|v| v.to_string()));
            row.extend([tp.covering.to_string(), tp.covering_half.to_string()]);
            row
        })
        .collect();
    let code = if r.stable && r.d.is_some() { 0 } else { EXIT_UNSTABLE };
    Ok(Outcome {
        config,
        result: to_value(&r),
        table: Table { header, rows },
        code,
        summary: None,
    })
}

fn cmd_cfpp(a: &CfppArgs) -> Result<Outcome, CliError> {
    let (m, dim) = a.map.resolve()?;
    let radii = cfpp::parse_radii(&a.radii)?;
    let v = cfpp::search_witness(&m, a.budget, &radii, a.points_per_sphere, a.common.seed, a.halfspace)?;
    let mut config = RunConfig::new("cfpp", &a.common);
    config.map = Some(m.to_string());
    config.n = Some(dim);
    config.budget = Some(a.budget);
    config.radii = Some(radii);
    config.points_per_sphere = Some(a.points_per_sphere);
    config.halfspace = Some(a.halfspace);

    let mut header = vec!["r".to_string(), "min_max_dist".to_string(), "within_budget".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.extend((1..=dim).map(|i| format!("zeta{i}")));
    let rows = v
        .per_radius
        .iter()
        .map(|s| {
            let mut row = vec![s.r.to_string(), s.min_max_dist.to_string(), (s.min_max_dist <= a.budget).to_string()];
            row.extend(s.x.iter().map(|c| c.to_string()));
            row.extend(s.zeta.iter().map(|c| c.to_string()));
            row
        })
        .collect();
    let code = if v.found { 0 } else { EXIT_REFUTED };
    let summary = if v.found { "witness found" } else { "refuted at budget/ladder" };
    Ok(Outcome {
        config,
        result: to_value(&v),
        table: Table { header, rows },
        code,
        summary: Some(summary.into()),
    })
}

fn cmd_homotopy(a: &HomotopyArgs) -> Result<Outcome, CliError> {
    let (m, dim) = a.map.resolve()?;
    let (widths, ladder) = ladder(dim, &a.ladder, a.spacing)?;
    let cfg = HomotopyConfig {
        radii: parse_list(&a.radii, "radius")?,
        t_grid: homotopy::uniform_t_grid(a.t_steps),
        window: window(dim, a.window, a.spacing)?,
        ladder,
        ball_radius: a.ball,
        pairs_per_radius: a.pairs,
        triangle_samples: a.samples,
        seed: a.common.seed,
    };
    let rep = homotopy::run_homotopy_checks(&m, &cfg)?;
    let mut config = RunConfig::new("homotopy", &a.common);
    config.map = Some(m.to_string());
    config.n = Some(dim);
    config.window = Some(a.window);
    config.spacing = Some(a.spacing);
    config.ball = Some(a.ball);
    config.t_grid = Some(cfg.t_grid.clone());
    config.ladder = Some(widths);
    config.radii = Some(cfg.radii.clone());
    config.pairs = Some(a.pairs);

    let rows = rep
        .uniformly_bornologous
        .samples
        .iter()
        .map(|s| vec![s.r.to_string(), s.s.to_string()])
        .collect();
    let summary = format!(
        "properness {:?}, pseudocontinuity R={}, triangle bound C={} with {} violations",
        rep.uniformly_proper.verdict,
        rep.pseudocontinuity.max_jump,
        rep.triangle.c,
        rep.triangle.violations.len() + rep.triangle.step_violations.len()
    );
    Ok(Outcome {
        config,
        result: to_value(&rep),
        table: Table { header: vec!["R".into(), "S".into()], rows },
        code: 0,
        summary: Some(summary),
    })
}

fn cmd_coarse_check(a: &CoarseCheckArgs) -> Result<Outcome, CliError> {
    let (m, dim) = a.map.resolve()?;
    let radii: Vec<f64> = parse_list(&a.radii, "radius")?;
    let w = window(dim, a.window, a.spacing)?;
    let (widths, ladder) = ladder(dim, &a.ladder, a.spacing)?;
    let modulus = maps::estimate_bornologous_modulus(&m, &radii, &w, a.pairs, a.common.seed)?;
    let proper = maps::check_properness(&m, a.ball, &ladder)?;
    let mut config = RunConfig::new("coarse-check", &a.common);
    config.map = Some(m.to_string());
    config.n = Some(dim);
    config.window = Some(a.window);
    config.spacing = Some(a.spacing);
    config.radii = Some(radii);
    config.pairs = Some(a.pairs);
    config.ball = Some(a.ball);
    config.ladder = Some(widths);

    let rows = modulus.samples.iter().map(|s| vec![s.r.to_string(), s.s.to_string()]).collect();
    let summary = format!("properness {:?}", proper.verdict);
    Ok(Outcome {
        config,
        result: serde_json::json!({ "bornologous": modulus, "properness": proper }),
        table: Table { header: vec!["R".into(), "S".into()], rows },
        code: 0,
        summary: Some(summary),
    })
}

fn cmd_demo(a: &DemoArgs) -> Result<Outcome, CliError> {
    let bundle: Bundle = a.bundle.parse()?;
    let rep = demo::run(bundle, a.common.seed)?;
    let mut config = RunConfig::new("demo", &a.common);
    config.bundle = Some(bundle.to_string());
    let table = Table {
        header: ["check", "expected", "observed", "pass"].map(String::from).to_vec(),
        rows: rep
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), c.expected.clone(), c.observed.clone(), c.pass.to_string()])
            .collect(),
    };
    let summary = format!("{}\n{bundle}: {}", table.render(), if rep.pass { "PASS" } else { "FAIL" });
    Ok(Outcome {
        config,
        result: to_value(&rep),
        table,
        code: if rep.pass { 0 } else { EXIT_DEMO_FAILED },
        summary: Some(summary),
    })
}

fn cmd_dump_chain(a: &DumpChainArgs) -> Result<Outcome, CliError> {
    let w = window(a.dim, a.window, a.spacing)?;
    let mut chain = fundamental_cycle(&w)?;
    let mut config = RunConfig::new("dump-chain", &a.common);
    config.n = Some(a.dim);
    config.window = Some(a.window);
    config.spacing = Some(a.spacing);
    config.boundary = Some(a.boundary);
    if let Some(text) = &a.map {
        let m = parse_map(text, a.dim)?;
        let vm = vertex_map(&m, a.spacing);
        chain = pushforward(&chain, |v| vm.apply(v))?;
        config.map = Some(m.to_string());
    }
    if a.boundary {
        chain = boundary(&chain)?;
    }
    let doc = chain.to_document();
    let q = doc.q;
    let mut header = vec!["coeff".to_string()];
    header.extend((0..=q).map(|i| format!("v{i}")));
    let rows = doc
        .terms
        .iter()
        .map(|t| {
            let mut row = vec![t.coeff.to_string().trim_matches('"').to_string()];
            row.extend(t.vertices.iter().map(|v| {
                v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
            }));
            row
        })
        .collect();
    Ok(Outcome {
        config,
        result: to_value(&doc),
        table: Table { header, rows },
        code: 0,
        summary: None,
    })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("COARSEDEG_THREADS") else { return Ok(()) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("COARSEDEG_THREADS must be a positive integer, got {text:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let start = Instant::now();
    let (outcome, common) = match &cli.command {
        Command::Degree(a) => (cmd_degree(a)?, &a.common),
        Command::Cfpp(a) => (cmd_cfpp(a)?, &a.common),
        Command::Homotopy(a) => (cmd_homotopy(a)?, &a.common),
        Command::CoarseCheck(a) => (cmd_coarse_check(a)?, &a.common),
        Command::Demo(a) => (cmd_demo(a)?, &a.common),
        Command::DumpChain(a) => (cmd_dump_chain(a)?, &a.common),
    };
    let duration_ms = common.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let envelope = Envelope {
        version: coarsedeg::VERSION,
        config: &outcome.config,
        result: &outcome.result,
        duration_ms,
    };
    output::emit(&envelope, &outcome.table, common.format, common.output.as_deref())?;
    if let Some(s) = &outcome.summary {
        eprintln!("{s}");
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
