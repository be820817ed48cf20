//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure,
//! 3 internal numerical failure.

pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::automata::{builtin_group, SelfSimilarGroup, BUILTIN_GROUPS};
use crate::charpoly::{alpha_grid, spectral_correspondence};
use crate::eigen::{hausdorff_distance, symmetric_eigenvalues, DEFAULT_CLUSTER_THRESHOLD, MAX_DENSE_DIMENSION};
use crate::error::Error;
use crate::levelrep::uniform_hecke;
use crate::schreier::dot::{to_dot_string, write_edge_csv};
use crate::schreier::{action_graph, ball_growth, growth_exponent, LabeledGraph};
use crate::spectra::{predicted_spectrum, set_distance, SpectralSet};
use crate::substitution::{expand, gamma_substitution_system, parse_system, system_to_text};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "FRACTAL_SPECTRA_THREADS";

pub const MAX_JULIA_DEPTH: usize = 20;
/// Largest vertex count accepted by `graph`.
pub const MAX_GRAPH_VERTICES: usize = 1 << 21;
pub const MAX_CORRESPONDENCE_LEVEL: usize = 7;
pub const MAX_ALPHA_COLUMNS: usize = 100_001;
pub const MAX_SUBSTITUTION_STEPS: usize = 8;

const INTERVAL_TOLERANCE: f64 = 1e-9;
const JULIA_TOLERANCE: f64 = 1e-6;
/// Sample points per interval when measuring Hausdorff distance.
const INTERVAL_SAMPLES: usize = 1001;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fractal-spectra",
    version,
    about = "Spectra, Schreier graphs and limit sets of self-similar groups",
    after_help = "Built-in groups: grigorchuk, grigorchuk-tilde, gamma, gamma-bar, gamma-barbar.\n\
                  Set FRACTAL_SPECTRA_THREADS to limit worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the level-n Markov operator, compared with the limit spectrum.
    Spectrum(SpectrumArgs),
    /// The level-n Schreier graph, optionally with its growth series.
    Graph(GraphArgs),
    /// Eigenvalues of α(A + A⁻¹) + (X + X⁻¹) over a grid of α.
    Correspondence(CorrespondenceArgs),
    /// Run the verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Expand a substitution system.
    Substitute(SubstituteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Dot,
    Svg,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Built-in group name.
    pub group: Option<String>,
    /// Group definition file, instead of a built-in name.
    #[arg(long, value_name = "FILE", conflicts_with = "group")]
    pub group_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Tree level; d^n must not exceed 8192.
    #[arg(short = 'n', long)]
    pub level: usize,
    /// Julia-set depth, 0..=20.
    #[arg(long, default_value_t = 14)]
    pub depth: usize,
    /// Membership tolerance (default 1e-6 with Julia parts, 1e-9 otherwise).
    #[arg(long)]
    pub tol: Option<f64>,
    /// csv or json.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Tree level; d^n must not exceed 2^21.
    #[arg(short = 'n', long)]
    pub level: usize,
    /// dot, csv or json.
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    pub format: Format,
    /// Append the growth series and exponent; optional fit window `LO,HI`.
    #[arg(long, value_name = "WINDOW", num_args = 0..=1, default_missing_value = "auto")]
    pub growth: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CorrespondenceArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Tree level, at most 7; the alphabet must have size 3.
    #[arg(short = 'n', long, default_value_t = 6)]
    pub level: usize,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha_step: f64,
    /// csv, json or svg.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated check numbers (1-13) or names.
    #[arg(long)]
    pub only: Option<String>,
    /// Highest level for the level-indexed checks, 1..=8.
    #[arg(long, default_value_t = 8)]
    pub max_level: usize,
    /// Julia-set depth, 14..=20.
    #[arg(long, default_value_t = 14)]
    pub depth: usize,
    /// Seed for the random sample points.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random sample points per level in the product-formula check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Perturb one product-formula coefficient by this amount.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb_phi: f64,
    /// Include wall-clock timings in the JSON report.
    #[arg(long)]
    pub timings: bool,
    /// Only json is supported.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SubstituteArgs {
    /// Substitution file (the built-in system for the 3-ary group when absent).
    #[arg(long, value_name = "FILE")]
    pub system: Option<PathBuf>,
    /// Number of expansion steps, at most 8.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Print the system in file format instead of expanding it.
    #[arg(long)]
    pub dump_system: bool,
    /// dot, csv or json.
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Resolved settings shared by the computing commands.
#[derive(Debug)]
pub struct RunConfig {
    pub group: SelfSimilarGroup,
    /// Built-in name, when the group is one (enables the limit spectrum).
    pub builtin: Option<String>,
    pub level: usize,
    pub depth: usize,
    pub tol: Option<f64>,
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(e) => match e {
                Error::NotSymmetric { .. } | Error::NoConvergence | Error::EmptySet => EXIT_INTERNAL,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(message: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(message.into()))
}

fn load_group(args: &GroupArgs) -> CliResult<(SelfSimilarGroup, Option<String>)> {
    match (&args.group, &args.group_file) {
        (Some(name), None) => {
            if !BUILTIN_GROUPS.contains(&name.as_str()) {
                return usage(format!("unknown group `{name}` (expected one of {})", BUILTIN_GROUPS.join(", ")));
            }
            Ok((builtin_group(name)?, Some(name.clone())))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok((SelfSimilarGroup::from_definition(&text)?, None))
        }
        _ => usage("give a built-in group name or --group-file"),
    }
}

fn check_format(format: Format, allowed: &[Format], command: &str) -> CliResult<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        usage(format!("format {format:?} is not available for `{command}`").to_lowercase())
    }
}

/// `d^level`, or `None` on overflow.
fn level_size(degree: usize, level: usize) -> Option<usize> {
    u32::try_from(level).ok().and_then(|l| degree.checked_pow(l))
}

impl RunConfig {
    fn spectrum(args: &SpectrumArgs) -> CliResult<Self> {
        check_format(args.format, &[Format::Csv, Format::Json], "spectrum")?;
        if args.depth > MAX_JULIA_DEPTH {
            return usage(format!("--depth must be at most {MAX_JULIA_DEPTH}"));
        }
        if let Some(t) = args.tol {
            if !(t.is_finite() && t > 0.0) {
                return usage("--tol must be positive");
            }
        }
        let (group, builtin) = load_group(&args.group)?;
        match level_size(group.degree(), args.level) {
            Some(n) if n <= MAX_DENSE_DIMENSION => {}
            _ => return usage(format!("level {} exceeds the dense bound of {MAX_DENSE_DIMENSION} vertices", args.level)),
        }
        Ok(Self { group, builtin, level: args.level, depth: args.depth, tol: args.tol, format: args.format })
    }

    fn graph(args: &GraphArgs) -> CliResult<Self> {
        check_format(args.format, &[Format::Dot, Format::Csv, Format::Json], "graph")?;
        let (group, builtin) = load_group(&args.group)?;
        match level_size(group.degree(), args.level) {
            Some(n) if n <= MAX_GRAPH_VERTICES => {}
            _ => return usage(format!("level {} exceeds the graph bound of {MAX_GRAPH_VERTICES} vertices", args.level)),
        }
        Ok(Self { group, builtin, level: args.level, depth: 0, tol: None, format: args.format })
    }

    fn correspondence(args: &CorrespondenceArgs) -> CliResult<Self> {
        check_format(args.format, &[Format::Csv, Format::Json, Format::Svg], "correspondence")?;
        if args.level > MAX_CORRESPONDENCE_LEVEL {
            return usage(format!("--level must be at most {MAX_CORRESPONDENCE_LEVEL}"));
        }
        let (group, builtin) = load_group(&args.group)?;
        if group.degree() != 3 {
            return usage("correspondence needs a group on the 3-ary tree");
        }
        Ok(Self { group, builtin, level: args.level, depth: 0, tol: None, format: args.format })
    }
}

/// Validates the α grid and returns it.
fn checked_alpha_grid(args: &CorrespondenceArgs) -> CliResult<Vec<f64>> {
    let (lo, hi, step) = (args.alpha_min, args.alpha_max, args.alpha_step);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return usage("need finite --alpha-min <= --alpha-max and --alpha-step > 0");
    }
    if (hi - lo) / step + 1.0 > MAX_ALPHA_COLUMNS as f64 {
        return usage(format!("α grid exceeds {MAX_ALPHA_COLUMNS} columns"));
    }
    Ok(alpha_grid(lo, hi, step))
}

/// Shortest decimal at 12 significant digits, so grid values print cleanly.
fn clean(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    eigenvalue: f64,
    multiplicity: usize,
    distance: Option<f64>,
    inside: Option<bool>,
}

#[derive(Debug, Serialize)]
struct SpectrumOutput {
    group: String,
    level: usize,
    dimension: usize,
    julia_depth: usize,
    tolerance: f64,
    max_distance: Option<f64>,
    hausdorff_distance: Option<f64>,
    all_inside: Option<bool>,
    eigenvalues: Vec<SpectrumRow>,
}

fn has_julia(set: &SpectralSet) -> bool {
    !set.julia_parts.is_empty()
}

pub fn cmd_spectrum(config: &RunConfig) -> CliResult<Vec<u8>> {
    let op = uniform_hecke(&config.group, config.level);
    let spectrum = symmetric_eigenvalues(&op, DEFAULT_CLUSTER_THRESHOLD)?;
    let predicted = match &config.builtin {
        Some(name) => Some(predicted_spectrum(name, config.depth)?),
        None => None,
    };
    let tolerance = config.tol.unwrap_or(match &predicted {
        Some(set) if has_julia(set) => JULIA_TOLERANCE,
        _ => INTERVAL_TOLERANCE,
    });
    let mut rows = Vec::new();
    for &(value, multiplicity) in spectrum.entries() {
        let distance = match &predicted {
            Some(set) => Some(set_distance(set, value)?),
            None => None,
        };
        rows.push(SpectrumRow {
            eigenvalue: value,
            multiplicity,
            distance,
            inside: distance.map(|d| d <= tolerance),
        });
    }
    let hausdorff = match &predicted {
        Some(set) => {
            let values: Vec<f64> = spectrum.values().collect();
            Some(hausdorff_distance(&values, &set.sample(INTERVAL_SAMPLES))?)
        }
        None => None,
    };
    let result = SpectrumOutput {
        group: config.group.name().to_string(),
        level: config.level,
        dimension: spectrum.dimension(),
        julia_depth: config.depth,
        tolerance,
        max_distance: predicted.as_ref().map(|_| rows.iter().filter_map(|r| r.distance).fold(0.0, f64::max)),
        hausdorff_distance: hausdorff,
        all_inside: predicted.as_ref().map(|_| rows.iter().all(|r| r.inside == Some(true))),
        eigenvalues: rows,
    };
    match config.format {
        Format::Json => Ok(json_bytes(&result)?),
        _ => spectrum_csv(&result),
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

fn spectrum_csv(s: &SpectrumOutput) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(
        out,
        "# group={} level={} dimension={} julia_depth={} tolerance={:e}",
        s.group, s.level, s.dimension, s.julia_depth, s.tolerance
    )
    .map_err(Error::from)?;
    writeln!(
        out,
        "# max_distance={} hausdorff_distance={} all_inside={}",
        opt(&s.max_distance),
        opt(&s.hausdorff_distance),
        opt(&s.all_inside)
    )
    .map_err(Error::from)?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["eigenvalue", "multiplicity", "distance", "inside"]).map_err(Error::from)?;
    for r in &s.eigenvalues {
        w.write_record([
            r.eigenvalue.to_string(),
            r.multiplicity.to_string(),
            r.distance.map_or(String::new(), |d| d.to_string()),
            r.inside.map_or(String::new(), |b| b.to_string()),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    drop(w);
    Ok(out)
}

fn json_bytes<T: Serialize>(value: &T) -> crate::error::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Debug, Serialize)]
struct GrowthOutput {
    values: Vec<usize>,
    window: (usize, usize),
    exponent: f64,
}

fn parse_window(text: &str) -> CliResult<Option<(usize, usize)>> {
    if text == "auto" {
        return Ok(None);
    }
    let parsed = text
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((lo, hi)) if lo >= 1 && lo < hi => Ok(Some((lo, hi))),
        _ => usage(format!("--growth expects `auto` or `LO,HI` with 1 <= LO < HI, got `{text}`")),
    }
}

fn growth(graph: &LabeledGraph, window: Option<(usize, usize)>) -> CliResult<GrowthOutput> {
    let series = ball_growth(graph, graph.vertex_count());
    let (lo, hi) = window.unwrap_or_else(|| verify::default_growth_window(&series));
    let exponent = growth_exponent(&series, lo, hi)?;
    let keep = series.saturation_radius().max(hi) + 1;
    let mut values = series.values;
    values.truncate(keep);
    Ok(GrowthOutput { values, window: (lo, hi), exponent })
}

fn graph_output(
    graph: &LabeledGraph,
    name: &str,
    format: Format,
    growth: Option<&GrowthOutput>,
) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let edges: Vec<_> = graph
                .edges()
                .iter()
                .map(|e| json!({"source": graph.name(e.source), "target": graph.name(e.target), "label": e.label}))
                .collect();
            let value = json!({
                "name": name,
                "vertices": graph.names(),
                "basepoint": graph.name(graph.basepoint()),
                "edges": edges,
                "growth": growth,
            });
            Ok(json_bytes(&value)?)
        }
        Format::Csv => {
            let mut out = Vec::new();
            write_edge_csv(graph, &mut out)?;
            if let Some(g) = growth {
                out.extend(growth_comment(g, "#").into_bytes());
            }
            Ok(out)
        }
        _ => {
            let mut text = to_dot_string(graph, name);
            if let Some(g) = growth {
                text.push_str(&growth_comment(g, "//"));
            }
            Ok(text.into_bytes())
        }
    }
}

fn growth_comment(g: &GrowthOutput, marker: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{marker} growth_exponent={} window={},{}", g.exponent, g.window.0, g.window.1);
    let values: Vec<String> = g.values.iter().map(usize::to_string).collect();
    let _ = writeln!(s, "{marker} ball_sizes={}", values.join(","));
    s
}

pub fn cmd_graph(config: &RunConfig, window: Option<Option<(usize, usize)>>) -> CliResult<Vec<u8>> {
    let graph = action_graph(&config.group, config.level);
    let g = match window {
        Some(w) => Some(growth(&graph, w)?),
        None => None,
    };
    let name = format!("{}-{}", config.group.name(), config.level);
    graph_output(&graph, &name, config.format, g.as_ref())
}

pub fn cmd_correspondence(config: &RunConfig, alphas: &[f64]) -> CliResult<Vec<u8>> {
    let columns = spectral_correspondence(&config.group, config.level, alphas)?;
    match config.format {
        Format::Svg => {
            let points: Vec<(f64, f64)> = columns
                .iter()
                .flat_map(|c| c.lambdas.iter().map(move |&l| (c.alpha, l)))
                .collect();
            Ok(output::scatter_svg(&points, "α", "λ").into_bytes())
        }
        Format::Json => {
            let cols: Vec<_> = columns
                .iter()
                .map(|c| json!({"alpha": clean(c.alpha), "lambdas": c.lambdas}))
                .collect();
            let value = json!({"group": config.group.name(), "level": config.level, "columns": cols});
            Ok(json_bytes(&value)?)
        }
        _ => {
            let mut out = Vec::new();
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["alpha", "lambda"]).map_err(Error::from)?;
            for c in &columns {
                let alpha = clean(c.alpha).to_string();
                for l in &c.lambdas {
                    w.write_record([alpha.as_str(), &l.to_string()]).map_err(Error::from)?;
                }
            }
            w.flush().map_err(Error::from)?;
            drop(w);
            Ok(out)
        }
    }
}

/// Runs the suite; returns the JSON report and the exit code.
pub fn cmd_verify(args: &VerifyArgs) -> CliResult<(Vec<u8>, Vec<String>, i32)> {
    check_format(args.format, &[Format::Json], "verify")?;
    let only = match &args.only {
        Some(text) => Some(verify::parse_only(text).map_err(CliError::Usage)?),
        None => None,
    };
    if !(1..=8).contains(&args.max_level) {
        return usage("--max-level must be between 1 and 8");
    }
    if !(verify::tolerances::MIN_JULIA_DEPTH..=MAX_JULIA_DEPTH).contains(&args.depth) {
        return usage(format!(
            "--depth must be between {} and {MAX_JULIA_DEPTH}",
            verify::tolerances::MIN_JULIA_DEPTH
        ));
    }
    if args.samples == 0 || args.samples > 100_000 {
        return usage("--samples must be between 1 and 100000");
    }
    if !args.perturb_phi.is_finite() {
        return usage("--perturb-phi must be finite");
    }
    let config = verify::VerifyConfig {
        only,
        max_level: args.max_level,
        julia_depth: args.depth,
        seed: args.seed,
        formula_samples: args.samples,
        phi_perturbation: args.perturb_phi,
        ..Default::default()
    };
    let report = verify::run_verify(&config);
    let lines = verify::summary_lines(&report);
    let mut value = serde_json::to_value(&report).map_err(Error::from)?;
    if !args.timings {
        strip_timings(&mut value);
    }
    let code = if report.internal_error() {
        EXIT_INTERNAL
    } else if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY
    };
    Ok((json_bytes(&value)?, lines, code))
}

/// Removes `seconds` fields so reports of identical runs are identical.
fn strip_timings(value: &mut serde_json::Value) {
    if let Some(obj) = value.as_object_mut() {
        obj.remove("seconds");
        if let Some(serde_json::Value::Array(checks)) = obj.get_mut("checks") {
            for c in checks {
                if let Some(o) = c.as_object_mut() {
                    o.remove("seconds");
                }
            }
        }
    }
}

pub fn cmd_substitute(args: &SubstituteArgs) -> CliResult<Vec<u8>> {
    check_format(args.format, &[Format::Dot, Format::Csv, Format::Json], "substitute")?;
    if args.steps > MAX_SUBSTITUTION_STEPS {
        return usage(format!("--steps must be at most {MAX_SUBSTITUTION_STEPS}"));
    }
    let system = match &args.system {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_system(&text)?
        }
        None => gamma_substitution_system(),
    };
    if args.dump_system {
        return Ok(system_to_text(&system).into_bytes());
    }
    let graph = expand(&system, args.steps)?;
    graph_output(&graph, &format!("expansion-{}", args.steps), args.format, None)
}

fn emit(bytes: &[u8], out: &OutputArgs) -> CliResult<()> {
    match &out.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::Compute(e.into()))
        }
    }
}

fn configure_threads() -> CliResult<()> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
        // A pool may already exist when embedded; that is not an error here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(args) => {
            let config = RunConfig::spectrum(args)?;
            emit(&cmd_spectrum(&config)?, &args.output)?;
        }
        Command::Graph(args) => {
            let window = args.growth.as_deref().map(parse_window).transpose()?;
            let config = RunConfig::graph(args)?;
            emit(&cmd_graph(&config, window)?, &args.output)?;
        }
        Command::Correspondence(args) => {
            let alphas = checked_alpha_grid(args)?;
            let config = RunConfig::correspondence(args)?;
            emit(&cmd_correspondence(&config, &alphas)?, &args.output)?;
        }
        Command::Verify(args) => {
            let (report, lines, code) = cmd_verify(args)?;
            for line in lines {
                eprintln!("{line}");
            }
            emit(&report, &args.output)?;
            return Ok(code);
        }
        Command::Substitute(args) => {
            emit(&cmd_substitute(args)?, &args.output)?;
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
