//! Command-line front end. [`run`] is pure apart from reading manifold
//! files and writing `--out`/`--csv` targets, so it is testable in process.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::catalog;
use crate::connection::{InducedField, NormalField, TangentField};
use crate::curves::{self, Termination};
use crate::error::Error;
use crate::expr;
use crate::helix::{self, SearchOptions};
use crate::manifold::{Domain, Grid, Immersion};
use crate::theorems::{self, Request, TheoremId, TheoremReport, Verdict, VerifyParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// A direction further than this from unit length triggers a warning.
pub const NORMALIZE_WARN: f64 = 1e-6;

pub mod exit {
    pub const OK: i32 = 0;
    pub const NEGATIVE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const HYPOTHESIS_NOT_MET: i32 = 4;
    pub const VIOLATED: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "weakhelix", version, about = "Extrinsic geometry and helix-submanifold checks for parametric immersions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Grid points per chart axis.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Zero tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed of the pseudo-random generator.
    #[arg(long = "rng-seed", default_value_t = 42)]
    pub rng_seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check whether a manifold is a helix with respect to a direction.
    Analyze {
        /// Catalog name or manifold file.
        manifold: String,
        /// Ambient direction, comma separated; normalized if needed.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[command(flatten)]
        common: Common,
    },
    /// Search for linearly independent helix directions.
    Search {
        /// Catalog name or manifold file.
        manifold: String,
        /// Random starts per round.
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a helix line and write it as CSV.
    Trace {
        /// Catalog name or manifold file.
        manifold: String,
        /// Defaults to the first known helix direction of catalog entries.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        /// Chart point to start from.
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
        /// Arc length to integrate.
        #[arg(long = "s-max", default_value_t = 1.0)]
        s_max: f64,
        /// Arc length step.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        /// CSV target; with a file, the summary goes to stdout, otherwise to stderr.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a theorem verifier.
    Verify {
        /// Theorem id: 2.1, 3.1, 3.2, lemma-3.1, 3.3, 3.4, 3.5, 3.6, 3.8, cor-3.2.
        theorem: String,
        /// Catalog name or manifold file.
        manifold: String,
        /// Helix direction, comma separated; repeat for several.
        #[arg(long, allow_hyphen_values = true)]
        direction: Vec<String>,
        /// Curve seeds or sample points in chart coordinates.
        #[arg(long, allow_hyphen_values = true)]
        seed: Vec<String>,
        /// Chart components of the curve field (3.6).
        #[arg(long, allow_hyphen_values = true)]
        curve: Option<String>,
        /// Ambient components of the normal field (3.6).
        #[arg(long, allow_hyphen_values = true)]
        normal: Option<String>,
        /// Arc length step of traced curves.
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        /// Arc length of traced curves.
        #[arg(long = "s-max", default_value_t = 1.0)]
        s_max: f64,
        /// Random seeds when none are given, and random tangent probes per point.
        #[arg(long, default_value_t = 5)]
        probes: usize,
        /// Values above this count as clearly nonzero.
        #[arg(long, default_value_t = 1e-3)]
        floor: f64,
        #[command(flatten)]
        common: Common,
    },
    /// List catalog manifolds.
    List,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<ManifoldFileError> for Failure {
    fn from(e: ManifoldFileError) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Line-anchored diagnostic for a manifold file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldFileError {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ManifoldFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path, self.line, self.column, self.message)
    }
}

impl std::error::Error for ManifoldFileError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldFile {
    schema_version: Spanned<u32>,
    name: String,
    m: Spanned<usize>,
    n: Spanned<usize>,
    components: Spanned<Vec<Spanned<String>>>,
    domain: Spanned<Vec<Spanned<(f64, f64)>>>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Parses the TOML manifold format:
///
/// ```toml
/// schema_version = 1
/// name = "paraboloid"
/// m = 2
/// n = 3
/// components = ["u1", "u2", "u1^2 + u2^2"]
/// domain = [[-1.0, 1.0], [-1.0, 1.0]]
/// ```
pub fn parse_manifold_file(path: &str, text: &str) -> Result<Immersion, ManifoldFileError> {
    let err = |offset: usize, message: String| {
        let (line, column) = line_col(text, offset);
        ManifoldFileError {
            path: path.to_string(),
            line,
            column,
            message,
        }
    };
    let file: ManifoldFile = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        err(offset, e.message().to_string())
    })?;
    if *file.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(err(
            file.schema_version.span().start,
            format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", file.schema_version.get_ref()),
        ));
    }
    let m = *file.m.get_ref();
    let n = *file.n.get_ref();
    if m == 0 || n < m {
        return Err(err(file.m.span().start, format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if file.components.get_ref().len() != n {
        return Err(err(
            file.components.span().start,
            format!("expected {n} components, found {}", file.components.get_ref().len()),
        ));
    }
    if file.domain.get_ref().len() != m {
        return Err(err(file.domain.span().start, format!("expected {m} domain intervals, found {}", file.domain.get_ref().len())));
    }
    let mut components = Vec::with_capacity(n);
    for (i, c) in file.components.get_ref().iter().enumerate() {
        match expr::parse(c.get_ref(), m) {
            Ok(e) => components.push(e),
            // +1 skips the opening quote; exact for strings without escapes.
            Err(e) => return Err(err(c.span().start + 1 + e.position(), format!("component {}: {e}", i + 1))),
        }
    }
    let mut bounds = Vec::with_capacity(m);
    for b in file.domain.get_ref() {
        let &(lo, hi) = b.get_ref();
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(err(b.span().start, format!("invalid interval [{lo}, {hi}]")));
        }
        bounds.push((lo, hi));
    }
    let domain = Domain::new(bounds).map_err(|e| err(file.domain.span().start, e.to_string()))?;
    Immersion::new(file.name, m, components, domain).map_err(|e| err(0, e.to_string()))
}

/// A catalog name, or else a path to a manifold file.
fn load_manifold(reference: &str) -> Result<Immersion, Failure> {
    if catalog::list().contains(&reference) {
        return Ok(catalog::immersion(reference)?);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(Failure::Input(format!(
            "`{reference}` is neither a catalog manifold ({}) nor a readable file",
            catalog::list().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{reference}: {e}")))?;
    Ok(parse_manifold_file(reference, &text)?)
}

fn parse_vector(what: &str, text: &str, len: usize) -> Result<DVector<f64>, Failure> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(format!("{what} `{text}`: {e}")))?;
    if values.len() != len {
        return Err(Failure::Input(format!("{what} `{text}` has {} components, expected {len}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Input(format!("{what} `{text}` is not finite")));
    }
    Ok(DVector::from_vec(values))
}

fn parse_direction(text: &str, n: usize, warnings: &mut Vec<String>) -> Result<DVector<f64>, Failure> {
    let d = parse_vector("direction", text, n)?;
    let norm = d.norm();
    if norm == 0.0 {
        return Err(Failure::Input("direction is the zero vector".into()));
    }
    if (norm - 1.0).abs() > NORMALIZE_WARN {
        warnings.push(format!("warning: direction `{text}` has norm {norm}, normalized to unit length"));
    }
    Ok(d / norm)
}

fn split_exprs(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).collect()
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

#[derive(Serialize)]
struct Document<P: Serialize, R: Serialize> {
    schema_version: u32,
    tool_version: &'static str,
    command: &'static str,
    manifold: String,
    parameters: P,
    result: R,
}

fn document<P: Serialize, R: Serialize>(command: &'static str, manifold: &Immersion, parameters: P, result: R) -> String {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        command,
        manifold: manifold.name().to_string(),
        parameters,
        result,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct GridParams {
    grid: usize,
    tol: f64,
    seed: u64,
}

#[derive(Serialize)]
struct AnalyzeResult {
    direction: Vec<f64>,
    is_helix: bool,
    theta_mean: f64,
    theta_min: f64,
    theta_max: f64,
    theta_spread: f64,
    grid_size: usize,
    skipped: usize,
}

#[derive(Serialize)]
struct SearchParams {
    grid: usize,
    tol: f64,
    seed: u64,
    starts: usize,
}

#[derive(Serialize)]
struct FoundDirection {
    direction: Vec<f64>,
    theta: f64,
    variance: f64,
}

#[derive(Serialize)]
struct SearchResult {
    r: usize,
    independence_rank: usize,
    directions: Vec<FoundDirection>,
}

#[derive(Serialize)]
struct TraceParams {
    s_max: f64,
    step: f64,
}

#[derive(Serialize)]
struct Stats {
    min: f64,
    max: f64,
    mean: f64,
}

impl Stats {
    fn of(xs: &[f64]) -> Stats {
        Stats {
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
        }
    }
}

#[derive(Serialize)]
struct TraceResult {
    direction: Vec<f64>,
    seed: Vec<f64>,
    samples: usize,
    length: f64,
    termination: Termination,
    geodesic_residual: f64,
    straightness_residual: f64,
    curvature: Stats,
    normal_curvature: Stats,
}

#[derive(Serialize)]
struct VerifyDocParams {
    grid: usize,
    step: f64,
    s_max: f64,
    tol: f64,
    nonzero_floor: f64,
    seed: u64,
    probes: usize,
}

#[derive(Serialize)]
struct ListEntry {
    name: &'static str,
    m: usize,
    n: usize,
    full: bool,
    second_normal_dim: usize,
    directions: Vec<FoundDirection>,
    notes: &'static str,
}

struct Emit {
    code: i32,
    report: String,
    out: Option<PathBuf>,
    stderr: Vec<String>,
    extra_stdout: Option<String>,
}

fn execute(cli: Cli) -> Result<Emit, Failure> {
    let mut warnings = Vec::new();
    match cli.command {
        Command::List => {
            let entries = catalog::list()
                .into_iter()
                .map(|name| {
                    let e = catalog::get(name)?;
                    Ok(ListEntry {
                        name: e.name,
                        m: e.immersion.m(),
                        n: e.immersion.n(),
                        full: e.full,
                        second_normal_dim: e.second_normal_dim,
                        directions: e
                            .directions
                            .iter()
                            .map(|k| FoundDirection {
                                direction: to_vec(&k.direction),
                                theta: k.theta,
                                variance: 0.0,
                            })
                            .collect(),
                        notes: e.notes,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let mut report = serde_json::to_string_pretty(&entries).expect("list serializes");
            report.push('\n');
            Ok(Emit {
                code: exit::OK,
                report,
                out: None,
                stderr: warnings,
                extra_stdout: None,
            })
        }
        Command::Analyze { manifold, direction, common } => {
            let m = load_manifold(&manifold)?;
            let d = parse_direction(&direction, m.n(), &mut warnings)?;
            let v = helix::check_helix(&m, &d, &Grid::uniform(m.domain(), common.grid), common.tol)?;
            let code = if v.is_helix { exit::OK } else { exit::NEGATIVE };
            let result = AnalyzeResult {
                direction: to_vec(&d),
                is_helix: v.is_helix,
                theta_mean: v.theta_mean,
                theta_min: v.theta_min,
                theta_max: v.theta_max,
                theta_spread: v.theta_spread,
                grid_size: v.grid_size,
                skipped: v.skipped,
            };
            let params = GridParams {
                grid: common.grid,
                tol: common.tol,
                seed: common.rng_seed,
            };
            Ok(Emit {
                code,
                report: document("analyze", &m, params, result),
                out: common.out,
                stderr: warnings,
                extra_stdout: None,
            })
        }
        Command::Search { manifold, starts, common } => {
            let m = load_manifold(&manifold)?;
            let opts = SearchOptions {
                tol: common.tol,
                max_starts: starts,
                seed: common.rng_seed,
                ..SearchOptions::default()
            };
            let res = helix::find_helix_directions(&m, &Grid::uniform(m.domain(), common.grid), &opts)?;
            let result = SearchResult {
                r: res.r(),
                independence_rank: res.independence_rank,
                directions: res
                    .directions
                    .iter()
                    .zip(&res.thetas)
                    .zip(&res.variances)
                    .map(|((d, &theta), &variance)| FoundDirection {
                        direction: to_vec(d),
                        theta,
                        variance,
                    })
                    .collect(),
            };
            let code = if res.r() > 0 { exit::OK } else { exit::NEGATIVE };
            let params = SearchParams {
                grid: common.grid,
                tol: common.tol,
                seed: common.rng_seed,
                starts,
            };
            Ok(Emit {
                code,
                report: document("search", &m, params, result),
                out: common.out,
                stderr: warnings,
                extra_stdout: None,
            })
        }
        Command::Trace {
            manifold,
            direction,
            seed,
            s_max,
            step,
            csv,
        } => {
            let m = load_manifold(&manifold)?;
            let u0 = parse_vector("seed", &seed, m.m())?;
            m.local(u0.as_slice())?;
            let d = match direction {
                Some(text) => parse_direction(&text, m.n(), &mut warnings)?,
                None => catalog::get(&manifold)
                    .ok()
                    .and_then(|e| e.directions.first().map(|k| k.direction.clone()))
                    .ok_or_else(|| Failure::Input("--direction is required for this manifold".into()))?,
            };
            let c = curves::integral_curve(&m, &InducedField::tangent_of(&d), u0.as_slice(), s_max, step)?;
            let fr = curves::frenet(&c)?;
            let ks: Vec<f64> = fr.samples.iter().map(|s| s.k).collect();
            let result = TraceResult {
                direction: to_vec(&d),
                seed: to_vec(&u0),
                samples: c.len(),
                length: c.length(),
                termination: c.termination,
                geodesic_residual: curves::geodesic_residual(&m, &c)?,
                straightness_residual: curves::straightness_residual(&c)?,
                curvature: Stats::of(&ks),
                normal_curvature: Stats::of(&curves::normal_curvature(&m, &c)?),
            };
            let summary = document("trace", &m, TraceParams { s_max, step }, result);
            let mut buf = Vec::new();
            c.write_csv(&fr, &mut buf).map_err(|e| Failure::Numeric(format!("csv: {e}")))?;
            let csv_text = String::from_utf8(buf).expect("csv is utf-8");
            match csv {
                Some(path) => {
                    std::fs::write(&path, csv_text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    Ok(Emit {
                        code: exit::OK,
                        report: summary,
                        out: None,
                        stderr: warnings,
                        extra_stdout: None,
                    })
                }
                None => {
                    warnings.push(summary.trim_end().to_string());
                    Ok(Emit {
                        code: exit::OK,
                        report: String::new(),
                        out: None,
                        stderr: warnings,
                        extra_stdout: Some(csv_text),
                    })
                }
            }
        }
        Command::Verify {
            theorem,
            manifold,
            direction,
            seed,
            curve,
            normal,
            step,
            s_max,
            probes,
            floor,
            common,
        } => {
            let id: TheoremId = theorem.parse().map_err(Failure::Input)?;
            let m = load_manifold(&manifold)?;
            let mut req = Request::new(id, m.clone());
            for d in &direction {
                req.directions.push(parse_direction(d, m.n(), &mut warnings)?);
            }
            for s in &seed {
                req.seeds.push(parse_vector("seed", s, m.m())?);
            }
            if let Some(c) = &curve {
                req.curve_field = Some(TangentField::parse(&split_exprs(c))?);
            }
            if let Some(x) = &normal {
                req.normal_field = Some(NormalField::parse(&split_exprs(x), m.m())?);
            }
            let params = VerifyParams {
                tol: common.tol,
                nonzero_floor: floor,
                grid: common.grid,
                step,
                s_max,
                seed: common.rng_seed,
                probes,
            };
            let report = theorems::verify(&req, &params)?;
            let code = verdict_code(&report);
            let doc_params = VerifyDocParams {
                grid: params.grid,
                step: params.step,
                s_max: params.s_max,
                tol: params.tol,
                nonzero_floor: params.nonzero_floor,
                seed: params.seed,
                probes: params.probes,
            };
            Ok(Emit {
                code,
                report: document("verify", &m, doc_params, report),
                out: common.out,
                stderr: warnings,
                extra_stdout: None,
            })
        }
    }
}

pub fn verdict_code(report: &TheoremReport) -> i32 {
    match report.verdict {
        Verdict::Confirmed => exit::OK,
        Verdict::Inconclusive => exit::NEGATIVE,
        Verdict::HypothesisNotMet => exit::HYPOTHESIS_NOT_MET,
        Verdict::Violated => exit::VIOLATED,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: exit::INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: exit::OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(cli) {
        Ok(emit) => {
            let mut stderr = emit.stderr.join("\n");
            if !stderr.is_empty() {
                stderr.push('\n');
            }
            let mut stdout = emit.extra_stdout.unwrap_or_default();
            match emit.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &emit.report) {
                        return Outcome {
                            code: exit::INPUT,
                            stdout,
                            stderr: format!("{stderr}error: {}: {e}\n", path.display()),
                        };
                    }
                }
                None => stdout.push_str(&emit.report),
            }
            Outcome {
                code: emit.code,
                stdout,
                stderr,
            }
        }
        Err(Failure::Input(msg)) => Outcome {
            code: exit::INPUT,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Numeric(msg)) => Outcome {
            code: exit::NUMERIC,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"schema_version = 1
name = "paraboloid"
m = 2
n = 3
components = ["u1", "u2", "u1^2 + u2^2"]
domain = [[-1.0, 1.0], [-1.0, 1.0]]
"#;

    #[test]
    fn manifold_file_round_trip() {
        let m = parse_manifold_file("p.mfd", GOOD).unwrap();
        assert_eq!((m.m(), m.n(), m.name()), (2, 3, "paraboloid"));
    }

    #[test]
    fn manifold_file_diagnostics_point_at_the_token() {
        let bad = GOOD.replace("u1^2 + u2^2", "u1^2 + u9");
        let e = parse_manifold_file("p.mfd", &bad).unwrap_err();
        assert_eq!(e.line, 5);
        assert_eq!(&bad.lines().nth(4).unwrap()[e.column - 1..e.column + 1], "u9");
        let e = parse_manifold_file("p.mfd", &GOOD.replace("m = 2", "m = two")).unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_manifold_file("p.mfd", &GOOD.replace("[-1.0, 1.0]]", "[1.0, -1.0]]")).unwrap_err();
        assert_eq!(e.line, 6);
        let e = parse_manifold_file("p.mfd", &GOOD.replace("schema_version = 1", "schema_version = 7")).unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_manifold_file("p.mfd", &format!("{GOOD}extra = 1\n")).unwrap_err();
        assert_eq!(e.line, 7);
    }

    #[test]
    fn directions_are_normalized_with_warning() {
        let mut w = Vec::new();
        let d = parse_direction("0,0,2", 3, &mut w).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(w.len(), 1);
        assert!(parse_direction("0,0", 3, &mut w).is_err());
        assert!(parse_direction("0,0,0", 3, &mut w).is_err());
    }
}
