//! Batch front end: flag and config-file parsing, study dispatch, report and
//! CSV emission. Every file is written after all computation succeeds.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::averaging::{verify_central_difference_identity, AverageSpec};
use crate::body::{BodyKind, BodySpec};
use crate::error::Error;
use crate::harness::{
    decay_series, equivalence_drift, fit_line, refinement_study, slope_window, standard_family,
    Family, TestFunctionSpec,
};
use crate::multiplier::{
    a_ell, m_ell, trig_identity_residual, MultiplierKind, RadialMultiplierTable,
};
use crate::norms::{norm, Method, NormParams, ScaleRange, Space};
use crate::quadrature::QuadratureRule;
use crate::torus::io::{read_binary, read_csv};
use crate::torus::{Exponent, GridSpec, SampledField};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    MultiplierTable,
    VerifyIdentities,
    Norm,
    Slope,
    Equivalence,
    Refine,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(
            self.to_possible_value()
                .expect("no skipped variants")
                .get_name(),
        )
    }
}

/// Every tunable. Flags and config-file keys share these names.
#[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Samples per axis.
    #[arg(long, short = 'n')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// Multiplier kind: ball-hat, a-ell, m-ell, a-ell-ratio.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<MultiplierKind>,
    /// Dilation `t` of a grid table.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Uniform table spacing; replaces the grid keys when set.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ds: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// Smoothness of the generated test function.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_cap: Option<u64>,
    /// Field file (`.csv` or binary) used instead of a generated family.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<Space>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// Smoothness index of the norm; defaults to `alpha`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inhomogeneous: Option<bool>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i32>,
    /// euclidean-ball or cube.
    #[arg(long, value_parser = parse_body)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,

    /// Grid sizes of a refinement run.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_slope: Option<f64>,
    /// Overrides the default tolerance of the command's main check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn parse_body(s: &str) -> Result<BodyKind, String> {
    match s.replace('-', "_").as_str() {
        "ball" | "euclidean_ball" => Ok(BodyKind::EuclideanBall),
        "cube" => Ok(BodyKind::Cube),
        _ => Err(format!("unknown body '{s}'")),
    }
}

macro_rules! merge_fields {
    ($flags:expr, $file:expr; $($field:ident),*) => {
        Options { $($field: $flags.$field.or($file.$field),)* }
    };
}

impl Options {
    /// Flags win over file keys.
    pub fn merged_over(self, file: Options) -> Options {
        merge_fields!(self, file; out, seed, ell, dim, samples, kind, scale, ds, count, family,
            alpha, levels, k0, band_cap, input, space, method, norm_alpha, p, q, inhomogeneous,
            k_min, k_max, body, stride, sizes, expected_slope, tolerance)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ballnorm",
    version,
    about = "Ball-average smoothness norms on the periodic torus"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

/// The fully resolved configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// `"<="` or `">="`.
    pub relation: String,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: "<=".into(),
            tolerance,
            pass: measured <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: ">=".into(),
            tolerance,
            pass: measured >= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub pass: bool,
    /// Command-specific results.
    pub summary: serde_json::Value,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// A computed run: report plus the files still to be written.
pub struct RunOutput {
    pub report: ReportDocument,
    pub files: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Read the optional config file and merge flags over it.
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if text.trim().is_empty() {
                return Err(CliError::Usage(format!("{} is empty", path.display())));
            }
            toml::from_str::<Options>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => Options::default(),
    };
    let mut options = cli.options.merged_over(file);
    fill_defaults(cli.command, &mut options);
    Ok(RunConfig {
        command: cli.command,
        options,
    })
}

/// Make every key the command consumes explicit.
pub fn fill_defaults(command: Command, o: &mut Options) {
    let dim = *o.dim.get_or_insert(1);
    o.out.get_or_insert_with(|| PathBuf::from("ballnorm-out"));
    o.seed.get_or_insert(0);
    let uses_field = matches!(
        command,
        Command::Norm | Command::Slope | Command::Equivalence | Command::Refine
    );
    let uses_norm = matches!(
        command,
        Command::Norm | Command::Equivalence | Command::Refine
    );
    o.ell
        .get_or_insert(if command == Command::Slope { 1 } else { 2 });
    match command {
        Command::MultiplierTable => {
            o.kind.get_or_insert(MultiplierKind::AEll);
            if o.ds.is_some() {
                o.count.get_or_insert(1001);
            } else {
                o.samples.get_or_insert(1024);
                o.scale.get_or_insert(1.0 / 16.0);
            }
        }
        Command::VerifyIdentities => {
            o.count.get_or_insert(10_000);
            o.samples.get_or_insert(if dim == 1 { 256 } else { 32 });
            o.tolerance.get_or_insert(1e-10);
        }
        Command::Slope => {
            o.samples.get_or_insert(4096);
            o.p.get_or_insert(Exponent::Infinity);
            o.tolerance.get_or_insert(0.1);
        }
        Command::Equivalence => {
            o.tolerance.get_or_insert(0.1);
        }
        Command::Refine => {
            o.sizes.get_or_insert_with(|| vec![256, 512, 1024]);
        }
        Command::Norm => {}
    }
    if uses_field && o.input.is_none() {
        if command != Command::Equivalence || o.family.is_some() {
            o.family.get_or_insert(Family::Weierstrass);
            o.alpha.get_or_insert(1.0);
            if o.family == Some(Family::BandBump) {
                o.k0.get_or_insert(3);
            }
        }
        if command != Command::Refine {
            o.samples.get_or_insert(1024);
        }
    }
    if uses_norm {
        o.space.get_or_insert(Space::Besov);
        o.method.get_or_insert(Method::Ball);
        let alpha = o.alpha.unwrap_or(1.0);
        o.norm_alpha.get_or_insert(alpha);
        o.p.get_or_insert(Exponent::Finite(2.0));
        o.q.get_or_insert(Exponent::Finite(2.0));
        o.inhomogeneous.get_or_insert(false);
        o.body.get_or_insert(BodyKind::EuclideanBall);
        o.stride.get_or_insert(1);
    }
}

fn grid_of(o: &Options) -> Result<GridSpec, CliError> {
    Ok(GridSpec::new(
        o.dim.unwrap_or(1),
        o.samples.unwrap_or(1024),
    )?)
}

fn field_spec(o: &Options, grid: GridSpec) -> TestFunctionSpec {
    TestFunctionSpec {
        family: o.family.unwrap_or(Family::Weierstrass),
        alpha: o.alpha.unwrap_or(1.0),
        levels: o.levels,
        k0: o.k0.unwrap_or(3),
        seed: o.seed.unwrap_or(0),
        band_cap: o.band_cap,
        grid,
    }
}

fn norm_params(o: &Options) -> Result<NormParams, CliError> {
    let alpha = o.norm_alpha.or(o.alpha).unwrap_or(1.0);
    let mut params = NormParams::new(
        o.space.unwrap_or(Space::Besov),
        o.method.unwrap_or(Method::Ball),
        alpha,
        o.p.unwrap_or(Exponent::Finite(2.0)),
        o.q.unwrap_or(Exponent::Finite(2.0)),
        o.ell.unwrap_or(2),
    );
    if o.inhomogeneous.unwrap_or(false) {
        params = params.inhomogeneous();
    }
    params.body = o.body.unwrap_or(BodyKind::EuclideanBall);
    params.stride = o.stride.unwrap_or(1);
    match (o.k_min, o.k_max) {
        (Some(lo), Some(hi)) => params = params.with_range(ScaleRange::new(lo, hi)?),
        (None, None) => {}
        _ => {
            return Err(CliError::Usage(
                "k-min and k-max must be given together".into(),
            ))
        }
    }
    params.validate()?;
    Ok(params)
}

fn load_field(path: &Path) -> Result<SampledField, CliError> {
    let file =
        fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let reader = std::io::BufReader::new(file);
    let parsed = if path.extension().is_some_and(|e| e == "csv") {
        read_csv(reader)
    } else {
        read_binary(reader)
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

/// Compute a run without touching the file system (except reading `input`).
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let o = &config.options;
    let mut checks = Vec::new();
    let mut files = Vec::new();
    let summary = match config.command {
        Command::MultiplierTable => {
            let kind = o.kind.unwrap_or(MultiplierKind::AEll);
            let ell = o.ell.unwrap_or(2);
            let dim = o.dim.unwrap_or(1);
            let table = match o.ds {
                Some(ds) => {
                    RadialMultiplierTable::uniform(kind, ell, dim, ds, o.count.unwrap_or(1001))?
                }
                None => RadialMultiplierTable::for_grid(
                    kind,
                    ell,
                    &grid_of(o)?,
                    o.scale.unwrap_or(1.0 / 16.0),
                )?,
            };
            let worst = table.iter().filter(|(_, v)| !v.is_finite()).count();
            checks.push(Check::at_most("non-finite entries", worst as f64, 0.0));
            if kind == MultiplierKind::AEll {
                let lowest = table.iter().map(|(_, v)| v).fold(f64::INFINITY, f64::min);
                checks.push(Check::at_least("minimum of A_ell", lowest, -1e-12));
            }
            let mut bytes = Vec::new();
            table.write_csv(&mut bytes)?;
            files.push(("multiplier_table.csv".to_string(), bytes));
            serde_json::json!({ "entries": table.len(), "max_nodes": table.max_nodes })
        }
        Command::VerifyIdentities => {
            let ell = o.ell.unwrap_or(2);
            let dim = o.dim.unwrap_or(1);
            let count = o.count.unwrap_or(10_000);
            let rule = QuadratureRule::standard();
            let mut rows = Vec::with_capacity(count);
            let (mut worst_sum, mut worst_trig) = (0.0f64, 0.0f64);
            for i in 0..count {
                let u = i as f64 / (count - 1).max(1) as f64;
                let s = 50.0 * u;
                let sum = (m_ell(ell, dim, s, &rule)? - 1.0 + a_ell(ell, dim, s, &rule)?).abs();
                let trig = trig_identity_residual(ell, 8.0 * std::f64::consts::PI * u);
                worst_sum = worst_sum.max(sum);
                worst_trig = worst_trig.max(trig);
                rows.push(vec![num(s), num(sum), num(trig)]);
            }
            let grid = GridSpec::new(dim, o.samples.unwrap_or(if dim == 1 { 256 } else { 32 }))?;
            let cap = (grid.samples_per_axis() / 8) as u64;
            let field = crate::harness::generate(&TestFunctionSpec::power_spectrum(
                1.0,
                o.seed.unwrap_or(0),
                Some(cap),
                grid,
            ))?;
            let t = o.scale.unwrap_or(4.0 * grid.spacing());
            let spec = AverageSpec::new(ell, t, BodySpec::ball(dim))?;
            let probes: Vec<usize> = (0..16).map(|i| i * grid.len() / 16).collect();
            let central =
                verify_central_difference_identity(&field, &spec, &probes)? / field.max_abs();
            let tol = o.tolerance.unwrap_or(1e-10);
            checks.push(Check::at_most(
                "multiplier sum identity residual",
                worst_sum,
                tol,
            ));
            checks.push(Check::at_most(
                "trigonometric identity residual",
                worst_trig,
                tol,
            ));
            checks.push(Check::at_most(
                "central difference identity residual (relative)",
                central,
                1e-9,
            ));
            files.push((
                "identity_residuals.csv".to_string(),
                csv_bytes(&["s", "sum_residual", "trig_residual"], rows)?,
            ));
            serde_json::json!({ "samples": count, "probes": probes.len(), "t": t })
        }
        Command::Norm => {
            let params = norm_params(o)?;
            let field = match &o.input {
                Some(path) => load_field(path)?,
                None => crate::harness::generate(&field_spec(o, grid_of(o)?))?,
            };
            let report = norm(&field, &params)?;
            checks.push(Check::at_least(
                "norm (finite, nonnegative)",
                report.aggregate,
                0.0,
            ));
            if !report.aggregate.is_finite() {
                checks.last_mut().unwrap().pass = false;
            }
            let mut bytes = Vec::new();
            report.write_csv(&mut bytes)?;
            files.push(("norm_scales.csv".to_string(), bytes));
            serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?
        }
        Command::Slope => {
            let grid = grid_of(o)?;
            let spec = field_spec(o, grid);
            let field = crate::harness::generate(&spec)?;
            let ell = o.ell.unwrap_or(1);
            let p = o.p.unwrap_or(Exponent::Infinity);
            let window = match (o.k_min, o.k_max) {
                (Some(lo), Some(hi)) => ScaleRange::new(lo, hi)?,
                (None, None) => slope_window(&grid, ell)?,
                _ => {
                    return Err(CliError::Usage(
                        "k-min and k-max must be given together".into(),
                    ))
                }
            };
            let series = decay_series(&field, ell, p, window)?;
            let xs: Vec<f64> = series.iter().map(|&(k, _)| k as f64).collect();
            let ys: Vec<f64> = series
                .iter()
                .map(|&(_, d)| d.max(f64::MIN_POSITIVE).log2())
                .collect();
            let fit = fit_line(&xs, &ys)?;
            let expected = o.expected_slope.or(match spec.family {
                Family::Weierstrass => Some(-spec.alpha.min(2.0 * ell as f64)),
                _ => None,
            });
            match expected {
                Some(e) => checks.push(Check::at_most(
                    format!("slope deviation from {e}"),
                    (fit.slope - e).abs(),
                    o.tolerance.unwrap_or(0.1),
                )),
                None => checks.push(Check::at_least("fitted scales", fit.points as f64, 4.0)),
            }
            files.push((
                "slope.csv".to_string(),
                csv_bytes(
                    &[
                        "k",
                        "difference_norm",
                        "log2_difference_norm",
                        "fitted_line",
                    ],
                    series.iter().map(|&(k, d)| {
                        vec![
                            k.to_string(),
                            num(d),
                            num(d.max(f64::MIN_POSITIVE).log2()),
                            num(fit.slope * k as f64 + fit.intercept),
                        ]
                    }),
                )?,
            ));
            serde_json::json!({ "function": spec.label(), "fit": fit })
        }
        Command::Equivalence => {
            let params = norm_params(o)?;
            let grid = grid_of(o)?;
            let family = match o.family {
                Some(_) => vec![field_spec(o, grid)],
                None => standard_family(grid),
            };
            let drift = equivalence_drift(&family, &params)?;
            checks.push(Check::at_least(
                "smallest ratio (positive)",
                drift
                    .coarse
                    .min_ratio
                    .unwrap()
                    .min(drift.fine.min_ratio.unwrap()),
                f64::MIN_POSITIVE,
            ));
            checks.push(Check::at_most(
                "bracket drift under grid doubling",
                drift.worst_change(),
                o.tolerance.unwrap_or(0.1),
            ));
            let rows = [&drift.coarse, &drift.fine].into_iter().flat_map(|study| {
                let n = study.samples_per_axis.unwrap_or(0);
                study.entries.iter().map(move |e| {
                    vec![
                        e.label.clone(),
                        n.to_string(),
                        num(e.ball),
                        num(e.classical),
                        num(e.ratio),
                    ]
                })
            });
            files.push((
                "equivalence.csv".to_string(),
                csv_bytes(
                    &["function", "n", "ball", "classical", "ratio"],
                    rows.collect::<Vec<_>>(),
                )?,
            ));
            serde_json::to_value(&drift).map_err(|e| CliError::Io(e.to_string()))?
        }
        Command::Refine => {
            let params = norm_params(o)?;
            let sizes = o.sizes.clone().unwrap_or_else(|| vec![256, 512, 1024]);
            let grid = GridSpec::new(o.dim.unwrap_or(1), sizes[0])?;
            let table = refinement_study(&field_spec(o, grid), &params, &sizes)?;
            let last = table.rows.last().and_then(|r| r.change).unwrap_or(0.0);
            checks.push(Check::at_most(
                "growing successive changes",
                f64::from(u8::from(table.growing)),
                0.0,
            ));
            if let Some(tol) = o.tolerance {
                checks.push(Check::at_most("last relative change", last, tol));
            }
            files.push((
                "refinement.csv".to_string(),
                csv_bytes(
                    &["n", "norm", "relative_change"],
                    table.rows.iter().map(|r| {
                        vec![
                            r.samples_per_axis.to_string(),
                            num(r.norm),
                            r.change.map(num).unwrap_or_default(),
                        ]
                    }),
                )?,
            ));
            serde_json::to_value(&table).map_err(|e| CliError::Io(e.to_string()))?
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    let mut artifacts: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    artifacts.push("report.json".into());
    let report = ReportDocument {
        config: config.clone(),
        checks,
        artifacts,
        pass,
        summary,
    };
    Ok(RunOutput { report, files })
}

/// Write the CSVs and `report.json` into `dir`.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (name, bytes) in &output.files {
        fs::write(dir.join(name), bytes).map_err(io)?;
    }
    let json =
        serde_json::to_string_pretty(&output.report).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("report.json"), json + "\n").map_err(io)
}

/// Parse, run and write; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve(cli).and_then(|config| {
        let output = run(&config)?;
        let dir = config
            .options
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("ballnorm-out"));
        write_outputs(&output, &dir)?;
        Ok(output)
    });
    match outcome {
        Ok(output) => {
            for c in &output.report.checks {
                println!(
                    "{} {}: {:.3e} {} {:.3e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.relation,
                    c.tolerance
                );
            }
            output.exit_code()
        }
        Err(e) => {
            eprintln!("ballnorm: {e}");
            e.exit_code()
        }
    }
}
