//! Command-line front end: exact term generation, certificates, fundamental
//! solutions, radius diagnostics, eigenvalue trajectories, the unit-circle
//! sweep, the product formula, and the built-in example registry.
//!
//! Every command prints one machine-readable summary line on stdout
//! (`key=value` pairs, or a JSON object with `--format json-lines`) and
//! writes its data files next to `--out` with fixed suffixes; without
//! `--out` the file contents follow on stdout under `# file:` separators.
//!
//! Exit codes: 0 success, 1 input error, 2 numeric failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::Value;
use thiserror::Error;

use crate::diagnostics::{
    self, certify, divergence_onset, eigenvalue_tracks, empirical_radius, kappa_sweep,
    partial_sum_onset, term_norms, DiagnosticsError, Trajectory,
};
use crate::linalg::{expm, spectral_norm, LinalgError};
use crate::magnus::{bch_terms, magnus_terms, partial_sum, MagnusError, MagnusSeries};
use crate::ode::{corpus, solve_at, MatrixFunction, OdeError};
use crate::polymat::{format_model, parse_model, PolymatError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

fn classify_ode(e: OdeError) -> CliError {
    match e {
        OdeError::OutOfDomain { .. } | OdeError::ZeroInitialVector => {
            CliError::Input(e.to_string())
        }
        OdeError::Polymat(p) => classify_polymat(p),
        other => CliError::Numeric(other.to_string()),
    }
}

fn classify_polymat(e: PolymatError) -> CliError {
    match e {
        PolymatError::DegreeOverflow { .. } => CliError::Numeric(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn classify_magnus(e: MagnusError) -> CliError {
    match e {
        MagnusError::Polymat(p) => classify_polymat(p),
        other => CliError::Input(other.to_string()),
    }
}

fn classify_linalg(e: LinalgError) -> CliError {
    CliError::Numeric(e.to_string())
}

fn classify_diag(e: DiagnosticsError) -> CliError {
    match e {
        DiagnosticsError::Ode(o) => classify_ode(o),
        DiagnosticsError::Linalg(l) => classify_linalg(l),
        DiagnosticsError::Magnus(m) => classify_magnus(m),
        DiagnosticsError::InsufficientOrder { .. } => CliError::Input(e.to_string()),
        DiagnosticsError::NotReal { .. } => CliError::Input(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    #[value(name = "json-lines")]
    JsonLines,
}

#[derive(Debug, Parser)]
#[command(
    name = "magnus",
    about = "Exact series terms, convergence certificates, and eigenvalue-trajectory \
             diagnostics for Y' = A(t) Y",
    version
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate exact series terms and a per-order norm table
    Terms(TermsArgs),
    /// Certify convergence at a time t via the action integral
    Certify(CertifyArgs),
    /// Compute the fundamental solution Y(t;kappa)
    Solve(SolveArgs),
    /// Empirical radius diagnostics and divergence onset estimates
    Radius(RadiusArgs),
    /// Continuity-ordered eigenvalue tracks of Y(t;kappa)
    Trajectory(TrajectoryArgs),
    /// Sweep kappa over the unit circle for defective encircling collisions
    Sweep(SweepArgs),
    /// Series of the product of two matrix exponentials
    Bch(BchArgs),
    /// List or describe the built-in example models
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file path, or a built-in name as `examples:<name>`
    #[arg(value_name = "MODEL")]
    pub model: Option<String>,
    /// Model file path (alternative to the positional argument)
    #[arg(long = "model", value_name = "PATH")]
    pub model_path: Option<PathBuf>,
    /// Built-in example name (ex1, ex2, ex3, ex4)
    #[arg(long = "example", value_name = "NAME")]
    pub example: Option<String>,
}

impl ModelArg {
    fn resolve(&self) -> Result<MatrixFunction, CliError> {
        if let Some(name) = &self.example {
            return builtin_model(name);
        }
        if let Some(path) = &self.model_path {
            return load_model(path);
        }
        match &self.model {
            Some(s) => {
                if let Some(name) = s.strip_prefix("examples:") {
                    builtin_model(name)
                } else {
                    load_model(&PathBuf::from(s))
                }
            }
            None => Err(CliError::Input(
                "no model given: pass MODEL, --model PATH, or --example NAME".into(),
            )),
        }
    }
}

fn builtin_model(name: &str) -> Result<MatrixFunction, CliError> {
    corpus::builtin(name).ok_or_else(|| {
        CliError::Input(format!(
            "unknown built-in {name:?}; available: ex1 ex2 ex3 ex4 (bch takes two matrices; \
             use the `bch` subcommand)"
        ))
    })
}

fn load_model(path: &PathBuf) -> Result<MatrixFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let model =
        parse_model(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(MatrixFunction::from_piecewise(name.unwrap_or_else(|| "model".into()), model))
}

#[derive(Debug, Args)]
pub struct CommonOut {
    /// Output base path; files are written as <out>.<suffix>
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary format on stdout
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct TermsArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Number of series terms to generate
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Time at which the per-term norm table is evaluated (default: domain end)
    #[arg(long)]
    pub t: Option<f64>,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub t: f64,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub t: f64,
    #[arg(long = "kappa-re", default_value_t = 1.0)]
    pub kappa_re: f64,
    #[arg(long = "kappa-im", default_value_t = 0.0)]
    pub kappa_im: f64,
    /// Integrator tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Sample count for the output grid over [0, t]
    #[arg(long, default_value_t = 33)]
    pub samples: usize,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Series order (at least 20 for the tail estimate)
    #[arg(long, default_value_t = 30)]
    pub order: usize,
    /// Scan horizon (default: domain end)
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long = "t-max")]
    pub t_max: f64,
    /// Angle alpha with kappa = e^{i alpha} (overrides --kappa-re/--kappa-im)
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "kappa-re", default_value_t = 1.0)]
    pub kappa_re: f64,
    #[arg(long = "kappa-im", default_value_t = 0.0)]
    pub kappa_im: f64,
    #[arg(long, default_value_t = 160)]
    pub samples: usize,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long = "t-max")]
    pub t_max: f64,
    #[arg(long = "alpha-samples", default_value_t = 64)]
    pub alpha_samples: usize,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct BchArgs {
    /// Model file with the first constant matrix (single constant segment)
    #[arg(long)]
    pub a1: PathBuf,
    /// Model file with the second constant matrix
    #[arg(long)]
    pub a2: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    /// `list` (default) or `describe`
    #[arg(value_name = "ACTION", default_value = "list")]
    pub action: String,
    /// Name for `describe`
    #[arg(value_name = "NAME")]
    pub name: Option<String>,
}

/// Files produced by a command: suffix and contents.
struct OutFile {
    suffix: &'static str,
    contents: String,
}

fn emit(
    command: &str,
    format: OutputFormat,
    fields: Vec<(&str, Value)>,
    out: &Option<PathBuf>,
    files: Vec<OutFile>,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => {
            let mut line = String::from(command);
            for (k, v) in &fields {
                let shown = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = write!(line, " {k}={shown}");
            }
            println!("{line}");
        }
        OutputFormat::JsonLines => {
            let mut map = serde_json::Map::new();
            map.insert("command".into(), Value::String(command.into()));
            for (k, v) in fields {
                map.insert(k.into(), v);
            }
            println!("{}", Value::Object(map));
        }
    }
    match out {
        Some(base) => {
            if let Some(parent) = base.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            for file in files {
                let mut path = base.as_os_str().to_owned();
                path.push(".");
                path.push(file.suffix);
                std::fs::write(PathBuf::from(path), file.contents)?;
            }
        }
        None => {
            for file in files {
                println!("# file: {}", file.suffix);
                print!("{}", file.contents);
            }
        }
    }
    Ok(())
}

fn require_piecewise(model: &MatrixFunction) -> Result<&crate::PiecewisePolyMatrix, CliError> {
    model.piecewise().ok_or_else(|| {
        CliError::Input(format!(
            "model {:?} is registered numeric-only (non-polynomial entries); exact series \
             terms are unavailable for it",
            model.name()
        ))
    })
}

fn csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    match &config.command {
        Command::Terms(args) => cmd_terms(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Radius(args) => cmd_radius(args),
        Command::Trajectory(args) => cmd_trajectory(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bch(args) => cmd_bch(args),
        Command::Examples(args) => cmd_examples(args),
    }
}

fn series_text(series: &MagnusSeries) -> String {
    let mut text = String::new();
    for (idx, term) in series.terms().iter().enumerate() {
        let _ = writeln!(text, "# term {}", idx + 1);
        text.push_str(&format_model(term));
    }
    text
}

fn norms_csv(series: &MagnusSeries, t: f64) -> Result<String, CliError> {
    let norms = term_norms(series, t).map_err(classify_diag)?;
    let rows = norms
        .iter()
        .enumerate()
        .map(|(i, &n)| vec![(i + 1).to_string(), fmt_f(n)])
        .collect();
    Ok(csv(&["n", "norm"], rows))
}

fn cmd_terms(args: &TermsArgs) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    let piecewise = require_piecewise(&model)?;
    let series = magnus_terms(piecewise, args.order).map_err(classify_magnus)?;
    let t = args.t.unwrap_or_else(|| model.domain_end());
    let norm_table = norms_csv(&series, t)?;
    let max_norm = term_norms(&series, t)
        .map_err(classify_diag)?
        .into_iter()
        .fold(0.0f64, f64::max);
    emit(
        "terms",
        args.out.format,
        vec![
            ("model", Value::String(model.name().into())),
            ("order", Value::from(args.order)),
            ("t", Value::from(t)),
            ("max_term_norm", Value::from(max_norm)),
        ],
        &args.out.out,
        vec![
            OutFile { suffix: "terms.txt", contents: series_text(&series) },
            OutFile { suffix: "norms.csv", contents: norm_table },
        ],
    )
}

fn cmd_certify(args: &CertifyArgs) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    let cert = certify(&model, args.t).map_err(classify_diag)?;
    let mut header = vec!["t", "gamma", "verdict"];
    let mut row = vec![fmt_f(cert.t), fmt_f(cert.gamma), cert.verdict.to_string()];
    for check in &cert.thresholds {
        header.push(check.name);
        row.push(if check.passed { "1".into() } else { "0".into() });
    }
    let table = csv(&header, vec![row]);
    emit(
        "certify",
        args.out.format,
        vec![
            ("model", Value::String(model.name().into())),
            ("t", Value::from(cert.t)),
            ("gamma", Value::from(cert.gamma)),
            ("verdict", Value::String(cert.verdict.to_string())),
        ],
        &args.out.out,
        vec![OutFile { suffix: "certificate.csv", contents: table }],
    )
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    if args.t < 0.0 || args.samples < 2 {
        return Err(CliError::Input("need t >= 0 and at least 2 samples".into()));
    }
    let kappa = Complex64::new(args.kappa_re, args.kappa_im);
    let times: Vec<f64> =
        (0..args.samples).map(|k| args.t * k as f64 / (args.samples - 1) as f64).collect();
    let values = solve_at(&model, kappa, &times, args.tol).map_err(classify_ode)?;
    let dim = model.dim();
    let mut header: Vec<String> = vec!["t".into()];
    for i in 0..dim {
        for j in 0..dim {
            header.push(format!("y_{i}_{j}_re"));
            header.push(format!("y_{i}_{j}_im"));
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = times
        .iter()
        .zip(&values)
        .map(|(&t, y)| {
            let mut row = vec![fmt_f(t)];
            for i in 0..dim {
                for j in 0..dim {
                    row.push(fmt_f(y[(i, j)].re));
                    row.push(fmt_f(y[(i, j)].im));
                }
            }
            row
        })
        .collect();
    let final_y = values.last().expect("samples >= 2");
    emit(
        "solve",
        args.out.format,
        vec![
            ("model", Value::String(model.name().into())),
            ("t", Value::from(args.t)),
            ("kappa_re", Value::from(args.kappa_re)),
            ("kappa_im", Value::from(args.kappa_im)),
            ("y_norm", Value::from(spectral_norm(final_y))),
        ],
        &args.out.out,
        vec![OutFile { suffix: "solution.csv", contents: csv(&header_refs, rows) }],
    )
}

fn cmd_radius(args: &RadiusArgs) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    let piecewise = require_piecewise(&model)?;
    let series = magnus_terms(piecewise, args.order).map_err(classify_magnus)?;
    let t_max = args.t_max.unwrap_or_else(|| model.domain_end());

    // Radius curve R(t).
    let curve_points = 48;
    let mut curve_rows = Vec::with_capacity(curve_points);
    for k in 1..=curve_points {
        let t = t_max * k as f64 / curve_points as f64;
        let r = empirical_radius(&series, t).map_err(classify_diag)?;
        curve_rows.push(vec![fmt_f(t), fmt_f(r)]);
    }
    let radius_csv = csv(&["t", "radius"], curve_rows);

    // Partial-sum table for a selection of orders and two watched entries.
    let watched: [(usize, usize); 2] =
        if model.dim() >= 3 { [(0, 0), (1, 2)] } else { [(0, 0), (0, 1)] };
    let orders: Vec<usize> =
        [15, 20, 25, 30].iter().copied().filter(|&n| n <= args.order).collect();
    let mut header: Vec<String> = vec!["t".into()];
    for &n in &orders {
        for &(i, j) in &watched {
            header.push(format!("s{}_{}_{}", n, i + 1, j + 1));
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let sum_points = 64;
    let mut sum_rows = Vec::with_capacity(sum_points);
    for k in 1..=sum_points {
        let t = t_max * k as f64 / sum_points as f64;
        let mut row = vec![fmt_f(t)];
        for &n in &orders {
            let s = partial_sum(&series, n, t).map_err(classify_magnus)?;
            for &(i, j) in &watched {
                row.push(fmt_f(s[(i, j)]));
            }
        }
        sum_rows.push(row);
    }
    let sums_csv = csv(&header_refs, sum_rows);

    let radius_onset = divergence_onset(&series, t_max).map_err(classify_diag)?;
    let blowup_onset = partial_sum_onset(&series, &model, t_max).unwrap_or(None);
    emit(
        "radius",
        args.out.format,
        vec![
            ("model", Value::String(model.name().into())),
            ("order", Value::from(args.order)),
            ("t_max", Value::from(t_max)),
            ("radius_onset", radius_onset.map(Value::from).unwrap_or(Value::Null)),
            ("blowup_onset", blowup_onset.map(Value::from).unwrap_or(Value::Null)),
        ],
        &args.out.out,
        vec![
            OutFile { suffix: "radius.csv", contents: radius_csv },
            OutFile { suffix: "partial_sums.csv", contents: sums_csv },
        ],
    )
}

fn tracks_csv(traj: &Trajectory) -> String {
    let dim = traj.dim();
    let mut header: Vec<String> = vec!["t".into()];
    for n in 1..=dim {
        header.push(format!("re_lambda_{n}"));
        header.push(format!("im_lambda_{n}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = traj
        .grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![fmt_f(t)];
            for track in &traj.tracks {
                row.push(fmt_f(track[k].re));
                row.push(fmt_f(track[k].im));
            }
            row
        })
        .collect();
    csv(&header_refs, rows)
}

fn events_csv(events: &[diagnostics::CollisionEvent]) -> String {
    let rows = events
        .iter()
        .map(|e| {
            vec![
                fmt_f(e.t_star),
                fmt_f(e.lambda_star.re),
                fmt_f(e.lambda_star.im),
                fmt_f(e.gap),
                e.track_indices.0.to_string(),
                e.track_indices.1.to_string(),
                e.algebraic.to_string(),
                e.geometric.to_string(),
                (e.defective as u8).to_string(),
                e.winding.to_string(),
            ]
        })
        .collect();
    csv(
        &[
            "t_star",
            "re_lambda",
            "im_lambda",
            "gap",
            "track_i",
            "track_j",
            "algebraic",
            "geometric",
            "defective",
            "winding",
        ],
        rows,
    )
}

fn cmd_trajectory(args: &TrajectoryArgs) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    let kappa = match args.alpha {
        Some(alpha) => Complex64::from_polar(1.0, alpha),
        None => Complex64::new(args.kappa_re, args.kappa_im),
    };
    let traj =
        eigenvalue_tracks(&model, kappa, args.t_max, args.samples).map_err(classify_diag)?;
    let first_event = traj.events.first();
    emit(
        "trajectory",
        args.out.format,
        vec![
            ("model", Value::String(model.name().into())),
            ("kappa_re", Value::from(kappa.re)),
            ("kappa_im", Value::from(kappa.im)),
            ("t_max", Value::from(args.t_max)),
            ("grid_points", Value::from(traj.grid.len())),
            ("events", Value::from(traj.events.len())),
            (
                "first_event_t",
                first_event.map(|e| Value::from(e.t_star)).unwrap_or(Value::Null),
            ),
        ],
        &args.out.out,
        vec![
            OutFile { suffix: "tracks.csv", contents: tracks_csv(&traj) },
            OutFile { suffix: "events.csv", contents: events_csv(&traj.events) },
        ],
    )
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let model = args.model.resolve()?;
    let result = kappa_sweep(&model, args.t_max, args.alpha_samples).map_err(classify_diag)?;
    let sweep_rows = result
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt_f(s.alpha),
                s.min_gap.map(fmt_f).unwrap_or_default(),
                s.t_at_min.map(fmt_f).unwrap_or_default(),
            ]
        })
        .collect();
    let sweep_csv = csv(&["alpha", "min_gap", "t_at_min"], sweep_rows);
    let qual_rows = result
        .qualifying
        .iter()
        .map(|q| {
            vec![
                fmt_f(q.alpha),
                fmt_f(q.event.t_star),
                fmt_f(q.event.lambda_star.re),
                fmt_f(q.event.lambda_star.im),
                q.event.winding.to_string(),
            ]
        })
        .collect();
    let qual_csv = csv(&["alpha", "t_star", "re_lambda", "im_lambda", "winding"], qual_rows);
    let mut fields = vec![
        ("model", Value::String(model.name().into())),
        ("t_max", Value::from(args.t_max)),
        ("alpha_samples", Value::from(args.alpha_samples)),
        ("found", Value::from(result.earliest.is_some())),
    ];
    if let Some(hit) = &result.earliest {
        fields.push(("alpha_star", Value::from(hit.alpha)));
        fields.push(("t_star", Value::from(hit.event.t_star)));
        fields.push(("lambda_re", Value::from(hit.event.lambda_star.re)));
        fields.push(("lambda_im", Value::from(hit.event.lambda_star.im)));
        fields.push(("winding", Value::from(hit.event.winding)));
    }
    emit(
        "sweep",
        args.out.format,
        fields,
        &args.out.out,
        vec![
            OutFile { suffix: "sweep.csv", contents: sweep_csv },
            OutFile { suffix: "events.csv", contents: qual_csv },
        ],
    )
}

fn cmd_bch(args: &BchArgs) -> Result<(), CliError> {
    let load_constant = |path: &PathBuf| -> Result<crate::PolyMatrix, CliError> {
        let model = load_model(path)?;
        let piecewise = require_piecewise(&model)?;
        if piecewise.segments().len() != 1 {
            return Err(CliError::Input(format!(
                "{}: expected a single constant segment",
                path.display()
            )));
        }
        let matrix = piecewise.segments()[0].clone();
        matrix.require_constant().map_err(classify_polymat)?;
        Ok(matrix)
    };
    let a1 = load_constant(&args.a1)?;
    let a2 = load_constant(&args.a2)?;
    let series = bch_terms(&a1, &a2, args.order).map_err(classify_magnus)?;
    // exp(B) against exp(A1)·exp(A2) at t = 2.
    let b = partial_sum(&series, args.order, 2.0).map_err(classify_magnus)?;
    let exp_b = expm(&b.to_complex()).map_err(classify_linalg)?;
    let e1 = expm(&a1.constant_to_real().to_complex()).map_err(classify_linalg)?;
    let e2 = expm(&a2.constant_to_real().to_complex()).map_err(classify_linalg)?;
    let product = e1.matmul(&e2);
    let residual = spectral_norm(&exp_b.sub(&product));
    emit(
        "bch",
        args.out.format,
        vec![
            ("order", Value::from(args.order)),
            ("dim", Value::from(a1.dim())),
            ("exp_check_residual", Value::from(residual)),
        ],
        &args.out.out,
        vec![OutFile { suffix: "terms.txt", contents: series_text(&series) }],
    )
}

fn cmd_examples(args: &ExamplesArgs) -> Result<(), CliError> {
    match args.action.as_str() {
        "list" => {
            for name in corpus::BUILTIN_NAMES {
                println!("{name}: {}", corpus::builtin_description(name).unwrap());
            }
            Ok(())
        }
        "describe" => {
            let name = args
                .name
                .as_deref()
                .ok_or_else(|| CliError::Input("describe needs a name".into()))?;
            let description = corpus::builtin_description(name)
                .ok_or_else(|| CliError::Input(format!("unknown built-in {name:?}")))?;
            println!("{name}: {description}");
            if let Some(model) = corpus::builtin(name) {
                println!("dim: {}", model.dim());
                println!("domain: [0, {}]", model.domain_end());
                match model.piecewise() {
                    Some(p) => {
                        println!("exact model:");
                        print!("{}", format_model(p));
                    }
                    None => println!("evaluation: numeric-only closed form"),
                }
            }
            Ok(())
        }
        other => Err(CliError::Input(format!(
            "unknown action {other:?}; expected `list` or `describe`"
        ))),
    }
}
