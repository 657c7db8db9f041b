//! Command-line front end.
//!
//! `run` parses the arguments, dispatches a subcommand and maps failures to
//! exit codes: 0 when a result was produced (whatever the verdict), 2 for bad
//! input, 3 for numerical failure. Reports go to `--out` atomically, or to
//! standard output.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::admodels::RadialModel;
use crate::cmcheck::{cm_test_with, CmOptions, CmStatus};
use crate::consistency::{verdict, ConsistencyReport, SeparableAD, VerdictOptions};
use crate::dfinversion::{eddington_invert_from, moment_f_mu, radial_orbit_invert};
use crate::error::Error;
use crate::expr::{parse, Expr};
use crate::fracops::{frac_derivative, rl_signed};
use crate::numerics::{linear_grid, log_grid};
use crate::report::{format_float, to_csv, to_json_string, write_atomic, REPORT_VERSION};
use crate::specfun::{ml_eval, MLSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Every default used by the subcommands; echoed into each report.
pub mod defaults {
    pub const ORDERS: usize = 8;
    pub const K_MAX: usize = 4;
    pub const RADIAL_GRID: &str = "1e-3:1e3:40:log";
    pub const EPS_FAIL: f64 = 1e-8;
    pub const CM_EPS_ABS: f64 = 1e-10;
    pub const LAMBDA_STEPS: usize = 8;
    pub const INVERT_POINTS: usize = 200;
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// `MIN:MAX:COUNT[:log|linear]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_grid(self.min, self.max, self.count),
            Spacing::Linear => linear_grid(self.min, self.max, self.count),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected MIN:MAX:COUNT[:log|linear], got {s:?}"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in grid {s:?}"));
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| format!("bad count {:?} in grid {s:?}", parts[2]))?;
        let spacing = match parts.get(3).map(|t| t.trim()) {
            None | Some("log") => Spacing::Log,
            Some("linear") | Some("lin") => Spacing::Linear,
            Some(other) => return Err(format!("unknown spacing {other:?}")),
        };
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("grid needs finite MIN < MAX, got {s:?}"));
        }
        if count == 0 {
            return Err("grid needs at least one point".into());
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err("a log grid needs MIN > 0".into());
        }
        Ok(Self { min, max, count, spacing })
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive real, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "phasecons", version, about = "Phase-space consistency checks for separable augmented densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide consistency of a model, or test complete monotonicity of an expression.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Evaluate a special function or fractional operator at one point.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Recover g(E) of a constant-anisotropy model on an energy grid.
    Invert(InvertArgs),
    /// Fractional moments F_mu(Psi, x) of a model.
    Moments(MomentsArgs),
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    Consistency(ConsistencyArgs),
    Cm(CmArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    /// Model description (JSON)
    #[arg(long)]
    pub model: PathBuf,
    /// Highest derivative order sampled.
    #[arg(long)]
    pub orders: Option<usize>,
    /// Radial sample points, MIN:MAX:COUNT[:log|linear].
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// Relative slack before a sign check fails.
    #[arg(long, value_parser = positive_real)]
    pub tol_abs: Option<f64>,
    /// Record wall-clock timings (makes the report non-reproducible).
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CmArgs {
    /// Expression in x, e.g. "exp(-x)" or "mlf(0.5, 0.7, 0.4; -x^0.7)"
    #[arg(long)]
    pub expr: String,
    /// Highest derivative order sampled
    #[arg(long, default_value_t = defaults::ORDERS)]
    pub order: usize,
    /// Sample points, MIN:MAX:COUNT[:log|linear]
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// Absolute slack before a sign check fails
    #[arg(long, value_parser = positive_real)]
    pub tol_abs: Option<f64>,
    /// Record wall-clock timings
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// E^lam_{p,b}(z).
    Ml {
        /// Order lambda
        #[arg(long, allow_hyphen_values = true)]
        lam: f64,
        /// Index p > 0
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        /// Index b
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        /// Argument
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Fractional derivative D^mu_a f(x).
    Frd {
        /// Expression in x
        #[arg(long)]
        expr: String,
        /// Order mu >= 0
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// Evaluation point
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Lower terminal
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        a: f64,
    },
    /// Riemann-Liouville integral I^lambda_a f(x); negative lambda differentiates.
    Rli {
        /// Expression in x
        #[arg(long)]
        expr: String,
        /// Order lambda
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Evaluation point
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Lower terminal
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        a: f64,
    },
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Model description (JSON)
    #[arg(long)]
    pub model: PathBuf,
    /// Anisotropy; defaults to the model's constant beta.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Energy grid, MIN:MAX:COUNT[:log|linear].
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Model description (JSON)
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated moment orders.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub mu_list: Vec<f64>,
    /// Evaluation point "Psi,x".
    #[arg(long)]
    pub at: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Radial part of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RadialSpec {
    Constant { beta: f64 },
    General { beta1: f64, beta2: f64, s: f64, ra: f64 },
    Custom { expr: String },
}

/// Model file: a radial part plus an optional potential part P(Ψ) on [e0, psi_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub radial: RadialSpec,
    #[serde(default)]
    pub potential: Option<String>,
    #[serde(default)]
    pub e0: f64,
    #[serde(default = "one")]
    pub psi_max: f64,
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("model file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn radial_model(&self) -> CliResult<RadialModel> {
        Ok(match &self.radial {
            RadialSpec::Constant { beta } => RadialModel::constant_beta(*beta)?,
            RadialSpec::General { beta1, beta2, s, ra } => RadialModel::general(*beta1, *beta2, *s, *ra)?,
            RadialSpec::Custom { expr } => RadialModel::custom(parse(expr)?),
        })
    }

    pub fn potential_expr(&self) -> CliResult<Expr> {
        let src = self
            .potential
            .as_deref()
            .ok_or_else(|| CliError::Input("model has no \"potential\" expression".into()))?;
        Ok(parse(src)?)
    }

    pub fn augmented_density(&self) -> CliResult<SeparableAD> {
        Ok(SeparableAD::new(self.potential_expr()?, self.radial_model()?, self.e0, self.psi_max)?)
    }
}

fn default_radial_grid() -> GridSpec {
    defaults::RADIAL_GRID.parse().expect("valid default grid")
}

fn timings_value(recorded: Option<f64>) -> Value {
    match recorded {
        Some(secs) => json!({ "recorded": true, "total_seconds": secs }),
        None => json!({ "recorded": false }),
    }
}

/// Overrides for `check consistency`; `None` keeps the default.
#[derive(Debug, Clone, Default)]
pub struct CheckSettings {
    pub orders: Option<usize>,
    pub grid: Option<GridSpec>,
    pub tol_abs: Option<f64>,
    pub timings: bool,
}

impl From<&ConsistencyArgs> for CheckSettings {
    fn from(a: &ConsistencyArgs) -> Self {
        Self { orders: a.orders, grid: a.grid, tol_abs: a.tol_abs, timings: a.timings }
    }
}

/// Report for `check consistency`.
pub fn consistency_report(model: &ModelSpec, args: &CheckSettings) -> CliResult<Value> {
    let start = Instant::now();
    let ad = model.augmented_density()?;
    let grid = args.grid.unwrap_or_else(default_radial_grid);
    let opts = VerdictOptions {
        n_max: args.orders.unwrap_or(defaults::ORDERS),
        k_max: defaults::K_MAX,
        radial_grid: grid.points(),
        psi_grid: None,
        eps_fail: args.tol_abs.unwrap_or(defaults::EPS_FAIL),
        lambda_steps: defaults::LAMBDA_STEPS,
    };
    let psi_points = ad.psi_grid().len();
    let r: ConsistencyReport = verdict(&ad, &opts);
    let config = json!({
        "command": "check consistency",
        "model": model,
        "orders": opts.n_max,
        "k_max": opts.k_max,
        "radial_grid": grid,
        "psi_points": psi_points,
        "eps_fail": opts.eps_fail,
        "lambda_steps": opts.lambda_steps,
    });
    let elapsed = args.timings.then(|| start.elapsed().as_secs_f64());
    Ok(json!({
        "version": REPORT_VERSION,
        "config": config,
        "verdict": r.verdict,
        "necessary": {
            "regime": r.regime,
            "witness": r.witness,
            "radial": r.necessary_radial,
            "potential": r.necessary_potential,
        },
        "sufficient": r.sufficient,
        "caveats": r.caveats,
        "timings": timings_value(elapsed),
    }))
}

/// Report for `check cm`.
pub fn cm_report(args: &CmArgs) -> CliResult<Value> {
    let start = Instant::now();
    let f = parse(&args.expr)?;
    let grid = args.grid.unwrap_or_else(default_radial_grid);
    let opts = CmOptions { eps_abs: args.tol_abs.unwrap_or(defaults::CM_EPS_ABS), ..CmOptions::default() };
    let v = cm_test_with(&f, args.order, &grid.points(), &opts)?;
    let mut caveats = Vec::new();
    if v.status == CmStatus::Pass {
        caveats.push(format!(
            "finite_order: complete monotonicity sampled to order {} on {} points",
            v.max_order_checked, grid.count
        ));
    }
    let elapsed = args.timings.then(|| start.elapsed().as_secs_f64());
    Ok(json!({
        "version": REPORT_VERSION,
        "config": {
            "command": "check cm",
            "expr": args.expr,
            "order": args.order,
            "grid": grid,
            "eps_abs": opts.eps_abs,
            "symbolic_cap": opts.symbolic_cap,
        },
        "verdict": v.status,
        "necessary": { "cm": v },
        "sufficient": Value::Null,
        "caveats": caveats,
        "timings": timings_value(elapsed),
    }))
}

/// Energies and g(ℰ) for `invert`.
pub fn invert_rows(model: &ModelSpec, beta: Option<f64>, grid: Option<GridSpec>) -> CliResult<(f64, Vec<Vec<f64>>)> {
    let beta = match (beta, &model.radial) {
        (Some(b), _) => b,
        (None, RadialSpec::Constant { beta }) => *beta,
        (None, _) => return Err(CliError::Input("invert needs --beta or a constant-beta model".into())),
    };
    if !(beta.is_finite() && beta <= 1.0) {
        return Err(CliError::Input(format!("beta must be at most 1, got {beta}")));
    }
    let p = model.potential_expr()?;
    let (e0, psi_max) = (model.e0, model.psi_max);
    if beta == 1.0 && e0 != 0.0 {
        return Err(CliError::Input("radial-orbit inversion assumes e0 = 0".into()));
    }
    let energies = match grid {
        Some(g) => g.points(),
        None => {
            let n = defaults::INVERT_POINTS;
            let step = (psi_max - e0) / n as f64;
            linear_grid(e0 + step, psi_max, n)
        }
    };
    let mut rows = Vec::with_capacity(energies.len());
    for e in energies {
        let g = if beta == 1.0 { radial_orbit_invert(&p, e)? } else { eddington_invert_from(&p, e0, beta, e)? };
        rows.push(vec![e, g]);
    }
    Ok((beta, rows))
}

/// Rows (μ, F_μ) for `moments`.
pub fn moment_rows(model: &ModelSpec, mu_list: &[f64], psi: f64, x: f64) -> CliResult<Vec<Vec<f64>>> {
    let ad = model.augmented_density()?;
    if !(psi > ad.e0 && psi <= ad.psi_max) {
        return Err(CliError::Input(format!("Psi must lie in ({}, {}], got {psi}", ad.e0, ad.psi_max)));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::Input(format!("x must be positive, got {x}")));
    }
    mu_list.iter().map(|&mu| Ok(vec![mu, moment_f_mu(&ad, mu, psi, x)?])).collect()
}

fn parse_point(s: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::Input(format!("--at expects \"Psi,x\", got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let psi = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let x = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    Ok((psi, x))
}

fn emit(out: &OutputArgs, contents: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => write_atomic(path, contents)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("cannot write to standard output: {e}")))
        }
    }
}

fn json_only(out: &OutputArgs) -> CliResult<()> {
    if out.format == Some(Format::Csv) {
        return Err(CliError::Input("this report is only available as json".into()));
    }
    Ok(())
}

fn curve_output(out: &OutputArgs, config: Value, header: &[&str], rows: &[Vec<f64>]) -> String {
    match out.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(header, rows),
        Format::Json => to_json_string(&json!({
            "version": REPORT_VERSION,
            "config": config,
            "columns": header,
            "rows": rows,
        })),
    }
}

fn scalar_line(v: f64) -> String {
    if v.is_finite() {
        format!("{v}\n")
    } else {
        format!("{}\n", format_float(v))
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Check(CheckCommand::Consistency(args)) => {
            json_only(&args.output)?;
            let model = ModelSpec::load(&args.model)?;
            let report = consistency_report(&model, &CheckSettings::from(&args))?;
            emit(&args.output, &to_json_string(&report))
        }
        Command::Check(CheckCommand::Cm(args)) => {
            json_only(&args.output)?;
            let report = cm_report(&args)?;
            emit(&args.output, &to_json_string(&report))
        }
        Command::Eval(cmd) => {
            let v = match cmd {
                EvalCommand::Ml { lam, p, b, z } => ml_eval(&MLSpec::new(lam, p, b)?, z)?,
                EvalCommand::Frd { expr, mu, x, a } => frac_derivative(&parse(&expr)?, a, mu, x)?,
                EvalCommand::Rli { expr, lambda, x, a } => rl_signed(&parse(&expr)?, a, lambda, x)?,
            };
            emit(&OutputArgs { out: None, format: None }, &scalar_line(v))
        }
        Command::Invert(args) => {
            let model = ModelSpec::load(&args.model)?;
            let (beta, rows) = invert_rows(&model, args.beta, args.grid)?;
            let config = json!({ "command": "invert", "model": model, "beta": beta, "grid": args.grid });
            emit(&args.output, &curve_output(&args.output, config, &["E", "g"], &rows))
        }
        Command::Moments(args) => {
            let model = ModelSpec::load(&args.model)?;
            let (psi, x) = parse_point(&args.at)?;
            let rows = moment_rows(&model, &args.mu_list, psi, x)?;
            let config = json!({ "command": "moments", "model": model, "psi": psi, "x": x });
            emit(&args.output, &curve_output(&args.output, config, &["mu", "F"], &rows))
        }
    }
}

/// Run the CLI on `argv` (including the program name) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("phasecons: {e}");
            e.exit_code()
        }
    }
}
