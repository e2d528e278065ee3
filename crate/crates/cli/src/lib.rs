//! Command-line front end for `kaon-sn`.
//!
//! Every command produces a [`Report`]: a summary object plus an optional
//! table. Reports render as CSV (provenance in `# ` header lines) or JSON (an
//! envelope with the same fields). Only the `generated` line or field carries
//! a timestamp; the rest of the output is a pure function of the [`RunSpec`].

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use kaon_sn::flavor::{
    asymmetry, asymmetry_limit, csl_damping_rate, csl_survival_probability, survival_probability,
    transition_probability,
};
use kaon_sn::gravity::{
    critical_width, delta_sn, potential_f_closed, potential_f_mass_expansion, potential_f_quadrature,
    potential_f_time_expansion, potential_f_width_expansion, GaussianState, PotentialEvaluation, Scenario,
};
use kaon_sn::solver::{
    doublet_residuals, evolve, init_gaussian, shared_wavefunction_gap, Corrector, DoubletMatrices, RadialGrid,
    ScenarioConfig,
};
use kaon_sn::units::{from_natural, to_natural, Dimension, G_NATURAL, HBARC_MEV_M};
use kaon_sn::{Error, KaonParameters};

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::QuadratureNonConvergence { .. }
            | Error::NonlinearNonConvergence { .. }
            | Error::ProbabilityUnderflow(_)
            | Error::VanishingDenominator(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum TimeUnit {
    /// Multiples of the K_S lifetime.
    #[default]
    #[value(name = "tauS")]
    TauS,
    /// Seconds.
    #[value(name = "s")]
    Seconds,
}

impl TimeUnit {
    fn as_str(self) -> &'static str {
        match self {
            TimeUnit::TauS => "tauS",
            TimeUnit::Seconds => "s",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kaon-sn", version, about = "Self-gravity and flavor oscillations of neutral kaons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key=value parameter file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Defaults to csv for curves and json for scalar results.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Parameter override applied after the config file, e.g. `--set eps_re=2e-3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// P(K0), P(K0bar) and their asymmetry against proper time.
    Oscillate(CurveArgs),
    /// Flavor asymmetry against proper time with its long-time limit.
    Asymmetry(CurveArgs),
    /// Survival probability with and without CSL damping.
    Csl(CurveArgs),
    /// Gravity-induced shift of the mass difference.
    Shift(ShiftArgs),
    /// Closed-form potential against quadrature and expansions.
    PotentialCheck(PotentialArgs),
    /// Radial Schrödinger–Newton evolution.
    Solve(SolveArgs),
    /// Doublet constraint residuals against the off-diagonal mass.
    DoubletCheck(DoubletArgs),
    /// Width below which the self-gravity shift reaches Δm.
    CriticalWidth(CriticalArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CurveArgs {
    /// End of the time axis: `12tauS`, `1e-9s`, or a bare number of τ_S.
    #[arg(long)]
    pub t_max: Option<String>,
    /// Number of samples including t = 0.
    #[arg(long, default_value_t = 241)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = TimeUnit::TauS)]
    pub time_unit: TimeUnit,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ShiftArgs {
    #[arg(long, default_value_t = 2)]
    pub scenario: u32,
    /// Gaussian width in meters.
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Factor applied to Newton's constant.
    #[arg(long, default_value_t = 1.0)]
    pub g_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct PotentialArgs {
    /// Relative tolerance requested from the quadrature.
    #[arg(long, default_value_t = 1e-11)]
    pub tolerance: f64,
    /// Largest accepted closed-vs-quadrature relative error.
    #[arg(long, default_value_t = 1e-8)]
    pub accept: f64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 2)]
    pub scenario: u32,
    /// Initial Gaussian width in meters.
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 512)]
    pub grid_n: usize,
    /// Outer radius in units of the width.
    #[arg(long, default_value_t = 16.0)]
    pub r_max: f64,
    /// Time step in units of m_K a²/ħ.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Final time in units of m_K a²/ħ.
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1.0)]
    pub g_multiplier: f64,
    /// Initial K_L weight |β|².
    #[arg(long, default_value_t = 0.5)]
    pub beta_sq: f64,
    #[arg(long, default_value_t = 1)]
    pub corrector_passes: usize,
    /// Write every n-th step.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Weight the channels with e^{-Γt}.
    #[arg(long)]
    pub decay_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct DoubletArgs {
    /// Dimensionless coupling G m² a/ħ² of the test state.
    #[arg(long, default_value_t = 2.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 512)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 16.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Largest |M21| in the sweep, in units of m₁.
    #[arg(long, default_value_t = 0.16)]
    pub max_m21: f64,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CriticalArgs {
    #[arg(long, default_value_t = 1.0)]
    pub g_multiplier: f64,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Oscillate(_) => "oscillate",
            Command::Asymmetry(_) => "asymmetry",
            Command::Csl(_) => "csl",
            Command::Shift(_) => "shift",
            Command::PotentialCheck(_) => "potential-check",
            Command::Solve(_) => "solve",
            Command::DoubletCheck(_) => "doublet-check",
            Command::CriticalWidth(_) => "critical-width",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Shift(_) | Command::CriticalWidth(_) => Format::Json,
            _ => Format::Csv,
        }
    }

    fn options(&self) -> Vec<(&'static str, String)> {
        let curve = |c: &CurveArgs, default: &str| {
            vec![
                ("t_max", c.t_max.clone().unwrap_or_else(|| default.to_string())),
                ("points", c.points.to_string()),
                ("time_unit", c.time_unit.as_str().to_string()),
            ]
        };
        match self {
            Command::Oscillate(c) | Command::Csl(c) => curve(c, "12tauS"),
            Command::Asymmetry(c) => curve(c, "30tauS"),
            Command::Shift(s) => vec![
                ("scenario", s.scenario.to_string()),
                ("width_m", s.width.to_string()),
                ("g_multiplier", s.g_multiplier.to_string()),
            ],
            Command::PotentialCheck(p) => {
                vec![("tolerance", p.tolerance.to_string()), ("accept", p.accept.to_string())]
            }
            Command::Solve(s) => vec![
                ("scenario", s.scenario.to_string()),
                ("width_m", s.width.to_string()),
                ("grid_n", s.grid_n.to_string()),
                ("r_max", s.r_max.to_string()),
                ("dt", s.dt.to_string()),
                ("t_final", s.t_final.to_string()),
                ("g_multiplier", s.g_multiplier.to_string()),
                ("beta_sq", s.beta_sq.to_string()),
                ("corrector_passes", s.corrector_passes.to_string()),
                ("stride", s.stride.to_string()),
                ("decay_weights", s.decay_weights.to_string()),
            ],
            Command::DoubletCheck(d) => vec![
                ("coupling", d.coupling.to_string()),
                ("grid_n", d.grid_n.to_string()),
                ("r_max", d.r_max.to_string()),
                ("dt", d.dt.to_string()),
                ("max_m21", d.max_m21.to_string()),
                ("points", d.points.to_string()),
            ],
            Command::CriticalWidth(c) => vec![("g_multiplier", c.g_multiplier.to_string())],
        }
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub params: KaonParameters,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunSpec {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let overrides = cli
            .overrides
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>, _>>()?;
        let params = parse_config(cli.config.as_deref(), &overrides)?;
        let format = cli.format.unwrap_or_else(|| cli.command.default_format());
        Ok(Self {
            command: cli.command,
            params,
            out: cli.out,
            format,
        })
    }
}

fn parse_override(text: &str) -> Result<(String, f64), CliError> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{text}`")))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("--set {key}: `{value}` is not a number")))?;
    Ok((key.trim().to_string(), value))
}

/// Defaults, then the file at `path`, then `overrides` (SI values keyed as
/// in the config file).
pub fn parse_config(path: Option<&Path>, overrides: &[(String, f64)]) -> Result<KaonParameters, CliError> {
    let mut params = KaonParameters::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        params.apply_config_str(&text)?;
    }
    for (key, value) in overrides {
        params.set(key, *value)?;
    }
    params.validate()?;
    Ok(params)
}

/// Parses `12tauS`, `1e-9s` or a bare number (τ_S) into natural time units.
pub fn parse_time(text: &str, params: &KaonParameters) -> Result<f64, CliError> {
    let s = text.trim();
    let bad = || CliError::Config(format!("cannot parse time `{text}`"));
    let (number, scale) = if let Some(n) = s.strip_suffix("tauS").or_else(|| s.strip_suffix("taus")) {
        (n, params.tau_s())
    } else if let Some(n) = s.strip_suffix('s') {
        (n, to_natural(1.0, Dimension::Time))
    } else {
        (s, params.tau_s())
    };
    let value: f64 = number.trim().parse().map_err(|_| bad())?;
    if !(value >= 0.0 && value.is_finite()) {
        return Err(bad());
    }
    Ok(value * scale)
}

/// Rectangular data with a fixed header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Output of one command, before rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub parameters: Vec<(&'static str, f64)>,
    pub options: Vec<(&'static str, String)>,
    pub summary: Map<String, Value>,
    pub table: Option<Table>,
}

fn num(x: f64) -> Value {
    // serde_json maps non-finite values to null
    json!(x)
}

/// Runs the command and returns its report.
pub fn run(spec: &RunSpec) -> Result<Report, CliError> {
    let p = &spec.params;
    let mut summary = Map::new();
    let table = match &spec.command {
        Command::Oscillate(c) => Some(curve(c, p, "12tauS", &["P_K0", "P_K0bar", "asymmetry"], |t| {
            Ok(vec![survival_probability(t, p)?, transition_probability(t, p)?, asymmetry(t, p)?])
        })?),
        Command::Asymmetry(c) => {
            let limit = asymmetry_limit(p);
            summary.insert("limit".into(), num(limit));
            Some(curve(c, p, "30tauS", &["asymmetry", "limit"], |t| Ok(vec![asymmetry(t, p)?, limit]))?)
        }
        Command::Csl(c) => {
            let rate = csl_damping_rate(p)?;
            summary.insert("damping_rate_MeV".into(), num(rate));
            summary.insert("damping_rate_per_s".into(), num(rate / from_natural(1.0, Dimension::Time)));
            Some(curve(c, p, "12tauS", &["P_K0", "P_K0_csl"], |t| {
                Ok(vec![survival_probability(t, p)?, csl_survival_probability(t, p)?])
            })?)
        }
        Command::Shift(s) => {
            shift(s, p, &mut summary)?;
            None
        }
        Command::PotentialCheck(a) => Some(potential_check(a, &mut summary)?),
        Command::Solve(s) => Some(solve(s, p, &mut summary)?),
        Command::DoubletCheck(d) => Some(doublet_check(d, &mut summary)?),
        Command::CriticalWidth(c) => {
            check_multiplier(c.g_multiplier)?;
            let g = G_NATURAL * c.g_multiplier;
            let width = critical_width(g, p.m_k)?;
            let planck = G_NATURAL.sqrt() * HBARC_MEV_M;
            summary.insert("g_multiplier".into(), num(c.g_multiplier));
            summary.insert("critical_width_m".into(), num(width * HBARC_MEV_M));
            summary.insert("critical_width_natural".into(), num(width));
            summary.insert("planck_length_m".into(), num(planck));
            summary.insert("ratio_to_planck".into(), num(width * HBARC_MEV_M / planck));
            None
        }
    };
    Ok(Report {
        command: spec.command.name(),
        parameters: p.settings(),
        options: spec.command.options(),
        summary,
        table,
    })
}

fn curve(
    args: &CurveArgs,
    p: &KaonParameters,
    default_t_max: &str,
    columns: &[&str],
    f: impl Fn(f64) -> kaon_sn::Result<Vec<f64>>,
) -> Result<Table, CliError> {
    if args.points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }
    let t_max = parse_time(args.t_max.as_deref().unwrap_or(default_t_max), p)?;
    let unit = match args.time_unit {
        TimeUnit::TauS => p.tau_s(),
        TimeUnit::Seconds => to_natural(1.0, Dimension::Time),
    };
    let mut names = vec!["t"];
    names.extend_from_slice(columns);
    let mut table = Table::new(&names);
    for i in 0..args.points {
        let t = t_max * i as f64 / (args.points - 1) as f64;
        let mut row = vec![num(t / unit)];
        row.extend(f(t)?.into_iter().map(num));
        table.rows.push(row);
    }
    Ok(table)
}

fn check_multiplier(g: f64) -> Result<(), CliError> {
    if !(g >= 0.0 && g.is_finite()) {
        return Err(CliError::Config(format!("--g-multiplier must be finite and non-negative, got {g}")));
    }
    Ok(())
}

fn shift(s: &ShiftArgs, p: &KaonParameters, summary: &mut Map<String, Value>) -> Result<(), CliError> {
    check_multiplier(s.g_multiplier)?;
    let scenario = Scenario::from_number(s.scenario)?;
    let width = to_natural(s.width, Dimension::Length);
    let delta = delta_sn(G_NATURAL * s.g_multiplier, p.m_k, width)?;
    let factor = scenario.delta_m_factor();
    let change = factor * delta * p.delta_m;
    summary.insert("scenario".into(), json!(scenario.number()));
    summary.insert("width_m".into(), num(s.width));
    summary.insert("g_multiplier".into(), num(s.g_multiplier));
    summary.insert("delta_sn".into(), num(delta));
    summary.insert("factor".into(), num(factor));
    summary.insert("delta_m_MeV".into(), num(p.delta_m));
    summary.insert("delta_m_shifted_MeV".into(), num(p.delta_m - change));
    summary.insert("delta_m_change_MeV".into(), num(change));
    summary.insert("relative_change".into(), num(factor * delta));
    Ok(())
}

const R_OVER_A: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];
const SPREADING: [f64; 5] = [0.0, 0.1, 1.0, 5.0, 50.0];
const WIDTHS: [f64; 3] = [0.1, 1.0, 100.0];

/// Expansion valid in the regime of `state`, if any.
fn expansion_for(state: &GaussianState, r: f64) -> Option<kaon_sn::Result<PotentialEvaluation>> {
    let s = state.spreading();
    let x = r / state.width();
    if s >= 5.0 {
        Some(potential_f_mass_expansion(state, r))
    } else if s <= 0.1 && x <= 0.5 {
        Some(potential_f_width_expansion(state, r))
    } else if s <= 0.1 {
        Some(potential_f_time_expansion(state, r))
    } else {
        None
    }
}

fn potential_check(args: &PotentialArgs, summary: &mut Map<String, Value>) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "a",
        "s",
        "r_over_a",
        "closed",
        "quadrature",
        "quadrature_rel_error",
        "quadrature_within",
        "expansion",
        "expansion_value",
        "expansion_abs_error",
        "expansion_estimate",
        "expansion_within",
    ]);
    let (mut worst, mut all_within) = (0.0f64, true);
    let m = 2.0;
    for &a in &WIDTHS {
        for &s in &SPREADING {
            let state = GaussianState::new(a, m, s * m * a * a)?;
            for &x in &R_OVER_A {
                let r = x * a;
                let closed = potential_f_closed(&state, r)?.value;
                let quad = potential_f_quadrature(&state, r, args.tolerance)?;
                let rel = quad.relative_error_to(closed);
                worst = worst.max(rel);
                all_within &= rel < args.accept;
                let mut row = vec![num(a), num(s), num(x), num(closed), num(quad.value), num(rel), json!(rel < args.accept)];
                match expansion_for(&state, r).transpose()? {
                    Some(e) => {
                        let err = (e.value - closed).abs();
                        // the leading terms are exact at s = 0; leave room for rounding
                        let within = err <= 2.0 * e.estimated_error + 1e-12 * closed;
                        let method = serde_json::to_value(e.method).expect("plain enum");
                        row.extend([method, num(e.value), num(err), num(e.estimated_error), json!(within)]);
                    }
                    None => row.extend([Value::Null, Value::Null, Value::Null, Value::Null, Value::Null]),
                }
                table.rows.push(row);
            }
        }
    }
    summary.insert("points".into(), json!(table.rows.len()));
    summary.insert("worst_quadrature_rel_error".into(), num(worst));
    summary.insert("all_within".into(), json!(all_within));
    Ok(table)
}

fn solve(s: &SolveArgs, p: &KaonParameters, summary: &mut Map<String, Value>) -> Result<Table, CliError> {
    check_multiplier(s.g_multiplier)?;
    if !(0.0..=1.0).contains(&s.beta_sq) {
        return Err(CliError::Config(format!("--beta-sq must lie in [0, 1], got {}", s.beta_sq)));
    }
    if s.stride == 0 {
        return Err(CliError::Config("--stride must be positive".into()));
    }
    let scenario = Scenario::from_number(s.scenario)?;
    let a = to_natural(s.width, Dimension::Length);
    let grid = RadialGrid::new(s.r_max * a, s.grid_n)?;
    let mut config = ScenarioConfig::new(scenario, grid, a, p.m_k).with_beta_sq(s.beta_sq);
    config.m_s = p.m_k - 0.5 * p.delta_m;
    config.m_l = p.m_k + 0.5 * p.delta_m;
    config.gamma_s = p.gamma_s;
    config.gamma_l = p.gamma_l;
    config.include_decay_weights = s.decay_weights;
    config.newton_g = G_NATURAL * s.g_multiplier;
    config.corrector = Corrector {
        passes: s.corrector_passes,
        tolerance: None,
    };
    let unit = config.spreading_time();
    config.dt = s.dt * unit;
    let result = evolve(&config, s.t_final * unit, s.stride)?;

    summary.insert("coupling".into(), num(config.newton_g * p.m_k * p.m_k * a));
    summary.insert("time_unit_natural".into(), num(unit));
    summary.insert("steps".into(), json!((s.t_final / s.dt).ceil() as u64));
    let columns = result.column_names();
    let mut table = Table {
        columns,
        rows: Vec::with_capacity(result.times.len()),
    };
    for (i, t) in result.times.iter().enumerate() {
        let mut row = vec![num(t / unit)];
        for c in &result.channels {
            row.extend(
                [c.norm[i], c.mean_square_radius[i] / (a * a), c.kinetic_energy[i], c.potential_energy[i], c.central_phase[i]]
                    .map(num),
            );
        }
        table.rows.push(row);
    }
    summary.insert("r2_unit".into(), json!("a^2"));
    summary.insert("energy_unit".into(), json!("MeV"));
    Ok(table)
}

/// R² of the least-squares line through (x, y).
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn doublet_check(d: &DoubletArgs, summary: &mut Map<String, Value>) -> Result<Table, CliError> {
    if d.points < 3 {
        return Err(CliError::Config("--points must be at least 3".into()));
    }
    let grid = RadialGrid::new(d.r_max, d.grid_n)?;
    let (m1, m2) = (1.0, 1.05);
    let mut psi1 = init_gaussian(grid, 1.0, m1)?;
    let mut psi2 = init_gaussian(grid, 1.3, m2)?;
    psi1.scale(0.5f64.sqrt());
    psi2.scale(0.5f64.sqrt());
    let base = DoubletMatrices::diagonal(m1, m2);

    let mut table = Table::new(&["m21", "constraint_21", "constraint_12", "dynamical_1", "dynamical_2"]);
    let (mut sizes, mut residuals) = (Vec::new(), Vec::new());
    let mut diagonal_max = 0.0f64;
    for k in 0..d.points {
        let m21 = d.max_m21 * k as f64 / (d.points - 1) as f64;
        let dm = if k == 0 {
            base
        } else {
            base.with_off_diagonal_mass(Complex64::from_polar(m21, 0.4))
        };
        let r = doublet_residuals(&dm, d.coupling, &psi1, &psi2, d.dt)?;
        if k == 0 {
            diagonal_max = r.constraint_21.max(r.constraint_12);
        } else {
            sizes.push(m21);
            residuals.push(r.constraint_21);
        }
        table
            .rows
            .push([m21, r.constraint_21, r.constraint_12, r.dynamical_1, r.dynamical_2].map(num).to_vec());
    }
    let single = init_gaussian(grid, 1.0, m1)?;
    summary.insert("diagonal_max_constraint".into(), num(diagonal_max));
    summary.insert("linear_fit_r2".into(), num(r_squared(&sizes, &residuals)));
    summary.insert(
        "shared_gap_equal_masses".into(),
        num(shared_wavefunction_gap(&DoubletMatrices::diagonal(m1, m1), d.coupling, &single)?),
    );
    summary.insert(
        "shared_gap_unequal_masses".into(),
        num(shared_wavefunction_gap(&base, d.coupling, &single)?),
    );
    Ok(table)
}

/// Provenance timestamp: `SOURCE_DATE_EPOCH` when set, otherwise now.
pub fn generated_stamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn render(&self, format: Format, generated: &str) -> Result<String, CliError> {
        match format {
            Format::Csv => self.render_csv(generated),
            Format::Json => {
                let params: Map<String, Value> = self.parameters.iter().map(|(k, v)| (k.to_string(), num(*v))).collect();
                let options: Map<String, Value> =
                    self.options.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                let mut envelope = json!({
                    "generated": generated,
                    "command": self.command,
                    "parameters": params,
                    "options": options,
                    "result": self.summary,
                });
                if let Some(t) = &self.table {
                    envelope["table"] = json!({ "columns": t.columns, "rows": t.rows });
                }
                let mut text = serde_json::to_string_pretty(&envelope).expect("json values serialize");
                text.push('\n');
                Ok(text)
            }
        }
    }

    fn render_csv(&self, generated: &str) -> Result<String, CliError> {
        let mut head = String::new();
        let _ = writeln!(head, "# generated: {generated}");
        let _ = writeln!(head, "# command: {}", self.command);
        for (k, v) in &self.parameters {
            let _ = writeln!(head, "# {k} = {v:e}");
        }
        for (k, v) in &self.options {
            let _ = writeln!(head, "# {k} = {v}");
        }
        let fallback;
        let table = match &self.table {
            Some(t) => {
                for (k, v) in &self.summary {
                    let _ = writeln!(head, "# {k} = {}", cell(v));
                }
                t
            }
            None => {
                let mut t = Table::new(&["key", "value"]);
                t.rows = self.summary.iter().map(|(k, v)| vec![json!(k), v.clone()]).collect();
                fallback = t;
                &fallback
            }
        };
        let mut w = csv::Writer::from_writer(head.into_bytes());
        let csv_err = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&table.columns).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row.iter().map(cell)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Runs `spec` and writes the rendered report to its output.
pub fn execute(spec: &RunSpec) -> Result<(), CliError> {
    let report = run(spec)?;
    let text = report.render(spec.format, &generated_stamp())?;
    match &spec.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Drops the provenance timestamp so two outputs can be compared.
pub fn strip_generated(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# generated:") && !l.trim_start().starts_with("\"generated\":"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_suffixes() {
        let p = KaonParameters::default();
        assert_eq!(parse_time("12tauS", &p).unwrap(), 12.0 * p.tau_s());
        assert_eq!(parse_time("3", &p).unwrap(), 3.0 * p.tau_s());
        let s = parse_time("1e-9s", &p).unwrap();
        assert!((from_natural(s, Dimension::Time) / 1e-9 - 1.0).abs() < 1e-14);
        assert!(parse_time("-1tauS", &p).is_err());
        assert!(parse_time("soon", &p).is_err());
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(Error::UnknownConfigKey("x".into())).exit_code(), 2);
        let e = Error::NonlinearNonConvergence { passes: 3, change: 1.0 };
        assert_eq!(CliError::from(e).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 4);
    }

    #[test]
    fn fit_of_a_line_is_perfect() {
        let x = [1.0, 2.0, 3.0];
        assert!((r_squared(&x, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn check_exercises_every_expansion() {
        let mut summary = Map::new();
        let t = potential_check(&PotentialArgs { tolerance: 1e-11, accept: 1e-8 }, &mut summary).unwrap();
        assert_eq!(t.rows.len(), 75);
        assert_eq!(summary["all_within"], json!(true));
        for method in ["mass_expansion", "time_expansion", "width_expansion"] {
            assert!(t.rows.iter().any(|r| r[7] == json!(method)), "{method}");
        }
        assert!(t.rows.iter().all(|r| r[11] != json!(false)));
    }
}
