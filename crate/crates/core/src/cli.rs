//! The `lpp` command line: flag and config-file parsing, dispatch to the
//! library, and CSV/JSON report emission.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::burke::{exact_burke_factorization, mc_stationarity_check, two_stage_factorization};
use crate::ldp::{istar, jstar, rate_i, JstarMethod, XI_MAX};
use crate::lmgf::{lambda_boundary, thresholds, Part};
use crate::montecarlo::{estimate_growth, estimate_lmgf, estimate_tail, left_tail_diagnostic, Design};
use crate::params::{validate_params, ModelParams};
use crate::shape::{gpp, gpp_boundary};
use crate::verify::{run_all, run_for_params, Scale};
use crate::Extended;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Shape,
    Rate,
    Lmgf,
    Simulate,
    Tail,
    MgfSim,
    LeftTail,
    Burke,
    VerifyAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "lpp", version, about = "Bernoulli corner-growth last-passage percolation lab")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Limit shape over a direction or a grid of directions.
    Shape,
    /// J* and u* over xi, or the rate function over r when --r is given.
    Rate,
    /// Limiting log-MGF: the boundary Lambda with --u, istar without.
    Lmgf,
    /// Monte Carlo growth rate G/N.
    Simulate,
    /// Monte Carlo right-tail rate -log P(G >= Nr)/N.
    Tail,
    /// Monte Carlo log-MGF log E exp(xi G)/N.
    MgfSim,
    /// Left-tail speed diagnostic across several N.
    LeftTail,
    /// Exact and Monte Carlo Burke checks.
    Burke,
    /// The acceptance suite; exits 1 when a check fails.
    VerifyAll,
}

impl Cmd {
    fn name(&self) -> CommandName {
        match self {
            Cmd::Shape => CommandName::Shape,
            Cmd::Rate => CommandName::Rate,
            Cmd::Lmgf => CommandName::Lmgf,
            Cmd::Simulate => CommandName::Simulate,
            Cmd::Tail => CommandName::Tail,
            Cmd::MgfSim => CommandName::MgfSim,
            Cmd::LeftTail => CommandName::LeftTail,
            Cmd::Burke => CommandName::Burke,
            Cmd::VerifyAll => CommandName::VerifyAll,
        }
    }
}

/// Flags shared by every subcommand. Value lists accept a number, a comma
/// list, or `a..b:k` for `k` evenly spaced points including both ends.
#[derive(Debug, Default, Args)]
struct Flags {
    /// Bulk Bernoulli parameter.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Boundary parameter; selects the boundary model.
    #[arg(long, global = true)]
    u: Option<f64>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Level(s) r.
    #[arg(long, global = true)]
    r: Option<String>,
    /// Tilt(s) xi.
    #[arg(long, global = true)]
    xi: Option<String>,
    /// Scale(s) N; for `burke` the lattice side.
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    reps: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Direction grid, e.g. "s=0..2:40 t=0..2:40".
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Run `verify-all` with reduced replicate counts.
    #[arg(long, global = true)]
    quick: bool,
    /// JSON config file; flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// A value list in a config file: a number or a spec string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SpecValue {
    Number(f64),
    Text(String),
}

impl SpecValue {
    fn text(&self) -> String {
        match self {
            SpecValue::Number(x) => x.to_string(),
            SpecValue::Text(s) => s.clone(),
        }
    }
}

/// Everything a run depends on. Written into every output, and accepted
/// back through `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<SpecValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<SpecValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<SpecValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quick: Option<bool>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn config_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl From<crate::Error> for ConfigError {
    fn from(e: crate::Error) -> Self {
        ConfigError(e.to_string())
    }
}

/// Parses `x`, `x,y,z` or `a..b:k`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let spec = spec.trim();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| config_err(format!("bad number {s:?} in {spec:?}")))
    };
    if let Some((range, count)) = spec.split_once(':') {
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| config_err(format!("expected a..b:k, got {spec:?}")))?;
        let (a, b) = (num(a)?, num(b)?);
        let k: usize = count
            .trim()
            .parse()
            .map_err(|_| config_err(format!("bad point count in {spec:?}")))?;
        return match k {
            0 => Err(config_err(format!("empty range {spec:?}"))),
            1 => Ok(vec![a]),
            _ => Ok((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()),
        };
    }
    spec.split(',').map(num).collect()
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>, ConfigError> {
    parse_values(spec)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as usize)
            } else {
                Err(config_err(format!("N must be a positive integer, got {x}")))
            }
        })
        .collect()
}

/// Parses `s=SPEC t=SPEC`.
pub fn parse_grid(spec: &str) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let (mut s, mut t) = (None, None);
    for part in spec.split_whitespace() {
        match part.split_once('=') {
            Some(("s", v)) => s = Some(parse_values(v)?),
            Some(("t", v)) => t = Some(parse_values(v)?),
            _ => return Err(config_err(format!("bad grid component {part:?}"))),
        }
    }
    match (s, t) {
        (Some(s), Some(t)) => Ok((s, t)),
        _ => Err(config_err("grid needs both s= and t=")),
    }
}

impl ExperimentConfig {
    /// Reads a config file.
    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    /// `self` with every unset field taken from `base`.
    fn over(self, base: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            command: self.command.or(base.command),
            p: self.p.or(base.p),
            u: self.u.or(base.u),
            s: self.s.or(base.s),
            t: self.t.or(base.t),
            r: self.r.or(base.r),
            xi: self.xi.or(base.xi),
            n: self.n.or(base.n),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            threads: self.threads.or(base.threads),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            grid: self.grid.or(base.grid),
            quick: self.quick.or(base.quick),
        }
    }

    /// Fills per-command defaults so the echoed config is complete.
    fn with_defaults(self, command: CommandName) -> ExperimentConfig {
        use CommandName::*;
        let text = |s: &str| Some(SpecValue::Text(s.into()));
        let mc = matches!(command, Simulate | Tail | MgfSim | LeftTail | Burke | VerifyAll);
        let defaults = ExperimentConfig {
            command: Some(command),
            s: (command != VerifyAll).then_some(1.0),
            t: (command != VerifyAll).then_some(1.0),
            xi: match command {
                Rate => text("0..3:60"),
                Lmgf => text("0..1:51"),
                MgfSim => text("0.2"),
                _ => None,
            },
            n: match command {
                Simulate => text("1000"),
                Tail => text("200"),
                MgfSim => text("400"),
                LeftTail => text("20,30,40"),
                Burke => text("64"),
                _ => None,
            },
            reps: match command {
                Simulate => Some(100),
                Tail | LeftTail => Some(100_000),
                MgfSim => Some(20_000),
                Burke => Some(20_000),
                _ => None,
            },
            seed: mc.then_some(0),
            format: Some(match command {
                Burke | VerifyAll => Format::Json,
                _ => Format::Csv,
            }),
            quick: (command == VerifyAll).then_some(false),
            ..ExperimentConfig::default()
        };
        ExperimentConfig {
            command: Some(command),
            ..self.over(defaults)
        }
    }

    fn params(&self) -> Result<ModelParams, ConfigError> {
        let p = self.p.ok_or_else(|| config_err("--p is required"))?;
        Ok(validate_params(p, self.u)?)
    }

    fn values(&self, field: &Option<SpecValue>, name: &str) -> Result<Vec<f64>, ConfigError> {
        let spec = field.as_ref().ok_or_else(|| config_err(format!("--{name} is required")))?;
        parse_values(&spec.text())
    }

    fn sizes(&self) -> Result<Vec<usize>, ConfigError> {
        let spec = self.n.as_ref().ok_or_else(|| config_err("--n is required"))?;
        parse_sizes(&spec.text())
    }

    fn st(&self) -> (f64, f64) {
        (self.s.unwrap_or(1.0), self.t.unwrap_or(1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(fmt_f64(*x)),
            Cell::Int(k) => json!(k),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Extended> for Cell {
    fn from(x: Extended) -> Self {
        Cell::Num(x.to_f64())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Locale-free shortest round-trip formatting; infinities as `inf`.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// A rectangular result plus optional nested JSON detail.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub details: Option<Value>,
    pub verification_failed: bool,
}

impl Report {
    fn new(columns: &[&'static str]) -> Self {
        Report {
            columns: columns.to_vec(),
            ..Report::default()
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format, config: &ExperimentConfig) -> Result<Vec<u8>, ConfigError> {
        let echo = serde_json::to_string(config).map_err(|e| config_err(e.to_string()))?;
        match format {
            Format::Csv => {
                let mut buf = format!("# lpp {VERSION}\n# config: {echo}\n").into_bytes();
                let mut w = csv::Writer::from_writer(&mut buf);
                let io = |e: csv::Error| config_err(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                w.flush().map_err(|e| config_err(e.to_string()))?;
                drop(w);
                Ok(buf)
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut doc = json!({
                    "version": VERSION,
                    "config": config,
                    "rows": rows,
                });
                if let Some(d) = &self.details {
                    doc["details"] = d.clone();
                }
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| config_err(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

fn err_cell(e: crate::Error) -> Cell {
    Cell::Text(e.to_string())
}

fn shape(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let (ss, ts) = match &cfg.grid {
        Some(g) => parse_grid(g)?,
        None => {
            let (s, t) = cfg.st();
            (vec![s], vec![t])
        }
    };
    let boundary = law.u().is_some();
    let mut rep = Report::new(if boundary {
        &["s", "t", "gpp", "branch", "gpp_boundary", "error"]
    } else {
        &["s", "t", "gpp", "branch", "error"]
    });
    for &s in &ss {
        for &t in &ts {
            let mut row = vec![Cell::Num(s), Cell::Num(t)];
            let mut error = Cell::Empty;
            match gpp(s, t, law.p()) {
                Ok(g) => row.extend([Cell::Num(g.value), Cell::Text(g.branch.as_str().into())]),
                Err(e) => {
                    row.extend([Cell::Num(f64::NAN), Cell::Empty]);
                    error = err_cell(e);
                }
            }
            if boundary {
                match gpp_boundary(s, t, &law) {
                    Ok(v) => row.push(Cell::Num(v)),
                    Err(e) => {
                        row.push(Cell::Num(f64::NAN));
                        error = err_cell(e);
                    }
                }
            }
            row.push(error);
            rep.push(row);
        }
    }
    Ok(rep)
}

fn rate(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let (s, t) = cfg.st();
    let p = law.p();
    if cfg.r.is_some() {
        let mut rep = Report::new(&["r", "rate", "argmax_xi", "saturated", "error"]);
        for r in cfg.values(&cfg.r, "r")? {
            rep.push(match rate_i(s, t, p, r, XI_MAX) {
                Ok(v) => vec![Cell::Num(r), v.value.into(), v.argmax_xi.into(), Cell::Bool(v.saturated), Cell::Empty],
                Err(e) => vec![Cell::Num(r), Cell::Num(f64::NAN), Cell::Empty, Cell::Empty, err_cell(e)],
            });
        }
        return Ok(rep);
    }
    let mut rep = Report::new(&["xi", "jstar", "ustar", "flat", "error"]);
    for xi in cfg.values(&cfg.xi, "xi")? {
        rep.push(match jstar(s, t, p, xi, JstarMethod::Closed) {
            Ok(v) => vec![Cell::Num(xi), Cell::Num(v.value), v.u_star.into(), Cell::Bool(v.flat), Cell::Empty],
            Err(e) => vec![Cell::Num(xi), Cell::Num(f64::NAN), Cell::Empty, Cell::Empty, err_cell(e)],
        });
    }
    Ok(rep)
}

fn lmgf(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let (s, t) = cfg.st();
    let xis = cfg.values(&cfg.xi, "xi")?;
    if law.u().is_none() {
        let mut rep = Report::new(&["xi", "istar", "error"]);
        for xi in xis {
            rep.push(match istar(s, t, law.p(), xi) {
                Ok(v) => vec![Cell::Num(xi), Cell::Num(v), Cell::Empty],
                Err(e) => vec![Cell::Num(xi), Cell::Num(f64::NAN), err_cell(e)],
            });
        }
        return Ok(rep);
    }
    let mut rep = Report::new(&["xi", "hor", "ver", "full", "regime", "k_plus", "k_minus", "ell", "error"]);
    for xi in xis {
        let row = (|| -> crate::Result<Vec<Cell>> {
            let full = lambda_boundary(s, t, &law, xi, Part::Full)?;
            let th = thresholds(&law, xi.abs())?;
            Ok(vec![
                Cell::Num(xi),
                lambda_boundary(s, t, &law, xi, Part::Hor)?.value.into(),
                lambda_boundary(s, t, &law, xi, Part::Ver)?.value.into(),
                full.value.into(),
                Cell::Text(full.regime.as_str().into()),
                Cell::Num(th.k_plus),
                th.k_minus.into(),
                th.ell.into(),
                Cell::Empty,
            ])
        })();
        rep.push(row.unwrap_or_else(|e| {
            let mut r = vec![Cell::Num(xi)];
            r.extend(std::iter::repeat_n(Cell::Empty, 7));
            r.push(err_cell(e));
            r
        }));
    }
    Ok(rep)
}

fn design(cfg: &ExperimentConfig, law: &ModelParams, n: usize) -> Design {
    let (s, t) = cfg.st();
    Design::new(
        law,
        law.u().is_some(),
        s,
        t,
        n,
        cfg.reps.unwrap_or(100),
        cfg.seed.unwrap_or(0),
    )
}

fn simulate(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let (s, t) = cfg.st();
    let oracle = if law.u().is_some() {
        gpp_boundary(s, t, &law).ok()
    } else {
        gpp(s, t, law.p()).ok().map(|g| g.value)
    };
    let mut rep = Report::new(&["N", "estimate", "half_width_95", "limit", "reps", "master_seed"]);
    let mut all = Vec::new();
    for n in cfg.sizes()? {
        let e = estimate_growth(&law, design(cfg, &law, n))?;
        rep.push(vec![
            Cell::Int(n as u64),
            Cell::Num(e.point),
            Cell::Num(e.half_width_95),
            oracle.into(),
            Cell::Int(e.design.reps),
            Cell::Int(e.design.master_seed),
        ]);
        all.push(e);
    }
    rep.details = Some(json!(all));
    Ok(rep)
}

fn tail(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let (s, t) = cfg.st();
    let mut rep = Report::new(&[
        "N",
        "r",
        "hits",
        "probability",
        "wilson_low",
        "wilson_high",
        "rate_estimate",
        "half_width_95",
        "censored",
        "rate",
    ]);
    let mut all = Vec::new();
    for n in cfg.sizes()? {
        for r in cfg.values(&cfg.r, "r")? {
            let e = estimate_tail(&law, design(cfg, &law, n), r)?;
            let prob = e.probability.expect("tail estimates carry a probability");
            // the analytic rate is only available for the i.i.d. model
            let oracle = match law.u() {
                None => rate_i(s, t, law.p(), r, XI_MAX).ok().map(|v| v.value.to_f64()),
                Some(_) => None,
            };
            rep.push(vec![
                Cell::Int(n as u64),
                Cell::Num(r),
                Cell::Int(prob.hits),
                Cell::Num(prob.estimate),
                Cell::Num(prob.wilson_low),
                Cell::Num(prob.wilson_high),
                Cell::Num(e.point),
                Cell::Num(e.half_width_95),
                Cell::Bool(e.censored),
                oracle.into(),
            ]);
            all.push(e);
        }
    }
    rep.details = Some(json!(all));
    Ok(rep)
}

fn mgf_sim(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let (s, t) = cfg.st();
    let mut rep = Report::new(&["N", "xi", "estimate", "half_width_95", "limit"]);
    let mut all = Vec::new();
    for n in cfg.sizes()? {
        for xi in cfg.values(&cfg.xi, "xi")? {
            let e = estimate_lmgf(&law, design(cfg, &law, n), xi)?;
            let oracle = match law.u() {
                None => istar(s, t, law.p(), xi).ok(),
                Some(_) => lambda_boundary(s, t, &law, xi, Part::Full).ok().map(|v| v.value.to_f64()),
            };
            rep.push(vec![
                Cell::Int(n as u64),
                Cell::Num(xi),
                Cell::Num(e.point),
                Cell::Num(e.half_width_95),
                oracle.into(),
            ]);
            all.push(e);
        }
    }
    rep.details = Some(json!(all));
    Ok(rep)
}

fn left_tail(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    let r = *cfg
        .values(&cfg.r, "r")?
        .first()
        .ok_or_else(|| config_err("--r needs a value"))?;
    let sizes = cfg.sizes()?;
    let d = design(cfg, &law, sizes[0]);
    let out = left_tail_diagnostic(&law, d, r, &sizes)?;
    let mut rep = Report::new(&["N", "hits", "probability", "normalized", "half_width_95", "censored"]);
    for row in &out.rows {
        rep.push(vec![
            Cell::Int(row.n as u64),
            Cell::Int(row.probability.hits),
            Cell::Num(row.probability.estimate),
            Cell::Num(row.normalized),
            Cell::Num(row.half_width_95),
            Cell::Bool(row.censored),
        ]);
    }
    rep.details = Some(json!(out));
    Ok(rep)
}

fn burke(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let law = cfg.params()?;
    law.require_u()?;
    let side = cfg.sizes()?[0];
    let exact = exact_burke_factorization(&law, 80)?;
    let two = two_stage_factorization(&law, 60)?;
    let mc = mc_stationarity_check(&law, side, side, cfg.reps.unwrap_or(20_000), cfg.seed.unwrap_or(0))?;
    let mut rep = Report::new(&["check", "value", "threshold", "passed"]);
    rep.push(vec![
        Cell::Text("exact joint deviation".into()),
        Cell::Num(exact.max_abs_deviation),
        Cell::Num(1e-10),
        Cell::Bool(exact.max_abs_deviation < 1e-10),
    ]);
    rep.push(vec![
        Cell::Text("two-stage joint deviation".into()),
        Cell::Num(two.max_abs_deviation),
        Cell::Num(1e-8),
        Cell::Bool(two.max_abs_deviation < 1e-8),
    ]);
    for path in &mc.paths {
        let max_z = path.marginals.iter().map(|m| m.z.abs()).fold(0.0, f64::max);
        let max_c = path.correlations.iter().map(|c| c.correlation.abs()).fold(0.0, f64::max);
        rep.push(vec![
            Cell::Text(format!("{} max |z|", path.path)),
            Cell::Num(max_z),
            Cell::Num(mc.z_threshold),
            Cell::Bool(max_z < mc.z_threshold),
        ]);
        rep.push(vec![
            Cell::Text(format!("{} max |correlation|", path.path)),
            Cell::Num(max_c),
            Cell::Num(mc.correlation_threshold),
            Cell::Bool(max_c < mc.correlation_threshold),
        ]);
    }
    rep.verification_failed = rep.rows.iter().any(|r| r[3] == Cell::Bool(false));
    rep.details = Some(json!({ "exact": exact, "two_stage": two, "stationarity": mc }));
    Ok(rep)
}

fn verify_all(cfg: &ExperimentConfig, log: &mut dyn Write) -> Result<Report, ConfigError> {
    let scale = if cfg.quick.unwrap_or(false) { Scale::Quick } else { Scale::Full };
    let mut reports = run_all(cfg.seed.unwrap_or(0), scale);
    if let Some(p) = cfg.p {
        let law = validate_params(p, cfg.u)?;
        if law.u().is_some() {
            reports.extend(run_for_params(&law)?);
        }
    }
    let mut rep = Report::new(&["id", "name", "passed", "elapsed_s", "summary"]);
    for r in &reports {
        let _ = writeln!(log, "{}", r.line());
        rep.push(vec![
            Cell::Text(r.id.clone()),
            Cell::Text(r.name.clone()),
            Cell::Bool(r.passed),
            Cell::Num(r.elapsed_s),
            Cell::Text(r.summary.clone()),
        ]);
    }
    rep.verification_failed = reports.iter().any(|r| !r.passed);
    rep.details = Some(json!(reports));
    Ok(rep)
}

/// Resolves flags and the optional config file into a complete config.
fn resolve(cli: Cli) -> Result<ExperimentConfig, ConfigError> {
    let f = cli.flags;
    let from_flags = ExperimentConfig {
        command: None,
        p: f.p,
        u: f.u,
        s: f.s,
        t: f.t,
        r: f.r.map(SpecValue::Text),
        xi: f.xi.map(SpecValue::Text),
        n: f.n.map(SpecValue::Text),
        reps: f.reps,
        seed: f.seed,
        threads: f.threads,
        format: f.format,
        out: f.out,
        grid: f.grid,
        quick: f.quick.then_some(true),
    };
    let file = match &f.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let command = cli.command.name();
    if let Some(c) = file.command {
        if c != command {
            return Err(config_err(format!(
                "config file is for `{}`, not this subcommand",
                serde_json::to_value(c).unwrap_or_default().as_str().unwrap_or("?")
            )));
        }
    }
    Ok(from_flags.over(file).with_defaults(command))
}

fn dispatch(cfg: &ExperimentConfig, log: &mut dyn Write) -> Result<Report, ConfigError> {
    match cfg.command.expect("resolved configs name their command") {
        CommandName::Shape => shape(cfg),
        CommandName::Rate => rate(cfg),
        CommandName::Lmgf => lmgf(cfg),
        CommandName::Simulate => simulate(cfg),
        CommandName::Tail => tail(cfg),
        CommandName::MgfSim => mgf_sim(cfg),
        CommandName::LeftTail => left_tail(cfg),
        CommandName::Burke => burke(cfg),
        CommandName::VerifyAll => verify_all(cfg, log),
    }
}

/// Runs `lpp` on `args` (program name first); returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = resolve(cli).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads.unwrap_or(0))
            .build()
            .map_err(|e| config_err(e.to_string()))?;
        let mut log = Vec::new();
        let report = pool.install(|| dispatch(&cfg, &mut log));
        let _ = stderr.write_all(&log);
        let report = report?;
        let bytes = report.render(cfg.format.unwrap_or(Format::Csv), &cfg)?;
        match &cfg.out {
            Some(path) => fs::write(path, &bytes).map_err(|e| config_err(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(&bytes).map_err(|e| config_err(e.to_string()))?,
        }
        Ok(report.verification_failed)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_VERIFY_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}
