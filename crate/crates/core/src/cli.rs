//! Command-line front end: batch evaluation of the analytics, the
//! simulator and preset figure data, written as CSV or JSON.
//!
//! Every table starts with a `#` comment block holding the tool version,
//! the resolved command and the network configuration, so outputs are
//! self-describing. Exit codes: 0 success, 2 configuration or input error,
//! 3 numerical failure, 4 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aloha::{self, AlohaConfig, SeriesTruncation};
use crate::analytics::{self, MeanLocalDelay, Scope};
use crate::error::{Error, Result};
use crate::gains::{self, GainRegime};
use crate::meta::{self, GilPelaezOptions};
use crate::network::{NetworkConfig, TierParams};
use crate::sim::{self, SimConfig};
use crate::{from_db, to_db};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hetnet-meta", version, about = "SIR meta distribution of K-tier heterogeneous cellular networks")]
pub struct Cli {
    /// Read and write SIR thresholds in dB instead of linear units.
    #[arg(long, global = true)]
    pub db: bool,
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HETNET_THREADS")]
    pub threads: Option<usize>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments M_b overall and per tier (ALOHA moments when the config sets `activity`).
    Moments(MomentsArgs),
    /// Meta distribution by Gil-Pelaez inversion, beta approximation and optionally simulation.
    Meta(MetaArgs),
    /// Asymptotic SIR gains, shifted-curve overlays and variance shifts.
    Gains(GainsArgs),
    /// Boundaries of the finite-mean-local-delay activity region (two tiers).
    DelayRegion(DelayRegionArgs),
    /// Monte Carlo simulation, optionally compared with the closed forms.
    Simulate(SimulateArgs),
    /// Data series of a preset figure.
    Figure(FigureArgs),
}

/// A grid of numbers: `a,b,c` or `start:stop:count` (inclusive, uniform).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|e| format!("bad grid start '{a}': {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("bad grid stop '{b}': {e}"))?;
            let n: usize = n.trim().parse().map_err(|e| format!("bad grid count '{n}': {e}"))?;
            match n {
                0 => return Err("grid count must be positive".into()),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] => s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad number '{v}': {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?,
        _ => return Err(format!("cannot parse grid '{s}'")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("grid '{s}' contains non-finite values"));
    }
    Ok(Grid(values))
}

/// Moment orders: real numbers or complex ones written `re+imj` / `imj`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orders(pub Vec<Complex64>);

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let s = s.trim();
    let bad = |_| format!("bad moment order '{s}'");
    let Some(body) = s.strip_suffix('j') else {
        return s.parse::<f64>().map(Complex64::from).map_err(bad);
    };
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().map_err(bad)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(bad)?,
    };
    Ok(Complex64::new(re, im))
}

fn parse_orders(s: &str) -> std::result::Result<Orders, String> {
    s.split(',').map(parse_complex).collect::<std::result::Result<Vec<_>, _>>().map(Orders)
}

/// `all`, `overall` or `tierN` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub enum ScopeArg {
    All,
    One(Scope),
}

fn parse_scope(s: &str) -> std::result::Result<ScopeArg, String> {
    if s.eq_ignore_ascii_case("all") {
        Ok(ScopeArg::All)
    } else {
        s.parse::<Scope>().map(ScopeArg::One).map_err(|e| e.to_string())
    }
}

impl ScopeArg {
    fn resolve(&self, net: &NetworkConfig) -> Result<Vec<Scope>> {
        match self {
            ScopeArg::All => Ok(std::iter::once(Scope::Overall).chain((0..net.num_tiers()).map(Scope::Tier)).collect()),
            ScopeArg::One(s) => {
                if let Scope::Tier(i) = s {
                    net.tier(*i).map_err(|e| Error::Config(e.to_string()))?;
                }
                Ok(vec![*s])
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Network configuration (TOML, or JSON by `.json` extension).
    pub config: PathBuf,
    /// SIR thresholds.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub theta: Grid,
    /// Moment orders, e.g. `1,2,-1,0+5j`.
    #[arg(short, long, value_parser = parse_orders, allow_hyphen_values = true, default_value = "1")]
    pub b: Orders,
    #[arg(long, value_parser = parse_scope, default_value = "all")]
    pub scope: ScopeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetaMethod {
    Exact,
    Beta,
    Both,
    /// Both analytic curves plus a Monte Carlo estimate.
    Empirical,
}

#[derive(Debug, Args)]
pub struct MetaArgs {
    pub config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Reliability grid (default: 201 points on [0.005, 0.995]).
    #[arg(long, value_parser = parse_grid)]
    pub t: Option<Grid>,
    #[arg(long, value_enum, default_value = "both")]
    pub method: MetaMethod,
    #[arg(long, value_parser = parse_scope, default_value = "all")]
    pub scope: ScopeArg,
    #[command(flatten)]
    pub sim: SimParams,
}

#[derive(Debug, Args)]
pub struct GainsArgs {
    pub config: PathBuf,
    #[arg(short, long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,2")]
    pub b: Vec<f64>,
    /// Instead of the gain table, compare exact moments with the shifted PPP curve at these thresholds.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, conflicts_with = "variance_shift")]
    pub overlay: Option<Grid>,
    /// Instead of the gain table, report variance shifts at these thresholds (always dB).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub variance_shift: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct DelayRegionArgs {
    pub config: PathBuf,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub theta: Grid,
    /// Number of p1 columns.
    #[arg(long, default_value_t = aloha::DEFAULT_RESOLUTION)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimParams {
    #[arg(long, default_value_t = 100_000)]
    pub realizations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Window radius (default: sized for the largest threshold).
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub theta: Grid,
    #[arg(short, long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,2")]
    pub b: Vec<f64>,
    /// Reliabilities at which to report the empirical CCDF.
    #[arg(long, value_parser = parse_grid)]
    pub t: Option<Grid>,
    /// Add analytic values and z-scores.
    #[arg(long)]
    pub compare: bool,
    /// Dump every per-realization value to this CSV file.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    M1VsTheta,
    VarVsTheta,
    MetaAtTheta,
    GainShiftMoments,
    GainShiftVariance,
    M1VsB2,
    VarVsB2,
    AsymptV2,
    DelayRegion,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, value_enum)]
    pub id: FigureId,
    /// Points of the main grid.
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    /// Add a simulated curve to `meta-at-theta` with this many realizations.
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Contents of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: f64,
    pub tiers: Vec<TierParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn network(&self) -> Result<NetworkConfig> {
        NetworkConfig::new(self.alpha, self.tiers.clone())
    }

    pub fn aloha(&self) -> Result<Option<AlohaConfig>> {
        self.activity.as_ref().map(|p| AlohaConfig::new(self.network()?, p.clone())).transpose()
    }

    fn from_network(net: &NetworkConfig) -> Self {
        ConfigFile {
            alpha: net.alpha(),
            tiers: net.tiers().to_vec(),
            activity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) if v.is_nan() => write!(f, "NaN"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub command: String,
    /// Configurations the rows were computed from.
    pub configs: Vec<ConfigFile>,
    /// Extra `key: value` lines for the header block.
    pub notes: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(command: String, configs: Vec<ConfigFile>, columns: &[&str]) -> Self {
        Table {
            command,
            configs,
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# hetnet-meta {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# command: {}", self.command)?;
        for c in &self.configs {
            writeln!(w, "# config: {}", serde_json::to_string(c).expect("config serializes"))?;
        }
        for (k, v) in &self.notes {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut csv = csv::Writer::from_writer(&mut w);
        let io = |e: csv::Error| Error::Io(io::Error::other(e));
        csv.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(|c| c.to_string())).map_err(io)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let doc = serde_json::json!({
            "tool": "hetnet-meta",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "configs": self.configs,
            "notes": self.notes.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect::<serde_json::Map<_, _>>(),
            "columns": self.columns,
            "rows": self.rows,
        });
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Io(io::Error::other(e)))?;
        writeln!(w)?;
        Ok(())
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Range(_) => EXIT_CONFIG,
        Error::Quadrature { .. } | Error::Series { .. } => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
    }
}

fn status(e: &Error) -> &'static str {
    match exit_code(e) {
        EXIT_NUMERICAL => "numerical-failure",
        EXIT_IO => "io-error",
        _ => "domain-error",
    }
}

struct Units {
    db: bool,
}

impl Units {
    fn input(&self, v: f64) -> f64 {
        if self.db {
            from_db(v)
        } else {
            v
        }
    }

    fn output(&self, v: f64) -> f64 {
        if self.db {
            to_db(v)
        } else {
            v
        }
    }

    fn column(&self) -> &'static str {
        if self.db {
            "theta_db"
        } else {
            "theta"
        }
    }

    fn grid(&self, g: &Grid) -> Result<Vec<f64>> {
        if g.0.is_empty() {
            return Err(Error::Config("empty threshold grid".into()));
        }
        let v: Vec<f64> = g.0.iter().map(|&x| self.input(x)).collect();
        if let Some(bad) = v.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Config(format!("thresholds must be positive in linear units, got {bad}")));
        }
        Ok(v)
    }
}

fn order_label(b: Complex64) -> String {
    if b.im == 0.0 {
        format!("{}", b.re)
    } else {
        format!("{}{:+}j", b.re, b.im)
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the result to `stdout` or the `--output` file. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute_cli(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "hetnet-meta: {e}");
            exit_code(&e)
        }
    }
}

fn execute_cli(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    let table = pool.install(|| execute(cli))?;
    match &cli.output {
        Some(path) => {
            let file = io::BufWriter::new(fs::File::create(path)?);
            write_table(cli, &table, file)
        }
        None => write_table(cli, &table, stdout),
    }
}

fn write_table<W: Write>(cli: &Cli, table: &Table, w: W) -> Result<()> {
    if cli.json {
        table.write_json(w)
    } else {
        table.write_csv(w)
    }
}

/// Runs a parsed command and returns its table.
pub fn execute(cli: &Cli) -> Result<Table> {
    let units = Units { db: cli.db };
    match &cli.command {
        Command::Moments(a) => cmd_moments(a, &units),
        Command::Meta(a) => cmd_meta(a, &units),
        Command::Gains(a) => cmd_gains(a, &units),
        Command::DelayRegion(a) => cmd_delay_region(a, &units),
        Command::Simulate(a) => cmd_simulate(a, &units),
        Command::Figure(a) => cmd_figure(a),
    }
}

fn load(path: &Path) -> Result<(ConfigFile, NetworkConfig, Option<AlohaConfig>)> {
    let file = ConfigFile::load(path)?;
    let net = file.network()?;
    let aloha = file.aloha()?;
    Ok((file, net, aloha))
}

fn delay_value(d: MeanLocalDelay) -> (Complex64, &'static str) {
    match d {
        MeanLocalDelay::Finite(v) => (v.into(), "ok"),
        MeanLocalDelay::Infinite => (f64::INFINITY.into(), "infinite"),
    }
}

fn moment_entry(net: &NetworkConfig, aloha_cfg: Option<&AlohaConfig>, scope: Scope, theta: f64, b: Complex64) -> Result<(Complex64, &'static str)> {
    let trunc = SeriesTruncation::default();
    if b == Complex64::new(-1.0, 0.0) {
        let d = match (aloha_cfg, scope) {
            (None, Scope::Overall) => analytics::mean_local_delay_overall(net, theta)?,
            (None, Scope::Tier(i)) => analytics::mean_local_delay_tier(net, i, theta)?,
            (Some(a), Scope::Overall) => aloha::aloha_mean_local_delay_overall(a, theta)?,
            (Some(a), Scope::Tier(i)) => aloha::aloha_mean_local_delay(a, i, theta)?,
        };
        return Ok(delay_value(d));
    }
    let v = match aloha_cfg {
        Some(a) => aloha::aloha_moment(a, scope, theta, b, &trunc)?.value,
        None => analytics::moment(net, scope, theta, b)?.value,
    };
    if b.im == 0.0 && b.re < 0.0 && !(v.re > 0.0 && v.re.is_finite()) {
        return Ok((f64::INFINITY.into(), "infinite"));
    }
    Ok((v, "ok"))
}

fn cmd_moments(a: &MomentsArgs, units: &Units) -> Result<Table> {
    let (file, net, aloha_cfg) = load(&a.config)?;
    let thetas = units.grid(&a.theta)?;
    let scopes = a.scope.resolve(&net)?;
    let mut t = Table::new(
        format!("moments scope={:?} b={:?}", a.scope, a.b.0.iter().map(|b| order_label(*b)).collect::<Vec<_>>()),
        vec![file],
        &[units.column(), "scope", "b", "moment_real", "moment_imag", "status"],
    );
    t.note("model", if aloha_cfg.is_some() { "aloha" } else { "full-activity" });
    let cells: Vec<(f64, Scope, Complex64)> = thetas
        .iter()
        .flat_map(|&th| scopes.iter().flat_map(move |&s| a.b.0.iter().map(move |&b| (th, s, b))))
        .collect();
    use rayon::prelude::*;
    let values: Vec<Result<(Complex64, &'static str)>> = cells
        .par_iter()
        .map(|&(th, s, b)| moment_entry(&net, aloha_cfg.as_ref(), s, th, b))
        .collect();
    for ((th, s, b), v) in cells.into_iter().zip(values) {
        let (v, st) = match v {
            Ok(x) => x,
            Err(e) => (Complex64::new(f64::NAN, f64::NAN), status(&e)),
        };
        t.push(vec![units.output(th).into(), s.to_string().into(), order_label(b).into(), v.re.into(), v.im.into(), st.into()]);
    }
    Ok(t)
}

fn sim_config(net: &NetworkConfig, activity: Option<Vec<f64>>, p: &SimParams, theta_max: f64) -> Result<SimConfig> {
    let radius = match p.window {
        Some(r) => r,
        None => sim::default_window_radius(net, theta_max)?,
    };
    let mut cfg = SimConfig::new(net.clone(), p.realizations, p.seed)
        .map_err(|e| Error::Config(e.to_string()))?
        .with_window_radius(radius)?;
    if let Some(act) = activity {
        cfg = cfg.with_activity(act)?;
    }
    Ok(cfg)
}

fn cmd_meta(a: &MetaArgs, units: &Units) -> Result<Table> {
    let (file, net, aloha_cfg) = load(&a.config)?;
    if aloha_cfg.is_some() {
        return Err(Error::Config("the meta distribution is available for full activity only; remove `activity`".into()));
    }
    meta_table(file, &net, a, units)
}

fn meta_table(file: ConfigFile, net: &NetworkConfig, a: &MetaArgs, units: &Units) -> Result<Table> {
    let theta = units.input(a.theta);
    analytics::moment(net, Scope::Overall, theta, 1.0.into())?;
    let grid = match &a.t {
        Some(g) => g.0.clone(),
        None => meta::default_reliability_grid(),
    };
    let scopes = a.scope.resolve(net)?;
    let mut t = Table::new(
        format!("meta {}={} method={:?} scope={:?}", units.column(), a.theta, a.method, a.scope),
        vec![file],
        &["scope", "t", "ccdf_exact", "ccdf_beta", "gap", "ccdf_empirical", "empirical_se"],
    );
    let nan = vec![f64::NAN; grid.len()];
    let exact = match a.method {
        MetaMethod::Beta => None,
        _ => Some(meta::gil_pelaez_ccdf_with(net, &scopes, theta, &grid, &GilPelaezOptions::default())?),
    };
    let stats = if a.method == MetaMethod::Empirical {
        let cfg = sim_config(net, None, &a.sim, theta)?;
        t.note("window_radius", cfg.window_radius);
        t.note("realizations", cfg.n_realizations);
        t.note("seed", cfg.rng_seed);
        Some(sim::run_simulation(&cfg, &[theta], &[1.0], &grid)?)
    } else {
        None
    };
    for (k, &scope) in scopes.iter().enumerate() {
        let ex = exact.as_ref().map_or(&nan, |c| &c[k].ccdf);
        let beta = match a.method {
            MetaMethod::Exact => nan.clone(),
            _ => {
                let (fit, curve) = meta::beta_curve(net, scope, theta, &grid)?;
                t.note(&format!("beta_{scope}"), format!("a={} b={}", fit.shape_a, fit.shape_b));
                curve.ccdf
            }
        };
        let (emp, se) = match stats.as_ref().and_then(|s| s.get(scope, theta)) {
            Some(s) => (s.ccdf.clone(), s.ccdf_std_error.clone()),
            None => (nan.clone(), nan.clone()),
        };
        for i in 0..grid.len() {
            let gap = (ex[i] - beta[i]).abs();
            t.push(vec![scope.to_string().into(), grid[i].into(), ex[i].into(), beta[i].into(), gap.into(), emp[i].into(), se[i].into()]);
        }
    }
    Ok(t)
}

fn cmd_gains(a: &GainsArgs, units: &Units) -> Result<Table> {
    let (file, net, _) = load(&a.config)?;
    gains_table(file, &net, a, units)
}

fn gains_table(file: ConfigFile, net: &NetworkConfig, a: &GainsArgs, units: &Units) -> Result<Table> {
    let k = net.num_tiers();
    if let Some(g) = &a.overlay {
        let thetas = units.grid(g)?;
        let mut t = Table::new(
            format!("gains overlay b={:?}", a.b),
            vec![file],
            &["tier", "b", units.column(), "regime", "gain_db", "exact", "shifted_ppp", "rel_error"],
        );
        for i in 0..k {
            for &b in &a.b {
                for &th in &thetas {
                    for regime in [GainRegime::Low, GainRegime::High] {
                        let s = gains::shifted_moment_approx_in(net, i, b, th, regime)?;
                        let label = if regime == GainRegime::Low { "g0" } else { "ginf" };
                        t.push(vec![
                            (i + 1).into(),
                            b.into(),
                            units.output(th).into(),
                            label.into(),
                            to_db(s.gain).into(),
                            s.exact.into(),
                            s.approx.into(),
                            s.rel_error.into(),
                        ]);
                    }
                }
            }
        }
        return Ok(t);
    }
    if let Some(g) = &a.variance_shift {
        let mut t = Table::new(
            "gains variance-shift".into(),
            vec![file],
            &["tier", "theta_db", "variance", "shifted_ppp", "measured_shift_db", "predicted_shift_db", "near_peak"],
        );
        for i in 0..k {
            let r = gains::variance_shift_check(net, i, &g.0)?;
            t.note(
                &format!("tier{}", i + 1),
                format!(
                    "g0_db={} ginf_db={} low_theta_limit_db={} max_error_db={}",
                    r.g0_db, r.ginf_db, r.low_theta_limit_db, r.max_error_db
                ),
            );
            for p in r.points {
                t.push(vec![
                    (i + 1).into(),
                    p.theta_db.into(),
                    p.variance.into(),
                    p.shifted_ppp.into(),
                    p.measured_shift_db.unwrap_or(f64::NAN).into(),
                    p.predicted_shift_db.into(),
                    p.near_peak.to_string().into(),
                ]);
            }
        }
        return Ok(t);
    }
    let mut t = Table::new(format!("gains b={:?}", a.b), vec![file], &["tier", "b", "g0", "g0_db", "ginf", "ginf_db"]);
    for i in 0..k {
        for &b in &a.b {
            let g = gains::gain_set(net, i, b.into())?;
            t.push(vec![
                (i + 1).into(),
                b.into(),
                g.g0.re.into(),
                g.g0_db.unwrap_or(f64::NAN).into(),
                g.g_inf.re.into(),
                g.ginf_db.unwrap_or(f64::NAN).into(),
            ]);
        }
    }
    Ok(t)
}

fn region_rows(t: &mut Table, units: &Units, theta: f64, label: &str, r: &aloha::RegionBoundary) {
    let kind = match r.kind {
        aloha::RegionKind::Exact => "exact",
        aloha::RegionKind::LowerBound => "lower-bound",
        aloha::RegionKind::Intersection => "intersection",
    };
    let th = units.output(theta);
    if r.full_cube {
        t.push(vec![th.into(), label.into(), kind.into(), "full-cube".into(), f64::NAN.into(), f64::NAN.into()]);
    } else if r.points.is_empty() {
        t.push(vec![th.into(), label.into(), kind.into(), "empty".into(), f64::NAN.into(), f64::NAN.into()]);
    }
    for p in &r.points {
        t.push(vec![th.into(), label.into(), kind.into(), "boundary".into(), p.0.into(), p.1.into()]);
    }
}

fn delay_region_table(net: &NetworkConfig, file: ConfigFile, thetas: &[f64], resolution: usize, units: &Units, command: String) -> Result<Table> {
    let mut t = Table::new(command, vec![file], &[units.column(), "region", "kind", "marker", "p1", "p2"]);
    for &th in thetas {
        for i in 0..net.num_tiers() {
            let label = format!("S{}", i + 1);
            region_rows(&mut t, units, th, &label, &aloha::region_boundary_exact(net, i, th, resolution)?);
            region_rows(&mut t, units, th, &label, &aloha::region_boundary_lower(net, i, th, resolution)?);
        }
        region_rows(&mut t, units, th, "S", &aloha::intersection_region(net, th, resolution)?);
    }
    Ok(t)
}

fn cmd_delay_region(a: &DelayRegionArgs, units: &Units) -> Result<Table> {
    let (file, net, _) = load(&a.config)?;
    let thetas = units.grid(&a.theta)?;
    delay_region_table(&net, file, &thetas, a.resolution, units, format!("delay-region resolution={}", a.resolution))
}

fn cmd_simulate(a: &SimulateArgs, units: &Units) -> Result<Table> {
    let (file, net, _) = load(&a.config)?;
    let thetas = units.grid(&a.theta)?;
    let theta_max = thetas.iter().copied().fold(0.0, f64::max);
    let cfg = sim_config(&net, file.activity.clone(), &a.sim, theta_max)?;
    let t_grid = a.t.as_ref().map_or(Vec::new(), |g| g.0.clone());
    let (stats, raw) = sim::run_simulation_with_raw(&cfg, &thetas, &a.b, &t_grid, a.raw.is_some())?;
    if let Some(path) = &a.raw {
        sim::write_raw_csv(&raw, io::BufWriter::new(fs::File::create(path)?))?;
    }
    let mut t = Table::new(
        format!("simulate b={:?} compare={}", a.b, a.compare),
        vec![file],
        &[units.column(), "scope", "quantity", "empirical", "std_error", "analytic", "z"],
    );
    t.note("window_radius", cfg.window_radius);
    t.note("realizations", cfg.n_realizations);
    t.note("seed", cfg.rng_seed);
    t.note("empty_resampled", stats.empty_resampled);
    t.note("batches", stats.batches);
    let comparisons = if a.compare {
        sim::compare_with_analytics(&cfg, &stats)?
    } else {
        Vec::new()
    };
    let lookup = |theta: f64, scope: Scope, q: &str| comparisons.iter().find(|c| c.theta == theta && c.scope == scope && c.quantity == q);
    let nan = f64::NAN;
    for acc in &stats.access {
        let c = lookup(0.0, Scope::Tier(acc.tier), "access");
        t.push(vec![
            nan.into(),
            Scope::Tier(acc.tier).to_string().into(),
            "access".into(),
            acc.estimate.value.into(),
            acc.estimate.std_error.into(),
            c.map_or(nan, |c| c.analytic).into(),
            c.map_or(nan, |c| c.z).into(),
        ]);
    }
    for s in &stats.scopes {
        let th = units.output(s.theta);
        let mut quantities: Vec<(String, sim::Estimate)> = s.moments.iter().map(|m| (format!("M{}", m.order), m.estimate)).collect();
        quantities.push(("V".into(), s.variance));
        for (q, est) in quantities {
            let c = lookup(s.theta, s.scope, &q);
            t.push(vec![
                th.into(),
                s.scope.to_string().into(),
                q.into(),
                est.value.into(),
                est.std_error.into(),
                c.map_or(nan, |c| c.analytic).into(),
                c.map_or(nan, |c| c.z).into(),
            ]);
        }
        for (k, &tt) in s.reliability.iter().enumerate() {
            t.push(vec![
                th.into(),
                s.scope.to_string().into(),
                format!("ccdf@{tt}").into(),
                s.ccdf[k].into(),
                s.ccdf_std_error[k].into(),
                nan.into(),
                nan.into(),
            ]);
        }
    }
    Ok(t)
}

fn db_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// `α = 4`, `λ₂ = 5`, `P₂ = 0.2` with the given bias: the setting of most presets.
fn preset(b2: f64) -> NetworkConfig {
    NetworkConfig::two_tier(4.0, 5.0, 0.2, b2).expect("preset is valid")
}

fn cmd_figure(a: &FigureArgs) -> Result<Table> {
    if a.points == 0 {
        return Err(Error::Config("--points must be positive".into()));
    }
    let db = Units { db: true };
    let theta_db = db_grid(-20.0, 20.0, a.points);
    let name = format!("figure --id {:?} --points {}", a.id, a.points);
    let scopes = [Scope::Overall, Scope::Tier(0), Scope::Tier(1)];
    match a.id {
        FigureId::M1VsTheta | FigureId::VarVsTheta => {
            let nets: Vec<NetworkConfig> = [0.1, 1.0, 10.0].iter().map(|&b| preset(b)).collect();
            let col = if a.id == FigureId::M1VsTheta { "m1" } else { "variance" };
            let mut t = Table::new(name, nets.iter().map(ConfigFile::from_network).collect(), &["b2", "theta_db", "scope", col]);
            for net in &nets {
                let b2 = net.tiers()[1].bias;
                t.note(&format!("access_b2={b2}"), format!("{:?}", net.access_probabilities()));
                for &x in &theta_db {
                    for &s in &scopes {
                        let v = if a.id == FigureId::M1VsTheta {
                            analytics::moment(net, s, from_db(x), 1.0.into())?.value.re
                        } else {
                            analytics::variance(net, s, from_db(x))?
                        };
                        t.push(vec![b2.into(), x.into(), s.to_string().into(), v.into()]);
                    }
                }
            }
            Ok(t)
        }
        FigureId::MetaAtTheta => {
            let net = preset(10.0);
            let args = MetaArgs {
                config: PathBuf::new(),
                theta: 0.0,
                t: None,
                method: if a.realizations.is_some() { MetaMethod::Empirical } else { MetaMethod::Both },
                scope: ScopeArg::All,
                sim: SimParams {
                    realizations: a.realizations.unwrap_or(1),
                    seed: a.seed,
                    window: None,
                },
            };
            let mut t = meta_table(ConfigFile::from_network(&net), &net, &args, &db)?;
            t.command = name;
            Ok(t)
        }
        FigureId::GainShiftMoments => {
            let net = preset(10.0);
            let mut t = Table::new(
                name,
                vec![ConfigFile::from_network(&net)],
                &["tier", "b", "theta_db", "exact", "shifted_g0", "shifted_ginf"],
            );
            for i in 0..2 {
                for b in [1.0, 2.0] {
                    for &x in &theta_db {
                        let lo = gains::shifted_moment_approx_in(&net, i, b, from_db(x), GainRegime::Low)?;
                        let hi = gains::shifted_moment_approx_in(&net, i, b, from_db(x), GainRegime::High)?;
                        t.push(vec![(i + 1).into(), b.into(), x.into(), lo.exact.into(), lo.approx.into(), hi.approx.into()]);
                    }
                }
            }
            Ok(t)
        }
        FigureId::GainShiftVariance => {
            let net = preset(10.0);
            let args = GainsArgs {
                config: PathBuf::new(),
                b: vec![],
                overlay: None,
                variance_shift: Some(Grid(theta_db)),
            };
            let mut t = gains_table(ConfigFile::from_network(&net), &net, &args, &db)?;
            t.command = name;
            Ok(t)
        }
        FigureId::M1VsB2 | FigureId::VarVsB2 => {
            let b2_db = db_grid(-20.0, 20.0, a.points);
            let thetas_db = [-10.0, -5.0, 0.0, 5.0, 10.0];
            let col = if a.id == FigureId::M1VsB2 { "m1" } else { "variance" };
            let base = NetworkConfig::two_tier(4.0, 4.0, 0.2, 1.0)?;
            let mut t = Table::new(name, vec![ConfigFile::from_network(&base)], &["theta_db", "b2_db", col]);
            t.note("b2", "swept");
            for &x in &thetas_db {
                for &bd in &b2_db {
                    let net = base.with_bias(1, from_db(bd))?;
                    let v = if a.id == FigureId::M1VsB2 {
                        analytics::moment(&net, Scope::Overall, from_db(x), 1.0.into())?.value.re
                    } else {
                        analytics::variance(&net, Scope::Overall, from_db(x))?
                    };
                    t.push(vec![x.into(), bd.into(), v.into()]);
                }
            }
            Ok(t)
        }
        FigureId::AsymptV2 => {
            let base = preset(1.0);
            let mut t = Table::new(name, vec![ConfigFile::from_network(&base)], &["series", "theta_db", "m1_tier2", "variance_tier2"]);
            for b2 in [10.0, 100.0, 1000.0] {
                let net = base.with_bias(1, b2)?;
                for &x in &theta_db {
                    let m = analytics::moment(&net, Scope::Tier(1), from_db(x), 1.0.into())?.value.re;
                    let v = analytics::variance(&net, Scope::Tier(1), from_db(x))?;
                    t.push(vec![format!("B2={b2}").into(), x.into(), m.into(), v.into()]);
                }
            }
            for &x in &theta_db {
                let l = analytics::asymptotic_closed_access(&base, from_db(x))?;
                t.push(vec!["limit".into(), x.into(), l.m1_tier2.into(), l.variance_tier2.into()]);
                t.push(vec![
                    "limit-large-theta".into(),
                    x.into(),
                    l.m1_tier2_large_theta.into(),
                    l.variance_tier2_large_theta.into(),
                ]);
            }
            Ok(t)
        }
        FigureId::DelayRegion => {
            let net = NetworkConfig::two_tier(4.0, 25.0, 0.005, 10.0)?;
            let thetas: Vec<f64> = [-10.0, -5.0, 0.0].iter().map(|&d| from_db(d)).collect();
            let res = a.points.max(2) * 5;
            delay_region_table(&net, ConfigFile::from_network(&net), &thetas, res, &db, name)
        }
    }
}
