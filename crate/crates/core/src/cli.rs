//! Command-line front end: CSV sweeps, one-shot bound evaluation and the
//! verification suite.

use std::f64::consts::LN_2;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    ell_exponential_lower, ell_hybrid_lower, ell_smooth_min_lower, ell_smooth_min_upper, ell_spectral_lower,
    ell_spectral_upper, gaussian_approx, BoundParams, BoundResult, Source,
};
use crate::error::{Error, Result};
use crate::oracle::{verification_suite, Hooks, Level};
use crate::prob::{BscSource, JointTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CSV_HEADER: &str = "n,eps,q,eta,zeta,ell_s_low,ell_e_low,ell_h_low,ell_s_up,gauss,theta_star_e,theta_star_h";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Bits,
    Nats,
}

impl Units {
    fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Bits => nats / LN_2,
            Units::Nats => nats,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SweepN,
    SweepEps,
    Bound,
    Verify,
}

/// Log-spaced grid between two positive endpoints (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.from > 0.0 && self.to >= self.from && self.count >= 1) {
            return Err(Error::Parameter(format!(
                "grid needs 0 < from ≤ to and count ≥ 1, got {} .. {} × {}",
                self.from, self.to, self.count
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.from]);
        }
        let (a, b) = (self.from.ln(), self.to.ln());
        let last = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| match i {
                0 => self.from,
                _ if i == self.count - 1 => self.to,
                _ => (a + (b - a) * i as f64 / last).exp(),
            })
            .collect())
    }

    /// Rounded to integers, deduplicated, in increasing order.
    pub fn integer_points(&self) -> Result<Vec<u64>> {
        let mut out: Vec<u64> = self.points()?.into_iter().map(|x| x.round().max(1.0) as u64).collect();
        out.dedup();
        Ok(out)
    }
}

/// Everything a sweep needs; mirrors the optional `--config` JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: Mode,
    pub q: Option<f64>,
    pub eps: Option<f64>,
    pub eps_grid: Option<Grid>,
    pub n: Option<u64>,
    pub n_grid: Option<Grid>,
    pub eta_frac: f64,
    pub zeta_frac: f64,
    pub units: Units,
    pub clamp: bool,
    pub output: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            mode: Mode::SweepN,
            q: None,
            eps: None,
            eps_grid: None,
            n: None,
            n_grid: None,
            eta_frac: 0.5,
            zeta_frac: 0.5,
            units: Units::Bits,
            clamp: false,
            output: None,
        }
    }
}

/// One evaluated grid point, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u64,
    pub eps: f64,
    pub q: f64,
    pub eta: f64,
    pub zeta: f64,
    pub ell_s_low: Option<f64>,
    pub ell_e_low: Option<f64>,
    pub ell_h_low: Option<f64>,
    pub ell_s_up: Option<f64>,
    pub gauss: Option<f64>,
    pub theta_star_e: Option<f64>,
    pub theta_star_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepLine {
    Row(SweepRow),
    Skipped { n: u64, eps: f64, reason: String },
}

impl SweepSpec {
    fn require_q(&self) -> Result<f64> {
        let q = self.q.ok_or_else(|| Error::Parameter("missing --q".into()))?;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Parameter(format!("q = {q} outside [0, 1]")));
        }
        Ok(q)
    }

    fn n_values(&self) -> Result<Vec<u64>> {
        match (self.n_grid, self.n) {
            (Some(g), _) => g.integer_points(),
            (None, Some(n)) => Ok(vec![n]),
            (None, None) => Err(Error::Parameter("missing --n or --n-from/--n-to/--n-count".into())),
        }
    }

    fn eps_values(&self) -> Result<Vec<f64>> {
        match (self.eps_grid, self.eps) {
            (Some(g), _) => g.points(),
            (None, Some(e)) => Ok(vec![e]),
            (None, None) => Err(Error::Parameter("missing --eps or --eps-from/--eps-to/--eps-count".into())),
        }
    }

    /// Grid points in output order.
    pub fn points(&self) -> Result<Vec<(u64, f64)>> {
        self.require_q()?;
        if !(self.eta_frac > 0.0 && self.zeta_frac > 0.0) {
            return Err(Error::Parameter("η and ζ fractions must be positive".into()));
        }
        let ns = self.n_values()?;
        let epss = self.eps_values()?;
        let points: Vec<(u64, f64)> = match self.mode {
            Mode::SweepEps => ns.iter().flat_map(|&n| epss.iter().map(move |&e| (n, e))).collect(),
            _ => epss.iter().flat_map(|&e| ns.iter().map(move |&n| (n, e))).collect(),
        };
        if points.is_empty() {
            return Err(Error::Parameter("empty grid".into()));
        }
        Ok(points)
    }
}

fn ok_value(r: Result<BoundResult>) -> (Option<f64>, Option<f64>) {
    match r {
        Ok(b) if b.value_nats.is_finite() => (Some(b.value_nats), b.theta_star),
        _ => (None, None),
    }
}

/// Evaluates all five BSC bounds at one point.
pub fn evaluate_point(q: f64, n: u64, eps: f64, eta_frac: f64, zeta_frac: f64) -> SweepLine {
    let eta = eta_frac * eps;
    let zeta = zeta_frac * eps;
    let skip = |reason: String| SweepLine::Skipped { n, eps, reason };
    if eta >= eps {
        return skip(format!("η = {eta} leaves no room below ε = {eps}"));
    }
    let bsc = match BscSource::new(q, n) {
        Ok(b) => b,
        Err(e) => return skip(e.to_string()),
    };
    let params = match BoundParams::new(eps, eta, zeta, Source::Bsc(bsc)) {
        Ok(p) => p,
        Err(e) => return skip(e.to_string()),
    };
    let (ell_s_low, _) = ok_value(ell_spectral_lower(&params));
    let (ell_e_low, theta_star_e) = ok_value(ell_exponential_lower(&params));
    let (ell_h_low, theta_star_h) = ok_value(ell_hybrid_lower(&params));
    let (ell_s_up, _) = ok_value(ell_spectral_upper(&params));
    let (gauss, _) = ok_value(gaussian_approx(&params));
    SweepLine::Row(SweepRow {
        n,
        eps,
        q,
        eta,
        zeta,
        ell_s_low,
        ell_e_low,
        ell_h_low,
        ell_s_up,
        gauss,
        theta_star_e,
        theta_star_h,
    })
}

/// Evaluates a sweep in parallel, returning lines in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepLine>> {
    let q = spec.require_q()?;
    let points = spec.points()?;
    Ok(points.par_iter().map(|&(n, eps)| evaluate_point(q, n, eps, spec.eta_frac, spec.zeta_frac)).collect())
}

fn cell(v: Option<f64>, units: Option<Units>, clamp: bool) -> String {
    match v {
        None => "nan".to_string(),
        Some(x) => {
            let x = match units {
                Some(u) => {
                    let y = u.convert(x);
                    if clamp {
                        y.max(0.0)
                    } else {
                        y
                    }
                }
                None => x,
            };
            format!("{x:e}")
        }
    }
}

pub fn render_csv(spec: &SweepSpec, lines: &[SweepLine]) -> String {
    let mut out = String::with_capacity(128 * (lines.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let u = Some(spec.units);
    for line in lines {
        match line {
            SweepLine::Row(r) => {
                let cells = [
                    r.n.to_string(),
                    format!("{:e}", r.eps),
                    format!("{}", r.q),
                    format!("{:e}", r.eta),
                    format!("{:e}", r.zeta),
                    cell(r.ell_s_low, u, spec.clamp),
                    cell(r.ell_e_low, u, spec.clamp),
                    cell(r.ell_h_low, u, spec.clamp),
                    cell(r.ell_s_up, u, spec.clamp),
                    cell(r.gauss, u, spec.clamp),
                    cell(r.theta_star_e, None, false),
                    cell(r.theta_star_h, None, false),
                ];
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            SweepLine::Skipped { n, eps, reason } => {
                let _ = writeln!(out, "# skipped n={n} eps={eps:e}: {reason}");
            }
        }
    }
    out
}

#[derive(Parser, Debug)]
#[command(name = "keylen", version, about = "Key-length bounds for privacy amplification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CSV of all bounds over a grid of block lengths.
    SweepN(SweepArgs),
    /// CSV of all bounds over a grid of ε.
    SweepEps(SweepArgs),
    /// JSON with every bound at a single point.
    Bound(BoundArgs),
    /// Runs the exact verification suite and prints a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, requires_all = ["eps_to", "eps_count"])]
    eps_from: Option<f64>,
    #[arg(long, requires = "eps_from")]
    eps_to: Option<f64>,
    #[arg(long, requires = "eps_from")]
    eps_count: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, requires_all = ["n_to", "n_count"])]
    n_from: Option<f64>,
    #[arg(long, requires = "n_from")]
    n_to: Option<f64>,
    #[arg(long, requires = "n_from")]
    n_count: Option<usize>,
    #[arg(long)]
    eta_frac: Option<f64>,
    #[arg(long)]
    zeta_frac: Option<f64>,
    #[arg(long, value_enum)]
    units: Option<Units>,
    /// Display negative bounds as zero.
    #[arg(long)]
    clamp: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with a sweep spec; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, required_unless_present = "table")]
    q: Option<f64>,
    #[arg(long, required_unless_present = "table")]
    n: Option<u64>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    eta_frac: f64,
    #[arg(long, default_value_t = 0.5)]
    zeta_frac: f64,
    /// Joint table as JSON `{x_size, z_size, weights}` instead of a BSC.
    #[arg(long, conflicts_with_all = ["q", "n"])]
    table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "quick")]
    level: LevelArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        }
    }
}

fn load_spec(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))
}

fn spec_from_args(mode: Mode, args: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = match &args.config {
        Some(path) => load_spec(path)?,
        None => SweepSpec::default(),
    };
    spec.mode = mode;
    let grid = |from: Option<f64>, to: Option<f64>, count: Option<usize>| match (from, to, count) {
        (Some(from), Some(to), Some(count)) => Some(Grid { from, to, count }),
        _ => None,
    };
    if args.q.is_some() {
        spec.q = args.q;
    }
    if let Some(e) = args.eps {
        spec.eps = Some(e);
        spec.eps_grid = None;
    }
    if let Some(g) = grid(args.eps_from, args.eps_to, args.eps_count) {
        spec.eps_grid = Some(g);
    }
    if let Some(n) = args.n {
        spec.n = Some(n);
        spec.n_grid = None;
    }
    if let Some(g) = grid(args.n_from, args.n_to, args.n_count) {
        spec.n_grid = Some(g);
    }
    if let Some(f) = args.eta_frac {
        spec.eta_frac = f;
    }
    if let Some(f) = args.zeta_frac {
        spec.zeta_frac = f;
    }
    if let Some(u) = args.units {
        spec.units = u;
    }
    spec.clamp |= args.clamp;
    if args.out.is_some() {
        spec.output = args.out.clone();
    }
    match mode {
        Mode::SweepN if spec.n_grid.is_none() && spec.n.is_none() => {
            return Err(Error::Parameter("sweep-n needs --n-from/--n-to/--n-count".into()))
        }
        Mode::SweepEps if spec.eps_grid.is_none() && spec.eps.is_none() => {
            return Err(Error::Parameter("sweep-eps needs --eps-from/--eps-to/--eps-count".into()))
        }
        _ => {}
    }
    Ok(spec)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

fn bound_json(r: Result<BoundResult>) -> Value {
    match r {
        Ok(b) => serde_json::to_value(b).expect("serializable"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn run_bound(args: &BoundArgs) -> Result<String> {
    let eps = args.eps;
    let table;
    let source = match &args.table {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
            table = serde_json::from_str::<JointTable>(&text)
                .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
            Source::Table(&table)
        }
        None => Source::Bsc(BscSource::new(args.q.unwrap_or_default(), args.n.unwrap_or_default())?),
    };
    let params = BoundParams::new(eps, args.eta_frac * eps, args.zeta_frac * eps, source)?;
    let mut bounds = serde_json::Map::new();
    bounds.insert("spectral_lower".into(), bound_json(ell_spectral_lower(&params)));
    bounds.insert("exponential_lower".into(), bound_json(ell_exponential_lower(&params)));
    bounds.insert("hybrid_lower".into(), bound_json(ell_hybrid_lower(&params)));
    bounds.insert("spectral_upper".into(), bound_json(ell_spectral_upper(&params)));
    bounds.insert("gaussian_approx".into(), bound_json(gaussian_approx(&params)));
    let small = match params.source {
        Source::Table(t) => t.cells() <= 1 << 16,
        Source::Bsc(b) => b.n() <= 12,
    };
    if small {
        bounds.insert("smooth_min_lower".into(), bound_json(ell_smooth_min_lower(&params)));
        bounds.insert("smooth_min_upper".into(), bound_json(ell_smooth_min_upper(&params)));
    }
    let doc = json!({ "eps": eps, "eta": params.eta, "zeta": params.zeta, "bounds": bounds });
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

/// Runs the suite with the given entropy hooks and writes the JSON report.
/// Returns the process exit code.
pub fn run_verify(seed: u64, level: Level, hooks: &Hooks, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match verification_suite(seed, level, hooks) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
            if stdout.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            if report.pass {
                EXIT_OK
            } else {
                let failed: Vec<&str> = report.reports.iter().filter(|r| !r.pass).map(|r| r.lemma.as_str()).collect();
                let _ = writeln!(stderr, "verification failed: {}", failed.join(", "));
                EXIT_VERIFY_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_VERIFY_FAILED
        }
    }
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let usage = |stderr: &mut dyn Write, e: &dyn std::fmt::Display| {
        let _ = writeln!(stderr, "error: {e}");
        EXIT_USAGE
    };
    match cli.command {
        Command::SweepN(ref a) | Command::SweepEps(ref a) => {
            let mode = if matches!(cli.command, Command::SweepN(_)) { Mode::SweepN } else { Mode::SweepEps };
            let spec = match spec_from_args(mode, a) {
                Ok(s) => s,
                Err(e) => return usage(stderr, &e),
            };
            let lines = match run_sweep(&spec) {
                Ok(l) => l,
                Err(e) => return usage(stderr, &e),
            };
            for line in &lines {
                if let SweepLine::Skipped { n, eps, reason } = line {
                    let _ = writeln!(stderr, "warning: skipped n={n} eps={eps:e}: {reason}");
                }
            }
            match emit(spec.output.as_deref(), &render_csv(&spec, &lines), stdout) {
                Ok(()) => EXIT_OK,
                Err(e) => usage(stderr, &e),
            }
        }
        Command::Bound(ref a) => match run_bound(a) {
            Ok(text) => match emit(a.out.as_deref(), &text, stdout) {
                Ok(()) => EXIT_OK,
                Err(e) => usage(stderr, &e),
            },
            Err(e) => usage(stderr, &e),
        },
        Command::Verify(ref a) => {
            let mut buf = Vec::new();
            let code = run_verify(a.seed, a.level.into(), &Hooks::default(), &mut buf, stderr);
            match emit(a.out.as_deref(), &String::from_utf8_lossy(&buf), stdout) {
                Ok(()) => code,
                Err(e) => usage(stderr, &e),
            }
        }
    }
}
