//! Argument parsing, config merging, and the four subcommands.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use xydm_core::{
    build_two_site, correlator_set, ground_state, oracle_coherence, oracle_correlators,
    qjsd_coherence, rotate_basis, sweep, Basis, Calibration, EdError, FiniteChainSpec,
    ModelParams, ScanError, SpectrumError, StateError, SweepSpec,
};

use crate::config::{parse_list, ConfigMap};
use crate::output;

const THREADS_ENV: &str = "XYDM_THREADS";

/// Failure of a command, split by exit code: validation problems are the
/// caller's to fix (exit 1), numerical problems are the run's (exit 2).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::InvalidParams(_) | SpectrumError::SeparationOutOfRange(_) => {
                CliError::Validation(e.to_string())
            }
            SpectrumError::Quadrature(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::InvalidSpec(_) => CliError::Validation(e.to_string()),
            ScanError::Spectrum(inner) => inner.into(),
            ScanError::State(inner) => inner.into(),
            ScanError::TooFewPoints(_) | ScanError::NoSignal { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<EdError> for CliError {
    fn from(e: EdError) -> Self {
        match e {
            EdError::InvalidSpec(_) => CliError::Validation(e.to_string()),
            EdError::ConvergenceFailure { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "xydm",
    version,
    about = "Quantum coherence of the XY chain with Dzyaloshinsky-Moriya interaction",
    after_help = "Every value flag can also come from a --config file of KEY=VALUE lines \
                  (keys are the flag names without dashes); flags win on conflict.\n\
                  Set XYDM_THREADS to bound the worker thread count."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence and entropies at a single parameter point
    Point(PointArgs),
    /// Sweep a (J, D, r, basis) grid and write plot-ready CSV or JSON
    Sweep(SweepArgs),
    /// Compare the thermodynamic-limit values against an N-site chain
    OracleCompare(OracleArgs),
    /// Print the calibration constants and verify the chain anchor
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct PointArgs {
    /// Exchange coupling J
    #[arg(long)]
    j: Option<f64>,
    /// Anisotropy gamma, in [-1, 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Dzyaloshinsky-Moriya coupling D [default: 0]
    #[arg(long)]
    d: Option<f64>,
    /// Site separation r, in 1..=10 [default: 1]
    #[arg(long)]
    r: Option<usize>,
    /// Measurement basis: x, y, or z [default: z]
    #[arg(long)]
    basis: Option<String>,
    /// KEY=VALUE file supplying any flags not given here
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Anisotropy gamma, in [-1, 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated D values [default: 0]
    #[arg(long)]
    d: Option<String>,
    /// Lower end of the J grid
    #[arg(long)]
    j_min: Option<f64>,
    /// Upper end of the J grid
    #[arg(long)]
    j_max: Option<f64>,
    /// Number of J grid points, at least 3
    #[arg(long)]
    j_steps: Option<usize>,
    /// Comma-separated separations r [default: 1]
    #[arg(long)]
    r: Option<String>,
    /// Comma-separated bases from x, y, z [default: z]
    #[arg(long)]
    bases: Option<String>,
    /// Output file path
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: csv or json [default: from the file extension, else csv]
    #[arg(long)]
    format: Option<String>,
    /// KEY=VALUE file supplying any flags not given here
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Chain length N, even, in 4..=14 [default: 12]
    #[arg(long)]
    n: Option<usize>,
    /// Exchange coupling J
    #[arg(long)]
    j: Option<f64>,
    /// Anisotropy gamma, in [-1, 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Dzyaloshinsky-Moriya coupling D [default: 0]
    #[arg(long)]
    d: Option<f64>,
    /// Site separation r [default: 1]
    #[arg(long)]
    r: Option<usize>,
    /// Basis for the coherence comparison [default: z]
    #[arg(long)]
    basis: Option<String>,
    /// Largest acceptable absolute deviation [default: 5e-2]
    #[arg(long)]
    tol: Option<f64>,
    /// KEY=VALUE file supplying any flags not given here
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Chain length N for the anchor comparison [default: 12]
    #[arg(long)]
    n: Option<usize>,
    /// Largest acceptable absolute deviation [default: 5e-2]
    #[arg(long)]
    tol: Option<f64>,
    /// KEY=VALUE file supplying any flags not given here
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parse argv, honor the thread-count env var, run the command, and map
/// the outcome to the exit-code contract.
pub fn run_cli() -> i32 {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let raw = match std::env::var(THREADS_ENV) {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::Validation(format!("{THREADS_ENV}: {e}"))),
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::Validation(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    if threads == 0 {
        return Err(CliError::Validation(format!(
            "{THREADS_ENV} must be at least 1"
        )));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("thread pool setup: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Point(args) => cmd_point(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OracleCompare(args) => cmd_oracle_compare(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigMap, CliError> {
    match path {
        None => Ok(ConfigMap::default()),
        Some(p) => ConfigMap::load(p).map_err(CliError::Validation),
    }
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| invalid(format!("missing value for {key} (flag --{key} or config key {key})")))
}

fn parse_basis(raw: &str) -> Result<Basis, CliError> {
    Basis::from_str(raw).map_err(invalid)
}

/// Terminal numbers carry 10 significant digits.
fn sig10(x: f64) -> String {
    format!("{x:.9e}")
}

fn cmd_point(args: PointArgs) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    let j = require(cfg.take("j", args.j).map_err(invalid)?, "j")?;
    let gamma = require(cfg.take("gamma", args.gamma).map_err(invalid)?, "gamma")?;
    let d = cfg.take("d", args.d).map_err(invalid)?.unwrap_or(0.0);
    let r = cfg.take("r", args.r).map_err(invalid)?.unwrap_or(1);
    let basis_raw = cfg
        .take("basis", args.basis)
        .map_err(invalid)?
        .unwrap_or_else(|| "z".into());
    cfg.finish().map_err(invalid)?;
    let basis = parse_basis(&basis_raw)?;

    let params = ModelParams::new(j, gamma, d)?;
    let set = correlator_set(r, &params, &Calibration::default())?;
    let state = build_two_site(&set)?;
    let result = qjsd_coherence(&rotate_basis(&state, basis))?;

    println!("J = {j}, gamma = {gamma}, D = {d}, r = {r}, basis = {basis}");
    println!("C      = {}", sig10(result.c));
    println!("S_rho  = {}", sig10(result.s_rho));
    println!("S_diag = {}", sig10(result.s_diag));
    println!("S_mix  = {}", sig10(result.s_mix));
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn from_flag(raw: Option<&str>, output: &Path) -> Result<Format, CliError> {
        match raw {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(invalid(format!(
                "unknown format {other:?}, expected csv or json"
            ))),
            None => Ok(
                match output.extension().and_then(|e| e.to_str()) {
                    Some("json") => Format::Json,
                    _ => Format::Csv,
                },
            ),
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    let gamma = require(cfg.take("gamma", args.gamma).map_err(invalid)?, "gamma")?;
    let d_raw = cfg
        .take("d", args.d)
        .map_err(invalid)?
        .unwrap_or_else(|| "0".into());
    let j_min = require(cfg.take("j-min", args.j_min).map_err(invalid)?, "j-min")?;
    let j_max = require(cfg.take("j-max", args.j_max).map_err(invalid)?, "j-max")?;
    let j_steps = require(cfg.take("j-steps", args.j_steps).map_err(invalid)?, "j-steps")?;
    let r_raw = cfg
        .take("r", args.r)
        .map_err(invalid)?
        .unwrap_or_else(|| "1".into());
    let bases_raw = cfg
        .take("bases", args.bases)
        .map_err(invalid)?
        .unwrap_or_else(|| "z".into());
    let output_path = require(cfg.take("output", args.output).map_err(invalid)?, "output")?;
    let format_raw = cfg.take("format", args.format).map_err(invalid)?;
    cfg.finish().map_err(invalid)?;

    let spec = SweepSpec {
        gamma,
        d_values: parse_list(&d_raw, "D").map_err(invalid)?,
        j_min,
        j_max,
        j_steps,
        r_values: parse_list(&r_raw, "r").map_err(invalid)?,
        bases: parse_list(&bases_raw, "basis").map_err(invalid)?,
    };
    let format = Format::from_flag(format_raw.as_deref(), &output_path)?;

    let table = sweep(&spec, &Calibration::default())?;
    let body = match format {
        Format::Csv => output::table_to_csv(&table),
        Format::Json => output::table_to_json(&table),
    };
    fs::write(&output_path, body).map_err(|e| {
        invalid(format!("cannot write {}: {e}", output_path.display()))
    })?;

    let failed = table.rows.iter().filter(|row| row.error.is_some()).count();
    println!(
        "wrote {} rows to {}",
        table.rows.len(),
        output_path.display()
    );
    if failed > 0 {
        eprintln!("warning: {failed} rows failed; see their error field");
    }
    Ok(())
}

struct Comparison {
    worst: f64,
}

impl Comparison {
    fn new(left: &str, right: &str) -> Comparison {
        println!("{:<6} {left:>18} {right:>18} {:>10}", "", "|dev|");
        Comparison { worst: 0.0 }
    }

    fn row(&mut self, name: &str, formula: f64, chain: f64) {
        let dev = (formula - chain).abs();
        self.worst = self.worst.max(dev);
        println!(
            "{name:<6} {:>18} {:>18} {dev:>10.1e}",
            sig10(formula),
            sig10(chain)
        );
    }

    fn verdict(self, tol: f64) -> Result<(), CliError> {
        let ok = self.worst < tol;
        println!(
            "worst deviation {:.3e} {} tolerance {tol:.0e}",
            self.worst,
            if ok { "within" } else { "exceeds" }
        );
        if ok {
            Ok(())
        } else {
            Err(CliError::Numerical(format!(
                "worst deviation {:.3e} exceeds tolerance {tol:.0e}",
                self.worst
            )))
        }
    }
}

fn cmd_oracle_compare(args: OracleArgs) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    let n = cfg.take("n", args.n).map_err(invalid)?.unwrap_or(12);
    let j = require(cfg.take("j", args.j).map_err(invalid)?, "j")?;
    let gamma = require(cfg.take("gamma", args.gamma).map_err(invalid)?, "gamma")?;
    let d = cfg.take("d", args.d).map_err(invalid)?.unwrap_or(0.0);
    let r = cfg.take("r", args.r).map_err(invalid)?.unwrap_or(1);
    let basis_raw = cfg
        .take("basis", args.basis)
        .map_err(invalid)?
        .unwrap_or_else(|| "z".into());
    let tol = cfg.take("tol", args.tol).map_err(invalid)?.unwrap_or(5e-2);
    cfg.finish().map_err(invalid)?;
    let basis = parse_basis(&basis_raw)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {tol}")));
    }

    let params = ModelParams::new(j, gamma, d)?;
    let chain_spec = FiniteChainSpec::new(n, params);
    let gs = ground_state(&chain_spec)?;
    println!(
        "N = {n}, J = {j}, gamma = {gamma}, D = {d}, r = {r}, basis = {basis} \
         (E0 = {}, gap = {:.3e}, {} Lanczos iterations)",
        sig10(gs.energy),
        gs.gap,
        gs.iterations
    );
    if gs.degenerate {
        println!(
            "ground state flagged degenerate (gap {:.3e} below tolerance {:.1e}); \
             comparison skipped",
            gs.gap, chain_spec.degeneracy_tol
        );
        return Ok(());
    }

    let cal = Calibration::default();
    let set = correlator_set(r, &params, &cal)?;
    let state = build_two_site(&set)?;
    let c_formula = qjsd_coherence(&rotate_basis(&state, basis))?.c;

    let vector = &gs.vectors[0];
    let ed = oracle_correlators(vector, n, r)?;
    let c_chain = oracle_coherence(vector, n, r, basis)?.c;

    let mut cmp = Comparison::new("formula", &format!("N={n} chain"));
    cmp.row("m_z", set.m_z, ed.m_z);
    cmp.row("xx", set.xx, ed.xx);
    cmp.row("yy", set.yy, ed.yy);
    cmp.row("zz", set.zz, ed.zz);
    cmp.row(&format!("C_{basis}"), c_formula, c_chain);
    cmp.verdict(tol)
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    let n = cfg.take("n", args.n).map_err(invalid)?.unwrap_or(12);
    let tol = cfg.take("tol", args.tol).map_err(invalid)?.unwrap_or(5e-2);
    cfg.finish().map_err(invalid)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {tol}")));
    }

    let cal = Calibration::default();
    println!("mz_scale     = {}", cal.mz_scale);
    println!("greens_scale = {}", cal.greens_scale);
    println!("zz_scale     = {}", cal.zz_scale);

    // anchor: the gamma = 1 chain deep in the ordered phase, where the
    // finite-chain values converge fast and every constant is exercised
    let params = ModelParams::new(2.0, 1.0, 0.0)?;
    let gs = ground_state(&FiniteChainSpec::new(n, params))?;
    println!(
        "anchor: J = 2, gamma = 1, D = 0 on an N = {n} chain (E0 = {})",
        sig10(gs.energy)
    );
    if gs.degenerate {
        println!(
            "ground state flagged degenerate (gap {:.3e}); verification skipped",
            gs.gap
        );
        return Ok(());
    }

    let mut cmp = Comparison::new("formula", &format!("N={n} chain"));
    for r in [1usize, 2] {
        let set = correlator_set(r, &params, &cal)?;
        let ed = oracle_correlators(&gs.vectors[0], n, r)?;
        cmp.row(&format!("m_z/{r}"), set.m_z, ed.m_z);
        cmp.row(&format!("xx/{r}"), set.xx, ed.xx);
        cmp.row(&format!("yy/{r}"), set.yy, ed.yy);
        cmp.row(&format!("zz/{r}"), set.zz, ed.zz);
    }
    cmp.verdict(tol)
}
