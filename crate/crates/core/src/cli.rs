//! Command-line front end. Exit codes: 0 all checks pass, 1 a tolerance
//! failed, 2 usage or configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checks::{self, CheckOutput, Fault, FieldKind, RunConfig};
use crate::clifford::Sign;
use crate::error::{Error, Result};
use crate::report::{ReportDocument, ToleranceConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "zeromode", version, about = "Verification suite for magnetic Dirac zero modes and sharp Sobolev constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Clifford generator invariants
    GammaCheck,
    /// Zero-mode residual and finite-difference Dirac cross-check
    ZeromodeVerify,
    /// Admissible base spinors and nullspace dimension
    NullspacePsi0,
    /// Regularised integral identity and pointwise steps over an ε sweep
    IdentityCheck,
    /// Equality-case decomposition for the sharp pair
    EqualityLedger,
    /// Sphere constants, sharpness of ‖A‖² and sphere-side checks
    Constants,
    /// Radial Sobolev quotient descent
    YamabeMin,
    /// Every check
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GammaCheck => "gamma-check",
            Command::ZeromodeVerify => "zeromode-verify",
            Command::NullspacePsi0 => "nullspace-psi0",
            Command::IdentityCheck => "identity-check",
            Command::EqualityLedger => "equality-ledger",
            Command::Constants => "constants",
            Command::YamabeMin => "yamabe-min",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Bump,
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    Gamma2,
}

fn parse_sign(s: &str) -> std::result::Result<Sign, String> {
    match s.trim() {
        "1" | "+1" | "+" => Ok(Sign::Plus),
        "-1" | "-" => Ok(Sign::Minus),
        other => Err(format!("expected +1 or -1, got `{other}`")),
    }
}

fn parse_order(s: &str) -> std::result::Result<usize, String> {
    match s.trim() {
        "2" => Ok(2),
        "4" => Ok(4),
        other => Err(format!("stencil order must be 2 or 4, got `{other}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Spatial dimension
    #[arg(long, global = true, env = "ZEROMODE_DIM", default_value_t = 3)]
    pub dim: usize,
    /// Orientation sign s
    #[arg(long, global = true, env = "ZEROMODE_S", default_value = "+1", value_parser = parse_sign, allow_hyphen_values = true)]
    pub s: Sign,
    /// Points per axis (default 129; 193 for equality-ledger)
    #[arg(long, global = true, env = "ZEROMODE_GRID")]
    pub grid: Option<usize>,
    /// Box half-width (default 8; 32 for equality-ledger)
    #[arg(long, global = true, env = "ZEROMODE_RADIUS")]
    pub radius: Option<f64>,
    /// Regularisation ε; repeat for a sweep
    #[arg(long, global = true, env = "ZEROMODE_EPS", value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Finite-difference order
    #[arg(long, global = true, env = "ZEROMODE_ORDER", default_value = "4", value_parser = parse_order)]
    pub order: usize,
    /// Tolerance override `key=value`; repeatable
    #[arg(long, global = true, env = "ZEROMODE_TOL", value_delimiter = ',')]
    pub tol: Vec<String>,
    #[arg(long, global = true, env = "ZEROMODE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Spinor field for identity-check
    #[arg(long, global = true, env = "ZEROMODE_FIELD", value_enum, default_value_t = FieldArg::Bump)]
    pub field: FieldArg,
    #[arg(long, global = true, env = "ZEROMODE_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report path; stdout when absent
    #[arg(long, global = true, env = "ZEROMODE_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, hide = true, value_enum)]
    pub inject_fault: Option<FaultArg>,
}

impl Options {
    pub fn config(&self) -> Result<RunConfig> {
        if self.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Domain("ε must be positive".into()));
        }
        if self.radius.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::Domain("radius must be positive".into()));
        }
        Ok(RunConfig {
            dim: self.dim,
            sign: self.s,
            grid: self.grid,
            radius: self.radius,
            eps: self.eps.clone(),
            order: self.order,
            seed: self.seed,
            field: match self.field {
                FieldArg::Bump => FieldKind::Bump,
                FieldArg::Sharp => FieldKind::Sharp,
            },
            tolerances: ToleranceConfig::default().with_overrides(&self.tol)?,
            fault: self.inject_fault.map(|FaultArg::Gamma2| Fault::Gamma2),
        })
    }
}

/// Runs one subcommand and assembles the report document.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<ReportDocument> {
    let out: CheckOutput = match command {
        Command::GammaCheck => checks::gamma_check(cfg, &[cfg.dim])?,
        Command::ZeromodeVerify => checks::zeromode_verify(cfg)?,
        Command::NullspacePsi0 => checks::nullspace_psi0(cfg)?,
        Command::IdentityCheck => checks::identity_check(cfg)?,
        Command::EqualityLedger => checks::equality_ledger_check(cfg)?,
        Command::Constants => checks::constants_check(cfg, &[cfg.dim])?,
        Command::YamabeMin => checks::yamabe_min(cfg)?,
        Command::All => checks::all(cfg)?,
    };
    let mut doc = ReportDocument::new(command.name(), cfg.tolerances.clone());
    doc.extend(out.reports, out.artifacts);
    Ok(doc)
}

fn series_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}.{name}.csv"))
}

fn emit(doc: &ReportDocument, format: Format, out: Option<&Path>) -> Result<()> {
    let body = match format {
        Format::Json => doc.to_json()? + "\n",
        Format::Csv => {
            let mut buf = Vec::new();
            doc.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))?
        }
    };
    match out {
        None => print!("{body}"),
        Some(path) => {
            std::fs::write(path, body)?;
            if format == Format::Csv {
                for (name, table) in doc.series_csv()? {
                    std::fs::write(series_path(path, &name), table)?;
                }
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = cli
        .options
        .config()
        .and_then(|cfg| execute(cli.command, &cfg))
        .and_then(|doc| emit(&doc, cli.options.format, cli.options.out.as_deref()).map(|_| doc));
    match result {
        Ok(doc) => {
            for r in doc.reports.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {} computed={:e} target={:?} tolerance={:e}", r.check_name, r.computed, r.target, r.tolerance);
            }
            if doc.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
