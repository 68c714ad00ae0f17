use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod gamma;
mod table;
mod verify;

/// Fallback seed when neither `--seed` nor `ELLIPTIC_CYCLIC_SEED` is set.
pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Parser)]
#[command(name = "jcyclic", version, about = "Verify and inspect cyclic identities of Jacobi elliptic functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check catalog identities numerically on a sample grid.
    Verify(verify::VerifyArgs),
    /// Show the poles and aggregated Laurent coefficients of a product.
    Gamma(gamma::GammaArgs),
    /// Tabulate the constant term of identities over p, r and m.
    Table(table::TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args, Clone)]
pub struct CatalogArg {
    /// Catalog file, or `builtin` for the shipped corpus.
    #[arg(long, default_value = "builtin")]
    pub catalog: String,
}

/// Failure carrying its exit status: 2 for bad input or configuration,
/// 1 when a computation or check fails.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    /// Input-shaped library errors are configuration errors, the rest are
    /// computation failures.
    pub fn from_lib(e: jacobi_cyclic::Error) -> Self {
        use jacobi_cyclic::Error as E;
        match e {
            E::Parse { .. } | E::Semantic { .. } | E::Domain(_) | E::Unsupported(_) | E::Constraint(_) | E::FamilyMismatch { .. } => {
                CliError::config(e.to_string())
            }
            _ => CliError::failed(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Source label and text of the requested catalog.
pub fn load_catalog(arg: &CatalogArg) -> CliResult<(String, String)> {
    if arg.catalog == "builtin" {
        return Ok(("builtin".into(), jacobi_cyclic::catalog::BUILTIN_SOURCE.into()));
    }
    let text = std::fs::read_to_string(&arg.catalog).map_err(|e| CliError::config(format!("cannot read {}: {e}", arg.catalog)))?;
    Ok((arg.catalog.clone(), text))
}

/// `a..b` (inclusive) or a comma list of integers.
pub fn parse_int_list(s: &str) -> CliResult<Vec<i64>> {
    let bad = || CliError::config(format!("bad integer list `{s}`"));
    let out: Vec<i64> = if let Some((a, b)) = s.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?
    };
    if out.is_empty() {
        return Err(CliError::config(format!("empty range `{s}`")));
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> CliResult<Vec<f64>> {
    let out: Vec<f64> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| CliError::config(format!("bad number `{x}` in `{s}`"))))
        .collect::<CliResult<_>>()?;
    if out.is_empty() {
        return Err(CliError::config(format!("empty list `{s}`")));
    }
    Ok(out)
}

pub fn check_moduli(ms: &[f64]) -> CliResult<()> {
    match ms.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        Some(m) => Err(CliError::config(format!("m = {m} lies outside [0, 1]"))),
        None => Ok(()),
    }
}

pub fn id_pattern(s: &str) -> CliResult<glob::Pattern> {
    glob::Pattern::new(s).map_err(|e| CliError::config(format!("bad id pattern `{s}`: {e}")))
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::failed(e.to_string()))
        }
    }
}

/// Builds a pool of `jobs` threads (0 means one per core).
pub fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Verify(a) => verify::run(a),
        Cmd::Gamma(a) => gamma::run(a),
        Cmd::Table(a) => table::run(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
