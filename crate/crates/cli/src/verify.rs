use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use jacobi_cyclic::catalog::{parse_catalog, IdentitySpec};
use jacobi_cyclic::cyclic::{random_points, verify, SampleGrid, VerificationReport};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{check_moduli, emit, id_pattern, load_catalog, parse_f64_list, parse_int_list, pool, CatalogArg, CliError, CliResult, Format, DEFAULT_SEED};

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    catalog: CatalogArg,
    /// Glob over identity ids.
    #[arg(long, default_value = "*")]
    id: String,
    /// Comma list of parameters `m`.
    #[arg(long)]
    m: Option<String>,
    /// Values of `p`: `a..b` or a comma list.
    #[arg(long)]
    p: Option<String>,
    /// Relative residual tolerance; defaults to the catalog's.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, env = "ELLIPTIC_CYCLIC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Replace the default base points by this many seeded complex ones.
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Keep every sample in the JSON report, not only the worst of each
    /// passing identity.
    #[arg(long)]
    full: bool,
}

#[derive(Serialize)]
struct CatalogInfo {
    source: String,
    sha256: String,
    identities: usize,
}

#[derive(Serialize)]
struct ConfigEcho {
    id: String,
    tolerance: f64,
    seed: u64,
    moduli: Vec<f64>,
    p_values: Option<Vec<i64>>,
    base_points: usize,
    full: bool,
}

#[derive(Serialize)]
struct Summary {
    matched: usize,
    passed: usize,
    failed: Vec<String>,
}

#[derive(Serialize)]
struct ErrorEntry {
    id: String,
    error: String,
}

#[derive(Serialize)]
struct RunReport {
    tool: &'static str,
    version: &'static str,
    catalog: CatalogInfo,
    config: ConfigEcho,
    summary: Summary,
    errors: Vec<ErrorEntry>,
    reports: Vec<VerificationReport>,
}

pub fn run(a: VerifyArgs) -> CliResult<u8> {
    let (source, text) = load_catalog(&a.catalog)?;
    let cat = parse_catalog(&text).map_err(|e| CliError::config(format!("{source}: {e}")))?;
    let pat = id_pattern(&a.id)?;
    let specs: Vec<&IdentitySpec> = cat.identities.iter().filter(|s| pat.matches(&s.id)).collect();
    if specs.is_empty() {
        return Err(CliError::config(format!("no identities matched `{}`", a.id)));
    }
    let tol = a.tol.unwrap_or(cat.tolerance);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::config(format!("tolerance must be positive, got {tol}")));
    }
    let mut grid = SampleGrid::default_grid(a.seed);
    if let Some(m) = &a.m {
        let ms = parse_f64_list(m)?;
        check_moduli(&ms)?;
        grid = grid.with_moduli(ms);
    }
    if let Some(p) = &a.p {
        let ps = parse_int_list(p)?;
        if let Some(bad) = ps.iter().find(|p| **p < 1) {
            return Err(CliError::config(format!("p = {bad} must be positive")));
        }
        grid = grid.with_p_values(ps);
    }
    if let Some(n) = a.samples {
        if n == 0 {
            return Err(CliError::config("--samples must be positive"));
        }
        grid = grid.with_base_points(random_points(a.seed, n));
    }

    let outcomes: Vec<(String, Result<VerificationReport, String>)> = pool(a.jobs)?.install(|| {
        specs
            .par_iter()
            .map(|s| (s.id.clone(), verify(s, &grid, tol).map_err(|e| e.to_string())))
            .collect()
    });
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for (id, r) in outcomes {
        match r {
            Ok(r) => reports.push(r),
            Err(error) => errors.push(ErrorEntry { id, error }),
        }
    }
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    errors.sort_by(|a, b| a.id.cmp(&b.id));
    let mut failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.id.clone()).chain(errors.iter().map(|e| e.id.clone())).collect();
    failed.sort();
    let passed = reports.iter().filter(|r| r.pass).count();

    let text = match a.format {
        Format::Json => {
            if !a.full {
                for r in reports.iter_mut().filter(|r| r.pass) {
                    r.samples = r.worst().cloned().into_iter().collect();
                }
            }
            let run = RunReport {
                tool: "jcyclic",
                version: env!("CARGO_PKG_VERSION"),
                catalog: CatalogInfo {
                    source,
                    sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
                    identities: cat.identities.len(),
                },
                config: ConfigEcho {
                    id: a.id.clone(),
                    tolerance: tol,
                    seed: a.seed,
                    moduli: grid.moduli.clone(),
                    p_values: grid.p_values.clone(),
                    base_points: grid.base_points.len(),
                    full: a.full,
                },
                summary: Summary {
                    matched: specs.len(),
                    passed,
                    failed: failed.clone(),
                },
                errors,
                reports,
            };
            serde_json::to_string_pretty(&run).expect("report serialises") + "\n"
        }
        Format::Csv => {
            let mut s = String::from("id,family,environment,samples,skipped,max_rel,pass\n");
            for r in &reports {
                let max = r.max_rel.map_or(String::new(), |v| format!("{v:e}"));
                writeln!(s, "{},{},{},{},{},{},{}", r.id, r.family, r.environment, r.samples.len(), r.skipped.len(), max, r.pass).unwrap();
            }
            for e in &errors {
                writeln!(s, "{},,,0,0,,false", e.id).unwrap();
            }
            s
        }
        Format::Table => {
            let mut s = format!("{:<22} {:<10} {:>7} {:>7} {:>10}  result\n", "id", "family", "samples", "skipped", "max_rel");
            for r in &reports {
                let max = r.max_rel.map_or("-".into(), |v| format!("{v:.2e}"));
                let verdict = if r.pass { "pass" } else { "FAIL" };
                writeln!(s, "{:<22} {:<10} {:>7} {:>7} {:>10}  {verdict}", r.id, r.family, r.samples.len(), r.skipped.len(), max).unwrap();
            }
            for e in &errors {
                writeln!(s, "{:<22} error: {}", e.id, e.error).unwrap();
            }
            writeln!(s, "{passed}/{} passed at tol {tol:e}, seed {}", specs.len(), a.seed).unwrap();
            s
        }
    };
    emit(a.output.as_ref(), &text)?;
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} of {} identities failed: {}", failed.len(), specs.len(), failed.join(", "));
        Ok(1)
    }
}
