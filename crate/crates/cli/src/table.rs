use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use jacobi_cyclic::catalog::{admissible_params, parse_catalog, Basis, IdentitySpec};
use jacobi_cyclic::cyclic::PreparedIdentity;
use jacobi_cyclic::{Error, ModulusContext};

use crate::{check_moduli, emit, id_pattern, load_catalog, parse_f64_list, parse_int_list, CatalogArg, CliError, CliResult};

#[derive(Args)]
pub struct TableArgs {
    #[command(flatten)]
    catalog: CatalogArg,
    /// Identity id or glob.
    #[arg(long)]
    id: String,
    /// `a..b` or a comma list.
    #[arg(long, default_value = "2..8")]
    p: String,
    #[arg(long, default_value = "0.1,0.3,0.5,0.7,0.9")]
    m: String,
    /// Restrict `r`; by default every admissible value.
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// `re` alone when the imaginary part is negligible, else `re+imi`.
fn number(re: f64, im: f64) -> String {
    if im.abs() <= 1e-12 * re.abs().max(1.0) {
        format!("{re}")
    } else {
        format!("{re}{im:+}i")
    }
}

fn rows(spec: &IdentitySpec, ps: &[i64], ms: &[f64], rs: Option<&[i64]>, out: &mut String) -> CliResult<usize> {
    if !spec.rhs.iter().any(|t| matches!(t.basis, Basis::Const)) {
        return Err(CliError::config(format!("{} has no constant term", spec.id)));
    }
    let mut n = 0;
    for &p in ps {
        let mut params = admissible_params(spec, p);
        if let Some(rs) = rs {
            params.retain(|q| rs.contains(&q.r));
        }
        // one row per r
        params.dedup_by_key(|q| q.r);
        for q in params {
            for &m in ms {
                let ctx = ModulusContext::new(m).map_err(CliError::from_lib)?;
                let prep = match PreparedIdentity::new(spec, &ctx, q) {
                    Ok(prep) => prep,
                    Err(Error::Constraint(_) | Error::SingularCoefficient(_)) => continue,
                    Err(e) => return Err(CliError::from_lib(e)),
                };
                let value: jacobi_cyclic::Complex64 = spec
                    .rhs
                    .iter()
                    .zip(&prep.rhs_coeffs)
                    .filter(|(t, _)| matches!(t.basis, Basis::Const))
                    .map(|(_, c)| c)
                    .sum();
                writeln!(out, "{},{},{},{},{}", spec.id, p, q.r, m, number(value.re, value.im)).unwrap();
                n += 1;
            }
        }
    }
    Ok(n)
}

pub fn run(a: TableArgs) -> CliResult<u8> {
    let (source, text) = load_catalog(&a.catalog)?;
    let cat = parse_catalog(&text).map_err(|e| CliError::config(format!("{source}: {e}")))?;
    let ps = parse_int_list(&a.p)?;
    let ms = parse_f64_list(&a.m)?;
    check_moduli(&ms)?;
    let rs = a.r.as_deref().map(parse_int_list).transpose()?;
    let pat = id_pattern(&a.id)?;
    let specs: Vec<&IdentitySpec> = cat.identities.iter().filter(|s| pat.matches(&s.id)).collect();
    if specs.is_empty() {
        return Err(CliError::config(format!("no identities matched `{}`", a.id)));
    }
    let mut out = String::from("id,p,r,m,constant\n");
    let mut n = 0;
    for s in specs {
        n += rows(s, &ps, &ms, rs.as_deref(), &mut out)?;
    }
    if n == 0 {
        return Err(CliError::config("no admissible (p, r, m) in the requested ranges"));
    }
    emit(a.output.as_ref(), &out)?;
    Ok(0)
}
