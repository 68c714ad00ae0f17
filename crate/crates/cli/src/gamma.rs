use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use jacobi_cyclic::catalog::{parse_product, Family, Params, SignPattern};
use jacobi_cyclic::master::{gamma_set, GammaSet, GammaVariant, Summand};
use jacobi_cyclic::{Complex64, ModulusContext};
use serde::Serialize;

use crate::{emit, CliError, CliResult, Format};

#[derive(Args)]
pub struct GammaArgs {
    /// Product such as `dn[0]^2*dn[+1]^2`, optionally prefixed by `sum[alt]`.
    spec: String,
    #[arg(long, default_value_t = 3)]
    p: i64,
    #[arg(long, default_value_t = 0.5)]
    m: f64,
    #[arg(long, default_value_t = 1)]
    r: i64,
    #[arg(long, default_value_t = 0)]
    s: i64,
    #[arg(long, default_value_t = 0)]
    t: i64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct GammaReport {
    product: String,
    p: i64,
    m: f64,
    family: Family,
    ordinary: GammaSet,
    alternating: Option<GammaSet>,
}

fn c(z: Complex64) -> String {
    let z = Complex64::new(clean(z.re), clean(z.im));
    format!("{:.12}{:+.12}i", z.re, z.im)
}

// -0.000000000000 reads badly
fn clean(x: f64) -> f64 {
    if x.abs() < 5e-13 {
        0.0
    } else {
        x
    }
}

pub fn run(a: GammaArgs) -> CliResult<u8> {
    let term = parse_product(&a.spec).map_err(|e| CliError::config(format!("`{}`: {e}", a.spec)))?;
    if a.p < 1 {
        return Err(CliError::config(format!("p = {} must be positive", a.p)));
    }
    let params = Params::new(a.p, a.r).with_s(a.s).with_t(a.t);
    let alternating = term.sign_pattern == SignPattern::Alternating;
    let family = Family::from_parity(term.parity(&params).map_err(CliError::from_lib)?, alternating);
    let factors = term.expand(&params).map_err(CliError::from_lib)?;
    let f = Summand::new(vec![(1.0.into(), factors)], family.period(), term.sign_pattern, params).map_err(CliError::from_lib)?;
    let ctx = ModulusContext::new(a.m).map_err(CliError::from_lib)?;
    let ordinary = gamma_set(&f, &ctx, GammaVariant::Ordinary).map_err(CliError::from_lib)?;
    let alt = if a.p % 2 == 0 {
        Some(gamma_set(&f, &ctx, GammaVariant::Alternating).map_err(CliError::from_lib)?)
    } else {
        None
    };
    let report = GammaReport {
        product: term.to_string(),
        p: a.p,
        m: a.m,
        family,
        ordinary,
        alternating: alt,
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("gamma report serialises") + "\n",
        Format::Csv => {
            let mut s = String::from("variant,l,gamma_re,gamma_im\n");
            for (name, g) in [("ordinary", Some(&report.ordinary)), ("alternating", report.alternating.as_ref())] {
                for (l, v) in g.into_iter().flat_map(|g| g.gammas.iter().enumerate()) {
                    writeln!(s, "{name},{},{:e},{:e}", l + 1, v.re, v.im).unwrap();
                }
            }
            s
        }
        Format::Table => {
            let mut s = format!("{}  p={} m={} family={} T={}\n", report.product, a.p, a.m, family, family.period());
            writeln!(s, "{:>4}  {:<36} {:>5}  alpha_l", "w", "centre", "order").unwrap();
            for pd in &report.ordinary.poles {
                let alphas: Vec<String> = pd.alphas[..pd.order].iter().map(|v| c(*v)).collect();
                writeln!(s, "{:>4}  {:<36} {:>5}  {}", pd.w, c(pd.center), pd.order, alphas.join("  ")).unwrap();
            }
            for (name, g) in [("gamma", Some(&report.ordinary)), ("gamma~", report.alternating.as_ref())] {
                if let Some(g) = g {
                    for (l, v) in g.gammas.iter().enumerate() {
                        writeln!(s, "{name}_{} = {}", l + 1, c(*v)).unwrap();
                    }
                }
            }
            s
        }
    };
    emit(a.output.as_ref(), &text)?;
    Ok(0)
}
