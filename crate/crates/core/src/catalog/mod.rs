//! Machine-readable cyclic identities: data model, coefficient expressions,
//! the catalog text format and the built-in corpus.

mod expr;
mod lex;
mod model;
mod parse;
mod print;

use std::sync::OnceLock;

pub use expr::{BinOp, EvalCtx, Expr, SINGULAR_EPS};
pub use model::*;
pub use parse::{parse_catalog, parse_product};
pub use print::{print_catalog, print_identity, print_side};

use crate::error::Result;

/// Source text of the built-in corpus.
pub const BUILTIN_SOURCE: &str = include_str!("../../corpus/builtin.cyc");

/// The built-in corpus, parsed once.
pub fn builtin_corpus() -> &'static CatalogFile {
    static CORPUS: OnceLock<CatalogFile> = OnceLock::new();
    CORPUS.get_or_init(|| parse_catalog(BUILTIN_SOURCE).expect("built-in corpus parses"))
}

/// Values of `p` tried for a family when no grid is given.
pub fn default_p_values(family: Family) -> Vec<i64> {
    match family {
        Family::MI3 | Family::MI4 => vec![3, 5, 7],
        Family::MI1Alt | Family::MI2Alt => vec![4, 6, 8],
        _ => (2..=8).collect(),
    }
}

/// Every admissible `(p, r, s, t, l)` for one `p`, in lexicographic order.
pub fn admissible_params(spec: &IdentitySpec, p: i64) -> Vec<Params> {
    let range = |used: bool| if used { (1..p).collect::<Vec<_>>() } else { vec![0] };
    let ls = if spec.l_values.is_empty() {
        vec![0]
    } else {
        spec.l_values.clone()
    };
    let mut out = Vec::new();
    for &l in &ls {
        for r in range(spec.uses('r')) {
            for s in range(spec.uses('s')) {
                for t in range(spec.uses('t')) {
                    let params = Params { p, r, s, t, l };
                    if spec.check_constraints(&params).is_ok() {
                        out.push(params);
                    }
                }
            }
        }
    }
    out
}

/// Structural checks beyond parsing: the declared family agrees with the
/// parity of the left side for every admissible parameter set, and no
/// right-hand basis leaves that parity class.
pub fn validate(spec: &IdentitySpec) -> Result<()> {
    for p in 2..=8 {
        for params in admissible_params(spec, p) {
            spec.check_family(&params)?;
        }
    }
    Ok(())
}
