//! Fixtures shared by the benchmarks.

use jacobi_cyclic::catalog::{builtin_corpus, parse_product, IdentitySpec, Params, PeriodKind, SignPattern};
use jacobi_cyclic::master::Summand;

pub fn corpus_entry(id: &str) -> &'static IdentitySpec {
    builtin_corpus().identities.iter().find(|s| s.id == id).expect("corpus entry")
}

/// A single-product summand with unit coefficient.
pub fn product(text: &str, period: PeriodKind, p: i64, r: i64) -> Summand {
    let params = Params::new(p, r);
    let term = parse_product(text).expect("product parses");
    let factors = term.expand(&params).expect("product expands");
    Summand::new(vec![(1.0.into(), factors)], period, SignPattern::Uniform, params).expect("sn/cn/dn product")
}
