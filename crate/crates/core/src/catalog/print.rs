use std::fmt::Write;

use super::model::*;

/// Canonical text of a catalog; `parse_catalog` reads it back unchanged.
pub fn print_catalog(cat: &CatalogFile) -> String {
    let mut out = format!("catalog version={} tol={:e}\n", cat.version, cat.tolerance);
    for spec in &cat.identities {
        out.push('\n');
        out.push_str(&print_identity(spec));
    }
    out
}

pub fn print_identity(spec: &IdentitySpec) -> String {
    let mut out = format!("identity {} family={} T={}", spec.id, spec.family, spec.period);
    if !spec.constraints.is_empty() {
        let cs: Vec<String> = spec.constraints.iter().map(|c| c.to_string()).collect();
        write!(out, " constraints=\"{}\"", cs.join(", ")).unwrap();
    }
    if !spec.l_values.is_empty() {
        let ls: Vec<String> = spec.l_values.iter().map(|l| l.to_string()).collect();
        write!(out, " l={}", ls.join(",")).unwrap();
    }
    if spec.verify_then_trust {
        out.push_str(" flags=vtt");
    }
    out.push('\n');
    for (name, e) in &spec.bindings {
        writeln!(out, "  where {name} = {e}").unwrap();
    }
    writeln!(out, "  lhs: {}", print_side(&spec.lhs)).unwrap();
    writeln!(out, "  rhs: {}", print_side(&spec.rhs)).unwrap();
    out
}

pub fn print_side(terms: &[SideTerm]) -> String {
    let parts: Vec<String> = terms
        .iter()
        .map(|t| match &t.basis {
            Basis::Sum(c) => format!("{{{}}} * {c}", t.coeff),
            Basis::Const => format!("{{{}}} * const", t.coeff),
        })
        .collect();
    parts.join(" + ")
}
