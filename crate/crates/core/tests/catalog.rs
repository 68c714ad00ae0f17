use std::collections::BTreeMap;

use jacobi_cyclic::catalog::{
    builtin_corpus, parse_catalog, parse_product, print_catalog, print_identity, validate, Basis, Family, Params,
    BUILTIN_SOURCE,
};
use jacobi_cyclic::ModulusContext;
use proptest::prelude::*;

/// Entries per family in the built-in corpus. Update together with
/// `corpus/builtin.cyc`.
const MANIFEST: [(Family, usize); 6] = [
    (Family::MI1, 31),
    (Family::MI2, 40),
    (Family::MI3, 29),
    (Family::MI4, 27),
    (Family::MI1Alt, 26),
    (Family::MI2Alt, 33),
];

#[test]
fn corpus_manifest() {
    let cat = builtin_corpus();
    let mut counts: BTreeMap<Family, usize> = BTreeMap::new();
    for s in &cat.identities {
        *counts.entry(s.family).or_default() += 1;
    }
    let want: BTreeMap<Family, usize> = MANIFEST.into_iter().collect();
    assert_eq!(counts, want);
    assert_eq!(cat.identities.len(), 186);
    assert!(cat.identities.len() >= 140);
    assert_eq!(cat.tolerance, 1e-9);
}

#[test]
fn every_builtin_round_trips() {
    let cat = builtin_corpus();
    for spec in &cat.identities {
        let text = format!("catalog version=1 tol=1e-9\n{}", print_identity(spec));
        let back = parse_catalog(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", spec.id));
        assert_eq!(&back.identities[0], spec, "{}", spec.id);
    }
    let printed = print_catalog(cat);
    assert_eq!(&parse_catalog(&printed).unwrap(), cat);
    // printing is a fixed point after one normalisation
    assert_eq!(print_catalog(&parse_catalog(&printed).unwrap()), printed);
}

#[test]
fn every_builtin_matches_its_family() {
    for spec in &builtin_corpus().identities {
        validate(spec).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
        assert_eq!(spec.family.period(), spec.period, "{}", spec.id);
    }
}

#[test]
fn alternating_entries_require_even_p() {
    for spec in builtin_corpus().identities.iter().filter(|s| s.family.is_alternating()) {
        for p in [3, 5, 7] {
            assert!(spec.check_constraints(&Params::new(p, 1)).is_err(), "{} admits p = {p}", spec.id);
        }
    }
}

#[test]
fn odd_period_families_restrict_to_odd_p() {
    for spec in builtin_corpus().identities.iter().filter(|s| matches!(s.family, Family::MI3 | Family::MI4)) {
        assert!(spec.check_constraints(&Params::new(4, 1)).is_err(), "{}", spec.id);
    }
}

#[test]
fn corpus_has_product_and_alternating_anchor_entries() {
    let cat = builtin_corpus();
    let by_id = |id: &str| cat.identities.iter().find(|s| s.id == id).unwrap_or_else(|| panic!("{id}"));
    let prod = by_id("mi1.L1.2");
    assert_eq!(prod.lhs.len(), 1);
    assert!(prod.rhs.iter().any(|t| t.coeff.to_string().contains("cs(2*K*n/p)^2")));

    let dd = by_id("mi2alt.L1.1");
    assert_eq!(dd.rhs.len(), 1);
    match &dd.rhs[0].basis {
        Basis::Sum(t) => assert!(t.has_zeta()),
        Basis::Const => panic!("expected Σ Z"),
    }
    // coefficient is -2 cs(a)
    let ctx = ModulusContext::new(0.4).unwrap();
    let prep = jacobi_cyclic::cyclic::PreparedIdentity::new(dd, &ctx, Params::new(6, 1)).unwrap();
    let a = 2.0 * ctx.k / 6.0;
    let t = ctx.sncndn_real(a);
    assert!((prep.rhs_coeffs[0].re + 2.0 * t.cn / t.sn).abs() < 1e-13);
}

#[test]
fn source_ids_are_unique_and_ordered_by_section() {
    let ids: Vec<&str> = BUILTIN_SOURCE
        .lines()
        .filter_map(|l| l.strip_prefix("identity "))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(ids.len(), builtin_corpus().identities.len());
    assert!(ids[0].starts_with("basic."));
    assert!(ids.last().unwrap().starts_with("mi2alt."));
}

#[test]
fn malformed_inputs_fail_cleanly() {
    let bad = [
        "identity x family=MI-V T=2K\n  lhs: {1} * sum dn[0]\n  rhs: {1} * sum dn[0]\n",
        "identity x family=MI-I T=2K\n  lhs: {1} * sum dn[0]\n",
        "identity x family=MI-I T=2K constraints=\"p sideways\"\n  lhs: {1} * sum dn[0]\n  rhs: {1} * sum dn[0]\n",
        "  lhs: {1} * sum dn[0]\n",
        "sum dn[0]*dn[+r == const: 1",
        "sum dn[0]*qq[+r] == const: 1",
        "sum dn[0]^0 == const: 1",
        "sum dn[0] == const: cs(a",
    ];
    for text in bad {
        assert!(parse_catalog(text).is_err(), "accepted: {text}");
    }
}

#[test]
fn family_mismatch_is_detected() {
    // dn·dn is MI-II, declared MI-I
    let cat = parse_catalog("identity x family=MI-I T=2K\n  lhs: {1} * sum dn[0]*dn[+1]\n  rhs: {1} * const\n").unwrap();
    assert!(validate(&cat.identities[0]).is_err());
}

fn factor() -> impl Strategy<Value = String> {
    let kinds = prop::sample::select(vec!["sn", "cn", "dn", "cs", "ds", "ns", "nd", "sc", "cd"]);
    let shifts = prop::sample::select(vec!["0", "+r", "-r", "+2r", "+1", "-3", "+s", "-2t", "+r+1"]);
    (kinds, shifts, 1u32..4).prop_map(|(k, s, e)| if e == 1 { format!("{k}[{s}]") } else { format!("{k}[{s}]^{e}") })
}

proptest! {
    #[test]
    fn products_round_trip(factors in prop::collection::vec(factor(), 1..5), alt in any::<bool>()) {
        let text = format!("sum{} {}", if alt { "[alt]" } else { "" }, factors.join("*"));
        let term = parse_product(&text).unwrap();
        let again = parse_product(&term.to_string()).unwrap();
        prop_assert_eq!(term, again);
    }

    #[test]
    fn parity_is_additive(a in 0u32..4, b in 0u32..4, c in 0u32..4) {
        prop_assume!(a + b + c > 0);
        let mut parts = Vec::new();
        if a > 0 { parts.push(format!("dn[0]^{a}")); }
        if b > 0 { parts.push(format!("sn[+r]^{b}")); }
        if c > 0 { parts.push(format!("cn[-r]^{c}")); }
        let term = parse_product(&parts.join("*")).unwrap();
        let par = term.parity(&Params::new(5, 1)).unwrap();
        prop_assert_eq!(par.p as u32, (a + c) % 2);
        prop_assert_eq!(par.q as u32, (b + c) % 2);
    }
}
