use jacobi_cyclic::catalog::builtin_corpus;
use jacobi_cyclic::cyclic::SampleGrid;
use jacobi_cyclic::transforms::{verify_transformed, TransformKind};
use rayon::prelude::*;

fn sweep(kind: TransformKind) -> usize {
    let grid = SampleGrid::default_grid(77).with_moduli(vec![0.1, 0.5, 0.9]);
    let cat = builtin_corpus();
    let results: Vec<(String, Option<f64>, bool)> = cat
        .identities
        .par_iter()
        .filter(|s| kind.check(s).is_ok())
        .map(|s| {
            let r = verify_transformed(s, kind, &grid, 1e-9).unwrap_or_else(|e| panic!("{}: {e}", s.id));
            (s.id.clone(), r.max_rel, r.pass)
        })
        .collect();
    let bad: Vec<_> = results.iter().filter(|r| !r.2).collect();
    assert!(bad.is_empty(), "{kind:?}: {bad:#?}");
    results.len()
}

#[test]
fn imaginary_shift_of_every_entry_verifies() {
    assert_eq!(sweep(TransformKind::ImaginaryShift), builtin_corpus().identities.len());
}

#[test]
fn complex_shift_of_every_eligible_entry_verifies() {
    assert!(sweep(TransformKind::ComplexShift) > 20);
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(128))]

    #[test]
    fn auxiliary_consequences_of_neighbour_dn(x in 0.0f64..6.0, y in -0.4f64..0.4, m in 0.01f64..0.99) {
        let ctx = jacobi_cyclic::ModulusContext::new(m).unwrap();
        if let Ok(pairs) = jacobi_cyclic::transforms::aux_consequences(jacobi_cyclic::Complex64::new(x, y), &ctx) {
            proptest::prop_assert!(jacobi_cyclic::transforms::worst_residual(pairs) < 1e-9);
        }
    }
}
