use jacobi_cyclic::catalog::{builtin_corpus, Basis, IdentitySpec, Params, SignPattern};
use jacobi_cyclic::cyclic::{eval_cyclic_sum, eval_summand, lhs_integral, random_points, shift_unit, PreparedIdentity, SampleGrid};
use jacobi_cyclic::{Complex64, ModulusContext};
use proptest::prelude::*;
use rayon::prelude::*;

fn corpus() -> &'static [IdentitySpec] {
    &builtin_corpus().identities
}

fn first_params(spec: &IdentitySpec, ctx: &ModulusContext) -> Option<Params> {
    SampleGrid::default_grid(1).params_for(spec).into_iter().find(|q| PreparedIdentity::new(spec, ctx, *q).is_ok())
}

#[test]
fn constant_identities_do_not_depend_on_base_point() {
    let ctx = ModulusContext::new(0.45).unwrap();
    let points = random_points(5, 32);
    let constant: Vec<&IdentitySpec> = corpus().iter().filter(|s| s.rhs.iter().all(|t| matches!(t.basis, Basis::Const))).collect();
    let mut checked = 0;
    for &spec in &constant {
        let q = first_params(spec, &ctx).unwrap_or_else(|| panic!("{}: no usable parameters", spec.id));
        let prep = PreparedIdentity::new(spec, &ctx, q).unwrap();
        let vals: Vec<Complex64> = points.iter().filter_map(|&x| prep.eval(x).ok().map(|v| v.0)).collect();
        assert!(vals.len() >= 28, "{}", spec.id);
        let n = vals.len() as f64;
        let mean: Complex64 = vals.iter().sum::<Complex64>() / n;
        let sd = (vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(sd < 1e-9 * (1.0 + mean.norm()), "{}: sd {sd}", spec.id);
        checked += 1;
    }
    assert_eq!(checked, constant.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shifting_by_one_step_permutes_the_sum(idx in 0usize..186, m in 0.05f64..0.95, x in 0.0f64..3.0, y in -0.3f64..0.3) {
        let spec = &corpus()[idx];
        let ctx = ModulusContext::new(m).unwrap();
        let Some(q) = first_params(spec, &ctx) else { return Ok(()) };
        let x0 = Complex64::new(x, y);
        let step = shift_unit(&ctx, spec.period, q.p);
        for t in &spec.lhs {
            let Basis::Sum(term) = &t.basis else { continue };
            let (Ok(a), Ok(b)) = (
                eval_cyclic_sum(term, x0, &ctx, spec.period, &q),
                eval_cyclic_sum(term, x0 + step, &ctx, spec.period, &q),
            ) else { continue };
            let want = if term.sign_pattern == SignPattern::Alternating { -a } else { a };
            prop_assert!((b - want).norm() <= 1e-10 * a.norm().max(1.0), "{}: {a} vs {b}", spec.id);
        }
    }
}

/// LHS and RHS at `m = 1e-8` against the trigonometric values.
#[test]
fn small_parameter_limits() {
    use std::f64::consts::PI;
    let ctx = ModulusContext::new(1e-8).unwrap();
    let get = |id: &str| corpus().iter().find(|s| s.id == id).unwrap();
    for p in 3..=7 {
        let pf = p as f64;
        let c = 1.0 / (PI / pf).tan();
        let cases = [("basic.ddA", pf), ("basic.ss", 0.5 * pf * (PI / pf).cos()), ("basic.ddd1", pf)];
        for (id, want) in cases {
            let prep = PreparedIdentity::new(get(id), &ctx, Params::new(p, 1)).unwrap();
            let (l, r) = prep.eval(Complex64::new(0.37, 0.0)).unwrap();
            assert!((l - want).norm() < 1e-6, "{id} p={p}: lhs {l} vs {want}");
            assert!((r - want).norm() < 1e-6, "{id} p={p}: rhs {r} vs {want}");
        }
        // ddd1 coefficient collapses to cot² - 2 cot(π/p) cot(2π/p) = 1
        let c2 = 1.0 / (2.0 * PI / pf).tan();
        assert!((c * c - 2.0 * c * c2 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quadrature_token_matches_riemann_sum() {
    let ctx = ModulusContext::new(0.5).unwrap();
    let get = |id: &str| corpus().iter().find(|s| s.id == id).unwrap();
    let cases = [("basic.ddB", Params::new(2, 1)), ("basic.ddB", Params::new(3, 1)), ("basic.dddd", Params::new(4, 1).with_s(2).with_t(3))];
    for (id, q) in cases {
        let spec = get(id);
        let prep = PreparedIdentity::new(spec, &ctx, q).unwrap();
        let token = lhs_integral(spec, &prep.lhs_coeffs, &ctx, &q).unwrap();
        let n = 1_000_000usize;
        let period = 2.0 * ctx.k;
        let h = period / n as f64;
        let riemann: Complex64 = (0..n)
            .into_par_iter()
            .map(|i| eval_summand(spec, &prep.lhs_coeffs, Complex64::new(i as f64 * h, 0.0), &ctx, &q).unwrap())
            .sum::<Complex64>()
            * h;
        assert!((token - riemann).norm() < 1e-8 * riemann.norm(), "{id} {q:?}: {token} vs {riemann}");
    }
}
