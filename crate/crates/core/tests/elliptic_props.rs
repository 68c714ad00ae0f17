use std::f64::consts::FRAC_PI_2;

use jacobi_cyclic::elliptic::{incomplete_e, incomplete_f};
use jacobi_cyclic::ModulusContext;
use proptest::prelude::*;

/// Composite Gauss-Legendre (5 points, `n` panels) on `[a, b]`.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn legendre_relation(m in 0.01f64..0.99) {
        let ctx = ModulusContext::new(m).unwrap();
        let defect = ctx.e * ctx.kp + ctx.ep * ctx.k - ctx.k * ctx.kp - FRAC_PI_2;
        prop_assert!(defect.abs() < 1e-12, "{defect}");
        prop_assert!(ctx.legendre_defect() < 1e-12);
    }

    #[test]
    fn zeta_has_period_2k(m in 0.01f64..0.99, t in -10.0f64..10.0) {
        let ctx = ModulusContext::new(m).unwrap();
        let u = t * ctx.k;
        prop_assert!((ctx.zeta(u + 2.0 * ctx.k) - ctx.zeta(u)).abs() < 1e-11);
    }

    #[test]
    fn zeta_derivative_is_dn_squared_minus_ratio(m in 0.01f64..0.99, u in -6.0f64..6.0) {
        let ctx = ModulusContext::new(m).unwrap();
        let h = 1e-5;
        let fd = (ctx.zeta(u + h) - ctx.zeta(u - h)) / (2.0 * h);
        let dn = ctx.sncndn_real(u).dn;
        prop_assert!((fd - (dn * dn - ctx.e / ctx.k)).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn incomplete_integrals_match_quadrature(phi in -4.0f64..4.0, m in 0.0f64..0.99) {
        let f = incomplete_f(phi, m).unwrap();
        let e = incomplete_e(phi, m).unwrap();
        let delta = |t: f64| (1.0 - m * t.sin().powi(2)).sqrt();
        let of = gauss(|t| 1.0 / delta(t), 0.0, phi, 64);
        let oe = gauss(delta, 0.0, phi, 64);
        prop_assert!((f - of).abs() <= 1e-10 * of.abs().max(1e-300) + 1e-300, "F: {f} vs {of}");
        prop_assert!((e - oe).abs() <= 1e-10 * oe.abs().max(1e-300) + 1e-300, "E: {e} vs {oe}");
    }
}
