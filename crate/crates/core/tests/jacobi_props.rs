use jacobi_cyclic::jacobi::{sncndn_real, theta, theta_argument};
use jacobi_cyclic::{Complex64, ModulusContext};
use proptest::prelude::*;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Complex values against the real-part/imaginary-part decomposition
    /// with the `y`-dependent factors at `1 - m`.
    #[test]
    fn complex_values_follow_addition_law(x in -5.0f64..5.0, y in -1.4f64..1.4, m in 0.01f64..0.99) {
        let ctx = ModulusContext::new(m).unwrap();
        let t = ctx.sncndn(Complex64::new(x, y)).unwrap();
        let a = sncndn_real(x, m).unwrap();
        let b = sncndn_real(y, 1.0 - m).unwrap();
        let delta = b.cn * b.cn + m * a.sn * a.sn * b.sn * b.sn;
        let sn = Complex64::new(a.sn * b.dn, a.cn * a.dn * b.sn * b.cn) / delta;
        let cn = Complex64::new(a.cn * b.cn, -a.sn * a.dn * b.sn * b.dn) / delta;
        let dn = Complex64::new(a.dn * b.cn * b.dn, -m * a.sn * a.cn * b.sn) / delta;
        prop_assert!(close(t.sn, sn, 1e-12) && close(t.cn, cn, 1e-12) && close(t.dn, dn, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn double_periodicity_signs(x in -3.0f64..3.0, y in -0.5f64..0.5, m in 0.05f64..0.95, a in -1i32..=1, b in -1i32..=1) {
        let ctx = ModulusContext::new(m).unwrap();
        let z = Complex64::new(x, y);
        let w = z + Complex64::new(2.0 * ctx.k * a as f64, 2.0 * ctx.kp * b as f64);
        let (t, u) = (ctx.sncndn(z).unwrap(), ctx.sncndn(w).unwrap());
        let sign = |n: i32| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(u.sn, sign(a) * t.sn, 1e-10));
        prop_assert!(close(u.cn, sign(a + b) * t.cn, 1e-10));
        prop_assert!(close(u.dn, sign(b) * t.dn, 1e-10));
    }

    #[test]
    fn derivatives_match_finite_differences(x in -3.0f64..3.0, y in -0.5f64..0.5, m in 0.05f64..0.95) {
        let ctx = ModulusContext::new(m).unwrap();
        let z = Complex64::new(x, y);
        let h = 1e-5;
        let (p, q, t) = (ctx.sncndn(z + h).unwrap(), ctx.sncndn(z - h).unwrap(), ctx.sncndn(z).unwrap());
        let d = |a: Complex64, b: Complex64| (a - b) / (2.0 * h);
        prop_assert!((d(p.sn, q.sn) - t.cn * t.dn).norm() < 1e-6);
        prop_assert!((d(p.cn, q.cn) + t.sn * t.dn).norm() < 1e-6);
        prop_assert!((d(p.dn, q.dn) + m * t.sn * t.cn).norm() < 1e-6);
    }

    #[test]
    fn theta_route_matches_direct(x in -3.0f64..3.0, y in -0.5f64..0.5, m in 0.05f64..0.95) {
        let ctx = ModulusContext::new(m).unwrap();
        let u = Complex64::new(x, y);
        let z = theta_argument(u, &ctx);
        let th = |k: u8, z: Complex64| theta(k, z, &ctx).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let t = ctx.sncndn(u).unwrap();
        let sn = th(3, zero) * th(1, z) / (th(2, zero) * th(4, z));
        let cn = th(4, zero) * th(2, z) / (th(2, zero) * th(4, z));
        let dn = th(4, zero) * th(3, z) / (th(3, zero) * th(4, z));
        prop_assert!(close(t.sn, sn, 1e-10) && close(t.cn, cn, 1e-10) && close(t.dn, dn, 1e-10));
    }
}
