use num_complex::Complex64;

use crate::elliptic::ModulusContext;
use crate::error::{Error, Result};

const MAX_TERMS: usize = 200;

/// `θ_k(z)` at the nome of `ctx`.
pub fn theta(k: u8, z: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
    theta_q(k, z, ctx.q)
}

/// Jacobi theta function `θ_j(z, q)` for `j` in `1..=4`, summed from the nome
/// series until the next term bound drops below `1e-16` of the partial sum.
///
/// `θ1(z) = 2 Σ (-1)^n q^((n+1/2)²) sin((2n+1) z)`,
/// `θ2(z) = 2 Σ q^((n+1/2)²) cos((2n+1) z)`,
/// `θ3(z) = 1 + 2 Σ q^(n²) cos(2nz)`, `θ4(z) = 1 + 2 Σ (-1)^n q^(n²) cos(2nz)`.
pub fn theta_q(j: u8, z: Complex64, q: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::TailBound { q });
    }
    if !(1..=4).contains(&j) {
        return Err(Error::domain(format!("theta index {j} not in 1..=4")));
    }
    let y = z.im.abs();
    let mut acc = match j {
        1 | 2 => Complex64::new(0.0, 0.0),
        _ => Complex64::new(1.0, 0.0),
    };
    if q == 0.0 {
        return Ok(match j {
            1 | 2 => acc,
            _ => Complex64::new(1.0, 0.0),
        });
    }
    let lq = q.ln();
    let start = if j <= 2 { 0 } else { 1 };
    for n in start..start + MAX_TERMS {
        let nf = n as f64;
        let (expo, freq) = if j <= 2 {
            ((nf + 0.5) * (nf + 0.5), 2.0 * nf + 1.0)
        } else {
            (nf * nf, 2.0 * nf)
        };
        let weight = 2.0 * (expo * lq).exp();
        let sign = if (j == 1 || j == 4) && n % 2 == 1 { -1.0 } else { 1.0 };
        let arg = z * freq;
        let trig = if j == 1 { arg.sin() } else { arg.cos() };
        acc += trig * (sign * weight);
        // bound on every later term: weight times cosh(freq |Im z|), shrinking
        let bound = 2.0 * ((expo + 2.0 * nf + 1.0) * lq + (freq + 2.0) * y).exp();
        if bound <= 1e-16 * acc.norm().max(1e-300) && (expo * lq + freq * y) < 0.0 {
            return Ok(acc);
        }
    }
    Err(Error::TailBound { q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn jacobi_quartic_identity() {
        // θ3⁴ = θ2⁴ + θ4⁴ at z = 0
        for &q in &[0.01, 0.2, 0.5] {
            let z = Complex64::new(0.0, 0.0);
            let t2 = theta_q(2, z, q).unwrap().re;
            let t3 = theta_q(3, z, q).unwrap().re;
            let t4 = theta_q(4, z, q).unwrap().re;
            assert!((t3.powi(4) - t2.powi(4) - t4.powi(4)).abs() < 1e-13 * t3.powi(4));
        }
    }

    #[test]
    fn modulus_from_thetas() {
        let ctx = ModulusContext::new(0.3).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let t2 = theta(2, z, &ctx).unwrap().re;
        let t3 = theta(3, z, &ctx).unwrap().re;
        assert!(((t2 / t3).powi(4) - 0.3).abs() < 1e-14);
        assert!((t3 * t3 * PI / 2.0 - ctx.k).abs() < 1e-13);
    }

    #[test]
    fn sn_and_dn_as_theta_quotients() {
        let m = 0.45;
        let ctx = ModulusContext::new(m).unwrap();
        for &u in &[0.3, 1.2, -2.5] {
            let z = Complex64::new(u * PI / (2.0 * ctx.k), 0.0);
            let t = ctx.sncndn_real(u);
            let t1 = theta(1, z, &ctx).unwrap();
            let t3 = theta(3, z, &ctx).unwrap();
            let t4 = theta(4, z, &ctx).unwrap();
            assert!((t1 / (m.powf(0.25) * t4) - t.sn).norm() < 1e-13);
            assert!(((1.0 - m).powf(0.25) * t3 / t4 - t.dn).norm() < 1e-13);
        }
        assert_eq!(theta(1, Complex64::new(0.0, 0.0), &ctx).unwrap().norm(), 0.0);
    }

    #[test]
    fn nome_outside_unit_interval() {
        assert!(matches!(theta_q(1, Complex64::new(0.1, 0.0), 1.0), Err(Error::TailBound { .. })));
    }
}
