//! Quadrature over one full period.
//!
//! For a periodic integrand analytic in a strip the trapezoid rule converges
//! geometrically, so step doubling with reuse of the previous nodes is all
//! the adaptivity needed.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance used for `∫₀ᵀ f` tokens.
pub const QUAD_TOL: f64 = 1e-12;

const MAX_LEVEL: u32 = 20;

/// `∫_{start}^{start+period} f(x) dx` for a `period`-periodic `f`.
pub fn periodic_integral<F>(f: F, start: f64, period: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut n = 16usize;
    let mut h = period / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        sum += f(start + i as f64 * h)?;
    }
    let mut prev = sum * h;
    for _ in 0..MAX_LEVEL {
        // midpoints of the current panels
        for i in 0..n {
            sum += f(start + (i as f64 + 0.5) * h)?;
        }
        n *= 2;
        h *= 0.5;
        let cur = sum * h;
        if (cur - prev).norm() <= tol.max(1e-15 * cur.norm()) && n >= 64 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergence {
        what: "periodic trapezoid quadrature".into(),
        detail: format!("no agreement to {tol:e} after {n} nodes"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_smooth_periodic_function() {
        // ∫₀^{2π} 1/(2 + cos x) dx = 2π/√3
        let v = periodic_integral(|x| Ok((1.0 / (2.0 + x.cos())).into()), 0.0, 2.0 * PI, 1e-13).unwrap();
        assert!((v.re - 2.0 * PI / 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn errors_propagate() {
        let r = periodic_integral(|_| Err(Error::Unsupported("x".into())), 0.0, 1.0, 1e-12);
        assert!(r.is_err());
    }
}
