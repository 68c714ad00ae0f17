use num_complex::Complex64;

use crate::elliptic::ModulusContext;
use crate::error::{Error, Result};

/// Half-period values `(e1, e2, e3)` of the lattice with half periods `K`
/// and `iK'`, normalised so that `e1 - e3 = 1`.
pub fn weierstrass_half_period_values(m: f64) -> (f64, f64, f64) {
    ((2.0 - m) / 3.0, (2.0 * m - 1.0) / 3.0, -(1.0 + m) / 3.0)
}

/// `℘(u) = e3 + 1 / sn²(u) = e3 + m sn²(u - iK')`, double poles at `2aK + 2biK'`.
pub fn weierstrass_p(u: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
    let a = (u.re / (2.0 * ctx.k)).round();
    let b = (u.im / (2.0 * ctx.kp)).round();
    let pole = Complex64::new(2.0 * ctx.k * a, 2.0 * ctx.kp * b);
    if (u - pole).norm() < super::POLE_EPS {
        return Err(Error::PoleProximity {
            point: u,
            pole,
            eps: super::POLE_EPS,
        });
    }
    let e3 = weierstrass_half_period_values(ctx.m).2;
    // near a pole of sn use the shifted form e3 + m sn²(u - iK')
    if ctx.pole_distance(u) < 0.5 * ctx.k.min(ctx.kp) {
        let sn = ctx.sncndn(u - Complex64::new(0.0, ctx.kp))?.sn;
        return Ok(e3 + ctx.m * sn * sn);
    }
    let sn = ctx.sncndn(u)?.sn;
    Ok(e3 + (sn * sn).inv())
}
