//! Complete and incomplete elliptic integrals, the nome, the amplitude and
//! the Jacobi zeta function.
//!
//! Everything here uses the parameter convention `m = k²`. Complete
//! integrals come from the arithmetic-geometric mean; incomplete integrals
//! from Carlson's symmetric forms `R_F` and `R_D`.
//!
//! The zeta function is exposed in argument form, `Z(u) = E(am u, m) - (E/K) u`,
//! with the continuous amplitude. For `u = 2rK/p` this is the quantity
//! usually written `Z(β)` with `β = arcsin sn(2rK/p)`; the argument form stays
//! unambiguous once `2rK/p` exceeds `K`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::Ladder;

/// Cached quantities for one value of the parameter `m` in `(0, 1)`.
#[derive(Debug, Clone)]
pub struct ModulusContext {
    /// The parameter `m`.
    pub m: f64,
    /// `1 - m`.
    pub mc: f64,
    /// `K(m)`.
    pub k: f64,
    /// `K'(m) = K(1 - m)`.
    pub kp: f64,
    /// `E(m)`.
    pub e: f64,
    /// `E'(m) = E(1 - m)`.
    pub ep: f64,
    /// Nome `q = exp(-π K'/K)`.
    pub q: f64,
    pub(crate) ladder: Ladder,
    pub(crate) ladder_c: Ladder,
}

impl ModulusContext {
    /// Builds the context, failing outside the open interval `(0, 1)`.
    pub fn new(m: f64) -> Result<Self> {
        Self::with_complement(m, 1.0 - m)
    }

    /// Builds the context from `m` and `1 - m` given separately, so that a
    /// complementary context can be formed without rounding `1 - (1 - m)`.
    pub fn with_complement(m: f64, mc: f64) -> Result<Self> {
        if !(m > 0.0 && mc > 0.0) || !m.is_finite() || !mc.is_finite() {
            if mc <= 0.0 {
                return Err(Error::domain(format!(
                    "m = {m}: K(m) diverges as m -> 1; use the hyperbolic limit instead"
                )));
            }
            return Err(Error::domain(format!("m = {m} must lie strictly inside (0, 1)")));
        }
        let (k, e) = complete_integrals(m, mc);
        let (kp, ep) = complete_integrals(mc, m);
        Ok(Self {
            m,
            mc,
            k,
            kp,
            e,
            ep,
            q: (-PI * kp / k).exp(),
            ladder: Ladder::new(m, mc),
            ladder_c: Ladder::new(mc, m),
        })
    }

    /// Context for the complementary parameter `1 - m`.
    pub fn complement(&self) -> Self {
        Self {
            m: self.mc,
            mc: self.m,
            k: self.kp,
            kp: self.k,
            e: self.ep,
            ep: self.e,
            q: (-PI * self.k / self.kp).exp(),
            ladder: self.ladder_c.clone(),
            ladder_c: self.ladder.clone(),
        }
    }

    /// Legendre's relation `E K' + E' K - K K' - π/2`, which vanishes exactly.
    pub fn legendre_defect(&self) -> f64 {
        self.e * self.kp + self.ep * self.k - self.k * self.kp - FRAC_PI_2
    }

    /// Continuous amplitude `am(u)`.
    pub fn amplitude(&self, u: f64) -> f64 {
        let n = (u / (2.0 * self.k)).round();
        let u0 = u - 2.0 * self.k * n;
        let t = self.ladder.eval(u0);
        t.sn.atan2(t.cn) + n * PI
    }

    /// Jacobi zeta in argument form, `Z(u) = E(am u, m) - (E/K) u`.
    pub fn zeta(&self, u: f64) -> f64 {
        if self.q < ZETA_SERIES_MAX_Q {
            return self.zeta_series(Complex64::new(u, 0.0)).re;
        }
        zeta_on(&self.ladder, self.k, self.e, u)
    }

    /// `Z(u) = (2π/K) Σ qⁿ sin(nπu/K) / (1 - q²ⁿ)`. Unlike the amplitude form
    /// this keeps full relative accuracy for small `m`, where `E(am u)` and
    /// `(E/K) u` nearly cancel.
    fn zeta_series(&self, u: Complex64) -> Complex64 {
        let w = u * (PI / self.k);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qn = 1.0;
        for n in 1..200 {
            qn *= self.q;
            acc += (w * n as f64).sin() * (qn / (1.0 - qn * qn));
            // |sin(nw)| <= exp(n |Im w|) bounds every later term
            let bound = qn * (n as f64 * w.im.abs()).exp();
            if bound <= 1e-18 * acc.norm() || bound < 1e-300 {
                break;
            }
        }
        acc * (2.0 * PI / self.k)
    }

    /// Jacobi zeta at a complex argument, by the addition theorem
    /// `Z(x + iy) = Z(x) + Z(iy) - m sn(x) sn(iy) sn(x + iy)` and the imaginary
    /// transformation of `Z(iy)`.
    pub fn zeta_complex(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            return Ok(Complex64::new(self.zeta(z.re), 0.0));
        }
        if self.q < ZETA_SERIES_MAX_Q && z.im.abs() <= 0.5 * self.kp {
            return Ok(self.zeta_series(z));
        }
        let zx = self.zeta(z.re);
        let ziy = self.zeta_imaginary(z.im)?;
        let sx = self.ladder.eval(z.re).sn;
        let siy = self.sncndn(Complex64::new(0.0, z.im))?.sn;
        let sz = self.sncndn(z)?.sn;
        Ok(zx + ziy - self.m * sx * siy * sz)
    }

    /// `Z(iy) = i [dn(y, m') sc(y, m') - Z(y, m') - π y / (2 K K')]`.
    fn zeta_imaginary(&self, y: f64) -> Result<Complex64> {
        let t = self.ladder_c.eval(y);
        if t.cn.abs() < 1e-14 {
            return Err(Error::PoleProximity {
                point: Complex64::new(0.0, y),
                pole: Complex64::new(0.0, self.kp * (y / self.kp).round()),
                eps: 1e-14,
            });
        }
        let zc = zeta_on(&self.ladder_c, self.kp, self.ep, y);
        let val = t.dn * t.sn / t.cn - zc - PI * y / (2.0 * self.k * self.kp);
        Ok(Complex64::new(0.0, val))
    }
}

/// Nome below which [`ModulusContext::zeta`] sums the Fourier series
/// (`m` up to about 0.995).
const ZETA_SERIES_MAX_Q: f64 = 0.3;

// Z has period 2K; reduce to (-K, K] where am is the principal atan2.
fn zeta_on(ladder: &Ladder, k: f64, e: f64, u: f64) -> f64 {
    let n = (u / (2.0 * k)).round();
    let u0 = u - 2.0 * k * n;
    let t = ladder.eval(u0);
    let phi = t.sn.atan2(t.cn);
    incomplete_e_reduced(phi, ladder.m) - e / k * u0
}

/// Complete integrals `(K(m), E(m))` by the AGM, given `m` and `1 - m`.
pub(crate) fn complete_integrals(m: f64, mc: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = mc.sqrt();
    let mut c = m.sqrt();
    let mut pow2 = 0.5;
    let mut sum = pow2 * c * c;
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a.abs() {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// `K(m)` for `0 <= m < 1`.
pub fn complete_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    Ok(complete_integrals(m, 1.0 - m).0)
}

/// `E(m)` for `0 <= m <= 1`.
pub fn complete_e(m: f64) -> Result<f64> {
    if m == 1.0 {
        return Ok(1.0);
    }
    check_parameter(m)?;
    Ok(complete_integrals(m, 1.0 - m).1)
}

/// Builds a [`ModulusContext`].
pub fn make_context(m: f64) -> Result<ModulusContext> {
    ModulusContext::new(m)
}

fn check_parameter(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!("m = {m} outside [0, 1)")));
    }
    Ok(())
}

/// Incomplete integral of the first kind `F(φ, m)`.
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64> {
    check_parameter(m)?;
    if !phi.is_finite() {
        return Err(Error::domain("amplitude must be finite"));
    }
    let n = (phi / PI).round();
    let phi0 = phi - n * PI;
    let base = incomplete_f_reduced(phi0, m);
    if n == 0.0 {
        return Ok(base);
    }
    Ok(base + 2.0 * n * complete_integrals(m, 1.0 - m).0)
}

/// Incomplete integral of the second kind `E(φ, m)`.
pub fn incomplete_e(phi: f64, m: f64) -> Result<f64> {
    check_parameter(m)?;
    if !phi.is_finite() {
        return Err(Error::domain("amplitude must be finite"));
    }
    let n = (phi / PI).round();
    let phi0 = phi - n * PI;
    let base = incomplete_e_reduced(phi0, m);
    if n == 0.0 {
        return Ok(base);
    }
    Ok(base + 2.0 * n * complete_integrals(m, 1.0 - m).1)
}

// |phi| <= π/2
fn incomplete_f_reduced(phi: f64, m: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    s * carlson_rf(c * c, 1.0 - m * s * s, 1.0)
}

// |phi| <= π/2
fn incomplete_e_reduced(phi: f64, m: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let x = c * c;
    let y = 1.0 - m * s * s;
    s * carlson_rf(x, y, 1.0) - m * s * s * s * carlson_rd(x, y, 1.0) / 3.0
}

/// Carlson's `R_F(x, y, z)`; at most one argument may be zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut mu;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        mu = (x + y + z) / 3.0;
        dx = (mu - x) / mu;
        dy = (mu - y) / mu;
        dz = (mu - z) / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / mu.sqrt()
}

/// Carlson's `R_D(x, y, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lam));
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        ave = 0.2 * (x + y + 3.0 * z);
        dx = (ave - x) / ave;
        dy = (ave - y) / ave;
        dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac
            * (1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee) + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * ave.sqrt())
}

/// Jacobi zeta `Z(u)` for the given context.
pub fn jacobi_zeta_u(u: f64, ctx: &ModulusContext) -> f64 {
    ctx.zeta(u)
}
