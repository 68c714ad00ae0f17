//! Jacobi elliptic functions `sn`, `cn`, `dn` for real and complex arguments,
//! together with the nine auxiliary ratios, the four theta functions and the
//! Weierstrass `℘` function built on `sn`.
//!
//! Real arguments go through the descending Landen ladder. A complex argument
//! `x + iy` is split with the addition theorem: functions of `x` at parameter
//! `m` and functions of `y` at `1 - m` (the imaginary transformation), so no
//! complex AGM is ever needed.

mod aux;
mod theta;
mod weierstrass;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elliptic::{complete_integrals, ModulusContext};
use crate::error::{Error, Result};

pub use aux::{aux, AuxCode};
pub use theta::{theta, theta_q};
pub use weierstrass::{weierstrass_half_period_values, weierstrass_p};

/// Complex number used throughout the library.
pub type ComplexValue = Complex64;

/// Default distance below which an argument is treated as sitting on a pole.
pub const POLE_EPS: f64 = 1e-9;

/// `(sn, cn, dn)` at a real argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `(sn, cn, dn)` at a complex argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: Complex64,
    pub cn: Complex64,
    pub dn: Complex64,
}

impl From<RealTriple> for JacobiTriple {
    fn from(t: RealTriple) -> Self {
        JacobiTriple {
            sn: t.sn.into(),
            cn: t.cn.into(),
            dn: t.dn.into(),
        }
    }
}

impl JacobiTriple {
    /// Largest of `|sn² + cn² - 1|` and `|dn² + m sn² - 1|`.
    pub fn algebraic_defect(&self, m: f64) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let a = self.sn * self.sn + self.cn * self.cn - one;
        let b = self.dn * self.dn + m * self.sn * self.sn - one;
        a.norm().max(b.norm())
    }
}

/// Precomputed descending Landen (AGM) ladder for one parameter.
#[derive(Debug, Clone)]
pub(crate) struct Ladder {
    pub(crate) m: f64,
    pub(crate) mc: f64,
    pub(crate) k: f64,
    a: Vec<f64>,
    c: Vec<f64>,
}

impl Ladder {
    pub(crate) fn new(m: f64, mc: f64) -> Self {
        let mut a = vec![1.0];
        let mut c = vec![m.sqrt()];
        let mut b = mc.sqrt();
        while c.len() < 40 {
            let an = *a.last().unwrap();
            if (an - b).abs() <= f64::EPSILON * an {
                break;
            }
            c.push(0.5 * (an - b));
            a.push(0.5 * (an + b));
            b = (an * b).sqrt();
        }
        let k = if mc > 0.0 {
            complete_integrals(m, mc).0
        } else {
            f64::INFINITY
        };
        Ladder { m, mc, k, a, c }
    }

    pub(crate) fn eval(&self, u: f64) -> RealTriple {
        if self.m == 0.0 {
            let (s, c) = u.sin_cos();
            return RealTriple { sn: s, cn: c, dn: 1.0 };
        }
        if self.mc == 0.0 {
            let sech = 1.0 / u.cosh();
            return RealTriple {
                sn: u.tanh(),
                cn: sech,
                dn: sech,
            };
        }
        // reduce modulo the real period 4K into [-2K, 2K]
        let period = 4.0 * self.k;
        let u = u - period * (u / period).round();
        let n = self.a.len() - 1;
        let mut phi = (2f64).powi(n as i32) * self.a[n] * u;
        for i in (1..=n).rev() {
            let ratio = (self.c[i] / self.a[i] * phi.sin()).clamp(-1.0, 1.0);
            phi = 0.5 * (phi + ratio.asin());
        }
        let (sn, cn) = phi.sin_cos();
        let dn = (self.mc + self.m * cn * cn).sqrt();
        RealTriple { sn, cn, dn }
    }
}

/// `(sn, cn, dn)(u | m)` for real `u` and `0 <= m <= 1`.
pub fn sncndn_real(u: f64, m: f64) -> Result<RealTriple> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::domain(format!("m = {m} outside [0, 1]")));
    }
    if !u.is_finite() {
        return Err(Error::domain("argument must be finite"));
    }
    Ok(Ladder::new(m, 1.0 - m).eval(u))
}

/// `(sn, cn, dn)(z | m)` for complex `z` and `0 < m < 1`.
pub fn sncndn_complex(z: Complex64, m: f64) -> Result<JacobiTriple> {
    ModulusContext::new(m)?.sncndn(z)
}

impl ModulusContext {
    /// `(sn, cn, dn)` at a real argument.
    pub fn sncndn_real(&self, u: f64) -> RealTriple {
        self.ladder.eval(u)
    }

    /// `(sn, cn, dn)` at a complex argument, refusing points within
    /// [`POLE_EPS`] of the pole lattice `iK' + 2aK + 2biK'`.
    pub fn sncndn(&self, z: Complex64) -> Result<JacobiTriple> {
        self.sncndn_eps(z, POLE_EPS)
    }

    /// As [`ModulusContext::sncndn`] with an explicit pole tolerance.
    pub fn sncndn_eps(&self, z: Complex64, pole_eps: f64) -> Result<JacobiTriple> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("argument must be finite"));
        }
        if z.im == 0.0 {
            return Ok(self.ladder.eval(z.re).into());
        }
        let pole = self.nearest_pole(z);
        if (z - pole).norm() < pole_eps {
            return Err(Error::PoleProximity {
                point: z,
                pole,
                eps: pole_eps,
            });
        }
        let t = self.ladder.eval(z.re);
        let ti = self.ladder_c.eval(z.im);
        let (s, c, d) = (t.sn, t.cn, t.dn);
        let (s1, c1, d1) = (ti.sn, ti.cn, ti.dn);
        let delta = c1 * c1 + self.m * s * s * s1 * s1;
        Ok(JacobiTriple {
            sn: Complex64::new(s * d1, c * d * s1 * c1) / delta,
            cn: Complex64::new(c * c1, -s * d * s1 * d1) / delta,
            dn: Complex64::new(d * c1 * d1, -self.m * s * c * s1) / delta,
        })
    }

    /// Nearest point of the lattice `iK' + 2aK + 2biK'` where all three
    /// functions have simple poles.
    pub fn nearest_pole(&self, z: Complex64) -> Complex64 {
        let a = (z.re / (2.0 * self.k)).round();
        let b = ((z.im - self.kp) / (2.0 * self.kp)).round();
        Complex64::new(2.0 * self.k * a, self.kp + 2.0 * self.kp * b)
    }

    /// Distance from `z` to the pole lattice.
    pub fn pole_distance(&self, z: Complex64) -> f64 {
        (z - self.nearest_pole(z)).norm()
    }
}

/// `sn(u)`, `cn(u)`, `dn(u)` reduced to trigonometric and hyperbolic
/// functions at the two ends of the parameter range.
pub fn limit_triple(u: f64, m: f64) -> Option<RealTriple> {
    if m == 0.0 {
        let (s, c) = u.sin_cos();
        Some(RealTriple { sn: s, cn: c, dn: 1.0 })
    } else if m == 1.0 {
        let sech = 1.0 / u.cosh();
        Some(RealTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        })
    } else {
        None
    }
}

/// Map `u ↦ z = π u / 2K` used by the theta-function representation.
pub fn theta_argument(u: Complex64, ctx: &ModulusContext) -> Complex64 {
    u * (PI / (2.0 * ctx.k))
}
