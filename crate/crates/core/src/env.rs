//! Function environments: where `sn`, `cn`, `dn`, `Z`, `K` and `E` come from
//! when an identity is evaluated.
//!
//! The direct environment is a [`ModulusContext`]. The two wrapper
//! environments restate an identity written for a formal parameter `μ`
//! through functions of the real parameter `m`, which is how identities with
//! imaginary and complex shifts are produced.

use num_complex::Complex64;

use crate::elliptic::ModulusContext;
use crate::error::{Error, Result};
use crate::jacobi::JacobiTriple;

/// Source of Jacobi functions at a (possibly formal) parameter.
pub trait JacobiEnv: Send + Sync {
    /// The formal parameter the identity is written for.
    fn parameter(&self) -> Complex64;
    /// `(sn, cn, dn)` at the formal parameter.
    fn triple(&self, x: Complex64) -> Result<JacobiTriple>;
    /// Jacobi zeta at the formal parameter.
    fn zeta(&self, x: Complex64) -> Result<Complex64>;
    /// Quarter period `K`, which also fixes the shift unit `T/p`.
    fn quarter_period(&self) -> Complex64;
    /// `K'` at the formal parameter.
    fn complementary_quarter_period(&self) -> Result<Complex64>;
    /// `E` at the formal parameter.
    fn complete_e(&self) -> Result<Complex64>;
    /// Whether `∫₀ᵀ f` tokens can be evaluated (the period must be real).
    fn supports_quadrature(&self) -> bool;
    /// Short name used in reports.
    fn label(&self) -> &'static str;
}

impl JacobiEnv for ModulusContext {
    fn parameter(&self) -> Complex64 {
        self.m.into()
    }

    fn triple(&self, x: Complex64) -> Result<JacobiTriple> {
        self.sncndn(x)
    }

    fn zeta(&self, x: Complex64) -> Result<Complex64> {
        self.zeta_complex(x)
    }

    fn quarter_period(&self) -> Complex64 {
        self.k.into()
    }

    fn complementary_quarter_period(&self) -> Result<Complex64> {
        Ok(self.kp.into())
    }

    fn complete_e(&self) -> Result<Complex64> {
        Ok(self.e.into())
    }

    fn supports_quadrature(&self) -> bool {
        true
    }

    fn label(&self) -> &'static str {
        "direct"
    }
}

/// Formal parameter `μ = 1 - m`, with
/// `sn(x|μ) = -dn(u|m)/√(1-m)`, `cn(x|μ) = i√m/√(1-m) cn(u|m)`,
/// `dn(x|μ) = √m sn(u|m)` and `u = ix + K + iK'`.
///
/// `K`, `E` and `Z` at `μ` are taken from the complementary context.
#[derive(Debug, Clone)]
pub struct ImaginaryShiftEnv {
    ctx: ModulusContext,
    mu: ModulusContext,
}

impl ImaginaryShiftEnv {
    pub fn new(ctx: &ModulusContext) -> Self {
        ImaginaryShiftEnv {
            ctx: ctx.clone(),
            mu: ctx.complement(),
        }
    }

    /// Point `u = ix + K + iK'` at which the `m`-functions are evaluated.
    pub fn substituted(&self, x: Complex64) -> Complex64 {
        Complex64::i() * x + Complex64::new(self.ctx.k, self.ctx.kp)
    }

    pub fn base(&self) -> &ModulusContext {
        &self.ctx
    }
}

impl JacobiEnv for ImaginaryShiftEnv {
    fn parameter(&self) -> Complex64 {
        self.mu.m.into()
    }

    fn triple(&self, x: Complex64) -> Result<JacobiTriple> {
        let t = self.ctx.sncndn(self.substituted(x))?;
        let m = self.ctx.m;
        let rc = self.ctx.mc.sqrt();
        Ok(JacobiTriple {
            sn: -t.dn / rc,
            cn: Complex64::new(0.0, m.sqrt() / rc) * t.cn,
            dn: m.sqrt() * t.sn,
        })
    }

    fn zeta(&self, x: Complex64) -> Result<Complex64> {
        self.mu.zeta_complex(x)
    }

    fn quarter_period(&self) -> Complex64 {
        self.mu.k.into()
    }

    fn complementary_quarter_period(&self) -> Result<Complex64> {
        Ok(self.mu.kp.into())
    }

    fn complete_e(&self) -> Result<Complex64> {
        Ok(self.mu.e.into())
    }

    fn supports_quadrature(&self) -> bool {
        true
    }

    fn label(&self) -> &'static str {
        "imaginary-shift"
    }
}

/// Formal parameter `μ = 1/m`, with `sn(x|μ) = √m sn(u|m)`,
/// `cn(x|μ) = dn(u|m)`, `dn(x|μ) = cn(u|m)`, `u = x/√m` and
/// `K(μ) = √m (K + iK')`.
///
/// `E`, `K'` and `Z` at `μ` are not available.
#[derive(Debug, Clone)]
pub struct ComplexShiftEnv {
    ctx: ModulusContext,
}

impl ComplexShiftEnv {
    pub fn new(ctx: &ModulusContext) -> Self {
        ComplexShiftEnv { ctx: ctx.clone() }
    }

    pub fn base(&self) -> &ModulusContext {
        &self.ctx
    }
}

impl JacobiEnv for ComplexShiftEnv {
    /// `1/m` on the upper side of the cut `[1, ∞)`, the side on which
    /// `K(μ) = √m (K + iK')` and `√(1 - μ) = -i√(1-m)/√m`.
    fn parameter(&self) -> Complex64 {
        Complex64::new(1.0 / self.ctx.m, f64::MIN_POSITIVE)
    }

    fn triple(&self, x: Complex64) -> Result<JacobiTriple> {
        let k = self.ctx.m.sqrt();
        let t = self.ctx.sncndn(x / k)?;
        Ok(JacobiTriple {
            sn: k * t.sn,
            cn: t.dn,
            dn: t.cn,
        })
    }

    fn zeta(&self, _x: Complex64) -> Result<Complex64> {
        Err(Error::Unsupported("Jacobi zeta at parameter 1/m".into()))
    }

    fn quarter_period(&self) -> Complex64 {
        self.ctx.m.sqrt() * Complex64::new(self.ctx.k, self.ctx.kp)
    }

    fn complementary_quarter_period(&self) -> Result<Complex64> {
        Err(Error::Unsupported("K' at parameter 1/m".into()))
    }

    fn complete_e(&self) -> Result<Complex64> {
        Err(Error::Unsupported("E at parameter 1/m".into()))
    }

    fn supports_quadrature(&self) -> bool {
        false
    }

    fn label(&self) -> &'static str {
        "complex-shift"
    }
}
