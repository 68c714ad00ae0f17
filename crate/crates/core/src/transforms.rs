//! Identities derived from real-shift ones: pure imaginary and complex
//! shifts (by evaluating through a substituted environment), half-argument
//! ratio formulas, the Weierstrass form of the `dn² dn²` sum, and the theta
//! form of the `dn` product.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{Basis, Expr, IdentitySpec, Params, SideTerm};
use crate::cyclic::{relative_residual, verify_with_env, PreparedIdentity, SampleGrid, VerificationReport};
use crate::elliptic::ModulusContext;
use crate::env::{ComplexShiftEnv, ImaginaryShiftEnv, JacobiEnv};
use crate::error::{Error, Result};
use crate::jacobi::{theta, weierstrass_half_period_values, weierstrass_p, JacobiTriple, POLE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// Shifts `iT'/p` at parameter `m`, from an identity at `1 - m`.
    ImaginaryShift,
    /// Shifts in units of `2(K + iK')/p`, from an identity at `1/m`.
    ComplexShift,
    RatioExpand,
    WeierstrassForm,
    ThetaForm,
}

impl TransformKind {
    pub const ALL: [TransformKind; 5] = [
        TransformKind::ImaginaryShift,
        TransformKind::ComplexShift,
        TransformKind::RatioExpand,
        TransformKind::WeierstrassForm,
        TransformKind::ThetaForm,
    ];

    /// Whether `spec` can be pushed through this transform. The complex
    /// shift has no `E`, `K'`, `Z` or real-axis quadrature at `1/m`; the
    /// last three kinds apply to one worked identity each.
    pub fn check(self, spec: &IdentitySpec) -> Result<()> {
        let refuse = |why: &str| Err(Error::Unsupported(format!("{self:?} for {}: {why}", spec.id)));
        match self {
            TransformKind::ImaginaryShift => Ok(()),
            TransformKind::ComplexShift => {
                if let Some(n) = names_used(spec).into_iter().find(|n| COMPLEX_MISSING.contains(&n.as_str())) {
                    return refuse(&format!("`{n}` is not available at parameter 1/m"));
                }
                Ok(())
            }
            TransformKind::WeierstrassForm => {
                if lhs_text(spec) == "sum[uniform] dn[0]^2*dn[+1]^2" && spec.rhs.len() == 2 {
                    Ok(())
                } else {
                    refuse("only the Σ dn² dn²(+1) identity has a Weierstrass form here")
                }
            }
            TransformKind::ThetaForm => {
                if lhs_text(spec) == "sum[uniform] chain(dn, p, +1)" {
                    Ok(())
                } else {
                    refuse("only the dn product identity has a theta form here")
                }
            }
            TransformKind::RatioExpand => refuse("ratio formulas are standalone"),
        }
    }
}

const COMPLEX_MISSING: [&str; 6] = ["E", "Kp", "Ep", "q", "Zu", "INT"];

fn lhs_text(spec: &IdentitySpec) -> String {
    match spec.lhs.as_slice() {
        [SideTerm {
            basis: Basis::Sum(t), ..
        }] => t.to_string(),
        _ => String::new(),
    }
}

/// Variables and functions referenced anywhere in `spec`, with `Z` sums and
/// integrals reported as `Zu` and `INT`.
fn names_used(spec: &IdentitySpec) -> Vec<String> {
    let mut out = Vec::new();
    let mut visit = |e: &Expr| match e {
        Expr::Var(v) => out.push(v.clone()),
        Expr::Call(n, _) => out.push(n.clone()),
        Expr::Integral => out.push("INT".into()),
        _ => {}
    };
    for t in spec.lhs.iter().chain(&spec.rhs) {
        t.coeff.walk(&mut visit);
    }
    for (_, e) in &spec.bindings {
        e.walk(&mut visit);
    }
    for t in spec.lhs.iter().chain(&spec.rhs) {
        if let Basis::Sum(c) = &t.basis {
            if c.has_zeta() {
                out.push("Zu".into());
            }
        }
    }
    out
}

/// An identity restated in the new variable `u` through a substituted
/// environment: `u = ix + K + iK'` for the imaginary shift, `u = x/√m`
/// for the complex shift.
pub struct ShiftedIdentity<'a> {
    pub spec: &'a IdentitySpec,
    pub kind: TransformKind,
    pub params: Params,
    env: Box<dyn JacobiEnv>,
    ctx: ModulusContext,
    lhs_coeffs: Vec<Complex64>,
    rhs_coeffs: Vec<Complex64>,
}

impl<'a> ShiftedIdentity<'a> {
    /// The transformed statement at parameter `m = ctx.m`.
    pub fn new(spec: &'a IdentitySpec, kind: TransformKind, ctx: &ModulusContext, params: Params) -> Result<Self> {
        kind.check(spec)?;
        let env: Box<dyn JacobiEnv> = match kind {
            TransformKind::ImaginaryShift => Box::new(ImaginaryShiftEnv::new(ctx)),
            TransformKind::ComplexShift => Box::new(ComplexShiftEnv::new(ctx)),
            other => return Err(Error::Unsupported(format!("{other:?} is not a shift transform"))),
        };
        let prep = PreparedIdentity::new(spec, env.as_ref(), params)?;
        let (lhs_coeffs, rhs_coeffs) = (prep.lhs_coeffs, prep.rhs_coeffs);
        Ok(ShiftedIdentity {
            spec,
            kind,
            params,
            env,
            ctx: ctx.clone(),
            lhs_coeffs,
            rhs_coeffs,
        })
    }

    /// Shift between consecutive points in the `u` variable: `iT'/p` or
    /// `T(K + iK')/(Kp)`.
    pub fn shift_unit(&self) -> Complex64 {
        let frac = self.spec.period.multiple() / self.params.p as f64;
        match self.kind {
            TransformKind::ImaginaryShift => Complex64::new(0.0, self.ctx.kp * frac),
            _ => Complex64::new(self.ctx.k, self.ctx.kp) * frac,
        }
    }

    /// Original variable `x` for a point `u`.
    pub fn to_x(&self, u: Complex64) -> Complex64 {
        match self.kind {
            TransformKind::ImaginaryShift => (u - Complex64::new(self.ctx.k, self.ctx.kp)) / Complex64::i(),
            _ => u * self.ctx.m.sqrt(),
        }
    }

    /// Both sides of the transformed identity at base point `u`.
    pub fn eval(&self, u: Complex64) -> Result<(Complex64, Complex64)> {
        let prep = PreparedIdentity {
            spec: self.spec,
            env: self.env.as_ref(),
            params: self.params,
            lhs_coeffs: self.lhs_coeffs.clone(),
            rhs_coeffs: self.rhs_coeffs.clone(),
        };
        prep.eval(self.to_x(u))
    }
}

/// Verifies the transformed identity over `grid`. The imaginary shift uses
/// the grid's base points in the original variable, which keeps every
/// shifted point `u = ix + K + iK'` within `K'/4` of the line `Re u = K`. The
/// complex shift replaces them with [`complex_shift_points`] per modulus.
pub fn verify_transformed(spec: &IdentitySpec, kind: TransformKind, grid: &SampleGrid, tol: f64) -> Result<VerificationReport> {
    kind.check(spec)?;
    match kind {
        TransformKind::ImaginaryShift => verify_with_env(spec, grid, tol, ImaginaryShiftEnv::new),
        TransformKind::ComplexShift => {
            let n = grid.base_points.len();
            let parts = grid
                .moduli
                .iter()
                .map(|&m| {
                    let ctx = ModulusContext::new(m)?;
                    let g = grid.clone().with_moduli(vec![m]).with_base_points(complex_shift_points(&ctx, grid.seed, n));
                    verify_with_env(spec, &g, tol, ComplexShiftEnv::new)
                })
                .collect::<Result<Vec<_>>>()?;
            VerificationReport::merge(spec, parts).ok_or_else(|| Error::domain("empty modulus list"))
        }
        other => Err(Error::Unsupported(format!("{other:?} has no grid verification"))),
    }
}

/// `n` seeded base points (original variable `x = √m u`) for the complex
/// shift. Every `u` lies within a quarter of the row spacing of the line
/// through 0 along `K + iK'`, so the whole orbit `u + j·2(K + iK')/p` keeps
/// that margin from the poles `iK' + 2aK + 2biK'`.
pub fn complex_shift_points(ctx: &ModulusContext, seed: u64, n: usize) -> Vec<Complex64> {
    let d = Complex64::new(ctx.k, ctx.kp);
    let normal = Complex64::i() * d / d.norm();
    // poles sit at odd multiples of KK'/|d| across the line
    let half_gap = ctx.k * ctx.kp / d.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0de);
    (0..n)
        .map(|_| {
            let u = d * rng.gen_range(0.02..2.0) + normal * (half_gap * rng.gen_range(-0.25..0.25));
            u * ctx.m.sqrt()
        })
        .collect()
}

/// Environment for the imaginary shift applied twice: the formal parameter
/// is `m` again, reached through functions at `1 - m`.
pub fn imaginary_shift_twice(ctx: &ModulusContext) -> ImaginaryShiftEnv {
    ImaginaryShiftEnv::new(&ctx.complement())
}

/// Half-argument formulas for ratios of `sn`, `cn`, `dn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioFormula {
    /// `cn dn / sn = (dn 2x + cn 2x) / sn 2x`
    CnDnOverSn,
    /// `sn dn / cn = (1 - cn 2x) / sn 2x`
    SnDnOverCn,
    /// `sn cn / dn = (1 - dn 2x) / (m sn 2x)`
    SnCnOverDn,
    /// `cn / (sn dn) = (1 + cn 2x) / sn 2x`
    CnOverSnDn,
    /// `sn / (cn dn) = (dn 2x - cn 2x) / ((1 - m) sn 2x)`
    SnOverCnDn,
    /// `dn / (sn cn) = (1 + dn 2x) / sn 2x`
    DnOverSnCn,
}

impl RatioFormula {
    pub const ALL: [RatioFormula; 6] = [
        RatioFormula::CnDnOverSn,
        RatioFormula::SnDnOverCn,
        RatioFormula::SnCnOverDn,
        RatioFormula::CnOverSnDn,
        RatioFormula::SnOverCnDn,
        RatioFormula::DnOverSnCn,
    ];

    /// Both sides from the triples at `x` and `2x`.
    pub fn sides(self, t: &JacobiTriple, t2: &JacobiTriple, m: f64) -> Result<(Complex64, Complex64)> {
        let (s, c, d) = (t.sn, t.cn, t.dn);
        let (s2, c2, d2) = (t2.sn, t2.cn, t2.dn);
        let (num, den, rnum, rden) = match self {
            RatioFormula::CnDnOverSn => (c * d, s, d2 + c2, s2),
            RatioFormula::SnDnOverCn => (s * d, c, 1.0 - c2, s2),
            RatioFormula::SnCnOverDn => (s * c, d, 1.0 - d2, m * s2),
            RatioFormula::CnOverSnDn => (c, s * d, 1.0 + c2, s2),
            RatioFormula::SnOverCnDn => (s, c * d, d2 - c2, (1.0 - m) * s2),
            RatioFormula::DnOverSnCn => (d, s * c, 1.0 + d2, s2),
        };
        for (v, what) in [(den, "left denominator"), (rden, "right denominator")] {
            if v.norm() < POLE_EPS {
                return Err(Error::VanishingDenominator {
                    function: format!("{self:?} {what}"),
                    point: s,
                });
            }
        }
        Ok((num / den, rnum / rden))
    }
}

/// Both sides of a ratio formula at `x`.
pub fn ratio_expand(formula: RatioFormula, x: Complex64, ctx: &ModulusContext) -> Result<(Complex64, Complex64)> {
    formula.sides(&ctx.sncndn(x)?, &ctx.sncndn(2.0 * x)?, ctx.m)
}

/// `cn dn / sn` at `x` written as `i[√m cn(2x + iK') + dn(2x + iK')]`.
pub fn cds_shifted_form(x: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
    let t = ctx.sncndn(2.0 * x + Complex64::new(0.0, ctx.kp))?;
    Ok(Complex64::i() * (ctx.m.sqrt() * t.cn + t.dn))
}

/// The `p = 3` cyclic sum of products of neighbouring `cn dn / sn` ratios:
/// `(lhs, rhs, constant)` where `rhs` is the `cn cn` and `dn dn` sums at
/// `2u = 2x + iK'` and `constant = q(2+q)[m-(1+q)²]/(1+q)²`, `q = dn(2K/3)`.
pub fn ratio_triple_sum(x: Complex64, ctx: &ModulusContext) -> Result<(Complex64, Complex64, f64)> {
    let h = 2.0 * ctx.k / 3.0;
    let g = |k: i64| -> Result<Complex64> {
        let t = ctx.sncndn(x + h * k as f64)?;
        if t.sn.norm() < POLE_EPS {
            return Err(Error::VanishingDenominator {
                function: "sn".into(),
                point: x,
            });
        }
        Ok(t.cn * t.dn / t.sn)
    };
    let (g0, g1, g2) = (g(0)?, g(1)?, g(2)?);
    let lhs = g1 * g2 + g2 * g0 + g0 * g1;
    let u2 = 2.0 * x + Complex64::new(0.0, ctx.kp);
    let t: Vec<JacobiTriple> = (0..3).map(|k| ctx.sncndn(u2 + 2.0 * h * k as f64)).collect::<Result<_>>()?;
    let pair = |f: fn(&JacobiTriple) -> Complex64| f(&t[0]) * f(&t[1]) + f(&t[1]) * f(&t[2]) + f(&t[2]) * f(&t[0]);
    let rhs = -ctx.m * pair(|t| t.cn) - pair(|t| t.dn);
    let q = ctx.sncndn_real(h).dn;
    let constant = q * (2.0 + q) * (ctx.m - (1.0 + q) * (1.0 + q)) / ((1.0 + q) * (1.0 + q));
    Ok((lhs, rhs, constant))
}

/// `A` and `B` of `Σ dn² dn²(+1) = A Σ dn² + B`, taken from the prepared
/// identity.
pub fn dn2_pair_constants(spec: &IdentitySpec, ctx: &ModulusContext, p: i64) -> Result<(Complex64, Complex64)> {
    TransformKind::WeierstrassForm.check(spec)?;
    let prep = PreparedIdentity::new(spec, ctx, Params::new(p, 1))?;
    let mut a = None;
    let mut b = None;
    for (t, c) in spec.rhs.iter().zip(&prep.rhs_coeffs) {
        match t.basis {
            Basis::Sum(_) => a = Some(*c),
            Basis::Const => b = Some(*c),
        }
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Unsupported(format!("{}: expected one Σ term and one constant", spec.id))),
    }
}

/// `Σ ℘(u + 2(j-1)ω₁/p) ℘(u + 2jω₁/p)` and
/// `(B + pAe₁ - pe₁²) - (A - 2e₁) Σ ℘(u + 2(j-1)ω₁/p)`, with `ω₁ = K` and
/// `A`, `B` from `spec`.
pub fn weierstrass_form(spec: &IdentitySpec, u: Complex64, ctx: &ModulusContext, p: i64) -> Result<(Complex64, Complex64)> {
    let (a, b) = dn2_pair_constants(spec, ctx, p)?;
    let e1 = weierstrass_half_period_values(ctx.m).0;
    let step = 2.0 * ctx.k / p as f64;
    let wp: Vec<Complex64> = (0..=p).map(|j| weierstrass_p(u + step * j as f64, ctx)).collect::<Result<_>>()?;
    let lhs: Complex64 = (0..p as usize).map(|j| wp[j] * wp[j + 1]).sum();
    let sum: Complex64 = wp[..p as usize].iter().sum();
    let pf = p as f64;
    let rhs = (b + pf * a * e1 - pf * e1 * e1) - (a - 2.0 * e1) * sum;
    Ok((lhs, rhs))
}

/// `Π θ₂²(nπ/p)/θ₁²(nπ/p)` over `n = 1..(p-1)/2`.
pub fn theta_constant(ctx: &ModulusContext, p: i64) -> Result<Complex64> {
    let mut c = Complex64::new(1.0, 0.0);
    for n in 1..=(p - 1) / 2 {
        let z = Complex64::from(n as f64 * PI / p as f64);
        let r = theta(2, z, ctx)? / theta(1, z, ctx)?;
        c *= r * r;
    }
    Ok(c)
}

/// `Π θ₃/θ₄(z + (j-1)π/p)` and `(Π θ₂²/θ₁²) Σ θ₃/θ₄(z + (j-1)π/p)` at
/// `z = uπ/2K`, for odd `p`.
pub fn theta_form(u: Complex64, ctx: &ModulusContext, p: i64) -> Result<(Complex64, Complex64)> {
    if p < 1 || p % 2 == 0 {
        return Err(Error::Constraint(format!("theta form of the dn product needs odd p, got p = {p}")));
    }
    let z = u * (PI / (2.0 * ctx.k));
    let mut prod = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..p {
        let w = z + j as f64 * PI / p as f64;
        let t4 = theta(4, w, ctx)?;
        if t4.norm() < POLE_EPS {
            return Err(Error::VanishingDenominator {
                function: "theta4".into(),
                point: w,
            });
        }
        let r = theta(3, w, ctx)? / t4;
        prod *= r;
        sum += r;
    }
    Ok((prod, theta_constant(ctx, p)? * sum))
}

/// The three pointwise consequences of `dn(x) dn(x + K) = √(1-m)`:
/// `nd nd(+K) = 1/√(1-m)`, `cs cs(+K) = -√(1-m)`, `sc sc(+K) = -1/√(1-m)`,
/// each as `(lhs, rhs)`.
pub fn aux_consequences(x: Complex64, ctx: &ModulusContext) -> Result<[(Complex64, Complex64); 3]> {
    let t0 = ctx.sncndn(x)?;
    let t1 = ctx.sncndn(x + ctx.k)?;
    let rc = ctx.mc.sqrt();
    let guard = |v: Complex64, name: &str| {
        if v.norm() < POLE_EPS {
            Err(Error::VanishingDenominator {
                function: name.into(),
                point: x,
            })
        } else {
            Ok(v)
        }
    };
    let nd = 1.0 / (guard(t0.dn, "dn")? * guard(t1.dn, "dn")?);
    let cs = t0.cn * t1.cn / (guard(t0.sn, "sn")? * guard(t1.sn, "sn")?);
    let sc = t0.sn * t1.sn / (guard(t0.cn, "cn")? * guard(t1.cn, "cn")?);
    Ok([(nd, (1.0 / rc).into()), (cs, (-rc).into()), (sc, (-1.0 / rc).into())])
}

/// Worst relative residual of `(lhs, rhs)` pairs.
pub fn worst_residual<I: IntoIterator<Item = (Complex64, Complex64)>>(pairs: I) -> f64 {
    pairs.into_iter().map(|(l, r)| relative_residual(l, r)).fold(0.0, f64::max)
}
