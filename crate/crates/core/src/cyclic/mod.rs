//! Evaluation of cyclic sums `Σ_j f(x_j)` and alternating sums
//! `Σ_j (-1)^(j-1) f(x_j)` over `x_j = x0 + (j-1)T/p`, of both sides of
//! catalog identities, and verification over sample grids.

mod grid;
mod report;

use std::collections::HashMap;

use num_complex::Complex64;

use crate::catalog::{Basis, CyclicTerm, EvalCtx, FnKind, IdentitySpec, Params, PeriodKind, SignPattern, TermFactor};
use crate::env::JacobiEnv;
use crate::error::{Error, Result};
use crate::jacobi::JacobiTriple;
use crate::quad::{periodic_integral, QUAD_TOL};

pub use grid::{random_points, SampleGrid, MAX_IMAG};
pub use report::{verify, verify_with_env, SampleRecord, SkipRecord, VerificationReport};

/// Distance of the shift unit `T/p`.
pub fn shift_unit(env: &dyn JacobiEnv, period: PeriodKind, p: i64) -> Complex64 {
    env.quarter_period() * (period.multiple() / p as f64)
}

/// Values of `sn`, `cn`, `dn` and `Z` at `x0 + k·T/p`, computed once per
/// integer `k`.
struct PointCache<'a> {
    env: &'a dyn JacobiEnv,
    x0: Complex64,
    unit: Complex64,
    triples: HashMap<i64, JacobiTriple>,
    zetas: HashMap<i64, Complex64>,
}

impl<'a> PointCache<'a> {
    fn new(env: &'a dyn JacobiEnv, x0: Complex64, unit: Complex64) -> Self {
        PointCache {
            env,
            x0,
            unit,
            triples: HashMap::new(),
            zetas: HashMap::new(),
        }
    }

    fn point(&self, k: i64) -> Complex64 {
        self.x0 + self.unit * k as f64
    }

    fn factor(&mut self, f: &TermFactor, j: i64, params: &Params) -> Result<Complex64> {
        let k = j + f.shift.resolve(params);
        let x = self.point(k);
        let pole = |e: Error| match e {
            Error::PoleProximity { .. } | Error::VanishingDenominator { .. } => Error::TermPole {
                index: j as usize + 1,
                factor: format!("{}[{}]", f.kind, f.shift),
                point: x,
            },
            other => other,
        };
        let v = if f.kind == FnKind::Zeta {
            match self.zetas.get(&k) {
                Some(z) => *z,
                None => {
                    let z = self.env.zeta(x).map_err(pole)?;
                    self.zetas.insert(k, z);
                    z
                }
            }
        } else {
            let t = match self.triples.get(&k) {
                Some(t) => *t,
                None => {
                    let t = self.env.triple(x).map_err(pole)?;
                    self.triples.insert(k, t);
                    t
                }
            };
            match f.kind {
                FnKind::Sn => t.sn,
                FnKind::Cn => t.cn,
                FnKind::Dn => t.dn,
                FnKind::Aux(code) => code.apply(&t, x).map_err(pole)?,
                FnKind::Zeta => unreachable!(),
            }
        };
        Ok(if f.power == 1 { v } else { v.powi(f.power as i32) })
    }

    fn sum(&mut self, term: &CyclicTerm, params: &Params) -> Result<Complex64> {
        let factors = term.expand(params)?;
        let alternating = term.sign_pattern == SignPattern::Alternating;
        if alternating && params.p % 2 != 0 {
            return Err(Error::Constraint(format!("alternating sum needs even p, got p = {}", params.p)));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..params.p {
            let mut v = Complex64::new(1.0, 0.0);
            for f in &factors {
                v *= self.factor(f, j, params)?;
            }
            if alternating && j % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        Ok(acc)
    }
}

/// `S_p(x0)` for one product, with shifts in units of `T/p`.
pub fn eval_cyclic_sum(
    term: &CyclicTerm,
    x0: Complex64,
    env: &dyn JacobiEnv,
    period: PeriodKind,
    params: &Params,
) -> Result<Complex64> {
    if params.p < 1 {
        return Err(Error::Constraint(format!("p = {} must be positive", params.p)));
    }
    PointCache::new(env, x0, shift_unit(env, period, params.p)).sum(term, params)
}

/// Value of the summand `f(x) = Σ_i c_i Π(factors)` of the left-hand side.
pub fn eval_summand(
    spec: &IdentitySpec,
    coeffs: &[Complex64],
    x: Complex64,
    env: &dyn JacobiEnv,
    params: &Params,
) -> Result<Complex64> {
    let mut cache = PointCache::new(env, x, shift_unit(env, spec.period, params.p));
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, c) in spec.lhs.iter().zip(coeffs) {
        if let Basis::Sum(term) = &t.basis {
            let mut v = *c;
            for f in term.expand(params)? {
                v *= cache.factor(&f, 0, params)?;
            }
            acc += v;
        }
    }
    Ok(acc)
}

/// An identity with its coefficients evaluated for one environment and one
/// parameter set, ready to be evaluated at many base points.
pub struct PreparedIdentity<'a> {
    pub spec: &'a IdentitySpec,
    pub env: &'a dyn JacobiEnv,
    pub params: Params,
    pub lhs_coeffs: Vec<Complex64>,
    pub rhs_coeffs: Vec<Complex64>,
}

impl<'a> PreparedIdentity<'a> {
    pub fn new(spec: &'a IdentitySpec, env: &'a dyn JacobiEnv, params: Params) -> Result<Self> {
        spec.check_constraints(&params)?;
        let plain = EvalCtx {
            env,
            params,
            bindings: &spec.bindings,
            integral: None,
        };
        let lhs_coeffs = spec.lhs.iter().map(|t| t.coeff.eval(&plain)).collect::<Result<Vec<_>>>()?;
        let needs_integral = spec.rhs.iter().any(|t| t.coeff.has_integral())
            || spec.bindings.iter().any(|(_, e)| e.has_integral());
        let integral = if needs_integral {
            Some(lhs_integral(spec, &lhs_coeffs, env, &params)?)
        } else {
            None
        };
        let cb = move || integral.ok_or_else(|| Error::Unsupported("INT(f,0,T)".into()));
        let ctx = EvalCtx {
            env,
            params,
            bindings: &spec.bindings,
            integral: Some(&cb),
        };
        let rhs_coeffs = spec.rhs.iter().map(|t| t.coeff.eval(&ctx)).collect::<Result<Vec<_>>>()?;
        Ok(PreparedIdentity {
            spec,
            env,
            params,
            lhs_coeffs,
            rhs_coeffs,
        })
    }

    /// Both sides at the base point `x0`.
    pub fn eval(&self, x0: Complex64) -> Result<(Complex64, Complex64)> {
        let mut cache = PointCache::new(self.env, x0, shift_unit(self.env, self.spec.period, self.params.p));
        let mut side = |terms: &[crate::catalog::SideTerm], coeffs: &[Complex64]| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, c) in terms.iter().zip(coeffs) {
                acc += match &t.basis {
                    Basis::Sum(term) => c * cache.sum(term, &self.params)?,
                    Basis::Const => *c,
                };
            }
            Ok(acc)
        };
        let lhs = side(&self.spec.lhs, &self.lhs_coeffs)?;
        let rhs = side(&self.spec.rhs, &self.rhs_coeffs)?;
        Ok((lhs, rhs))
    }
}

/// `∫₀ᵀ f(x) dx` of the left-hand summand along the real axis.
pub fn lhs_integral(spec: &IdentitySpec, coeffs: &[Complex64], env: &dyn JacobiEnv, params: &Params) -> Result<Complex64> {
    if !env.supports_quadrature() {
        return Err(Error::Unsupported(format!("INT(f,0,T) in the {} environment", env.label())));
    }
    let period = (env.quarter_period() * spec.period.multiple()).re;
    periodic_integral(|x| eval_summand(spec, coeffs, x.into(), env, params), 0.0, period, QUAD_TOL)
}

/// Both sides of `spec` at one base point.
pub fn eval_identity(
    spec: &IdentitySpec,
    x0: Complex64,
    env: &dyn JacobiEnv,
    params: &Params,
) -> Result<(Complex64, Complex64)> {
    PreparedIdentity::new(spec, env, *params)?.eval(x0)
}

/// `|L - R| / max(|L|, |R|, 1)`.
pub fn relative_residual(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{parse_catalog, parse_product};
    use crate::ModulusContext;

    #[test]
    fn dn_dn_half_period_neighbour() {
        // dn(x)dn(x + K) = √(1-m), so the p = 2 sum is 2√(1-m)
        let ctx = ModulusContext::new(0.5).unwrap();
        let term = parse_product("dn[0]*dn[+r]").unwrap();
        let v = eval_cyclic_sum(&term, 0.37.into(), &ctx, PeriodKind::TwoK, &Params::new(2, 1)).unwrap();
        assert!((v.re - 2.0 * 0.5f64.sqrt()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn sn_sn_vanishes_for_two_points() {
        let ctx = ModulusContext::new(0.7).unwrap();
        let term = parse_product("sn[0]*sn[+1]").unwrap();
        let v = eval_cyclic_sum(&term, 0.9.into(), &ctx, PeriodKind::TwoK, &Params::new(2, 1)).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn alternating_sum_needs_even_p() {
        let ctx = ModulusContext::new(0.7).unwrap();
        let term = parse_product("sum[alt] dn[0]").unwrap();
        let err = eval_cyclic_sum(&term, 0.9.into(), &ctx, PeriodKind::TwoK, &Params::new(3, 1)).unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }

    #[test]
    fn pole_names_point_and_factor() {
        let ctx = ModulusContext::new(0.5).unwrap();
        let term = parse_product("dn[0]*cs[+1]").unwrap();
        let err = eval_cyclic_sum(&term, (-2.0 * ctx.k / 3.0).into(), &ctx, PeriodKind::TwoK, &Params::new(3, 1))
            .unwrap_err();
        match err {
            Error::TermPole { index, factor, .. } => {
                assert_eq!(index, 1);
                assert_eq!(factor, "cs[+1]");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn neighbour_identity_both_sides() {
        let cat = parse_catalog("sum dn[0]*dn[+r] == const: p*(dn(a) - cs(a)*Zu(a))").unwrap();
        let spec = &cat.identities[0];
        let ctx = ModulusContext::new(0.7).unwrap();
        for p in 3..=7 {
            let (l, r) = eval_identity(spec, 0.3.into(), &ctx, &Params::new(p, 1)).unwrap();
            assert!(relative_residual(l, r) < 1e-12, "p = {p}: {l} vs {r}");
        }
    }

    #[test]
    fn integral_token_matches_riemann_sum() {
        let cat = parse_catalog(
            "identity x family=MI-II T=2K\n  lhs: {1} * sum dn[0]^2\n  rhs: {INT(f,0,T)} * const\n",
        )
        .unwrap();
        let spec = &cat.identities[0];
        let ctx = ModulusContext::new(0.6).unwrap();
        let prep = PreparedIdentity::new(spec, &ctx, Params::new(1, 0)).unwrap();
        // ∫₀^{2K} dn² = 2E
        assert!((prep.rhs_coeffs[0].re - 2.0 * ctx.e).abs() < 1e-12);
    }
}
