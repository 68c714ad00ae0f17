use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::PeriodKind;
use crate::elliptic::ModulusContext;
use crate::error::{Error, Result};

/// Sums from which each family's identities follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArchetypalKind {
    /// `Σ dn(x_j)`
    Sigma1,
    /// `Σ dn²(x_j)`
    Sigma2,
    /// `Σ sn(x_j)`, `T = 4K`
    Sigma3,
    /// `Σ cn(x_j)`, `T = 4K`
    Sigma4,
    /// `Σ (-1)^(j-1) dn(x_j)`
    Sigma1A,
    /// `Σ (-1)^(j-1) Z(x_j)`
    Sigma2A,
}

impl ArchetypalKind {
    pub fn period(self) -> PeriodKind {
        match self {
            ArchetypalKind::Sigma3 | ArchetypalKind::Sigma4 => PeriodKind::FourK,
            _ => PeriodKind::TwoK,
        }
    }

    pub fn is_alternating(self) -> bool {
        matches!(self, ArchetypalKind::Sigma1A | ArchetypalKind::Sigma2A)
    }

    fn check_p(self, p: i64) -> Result<()> {
        if p < 1 {
            return Err(Error::Constraint(format!("p = {p} must be positive")));
        }
        if self.is_alternating() && p % 2 != 0 {
            return Err(Error::Constraint(format!("{self:?} needs even p, got p = {p}")));
        }
        Ok(())
    }
}

/// Largest admissible truncation index; beyond it the series is declared
/// unusable.
const K_LIMIT: usize = 200_000;

/// Smallest `k` with `q^k < 1e-16 (1 - q)`.
pub fn default_k_max(q: f64) -> Result<usize> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::TailBound { q });
    }
    let k = ((1e-16 * (1.0 - q)).ln() / q.ln()).ceil().max(1.0);
    if k > K_LIMIT as f64 {
        return Err(Error::TailBound { q });
    }
    Ok(k as usize)
}

/// Fourier data `c_0 + Σ_k c_k e(k x / T)` of an archetypal sum.
struct Series {
    period: f64,
    c0: Complex64,
    /// `k` runs over nonzero multiples of `step` passing `keep`.
    step: i64,
    keep: fn(i64, i64) -> bool,
    coeff: Box<dyn Fn(i64) -> Complex64>,
    /// Per-unit-`k` decay of `|c_k|` on the real axis.
    decay: f64,
}

fn series(kind: ArchetypalKind, ctx: &ModulusContext, p: i64) -> Series {
    let (k, q, e) = (ctx.k, ctx.q, ctx.e);
    let pf = p as f64;
    let ph = (p / 2) as f64;
    let i = Complex64::i();
    let sm = ctx.m.sqrt();
    let any = |_: i64, _: i64| true;
    let odd = |k: i64, _: i64| k % 2 != 0;
    // k / (p/2) odd
    let odd_ratio = |k: i64, s: i64| (k / s) % 2 != 0;
    match kind {
        ArchetypalKind::Sigma1 => Series {
            period: 2.0 * k,
            c0: (pf * PI / (2.0 * k)).into(),
            step: p,
            keep: any,
            coeff: Box::new(move |n| {
                let a = q.powi(n.abs() as i32);
                (pf * PI / k * a / (1.0 + a * a)).into()
            }),
            decay: q,
        },
        ArchetypalKind::Sigma2 => Series {
            period: 2.0 * k,
            c0: (pf * e / k).into(),
            step: p,
            keep: any,
            coeff: Box::new(move |n| {
                let a = q.powi(n.abs() as i32);
                (pf * PI * PI / (k * k) * n.abs() as f64 * a / (1.0 - a * a)).into()
            }),
            decay: q,
        },
        ArchetypalKind::Sigma3 => Series {
            period: 4.0 * k,
            c0: 0.0.into(),
            step: p,
            keep: odd,
            coeff: Box::new(move |n| {
                let a = q.powf(0.5 * n.abs() as f64);
                -i * (n.signum() as f64) * (PI * pf / (k * sm)) * a / (1.0 - a * a)
            }),
            decay: q.sqrt(),
        },
        ArchetypalKind::Sigma4 => Series {
            period: 4.0 * k,
            c0: 0.0.into(),
            step: p,
            keep: odd,
            coeff: Box::new(move |n| {
                let a = q.powf(0.5 * n.abs() as f64);
                (PI * pf / (k * sm) * a / (1.0 + a * a)).into()
            }),
            decay: q.sqrt(),
        },
        ArchetypalKind::Sigma1A => Series {
            period: 2.0 * k,
            c0: 0.0.into(),
            step: p / 2,
            keep: odd_ratio,
            coeff: Box::new(move |n| {
                let a = q.powi(n.abs() as i32);
                (2.0 * PI * ph / k * a / (1.0 + a * a)).into()
            }),
            decay: q,
        },
        ArchetypalKind::Sigma2A => Series {
            period: 2.0 * k,
            c0: 0.0.into(),
            step: p / 2,
            keep: odd_ratio,
            coeff: Box::new(move |n| {
                let a = q.powi(n.abs() as i32);
                -i * (n.signum() as f64) * (2.0 * PI * ph / k) * a / (1.0 - a * a)
            }),
            decay: q,
        },
    }
}

/// `d^n/dx0^n` of the archetypal sum from its nome series, differentiated
/// term by term. `k_max` caps `|k|`; `None` picks it from the tail bound,
/// accounting for `n` and `Im x0`.
pub fn archetypal_derivative(
    kind: ArchetypalKind,
    order: u32,
    x0: Complex64,
    ctx: &ModulusContext,
    p: i64,
    k_max: Option<usize>,
) -> Result<Complex64> {
    kind.check_p(p)?;
    let s = series(kind, ctx, p);
    let w = 2.0 * PI / s.period;
    // growth of e(kx0/T) off the real axis
    let rho = s.decay * (w * x0.im.abs()).exp();
    let k_max = match k_max {
        Some(k) => k,
        None => tail_index(rho, order, ctx.q)?,
    };
    let mut acc = if order == 0 { s.c0 } else { Complex64::new(0.0, 0.0) };
    let mut n = s.step;
    while n as usize <= k_max {
        for k in [n, -n] {
            if (s.keep)(k, s.step) {
                let phase = (Complex64::i() * (w * k as f64) * x0).exp();
                let d = (Complex64::i() * (w * k as f64)).powu(order);
                acc += (s.coeff)(k) * phase * d;
            }
        }
        n += s.step;
    }
    Ok(acc)
}

/// Nome-series value of the archetypal sum at `x0`.
pub fn archetypal(kind: ArchetypalKind, x0: Complex64, ctx: &ModulusContext, p: i64, k_max: Option<usize>) -> Result<Complex64> {
    archetypal_derivative(kind, 0, x0, ctx, p, k_max)
}

/// Smallest `k` with `k^n ρ^k < 1e-16 (1 - ρ)`, never below the plain
/// `q` bound.
fn tail_index(rho: f64, order: u32, q: f64) -> Result<usize> {
    let base = default_k_max(q)?;
    if !(rho < 1.0) {
        return Err(Error::TailBound { q });
    }
    let target = (1e-16 * (1.0 - rho)).ln();
    let mut k = base.max(1);
    while (order as f64) * (k as f64).ln() + (k as f64) * rho.ln() >= target {
        k += 1;
        if k > K_LIMIT {
            return Err(Error::TailBound { q });
        }
    }
    Ok(k)
}

/// Polynomial in `(sn, cn, dn)`, keyed by exponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub BTreeMap<(u32, u32, u32), f64>);

impl Poly {
    pub fn monomial(a: u32, b: u32, c: u32) -> Poly {
        Poly(BTreeMap::from([((a, b, c), 1.0)]))
    }

    /// Derivative using `sn' = cn dn`, `cn' = -sn dn`, `dn' = -m sn cn`.
    pub fn derivative(&self, m: f64) -> Poly {
        let mut out: BTreeMap<(u32, u32, u32), f64> = BTreeMap::new();
        for (&(a, b, c), &v) in &self.0 {
            if a > 0 {
                *out.entry((a - 1, b + 1, c + 1)).or_default() += v * a as f64;
            }
            if b > 0 {
                *out.entry((a + 1, b - 1, c + 1)).or_default() -= v * b as f64;
            }
            if c > 0 {
                *out.entry((a + 1, b + 1, c - 1)).or_default() -= m * v * c as f64;
            }
        }
        out.retain(|_, v| *v != 0.0);
        Poly(out)
    }

    pub fn eval(&self, s: Complex64, c: Complex64, d: Complex64) -> Complex64 {
        self.0
            .iter()
            .map(|(&(a, b, e), &v)| v * s.powu(a) * c.powu(b) * d.powu(e))
            .sum()
    }
}

/// `d^n/dx0^n` of the archetypal sum by direct summation of the analytic
/// derivative of its primitive (`σ1' = -m Σ sn cn` and so on).
pub fn direct_derivative(kind: ArchetypalKind, order: u32, x0: Complex64, ctx: &ModulusContext, p: i64) -> Result<Complex64> {
    kind.check_p(p)?;
    let unit = ctx.k * kind.period().multiple() / p as f64;
    let (base, shift) = match kind {
        ArchetypalKind::Sigma1 | ArchetypalKind::Sigma1A => (Poly::monomial(0, 0, 1), 0),
        ArchetypalKind::Sigma2 => (Poly::monomial(0, 0, 2), 0),
        ArchetypalKind::Sigma3 => (Poly::monomial(1, 0, 0), 0),
        ArchetypalKind::Sigma4 => (Poly::monomial(0, 1, 0), 0),
        // Z' = dn² - E/K
        ArchetypalKind::Sigma2A => (Poly::monomial(0, 0, 2), 1),
    };
    let mut poly = base;
    for _ in shift..order.max(shift) {
        poly = poly.derivative(ctx.m);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..p {
        let x = x0 + unit * j as f64;
        let v = if kind == ArchetypalKind::Sigma2A && order == 0 {
            ctx.zeta_complex(x)?
        } else {
            let t = ctx.sncndn(x)?;
            let mut v = poly.eval(t.sn, t.cn, t.dn);
            if kind == ArchetypalKind::Sigma2A && order == 1 {
                v -= ctx.e / ctx.k;
            }
            v
        };
        if kind.is_alternating() && j % 2 == 1 {
            acc -= v;
        } else {
            acc += v;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [ArchetypalKind; 6] = [
        ArchetypalKind::Sigma1,
        ArchetypalKind::Sigma2,
        ArchetypalKind::Sigma3,
        ArchetypalKind::Sigma4,
        ArchetypalKind::Sigma1A,
        ArchetypalKind::Sigma2A,
    ];

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1.0)
    }

    #[test]
    fn sigma2_single_point_is_dn_squared() {
        let ctx = ModulusContext::new(0.5).unwrap();
        let v = archetypal(ArchetypalKind::Sigma2, 0.4.into(), &ctx, 1, None).unwrap();
        let d = ctx.sncndn_real(0.4).dn;
        assert!((v.re - d * d).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn sigma3_matches_direct_sum() {
        let ctx = ModulusContext::new(0.3).unwrap();
        let x0 = Complex64::new(0.7, 0.0);
        let s = archetypal(ArchetypalKind::Sigma3, x0, &ctx, 3, None).unwrap();
        let d = direct_derivative(ArchetypalKind::Sigma3, 0, x0, &ctx, 3).unwrap();
        assert!(rel(s, d) < 1e-10, "{s} vs {d}");
    }

    #[test]
    fn alternating_kinds_reject_odd_p() {
        let ctx = ModulusContext::new(0.3).unwrap();
        for kind in [ArchetypalKind::Sigma1A, ArchetypalKind::Sigma2A] {
            let err = archetypal(kind, 0.2.into(), &ctx, 5, None).unwrap_err();
            assert!(matches!(err, Error::Constraint(_)));
        }
    }

    #[test]
    fn series_and_direct_derivatives_agree() {
        for m in [0.1, 0.5, 0.9, 0.99] {
            let ctx = ModulusContext::new(m).unwrap();
            for kind in ALL {
                let ps: &[i64] = if kind.is_alternating() { &[2, 4, 6] } else { &[1, 3, 5] };
                for &p in ps {
                    for x0 in [Complex64::new(0.31, 0.0), Complex64::new(1.7, -0.3)] {
                        for n in 0..4 {
                            let s = archetypal_derivative(kind, n, x0, &ctx, p, None).unwrap();
                            let d = direct_derivative(kind, n, x0, &ctx, p).unwrap();
                            assert!(rel(s, d) < 1e-10, "{kind:?} m={m} p={p} n={n}: {s} vs {d}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tail_bound_fails_near_unit_nome() {
        assert!(matches!(default_k_max(0.9999999), Err(Error::TailBound { .. })));
        assert!(default_k_max(0.05).unwrap() < 20);
    }

    #[test]
    fn short_truncation_is_worse() {
        let ctx = ModulusContext::new(0.9).unwrap();
        let x0 = Complex64::new(0.4, 0.0);
        let exact = direct_derivative(ArchetypalKind::Sigma1, 0, x0, &ctx, 1).unwrap();
        let errs: Vec<f64> = [1, 3, 6, 12]
            .iter()
            .map(|&k| (archetypal(ArchetypalKind::Sigma1, x0, &ctx, 1, Some(k)).unwrap() - exact).norm())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }
}
