//! Master identities as predictors: Laurent data of the summand on the pole
//! line `Im z = K'`, the weighted sums `γ_l` (or `γ̃_l`), archetypal sums
//! from nome series, and a finite Poisson-summation cross-check.

mod archetype;
mod laurent;

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::{Basis, EvalCtx, Family, FnKind, IdentitySpec, Params, PeriodKind, SignPattern, TermFactor};
use crate::elliptic::ModulusContext;
use crate::error::{Error, Result};
use crate::jacobi::JacobiTriple;
use crate::quad::{periodic_integral, QUAD_TOL};

pub use archetype::{archetypal, archetypal_derivative, default_k_max, direct_derivative, ArchetypalKind, Poly};
pub use laurent::{extract_alphas, PoleData, ORDER_EPS};

/// Fraction of the distance to the nearest other pole used as contour radius.
pub const RADIUS_FRACTION: f64 = 0.3;

/// A left-hand summand `f(z) = Σ_i c_i Π_k g_k(z + s_k T/p)` built from
/// `sn`, `cn`, `dn` at one real modulus.
#[derive(Debug, Clone)]
pub struct Summand {
    pub terms: Vec<(Complex64, Vec<TermFactor>)>,
    pub period: PeriodKind,
    pub sign_pattern: SignPattern,
    pub params: Params,
}

impl Summand {
    /// Left-hand side of `spec` with its coefficients evaluated.
    pub fn from_spec(spec: &IdentitySpec, ctx: &ModulusContext, params: Params) -> Result<Summand> {
        spec.check_constraints(&params)?;
        let ectx = EvalCtx {
            env: ctx,
            params,
            bindings: &spec.bindings,
            integral: None,
        };
        let mut terms = Vec::new();
        for t in &spec.lhs {
            match &t.basis {
                Basis::Sum(term) => terms.push((t.coeff.eval(&ectx)?, term.expand(&params)?)),
                Basis::Const => return Err(Error::Unsupported("constant term on the left-hand side".into())),
            }
        }
        let s = Summand {
            terms,
            period: spec.period,
            sign_pattern: spec.sign_pattern(),
            params,
        };
        s.check_kinds()?;
        Ok(s)
    }

    pub fn new(terms: Vec<(Complex64, Vec<TermFactor>)>, period: PeriodKind, sign_pattern: SignPattern, params: Params) -> Result<Summand> {
        let s = Summand {
            terms,
            period,
            sign_pattern,
            params,
        };
        s.check_kinds()?;
        Ok(s)
    }

    fn check_kinds(&self) -> Result<()> {
        for (_, fs) in &self.terms {
            if let Some(f) = fs.iter().find(|f| !matches!(f.kind, FnKind::Sn | FnKind::Cn | FnKind::Dn)) {
                return Err(Error::Unsupported(format!(
                    "pole enumeration for `{}` factors; only sn, cn, dn are handled",
                    f.kind
                )));
            }
        }
        if self.terms.is_empty() {
            return Err(Error::Unsupported("empty summand".into()));
        }
        Ok(())
    }

    pub fn p(&self) -> i64 {
        self.params.p
    }

    /// Real shift unit `T/p`.
    pub fn unit(&self, ctx: &ModulusContext) -> f64 {
        ctx.k * self.period.multiple() / self.p() as f64
    }

    pub fn eval(&self, z: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
        let unit = self.unit(ctx);
        let mut cache: Vec<(i64, JacobiTriple)> = Vec::new();
        self.eval_with(|k| match cache.iter().find(|(s, _)| *s == k) {
            Some((_, t)) => Ok(*t),
            None => {
                let t = ctx.sncndn(z + unit * k as f64)?;
                cache.push((k, t));
                Ok(t)
            }
        })
    }

    /// `f` from the triples at `z + k T/p`, supplied by `triple(k)`.
    fn eval_with(&self, mut triple: impl FnMut(i64) -> Result<JacobiTriple>) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, fs) in &self.terms {
            let mut v = *c;
            for f in fs {
                let t = triple(f.shift.resolve(&self.params))?;
                let x = match f.kind {
                    FnKind::Sn => t.sn,
                    FnKind::Cn => t.cn,
                    _ => t.dn,
                };
                v *= x.powu(f.power);
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Family from the `(P, Q)` parity of the terms, which must agree.
    pub fn family(&self) -> Result<Family> {
        let mut parity = None;
        for (_, fs) in &self.terms {
            let (mut a, mut b) = (0, 0);
            for f in fs {
                let (x, y) = f.kind.counts();
                a += x * f.power;
                b += y * f.power;
            }
            let par = ((a % 2) as u8, (b % 2) as u8);
            match parity {
                None => parity = Some(par),
                Some(q) if q != par => {
                    return Err(Error::FamilyMismatch {
                        declared: format!("P={}, Q={}", q.0, q.1),
                        computed: format!("P={}, Q={}", par.0, par.1),
                    })
                }
                _ => {}
            }
        }
        let (p, q) = parity.expect("non-empty summand");
        let fam = Family::from_parity(crate::catalog::Parity { p, q }, self.sign_pattern == SignPattern::Alternating);
        if fam == Family::Direct {
            return Err(Error::Unsupported(format!("no master identity for parity P={p}, Q={q} with alternating signs")));
        }
        Ok(fam)
    }

    /// Upper bound on the pole order anywhere.
    pub fn max_order(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, fs)| fs.iter().map(|f| f.power as usize).sum::<usize>())
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Distinct shift indices `w` in a window around zero such that
    /// `iK' + w T/p` may be a pole.
    pub fn pole_indices(&self) -> Vec<i64> {
        let p = self.p();
        let mut ws: Vec<i64> = Vec::new();
        for (_, fs) in &self.terms {
            for f in fs {
                let w = (-f.shift.resolve(&self.params)).rem_euclid(p);
                // centre the window on zero
                let w = if 2 * w > p { w - p } else { w };
                if !ws.contains(&w) {
                    ws.push(w);
                }
            }
        }
        ws.sort();
        ws
    }

    /// Candidate poles of `f` near the strip, used to size contours.
    fn pole_cloud(&self, ctx: &ModulusContext) -> Vec<Complex64> {
        let unit = self.unit(ctx);
        let mut out = Vec::new();
        for w in self.pole_indices() {
            for n in -3..=3 {
                for n2 in -1..=1 {
                    out.push(Complex64::new(w as f64 * unit + 2.0 * n as f64 * ctx.k, ctx.kp * (1 + 2 * n2) as f64));
                }
            }
        }
        out
    }
}

/// Ordinary `γ_l = Σ_w α_l^(w)` or alternating `γ̃_l = Σ_w (-1)^w α_l^(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaVariant {
    Ordinary,
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSet {
    /// `γ_1 ..= γ_max_order`, untrimmed.
    pub gammas: Vec<Complex64>,
    pub variant: GammaVariant,
    /// Last `l` with `|γ_l| > ORDER_EPS`.
    pub order: usize,
    pub poles: Vec<PoleData>,
}

impl GammaSet {
    pub fn gamma(&self, l: usize) -> Complex64 {
        self.gammas.get(l.wrapping_sub(1)).copied().unwrap_or_default()
    }
}

/// Laurent data at `iK' + w T/p` for every pole index of `f` in one strip.
/// For `T = 4K` only the set `iK' + w 4K/p` is visited; the set shifted by
/// `2K` carries `-α_l`.
pub fn pole_data(f: &Summand, ctx: &ModulusContext) -> Result<Vec<PoleData>> {
    let unit = f.unit(ctx);
    let cloud = f.pole_cloud(ctx);
    let ws = f.pole_indices();
    let centre = |w: i64| Complex64::new(w as f64 * unit, ctx.kp);
    let nearest = ws
        .iter()
        .flat_map(|&w| cloud.iter().map(move |o| (o - centre(w)).norm()))
        .filter(|d| *d > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let radius = RADIUS_FRACTION * nearest;
    // Every factor of f on the circle around iK' + wT/p sits on the circle
    // around iK' + (w + k)T/p, so triples are shared by lattice index and node.
    let cache: RefCell<HashMap<(i64, usize), JacobiTriple>> = RefCell::new(HashMap::new());
    let mut out = Vec::new();
    for &w in &ws {
        let eval = |idx: usize, _z: Complex64| {
            f.eval_with(|k| {
                let key = (w + k, idx);
                if let Some(t) = cache.borrow().get(&key) {
                    return Ok(*t);
                }
                let t = ctx.sncndn(centre(w + k) + radius * laurent::node(idx))?;
                cache.borrow_mut().insert(key, t);
                Ok(t)
            })
        };
        let mut pd = laurent::extract_indexed(eval, centre(w), f.max_order(), radius, &cloud)?;
        pd.w = w;
        out.push(pd);
    }
    Ok(out)
}

pub fn gamma_set(f: &Summand, ctx: &ModulusContext, variant: GammaVariant) -> Result<GammaSet> {
    if variant == GammaVariant::Alternating && f.p() % 2 != 0 {
        return Err(Error::Constraint(format!("alternating weights need even p, got p = {}", f.p())));
    }
    let poles = pole_data(f, ctx)?;
    let mut gammas = vec![Complex64::new(0.0, 0.0); f.max_order()];
    for pd in &poles {
        let sign = if variant == GammaVariant::Alternating && pd.w.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        for (g, a) in gammas.iter_mut().zip(&pd.alphas) {
            *g += sign * a;
        }
    }
    let order = gammas.iter().rposition(|g| g.norm() > ORDER_EPS).map_or(0, |i| i + 1);
    Ok(GammaSet {
        gammas,
        variant,
        order,
        poles,
    })
}

/// `∫₀ᵀ f(x) dx` along the real axis.
pub fn summand_integral(f: &Summand, ctx: &ModulusContext) -> Result<Complex64> {
    let t = ctx.k * f.period.multiple();
    periodic_integral(|x| f.eval(x.into(), ctx), 0.0, t, QUAD_TOL)
}

/// A summand with its Laurent data and, for MI-II, its integral, ready to
/// predict `S_p(x0)` at many base points.
#[derive(Debug, Clone)]
pub struct Predictor<'a> {
    pub family: Family,
    pub gammas: GammaSet,
    /// `∫₀^{2K} f` for MI-II.
    pub integral: Option<Complex64>,
    ctx: &'a ModulusContext,
    p: i64,
}

impl<'a> Predictor<'a> {
    pub fn new(f: &Summand, ctx: &'a ModulusContext) -> Result<Self> {
        let family = f.family()?;
        if family.period() != f.period {
            return Err(Error::FamilyMismatch {
                declared: format!("T = {}", f.period),
                computed: format!("{family} with T = {}", family.period()),
            });
        }
        let variant = if family.is_alternating() { GammaVariant::Alternating } else { GammaVariant::Ordinary };
        let gammas = gamma_set(f, ctx, variant)?;
        let integral = if family == Family::MI2 { Some(summand_integral(f, ctx)?) } else { None };
        Ok(Predictor {
            family,
            gammas,
            integral,
            ctx,
            p: f.p(),
        })
    }

    /// The family's master identity at `x0`: the `γ`-weighted combination
    /// of archetypal-sum derivatives (the sums from nome series, higher
    /// derivatives by direct summation of the analytic derivative), plus
    /// the quadrature constant for MI-II.
    pub fn eval(&self, x0: Complex64) -> Result<Complex64> {
        let ctx = self.ctx;
        let i = Complex64::i();
        let (kind, scale, lag) = match self.family {
            Family::MI1 => (ArchetypalKind::Sigma1, i, 1),
            Family::MI2 => (ArchetypalKind::Sigma2, Complex64::new(1.0, 0.0), 2),
            Family::MI3 => (ArchetypalKind::Sigma3, ctx.m.sqrt().into(), 1),
            Family::MI4 => (ArchetypalKind::Sigma4, i * ctx.m.sqrt(), 1),
            Family::MI1Alt => (ArchetypalKind::Sigma1A, i, 1),
            Family::MI2Alt => (ArchetypalKind::Sigma2A, Complex64::new(1.0, 0.0), 1),
            Family::Direct => unreachable!(),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        let mut fact = 1.0;
        for l in 1..=self.gammas.gammas.len() {
            if l > 1 {
                fact *= (l - 1) as f64;
            }
            let gl = self.gammas.gamma(l);
            if l < lag || gl.norm() == 0.0 {
                continue;
            }
            let n = (l - lag) as u32;
            let sigma = if n == 0 {
                archetypal(kind, x0, ctx, self.p, None)?
            } else {
                direct_derivative(kind, n, x0, ctx, self.p)?
            };
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * gl / fact * sigma;
        }
        acc *= scale;
        if let Some(int) = self.integral {
            acc += self.p as f64 / (2.0 * ctx.k) * (int + 2.0 * self.gammas.gamma(2) * ctx.e);
        }
        Ok(acc)
    }
}

/// One-shot [`Predictor`].
pub fn predict(f: &Summand, x0: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
    Predictor::new(f, ctx)?.eval(x0)
}

/// `S_p(x0)` by direct summation.
pub fn direct_sum(f: &Summand, x0: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
    let unit = f.unit(ctx);
    let alt = f.sign_pattern == SignPattern::Alternating;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..f.p() {
        let v = f.eval(x0 + unit * j as f64, ctx)?;
        if alt && j % 2 == 1 {
            acc -= v;
        } else {
            acc += v;
        }
    }
    Ok(acc)
}

/// Fourier coefficient `a_k = ∫₀ᵀ f(x) e(-kx/T) dx`.
pub fn fourier_coefficient(f: &Summand, k: i64, ctx: &ModulusContext) -> Result<Complex64> {
    let t = ctx.k * f.period.multiple();
    let w = -2.0 * PI * k as f64 / t;
    periodic_integral(|x| Ok(f.eval(x.into(), ctx)? * Complex64::from_polar(1.0, w * x)), 0.0, t, 1e-14)
}

/// Default `k_max` for the Poisson sum: Fourier coefficients of `f` decay
/// like `q^(2K|k|/T)`.
pub fn poisson_k_max(f: &Summand, ctx: &ModulusContext) -> Result<usize> {
    let base = default_k_max(ctx.q)?;
    Ok(match f.period {
        PeriodKind::TwoK => base,
        PeriodKind::FourK => 2 * base,
    })
}

/// `|S_p(x0) - (p/T) Σ_{p | k, |k| ≤ k_max} a_k e(k x0/T)|` for a uniform
/// sum; alternating sums keep `k/(p/2)` odd with weight `p/2`.
pub fn poisson_check(f: &Summand, x0: Complex64, ctx: &ModulusContext, k_max: Option<usize>) -> Result<f64> {
    let t = ctx.k * f.period.multiple();
    let p = f.p();
    let k_max = match k_max {
        Some(k) => k as i64,
        None => poisson_k_max(f, ctx)? as i64,
    };
    let alt = f.sign_pattern == SignPattern::Alternating;
    if alt && p % 2 != 0 {
        return Err(Error::Constraint(format!("alternating sum needs even p, got p = {p}")));
    }
    let (step, weight) = if alt { (p / 2, (p / 2) as f64) } else { (p, p as f64) };
    let phase = |k: i64| (Complex64::i() * (2.0 * PI * k as f64 / t) * x0).exp();
    let mut acc = if alt { Complex64::new(0.0, 0.0) } else { fourier_coefficient(f, 0, ctx)? };
    let mut k = step;
    while k <= k_max {
        if !alt || (k / step) % 2 == 1 {
            acc += fourier_coefficient(f, k, ctx)? * phase(k) + fourier_coefficient(f, -k, ctx)? * phase(-k);
        }
        k += step;
    }
    let series = weight / t * acc;
    Ok((direct_sum(f, x0, ctx)? - series).norm())
}

/// `|a_0 - iπγ_1|` for an MI-I summand, where `a_0 = ∫₀^{2K} f`.
pub fn zero_mode_defect(f: &Summand, ctx: &ModulusContext) -> Result<f64> {
    let g = gamma_set(f, ctx, GammaVariant::Ordinary)?;
    let a0 = summand_integral(f, ctx)?;
    Ok((a0 - Complex64::i() * PI * g.gamma(1)).norm())
}
