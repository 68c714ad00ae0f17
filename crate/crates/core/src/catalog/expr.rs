//! Coefficient expressions.
//!
//! A coefficient is a small arithmetic expression over the modulus, the
//! integer parameters, the shift arguments `a = 2rK/p`, `b = 4rK/p` (primed
//! for `s` and `t`), complete integrals and Jacobi functions. Evaluation is
//! in complex arithmetic against a [`JacobiEnv`], so the same expression
//! serves the direct and the transformed environments.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use super::lex::{Cursor, Tok};
use super::model::Params;
use crate::env::JacobiEnv;
use crate::error::{Error, Result};
use crate::jacobi::AuxCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    /// `sum(n, lo, hi, body)`.
    Sum {
        var: String,
        lo: Box<Expr>,
        hi: Box<Expr>,
        body: Box<Expr>,
    },
    /// `prod(n, lo, hi, body)`, or `prod_except(n, lo, hi, k, body)` which
    /// leaves out `n = k`.
    Prod {
        var: String,
        lo: Box<Expr>,
        hi: Box<Expr>,
        skip: Option<Box<Expr>>,
        body: Box<Expr>,
    },
    /// `INT(f,0,T)`: integral of the left-hand summand over one period.
    Integral,
}

pub const VARIABLES: [&str; 20] = [
    "m", "p", "r", "s", "t", "l", "E", "K", "Kp", "pi", "a", "a'", "a''", "b", "b'", "b''", "i", "Ep", "mc", "q",
];

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.into())
    }

    pub fn call(name: &str, arg: Expr) -> Expr {
        Expr::Call(name.into(), vec![arg])
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Pow(Box::new(a), Box::new(b))
    }

    /// Multiplies by `1 + eps`, used for fault injection.
    pub fn perturbed(self, eps: f64) -> Expr {
        Expr::bin(BinOp::Mul, Expr::bin(BinOp::Add, Expr::Num(1.0), Expr::Num(eps)), self)
    }

    pub fn parse(text: &str) -> Result<Expr> {
        let mut cur = Cursor::from_str(text, 1, 1)?;
        let e = parse_expr(&mut cur)?;
        cur.expect_end()?;
        Ok(e)
    }

    pub fn has_integral(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Integral));
        found
    }

    /// Whether the expression depends on the parameter `r`, `s`, `t`, `l`
    /// or `p`, directly or through a shift argument.
    pub fn mentions(&self, var: char) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Expr::Var(name) = e {
                let hit = match name.as_str() {
                    "a" | "b" => var == 'r',
                    "a'" | "b'" => var == 's',
                    "a''" | "b''" => var == 't',
                    n => n.len() == 1 && n.starts_with(var),
                };
                found |= hit;
            }
        });
        found
    }

    /// Visits every node, parents first.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Integral => {}
            Expr::Neg(a) => a.walk(f),
            Expr::Bin(_, a, b) | Expr::Pow(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::Sum { lo, hi, body, .. } => {
                lo.walk(f);
                hi.walk(f);
                body.walk(f);
            }
            Expr::Prod { lo, hi, skip, body, .. } => {
                lo.walk(f);
                hi.walk(f);
                if let Some(k) = skip {
                    k.walk(f);
                }
                body.walk(f);
            }
        }
    }

    /// Integer value using only the integer parameters, for constraints.
    pub fn eval_integer(&self, params: &Params) -> Result<i64> {
        let bad = |msg: String| Error::Semantic {
            context: "integer expression".into(),
            message: msg,
        };
        Ok(match self {
            Expr::Num(x) if x.fract() == 0.0 => *x as i64,
            Expr::Var(v) => params.get(v).ok_or_else(|| bad(format!("`{v}` is not an integer parameter")))?,
            Expr::Neg(a) => -a.eval_integer(params)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_integer(params)?, b.eval_integer(params)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0 || x % y != 0 {
                            return Err(bad(format!("{x}/{y} is not an integer")));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, b) => {
                let (x, y) = (a.eval_integer(params)?, b.eval_integer(params)?);
                if !(0..=62).contains(&y) {
                    return Err(bad(format!("exponent {y} out of range")));
                }
                x.pow(y as u32)
            }
            other => return Err(bad(format!("`{other}` is not an integer expression"))),
        })
    }

    pub fn eval(&self, ctx: &EvalCtx<'_>) -> Result<Complex64> {
        let mut locals = Vec::new();
        self.eval_in(ctx, &mut locals)
    }

    fn eval_in(&self, ctx: &EvalCtx<'_>, locals: &mut Vec<(String, Complex64)>) -> Result<Complex64> {
        Ok(match self {
            Expr::Num(x) => Complex64::new(*x, 0.0),
            Expr::Var(v) => ctx.lookup(v, locals)?,
            Expr::Neg(a) => -a.eval_in(ctx, locals)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_in(ctx, locals)?;
                let y = b.eval_in(ctx, locals)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.norm() < SINGULAR_EPS {
                            return Err(Error::SingularCoefficient(format!("division by `{b}` = {y}")));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, b) => {
                let x = a.eval_in(ctx, locals)?;
                let y = b.eval_in(ctx, locals)?;
                power(x, y, self)?
            }
            Expr::Call(name, args) => {
                let vals = args.iter().map(|a| a.eval_in(ctx, locals)).collect::<Result<Vec<_>>>()?;
                ctx.call(name, &vals)?
            }
            Expr::Sum { var, lo, hi, body } => {
                let (lo, hi) = (as_int(lo.eval_in(ctx, locals)?, lo)?, as_int(hi.eval_in(ctx, locals)?, hi)?);
                let mut acc = Complex64::new(0.0, 0.0);
                for n in lo..=hi {
                    locals.push((var.clone(), (n as f64).into()));
                    let v = body.eval_in(ctx, locals);
                    locals.pop();
                    acc += v?;
                }
                acc
            }
            Expr::Prod { var, lo, hi, skip, body } => {
                let (lo, hi) = (as_int(lo.eval_in(ctx, locals)?, lo)?, as_int(hi.eval_in(ctx, locals)?, hi)?);
                let skip = match skip {
                    Some(k) => Some(as_int(k.eval_in(ctx, locals)?, k)?),
                    None => None,
                };
                let mut acc = Complex64::new(1.0, 0.0);
                for n in lo..=hi {
                    if Some(n) == skip {
                        continue;
                    }
                    locals.push((var.clone(), (n as f64).into()));
                    let v = body.eval_in(ctx, locals);
                    locals.pop();
                    acc *= v?;
                }
                acc
            }
            Expr::Integral => match ctx.integral {
                Some(f) => f()?,
                None => return Err(Error::Unsupported("INT(f,0,T) without an integrand".into())),
            },
        })
    }
}

/// Denominators smaller than this make a coefficient singular.
pub const SINGULAR_EPS: f64 = 1e-12;

fn as_int(v: Complex64, e: &Expr) -> Result<i64> {
    if v.im == 0.0 && v.re.fract() == 0.0 {
        Ok(v.re as i64)
    } else {
        Err(Error::Semantic {
            context: "range bound".into(),
            message: format!("`{e}` = {v} is not an integer"),
        })
    }
}

fn power(x: Complex64, y: Complex64, e: &Expr) -> Result<Complex64> {
    if y.im == 0.0 && y.re.fract() == 0.0 && y.re.abs() <= 64.0 {
        let n = y.re as i32;
        if n < 0 && x.norm() < SINGULAR_EPS {
            return Err(Error::SingularCoefficient(format!("negative power of zero in `{e}`")));
        }
        return Ok(x.powi(n));
    }
    if x.im == 0.0 && x.re > 0.0 {
        return Ok((y * x.re.ln()).exp());
    }
    // off the cut: principal branch, as for sqrt
    if x.im != 0.0 {
        return Ok(x.powc(y));
    }
    Err(Error::domain(format!("non-integer power of {x} in `{e}`")))
}

/// Everything an expression may refer to.
pub struct EvalCtx<'a> {
    pub env: &'a dyn JacobiEnv,
    pub params: Params,
    /// Named sub-expressions; each may refer to earlier ones only.
    pub bindings: &'a [(String, Expr)],
    pub integral: Option<&'a dyn Fn() -> Result<Complex64>>,
}

impl<'a> EvalCtx<'a> {
    pub fn new(env: &'a dyn JacobiEnv, params: Params) -> Self {
        EvalCtx {
            env,
            params,
            bindings: &[],
            integral: None,
        }
    }

    fn lookup(&self, v: &str, locals: &[(String, Complex64)]) -> Result<Complex64> {
        if let Some((_, x)) = locals.iter().rev().find(|(n, _)| n == v) {
            return Ok(*x);
        }
        if let Some(idx) = self.bindings.iter().position(|(n, _)| n == v) {
            let sub = EvalCtx {
                env: self.env,
                params: self.params,
                bindings: &self.bindings[..idx],
                integral: self.integral,
            };
            return self.bindings[idx].1.eval(&sub);
        }
        if let Some(n) = self.params.get(v) {
            return Ok((n as f64).into());
        }
        let p = self.params.p as f64;
        let k = self.env.quarter_period();
        let arg = |n: i64, mult: f64| k * (mult * n as f64 / p);
        Ok(match v {
            "m" => self.env.parameter(),
            "mc" => 1.0 - self.env.parameter(),
            "K" => k,
            "Kp" => self.env.complementary_quarter_period()?,
            "E" => self.env.complete_e()?,
            "Ep" => {
                let kp = self.env.complementary_quarter_period()?;
                let e = self.env.complete_e()?;
                // Legendre relation
                (PI / 2.0 + k * kp - e * kp) / k
            }
            "q" => (-PI * self.env.complementary_quarter_period()? / k).exp(),
            "pi" => PI.into(),
            "i" => Complex64::i(),
            "a" => arg(self.params.r, 2.0),
            "a'" => arg(self.params.s, 2.0),
            "a''" => arg(self.params.t, 2.0),
            "b" => arg(self.params.r, 4.0),
            "b'" => arg(self.params.s, 4.0),
            "b''" => arg(self.params.t, 4.0),
            _ => {
                return Err(Error::Semantic {
                    context: "coefficient".into(),
                    message: format!("unknown variable `{v}`"),
                })
            }
        })
    }

    fn call(&self, name: &str, args: &[Complex64]) -> Result<Complex64> {
        let one = |args: &[Complex64]| -> Result<Complex64> {
            match args {
                [x] => Ok(*x),
                _ => Err(Error::Semantic {
                    context: "coefficient".into(),
                    message: format!("`{name}` takes one argument, got {}", args.len()),
                }),
            }
        };
        let singular = |e: Error| match e {
            Error::PoleProximity { point, .. } | Error::VanishingDenominator { point, .. } => {
                Error::SingularCoefficient(format!("{name}({point})"))
            }
            other => other,
        };
        match name {
            "sqrt" => Ok(one(args)?.sqrt()),
            "Zu" => self.env.zeta(one(args)?).map_err(singular),
            "sn" | "cn" | "dn" => {
                let x = one(args)?;
                let t = self.env.triple(x).map_err(singular)?;
                Ok(match name {
                    "sn" => t.sn,
                    "cn" => t.cn,
                    _ => t.dn,
                })
            }
            _ => match name.parse::<AuxCode>() {
                Ok(code) => {
                    let x = one(args)?;
                    let t = self.env.triple(x).map_err(singular)?;
                    code.apply(&t, x).map_err(singular)
                }
                Err(_) => Err(Error::Semantic {
                    context: "coefficient".into(),
                    message: format!("unknown function `{name}`"),
                }),
            },
        }
    }
}

/// `expr := mul (('+' | '-') mul)*`
pub(crate) fn parse_expr(cur: &mut Cursor) -> Result<Expr> {
    let mut e = parse_mul(cur)?;
    loop {
        let op = if cur.eat_sym("+") {
            BinOp::Add
        } else if cur.eat_sym("-") {
            BinOp::Sub
        } else {
            return Ok(e);
        };
        e = Expr::bin(op, e, parse_mul(cur)?);
    }
}

fn parse_mul(cur: &mut Cursor) -> Result<Expr> {
    let mut e = parse_unary(cur)?;
    loop {
        let op = if cur.eat_sym("*") {
            BinOp::Mul
        } else if cur.eat_sym("/") {
            BinOp::Div
        } else {
            return Ok(e);
        };
        e = Expr::bin(op, e, parse_unary(cur)?);
    }
}

fn parse_unary(cur: &mut Cursor) -> Result<Expr> {
    if cur.eat_sym("-") {
        return Ok(parse_unary(cur)?.neg());
    }
    let base = parse_atom(cur)?;
    if cur.eat_sym("^") {
        return Ok(Expr::pow(base, parse_unary(cur)?));
    }
    Ok(base)
}

fn parse_atom(cur: &mut Cursor) -> Result<Expr> {
    match cur.peek().clone() {
        Tok::Number(x) => {
            cur.next();
            Ok(Expr::Num(x))
        }
        Tok::Sym("(") => {
            cur.next();
            let e = parse_expr(cur)?;
            cur.expect_sym(")")?;
            Ok(e)
        }
        Tok::Ident(name) => {
            cur.next();
            if !cur.is_sym("(") {
                return Ok(Expr::Var(name));
            }
            cur.next();
            match name.as_str() {
                "INT" => {
                    for (k, want) in ["f", "0", "T"].iter().enumerate() {
                        if k > 0 {
                            cur.expect_sym(",")?;
                        }
                        let ok = match cur.next() {
                            Tok::Ident(s) => s == *want,
                            Tok::Number(v) => *want == "0" && v == 0.0,
                            _ => false,
                        };
                        if !ok {
                            return Err(cur.error("INT(f,0,T)"));
                        }
                    }
                    cur.expect_sym(")")?;
                    Ok(Expr::Integral)
                }
                "sum" | "prod" | "prod_except" => {
                    let var = cur.expect_ident("loop variable")?;
                    cur.expect_sym(",")?;
                    let lo = parse_expr(cur)?;
                    cur.expect_sym(",")?;
                    let hi = parse_expr(cur)?;
                    cur.expect_sym(",")?;
                    let skip = if name == "prod_except" {
                        let k = parse_expr(cur)?;
                        cur.expect_sym(",")?;
                        Some(Box::new(k))
                    } else {
                        None
                    };
                    let body = parse_expr(cur)?;
                    cur.expect_sym(")")?;
                    let (lo, hi, body) = (Box::new(lo), Box::new(hi), Box::new(body));
                    Ok(if name == "sum" {
                        Expr::Sum { var, lo, hi, body }
                    } else {
                        Expr::Prod { var, lo, hi, skip, body }
                    })
                }
                _ => {
                    let mut args = vec![parse_expr(cur)?];
                    while cur.eat_sym(",") {
                        args.push(parse_expr(cur)?);
                    }
                    cur.expect_sym(")")?;
                    Ok(Expr::Call(name, args))
                }
            }
        }
        _ => Err(cur.error("number, name or `(`")),
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.prec(),
            Expr::Neg(_) => 3,
            Expr::Num(x) if *x < 0.0 => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.fmt_prec(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_prec(f, 3)
            }
            Expr::Bin(op, a, b) => {
                a.fmt_prec(f, op.prec())?;
                f.write_str(op.symbol())?;
                b.fmt_prec(f, op.prec() + 1)
            }
            Expr::Pow(a, b) => {
                a.fmt_prec(f, 5)?;
                f.write_str("^")?;
                b.fmt_prec(f, 3)
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")
            }
            Expr::Sum { var, lo, hi, body } => write!(f, "sum({var}, {lo}, {hi}, {body})"),
            Expr::Prod {
                var,
                lo,
                hi,
                skip: None,
                body,
            } => write!(f, "prod({var}, {lo}, {hi}, {body})"),
            Expr::Prod {
                var,
                lo,
                hi,
                skip: Some(k),
                body,
            } => write!(f, "prod_except({var}, {lo}, {hi}, {k}, {body})"),
            Expr::Integral => f.write_str("INT(f,0,T)"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ModulusContext;

    fn eval(text: &str, m: f64, params: Params) -> Result<Complex64> {
        let ctx = ModulusContext::new(m).unwrap();
        Expr::parse(text)?.eval(&EvalCtx::new(&ctx, params))
    }

    #[test]
    fn precedence_and_associativity() {
        let p = Params::new(3, 1);
        assert_eq!(eval("1 - 2 - 3", 0.5, p).unwrap().re, -4.0);
        assert_eq!(eval("2^3^2", 0.5, p).unwrap().re, 512.0);
        assert_eq!(eval("-2^2", 0.5, p).unwrap().re, -4.0);
        assert_eq!(eval("12/3/2", 0.5, p).unwrap().re, 2.0);
        assert_eq!(eval("2*-3", 0.5, p).unwrap().re, -6.0);
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "1 - (2 - 3)",
            "-(a + b)*cs(a)^2",
            "(1 - m)^(p/4)",
            "p*(dn(a) - cs(a)*Zu(a))",
            "prod_except(n, 1, l, k, cs(n*a) - cs(k*a))",
            "sum(k, 1, l, cs(k*a')^-2)",
            "p/(2*K)*(INT(f,0,T) + 2*g2*E)",
            "a'' - b'",
            "2^-1",
        ] {
            let e = Expr::parse(s).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{s} -> {e}");
        }
    }

    #[test]
    fn cs_squared_coefficient() {
        // -2cs²(a) at p = 4, r = 1 is -2cs²(K/2)
        let ctx = ModulusContext::new(0.5).unwrap();
        let v = Expr::parse("-2*cs(a)^2").unwrap().eval(&EvalCtx::new(&ctx, Params::new(4, 1))).unwrap();
        let t = ctx.sncndn_real(ctx.k / 2.0);
        assert!((v.re + 2.0 * (t.cn / t.sn).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn neighbour_constant_at_p_two() {
        // p(dn(a) - cs(a)Zu(a)) at p = 2 is 2√(1-m) since cs(K) = 0
        let m = 0.3;
        let v = eval("p*(dn(a) - cs(a)*Zu(a))", m, Params::new(2, 1)).unwrap();
        assert!((v.re - 2.0 * (1.0 - m).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn full_product_constant() {
        let v = eval("(1 - m)^(p/4)", 0.5, Params::new(4, 1)).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pole_of_coefficient_is_singular() {
        // cs(2K) has sn = 0 in the denominator
        let err = eval("cs(b)", 0.5, Params::new(2, 1)).unwrap_err();
        assert!(matches!(err, Error::SingularCoefficient(_)), "{err:?}");
        let err = eval("1/sn(b)", 0.5, Params::new(2, 1)).unwrap_err();
        assert!(matches!(err, Error::SingularCoefficient(_)), "{err:?}");
    }

    #[test]
    fn loops_and_bindings() {
        let ctx = ModulusContext::new(0.4).unwrap();
        let binds = vec![
            ("u".to_string(), Expr::parse("sum(n, 1, 3, n)").unwrap()),
            ("w".to_string(), Expr::parse("u*prod_except(n, 1, 4, 2, n)").unwrap()),
        ];
        let ctx = EvalCtx {
            env: &ctx,
            params: Params::new(3, 1),
            bindings: &binds,
            integral: None,
        };
        assert_eq!(Expr::parse("w").unwrap().eval(&ctx).unwrap().re, 72.0);
    }

    #[test]
    fn integral_token_uses_callback() {
        let ctx = ModulusContext::new(0.4).unwrap();
        let cb = || Ok(Complex64::new(2.5, 0.0));
        let ctx = EvalCtx {
            env: &ctx,
            params: Params::new(3, 1),
            bindings: &[],
            integral: Some(&cb),
        };
        assert_eq!(Expr::parse("2*INT(f,0,T)").unwrap().eval(&ctx).unwrap().re, 5.0);
    }

    #[test]
    fn mentions_follow_shift_arguments() {
        let e = Expr::parse("cs(a')*ns(b'')").unwrap();
        assert!(e.mentions('s') && e.mentions('t') && !e.mentions('r'));
    }

    #[test]
    fn non_integer_power_of_negative_base_is_refused() {
        assert!(matches!(eval("(-2)^(1/2)", 0.5, Params::new(3, 1)), Err(Error::Domain(_))));
    }
}
