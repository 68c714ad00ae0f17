use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::jacobi::AuxCode;

/// Master-identity family of a cyclic identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "MI-I")]
    MI1,
    #[serde(rename = "MI-II")]
    MI2,
    #[serde(rename = "MI-III")]
    MI3,
    #[serde(rename = "MI-IV")]
    MI4,
    #[serde(rename = "MI-I-alt")]
    MI1Alt,
    #[serde(rename = "MI-II-alt")]
    MI2Alt,
    #[serde(rename = "direct")]
    Direct,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::MI1,
        Family::MI2,
        Family::MI3,
        Family::MI4,
        Family::MI1Alt,
        Family::MI2Alt,
        Family::Direct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::MI1 => "MI-I",
            Family::MI2 => "MI-II",
            Family::MI3 => "MI-III",
            Family::MI4 => "MI-IV",
            Family::MI1Alt => "MI-I-alt",
            Family::MI2Alt => "MI-II-alt",
            Family::Direct => "direct",
        }
    }

    /// Family from the parity pair `(P, Q)` and the sign pattern.
    pub fn from_parity(parity: Parity, alternating: bool) -> Family {
        match (parity.p, parity.q, alternating) {
            (1, 0, false) => Family::MI1,
            (0, 0, false) => Family::MI2,
            (0, 1, false) => Family::MI3,
            (1, 1, false) => Family::MI4,
            (1, 0, true) => Family::MI1Alt,
            (0, 0, true) => Family::MI2Alt,
            _ => Family::Direct,
        }
    }

    pub fn is_alternating(self) -> bool {
        matches!(self, Family::MI1Alt | Family::MI2Alt)
    }

    /// Natural real period of the family's summands.
    pub fn period(self) -> PeriodKind {
        match self {
            Family::MI3 | Family::MI4 => PeriodKind::FourK,
            _ => PeriodKind::TwoK,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Semantic {
                context: "family".into(),
                message: format!("unknown family `{s}`"),
            })
    }
}

/// Real period `T` over which the `p` points are spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PeriodKind {
    #[serde(rename = "2K")]
    TwoK,
    #[serde(rename = "4K")]
    FourK,
}

impl PeriodKind {
    /// `T / K`.
    pub fn multiple(self) -> f64 {
        match self {
            PeriodKind::TwoK => 2.0,
            PeriodKind::FourK => 4.0,
        }
    }
}

impl fmt::Display for PeriodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeriodKind::TwoK => "2K",
            PeriodKind::FourK => "4K",
        })
    }
}

/// Uniform `Σ f(x_j)` or alternating `Σ (-1)^(j-1) f(x_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignPattern {
    Uniform,
    Alternating,
}

impl SignPattern {
    pub fn keyword(self) -> &'static str {
        match self {
            SignPattern::Uniform => "uniform",
            SignPattern::Alternating => "alt",
        }
    }
}

/// Function appearing in a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FnKind {
    Sn,
    Cn,
    Dn,
    Aux(AuxCode),
    Zeta,
}

impl FnKind {
    pub fn name(self) -> &'static str {
        match self {
            FnKind::Sn => "sn",
            FnKind::Cn => "cn",
            FnKind::Dn => "dn",
            FnKind::Aux(a) => a.name(),
            FnKind::Zeta => "Z",
        }
    }

    pub fn parse(s: &str) -> Option<FnKind> {
        match s {
            "sn" => Some(FnKind::Sn),
            "cn" => Some(FnKind::Cn),
            "dn" => Some(FnKind::Dn),
            "Z" => Some(FnKind::Zeta),
            other => other.parse::<AuxCode>().ok().map(FnKind::Aux),
        }
    }

    /// `(#dn + #cn, #sn + #cn)` contributed by one power of the function.
    /// A ratio contributes the counts of numerator plus denominator.
    pub fn counts(self) -> (u32, u32) {
        fn base(n: &str) -> (u32, u32) {
            match n {
                "sn" => (0, 1),
                "cn" => (1, 1),
                "dn" => (1, 0),
                _ => (0, 0),
            }
        }
        match self {
            FnKind::Sn | FnKind::Cn | FnKind::Dn => base(self.name()),
            FnKind::Aux(a) => {
                let (n, d) = a.ratio_names();
                let (x1, y1) = base(n);
                let (x2, y2) = base(d);
                (x1 + x2, y1 + y2)
            }
            FnKind::Zeta => (0, 0),
        }
    }
}

impl fmt::Display for FnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Integer shift in units of `T/p`: `constant + r·R + s·S + t·T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Shift {
    pub constant: i64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
}

impl Shift {
    pub const ZERO: Shift = Shift {
        constant: 0,
        r: 0,
        s: 0,
        t: 0,
    };

    pub fn is_zero(&self) -> bool {
        *self == Shift::ZERO
    }

    pub fn resolve(&self, p: &Params) -> i64 {
        self.constant + self.r * p.r + self.s * p.s + self.t * p.t
    }

    pub fn scaled(&self, k: i64) -> Shift {
        Shift {
            constant: self.constant * k,
            r: self.r * k,
            s: self.s * k,
            t: self.t * k,
        }
    }

    pub fn uses(&self, var: char) -> bool {
        match var {
            'r' => self.r != 0,
            's' => self.s != 0,
            't' => self.t != 0,
            _ => false,
        }
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (coef, name) in [(self.r, "r"), (self.s, "s"), (self.t, "t"), (self.constant, "")] {
            if coef == 0 {
                continue;
            }
            f.write_str(if coef < 0 { "-" } else { "+" })?;
            let a = coef.abs();
            if name.is_empty() || a != 1 {
                write!(f, "{a}")?;
            }
            f.write_str(name)?;
        }
        Ok(())
    }
}

/// One factor `fn(x + shift·T/p)^power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermFactor {
    pub kind: FnKind,
    pub shift: Shift,
    pub power: u32,
}

/// Length of a chain factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainLen {
    Lit(u32),
    /// The grid parameter `l`.
    L,
    /// The number of points `p`.
    P,
}

impl fmt::Display for ChainLen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainLen::Lit(n) => write!(f, "{n}"),
            ChainLen::L => f.write_str("l"),
            ChainLen::P => f.write_str("p"),
        }
    }
}

/// A factor as written in a catalog: either a single function or a run
/// `fn[0]*fn[step]*...*fn[(len-1)·step]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    Single(TermFactor),
    Chain { kind: FnKind, len: ChainLen, step: Shift },
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Single(t) => {
                write!(f, "{}[{}]", t.kind, t.shift)?;
                if t.power != 1 {
                    write!(f, "^{}", t.power)?;
                }
                Ok(())
            }
            Factor::Chain { kind, len, step } => write!(f, "chain({kind}, {len}, {step})"),
        }
    }
}

/// Values of the integer parameters of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub p: i64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub l: i64,
}

impl Params {
    pub fn new(p: i64, r: i64) -> Self {
        Params { p, r, s: 0, t: 0, l: 0 }
    }

    pub fn with_s(mut self, s: i64) -> Self {
        self.s = s;
        self
    }

    pub fn with_t(mut self, t: i64) -> Self {
        self.t = t;
        self
    }

    pub fn with_l(mut self, l: i64) -> Self {
        self.l = l;
        self
    }

    pub fn get(&self, name: &str) -> Option<i64> {
        match name {
            "p" => Some(self.p),
            "r" => Some(self.r),
            "s" => Some(self.s),
            "t" => Some(self.t),
            "l" => Some(self.l),
            _ => None,
        }
    }
}

/// Product of factors summed cyclically with a sign pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTerm {
    pub factors: Vec<Factor>,
    pub sign_pattern: SignPattern,
}

impl CyclicTerm {
    pub fn new(factors: Vec<Factor>, sign_pattern: SignPattern) -> Self {
        CyclicTerm { factors, sign_pattern }
    }

    /// Factors with chains unrolled for the given parameters.
    pub fn expand(&self, params: &Params) -> Result<Vec<TermFactor>> {
        let mut out = Vec::new();
        for f in &self.factors {
            match *f {
                Factor::Single(t) => out.push(t),
                Factor::Chain { kind, len, step } => {
                    let n = match len {
                        ChainLen::Lit(n) => n as i64,
                        ChainLen::L => params.l,
                        ChainLen::P => params.p,
                    };
                    if n < 1 {
                        return Err(Error::Constraint(format!("chain length {n} must be positive")));
                    }
                    for k in 0..n {
                        out.push(TermFactor {
                            kind,
                            shift: step.scaled(k),
                            power: 1,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(P, Q)` parity of the product.
    pub fn parity(&self, params: &Params) -> Result<Parity> {
        let mut a = 0;
        let mut b = 0;
        for f in self.expand(params)? {
            let (x, y) = f.kind.counts();
            a += x * f.power;
            b += y * f.power;
        }
        Ok(Parity { p: (a % 2) as u8, q: (b % 2) as u8 })
    }

    pub fn has_zeta(&self) -> bool {
        self.factors.iter().any(|f| match f {
            Factor::Single(t) => t.kind == FnKind::Zeta,
            Factor::Chain { kind, .. } => *kind == FnKind::Zeta,
        })
    }

    pub fn all_unshifted(&self) -> bool {
        self.factors.iter().all(|f| match f {
            Factor::Single(t) => t.shift.is_zero(),
            Factor::Chain { .. } => false,
        })
    }

    pub fn uses(&self, var: char) -> bool {
        self.factors.iter().any(|f| match f {
            Factor::Single(t) => t.shift.uses(var),
            Factor::Chain { step, len, .. } => step.uses(var) || (var == 'l' && *len == ChainLen::L),
        })
    }
}

impl fmt::Display for CyclicTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sum[{}] ", self.sign_pattern.keyword())?;
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{fac}")?;
        }
        Ok(())
    }
}

/// `(P, Q)` with `f(z + 2iK') = (-1)^P f(z)` and `f(z + 2K) = (-1)^Q f(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Parity {
    pub p: u8,
    pub q: u8,
}

/// One term of either side: a coefficient times a cyclic sum, or a bare
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SideTerm {
    pub coeff: Expr,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    Sum(CyclicTerm),
    Const,
}

impl Basis {
    /// Tag such as `d^2`, `c*s`, `Z` or `1`.
    pub fn tag(&self) -> String {
        match self {
            Basis::Const => "1".into(),
            Basis::Sum(t) => {
                let mut parts = Vec::new();
                for f in &t.factors {
                    match f {
                        Factor::Single(tf) => {
                            let n = match tf.kind {
                                FnKind::Sn => "s".to_string(),
                                FnKind::Cn => "c".to_string(),
                                FnKind::Dn => "d".to_string(),
                                k => k.name().to_string(),
                            };
                            let sh = if tf.shift.is_zero() { String::new() } else { format!("[{}]", tf.shift) };
                            if tf.power == 1 {
                                parts.push(format!("{n}{sh}"));
                            } else {
                                parts.push(format!("{n}{sh}^{}", tf.power));
                            }
                        }
                        other => parts.push(other.to_string()),
                    }
                }
                parts.join("*")
            }
        }
    }
}

/// A validity predicate over the integer parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Odd(String),
    Even(String),
    Compare(Expr, CmpOp, Expr),
    Coprime(Expr, Expr),
    Distinct(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Odd(v) => write!(f, "{v} odd"),
            Constraint::Even(v) => write!(f, "{v} even"),
            Constraint::Compare(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Constraint::Coprime(a, b) => write!(f, "coprime({a}, {b})"),
            Constraint::Distinct(vs) => write!(f, "distinct({})", vs.join(", ")),
        }
    }
}

impl Constraint {
    pub fn check(&self, params: &Params) -> Result<bool> {
        let int = |e: &Expr| e.eval_integer(params);
        Ok(match self {
            Constraint::Odd(v) => lookup(v, params)?.rem_euclid(2) == 1,
            Constraint::Even(v) => lookup(v, params)?.rem_euclid(2) == 0,
            Constraint::Compare(a, op, b) => op.holds(int(a)? as f64, int(b)? as f64),
            Constraint::Coprime(a, b) => gcd(int(a)?, int(b)?) == 1,
            Constraint::Distinct(vs) => {
                let vals = vs.iter().map(|v| lookup(v, params)).collect::<Result<Vec<_>>>()?;
                (0..vals.len()).all(|i| (i + 1..vals.len()).all(|j| vals[i] != vals[j]))
            }
        })
    }
}

fn lookup(v: &str, params: &Params) -> Result<i64> {
    params.get(v).ok_or_else(|| Error::Semantic {
        context: "constraint".into(),
        message: format!("unknown parameter `{v}`"),
    })
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Machine-readable cyclic identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentitySpec {
    pub id: String,
    pub family: Family,
    pub period: PeriodKind,
    pub constraints: Vec<Constraint>,
    /// Values of `l` for identities written for a general run length.
    pub l_values: Vec<i64>,
    /// Admitted only after a brute-force check at small parameters.
    pub verify_then_trust: bool,
    /// Named sub-expressions usable in coefficients.
    pub bindings: Vec<(String, Expr)>,
    pub lhs: Vec<SideTerm>,
    pub rhs: Vec<SideTerm>,
}

impl IdentitySpec {
    /// Sign pattern shared by all sums in the identity.
    pub fn sign_pattern(&self) -> SignPattern {
        for t in self.lhs.iter().chain(&self.rhs) {
            if let Basis::Sum(c) = &t.basis {
                return c.sign_pattern;
            }
        }
        SignPattern::Uniform
    }

    /// Checks the constraints, returning a constraint error naming the
    /// first one that fails.
    pub fn check_constraints(&self, params: &Params) -> Result<()> {
        if self.sign_pattern() == SignPattern::Alternating && params.p % 2 != 0 {
            return Err(Error::Constraint(format!(
                "{}: alternating sums need even p, got p = {}",
                self.id, params.p
            )));
        }
        for c in &self.constraints {
            if !c.check(params)? {
                return Err(Error::Constraint(format!("{}: `{c}` fails for {params:?}", self.id)));
            }
        }
        Ok(())
    }

    pub fn uses(&self, var: char) -> bool {
        let in_terms = self.lhs.iter().chain(&self.rhs).any(|t| {
            let b = match &t.basis {
                Basis::Sum(c) => c.uses(var),
                Basis::Const => false,
            };
            b || t.coeff.mentions(var)
        });
        in_terms || self.bindings.iter().any(|(_, e)| e.mentions(var))
    }

    /// Parity class of the left-hand side at the given parameters, checking
    /// that all LHS products agree and that no basis sum breaks it.
    pub fn parity(&self, params: &Params) -> Result<Parity> {
        let mut parity = None;
        for t in &self.lhs {
            if let Basis::Sum(c) = &t.basis {
                let pq = c.parity(params)?;
                match parity {
                    None => parity = Some(pq),
                    Some(prev) if prev != pq => {
                        return Err(Error::Semantic {
                            context: self.id.clone(),
                            message: "left-hand products mix parity classes".into(),
                        })
                    }
                    _ => {}
                }
            }
        }
        let parity = parity.ok_or_else(|| Error::Semantic {
            context: self.id.clone(),
            message: "left-hand side has no cyclic sum".into(),
        })?;
        for t in &self.rhs {
            if let Basis::Sum(c) = &t.basis {
                if c.has_zeta() {
                    continue;
                }
                if c.parity(params)? != parity {
                    return Err(Error::Semantic {
                        context: self.id.clone(),
                        message: format!("basis `{}` lies outside the parity class of the left side", t.basis.tag()),
                    });
                }
            }
        }
        Ok(parity)
    }

    /// Family implied by the parity, compared with the declared one.
    pub fn check_family(&self, params: &Params) -> Result<()> {
        if self.family == Family::Direct {
            return Ok(());
        }
        let parity = self.parity(params)?;
        let computed = Family::from_parity(parity, self.sign_pattern() == SignPattern::Alternating);
        if computed != self.family {
            return Err(Error::FamilyMismatch {
                declared: self.family.to_string(),
                computed: computed.to_string(),
            });
        }
        Ok(())
    }
}

/// A parsed catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogFile {
    pub version: u32,
    pub tolerance: f64,
    pub identities: Vec<IdentitySpec>,
}

impl Default for CatalogFile {
    fn default() -> Self {
        CatalogFile {
            version: 1,
            tolerance: 1e-9,
            identities: Vec::new(),
        }
    }
}

impl CatalogFile {
    pub fn get(&self, id: &str) -> Option<&IdentitySpec> {
        self.identities.iter().find(|s| s.id == id)
    }
}
