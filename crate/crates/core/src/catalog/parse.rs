use super::expr::{parse_expr, Expr, VARIABLES};
use super::lex::{Cursor, Tok};
use super::model::*;
use crate::error::{Error, Result};

/// Parses a catalog file. The grammar is documented in `docs/catalog.ebnf`.
pub fn parse_catalog(text: &str) -> Result<CatalogFile> {
    let mut cat = CatalogFile::default();
    let mut block: Option<Block> = None;
    let mut inline = 0usize;
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let Some(start) = body.find(|c: char| !c.is_whitespace()) else {
            continue;
        };
        let rest = &body[start..];
        let word_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let word = &rest[..word_end];
        let col = start + 1;
        let after = &rest[word_end..];
        let after_col = col + word_end;
        match word {
            "catalog" => {
                if seen_content {
                    return Err(parse_err(line, col, "`identity` or `sum`", "`catalog` header after content"));
                }
                parse_header(after, line, after_col, &mut cat)?;
            }
            "identity" => {
                if let Some(b) = block.take() {
                    cat.identities.push(b.finish()?);
                }
                block = Some(Block::open(after, line, after_col)?);
            }
            "lhs:" | "rhs:" | "where" => {
                let Some(b) = block.as_mut() else {
                    return Err(parse_err(line, col, "`identity` header", &format!("`{word}`")));
                };
                let mut cur = Cursor::from_str(after, line, after_col)?;
                match word {
                    "lhs:" => {
                        let terms = parse_side(&mut cur, Side::Left)?;
                        cur.expect_end()?;
                        b.lhs.extend(terms);
                    }
                    "rhs:" => {
                        let terms = parse_side(&mut cur, Side::Right)?;
                        cur.expect_end()?;
                        b.rhs.extend(terms);
                    }
                    _ => {
                        let name = cur.expect_ident("binding name")?;
                        if VARIABLES.contains(&name.as_str()) || b.bindings.iter().any(|(n, _)| *n == name) {
                            return Err(Error::Semantic {
                                context: b.id.clone(),
                                message: format!("`{name}` is already defined"),
                            });
                        }
                        cur.expect_sym("=")?;
                        let e = parse_expr(&mut cur)?;
                        cur.expect_end()?;
                        b.bindings.push((name, e));
                    }
                }
            }
            "sum" => {
                if let Some(b) = block.take() {
                    cat.identities.push(b.finish()?);
                }
                inline += 1;
                cat.identities.push(parse_shorthand(rest, line, col, inline)?);
            }
            other => {
                return Err(parse_err(
                    line,
                    col,
                    "`catalog`, `identity`, `lhs:`, `rhs:`, `where` or `sum`",
                    &format!("`{other}`"),
                ))
            }
        }
        seen_content = true;
    }
    if let Some(b) = block.take() {
        cat.identities.push(b.finish()?);
    }
    for (i, s) in cat.identities.iter().enumerate() {
        if cat.identities[..i].iter().any(|o| o.id == s.id) {
            return Err(Error::Semantic {
                context: s.id.clone(),
                message: "duplicate identity id".into(),
            });
        }
    }
    Ok(cat)
}

fn parse_err(line: usize, column: usize, expected: &str, found: &str) -> Error {
    Error::Parse {
        line,
        column,
        expected: expected.into(),
        found: found.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// `key=value` fields, values optionally double-quoted. Returns
/// `(key, value, column of value)`; a field without `=` has an empty key.
fn split_fields(text: &str, line: usize, col0: usize) -> Result<Vec<(String, String, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '=' {
            i += 1;
        }
        let word: String = chars[start..i].iter().collect();
        if i >= chars.len() || chars[i] != '=' {
            out.push((String::new(), word, col0 + start));
            continue;
        }
        i += 1;
        let mut vcol = col0 + i;
        let value: String = if i < chars.len() && chars[i] == '"' {
            let vs = i + 1;
            vcol += 1;
            let Some(len) = chars[vs..].iter().position(|&c| c == '"') else {
                return Err(parse_err(line, vcol, "closing `\"`", "end of line"));
            };
            i = vs + len + 1;
            chars[vs..vs + len].iter().collect()
        } else {
            let vs = i;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            chars[vs..i].iter().collect()
        };
        out.push((word, value, vcol));
    }
    Ok(out)
}

fn parse_header(text: &str, line: usize, col0: usize, cat: &mut CatalogFile) -> Result<()> {
    for (key, value, col) in split_fields(text, line, col0)? {
        match key.as_str() {
            "version" => {
                cat.version = value
                    .parse()
                    .map_err(|_| parse_err(line, col, "integer version", &format!("`{value}`")))?;
                if cat.version != 1 {
                    return Err(parse_err(line, col, "version 1", &format!("`{value}`")));
                }
            }
            "tol" => {
                cat.tolerance = value
                    .parse::<f64>()
                    .ok()
                    .filter(|t| *t > 0.0)
                    .ok_or_else(|| parse_err(line, col, "positive tolerance", &format!("`{value}`")))?;
            }
            _ => return Err(parse_err(line, col, "`version=` or `tol=`", &format!("`{key}{value}`"))),
        }
    }
    Ok(())
}

struct Block {
    id: String,
    line: usize,
    family: Family,
    period: PeriodKind,
    constraints: Vec<Constraint>,
    l_values: Vec<i64>,
    vtt: bool,
    bindings: Vec<(String, Expr)>,
    lhs: Vec<SideTerm>,
    rhs: Vec<SideTerm>,
}

impl Block {
    fn open(text: &str, line: usize, col0: usize) -> Result<Block> {
        let fields = split_fields(text, line, col0)?;
        let mut it = fields.into_iter();
        let (id, col) = match it.next() {
            Some((k, v, c)) if k.is_empty() => (v, c),
            Some((k, _, c)) => return Err(parse_err(line, c, "identity id", &format!("`{k}=`"))),
            None => return Err(parse_err(line, col0, "identity id", "end of line")),
        };
        if !id.chars().all(|c| c.is_ascii_alphanumeric() || ".-_".contains(c)) {
            return Err(parse_err(line, col, "id made of letters, digits, `.`, `-`, `_`", &format!("`{id}`")));
        }
        let mut family = None;
        let mut period = None;
        let mut constraints = Vec::new();
        let mut l_values = Vec::new();
        let mut vtt = false;
        for (key, value, col) in it {
            match key.as_str() {
                "family" => {
                    family = Some(value.parse::<Family>().map_err(|_| {
                        parse_err(line, col, "family MI-I, MI-II, MI-III, MI-IV, MI-I-alt, MI-II-alt or direct", &format!("`{value}`"))
                    })?)
                }
                "T" => {
                    period = Some(match value.as_str() {
                        "2K" => PeriodKind::TwoK,
                        "4K" => PeriodKind::FourK,
                        _ => return Err(parse_err(line, col, "`2K` or `4K`", &format!("`{value}`"))),
                    })
                }
                "constraints" => constraints = parse_constraints(&value, line, col)?,
                "l" => {
                    for part in value.split(',') {
                        l_values.push(
                            part.trim()
                                .parse::<i64>()
                                .map_err(|_| parse_err(line, col, "comma-separated integers", &format!("`{value}`")))?,
                        );
                    }
                }
                "flags" => {
                    for flag in value.split(',') {
                        match flag {
                            "vtt" => vtt = true,
                            _ => return Err(parse_err(line, col, "flag `vtt`", &format!("`{flag}`"))),
                        }
                    }
                }
                _ => {
                    return Err(parse_err(
                        line,
                        col,
                        "`family=`, `T=`, `constraints=`, `l=` or `flags=`",
                        &format!("`{key}`"),
                    ))
                }
            }
        }
        let family = family.ok_or_else(|| parse_err(line, col0 + text.len(), "`family=`", "end of line"))?;
        Ok(Block {
            id,
            line,
            family,
            period: period.unwrap_or(family.period()),
            constraints,
            l_values,
            vtt,
            bindings: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
        })
    }

    fn finish(self) -> Result<IdentitySpec> {
        if self.lhs.is_empty() || self.rhs.is_empty() {
            return Err(Error::Semantic {
                context: self.id,
                message: format!("identity opened on line {} needs both `lhs:` and `rhs:`", self.line),
            });
        }
        Ok(IdentitySpec {
            id: self.id,
            family: self.family,
            period: self.period,
            constraints: self.constraints,
            l_values: self.l_values,
            verify_then_trust: self.vtt,
            bindings: self.bindings,
            lhs: self.lhs,
            rhs: self.rhs,
        })
    }
}

fn parse_constraints(text: &str, line: usize, col0: usize) -> Result<Vec<Constraint>> {
    let mut cur = Cursor::from_str(text, line, col0)?;
    let mut out = Vec::new();
    if cur.at_end() {
        return Ok(out);
    }
    loop {
        out.push(parse_constraint(&mut cur)?);
        if cur.at_end() {
            return Ok(out);
        }
        cur.expect_sym(",")?;
    }
}

fn parse_constraint(cur: &mut Cursor) -> Result<Constraint> {
    if let (Tok::Ident(name), Tok::Ident(kw)) = (cur.peek().clone(), cur.peek_at(1).clone()) {
        if kw == "odd" || kw == "even" {
            cur.next();
            cur.next();
            return Ok(if kw == "odd" { Constraint::Odd(name) } else { Constraint::Even(name) });
        }
    }
    if cur.is_ident("coprime") && *cur.peek_at(1) == Tok::Sym("(") {
        cur.next();
        cur.next();
        let a = parse_expr(cur)?;
        cur.expect_sym(",")?;
        let b = parse_expr(cur)?;
        cur.expect_sym(")")?;
        return Ok(Constraint::Coprime(a, b));
    }
    if cur.is_ident("distinct") && *cur.peek_at(1) == Tok::Sym("(") {
        cur.next();
        cur.next();
        let mut names = vec![cur.expect_ident("parameter name")?];
        while cur.eat_sym(",") {
            names.push(cur.expect_ident("parameter name")?);
        }
        cur.expect_sym(")")?;
        return Ok(Constraint::Distinct(names));
    }
    let a = parse_expr(cur)?;
    let op = match cur.peek() {
        Tok::Sym("<") => CmpOp::Lt,
        Tok::Sym("<=") => CmpOp::Le,
        Tok::Sym(">") => CmpOp::Gt,
        Tok::Sym(">=") => CmpOp::Ge,
        Tok::Sym("==") => CmpOp::Eq,
        Tok::Sym("!=") => CmpOp::Ne,
        _ => return Err(cur.error("comparison, `odd` or `even`")),
    };
    cur.next();
    let b = parse_expr(cur)?;
    Ok(Constraint::Compare(a, op, b))
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

/// `term (('+' | '-') term)*`, stopping at end of line or `==`.
fn parse_side(cur: &mut Cursor, side: Side) -> Result<Vec<SideTerm>> {
    let mut out = Vec::new();
    loop {
        let neg = if out.is_empty() {
            if cur.eat_sym("-") {
                true
            } else {
                cur.eat_sym("+");
                false
            }
        } else if cur.eat_sym("+") {
            false
        } else if cur.eat_sym("-") {
            true
        } else if cur.at_end() || cur.is_sym("==") {
            return Ok(out);
        } else {
            return Err(cur.error("`+`, `-` or end of line"));
        };
        let coeff = if cur.eat_sym("{") {
            let e = parse_expr(cur)?;
            cur.expect_sym("}")?;
            cur.eat_sym("*");
            e
        } else {
            Expr::Num(1.0)
        };
        let coeff = if neg { coeff.neg() } else { coeff };
        let basis = if cur.is_ident("sum") {
            cur.next();
            Basis::Sum(parse_cyclic(cur, side)?)
        } else if cur.is_ident("const") {
            cur.next();
            Basis::Const
        } else {
            return Err(cur.error("`sum` or `const`"));
        };
        if side == Side::Left && basis == Basis::Const {
            return Err(Error::Semantic {
                context: "left-hand side".into(),
                message: "constant terms belong on the right-hand side".into(),
            });
        }
        out.push(SideTerm { coeff, basis });
    }
}

fn parse_cyclic(cur: &mut Cursor, side: Side) -> Result<CyclicTerm> {
    let pattern = if cur.eat_sym("[") {
        let p = match cur.expect_ident("`uniform` or `alt`")?.as_str() {
            "uniform" => SignPattern::Uniform,
            "alt" => SignPattern::Alternating,
            _ => return Err(cur.error("`uniform` or `alt`")),
        };
        cur.expect_sym("]")?;
        p
    } else {
        SignPattern::Uniform
    };
    let mut factors = vec![parse_factor(cur)?];
    while cur.eat_sym("*") {
        factors.push(parse_factor(cur)?);
    }
    let term = CyclicTerm::new(factors, pattern);
    if side == Side::Left && term.has_zeta() {
        return Err(Error::Semantic {
            context: "left-hand side".into(),
            message: "Z may only appear in right-hand basis sums".into(),
        });
    }
    Ok(term)
}

const FN_EXPECTED: &str = "function sn, cn, dn, Z, nd, cd, sd, ns, cs, ds, nc, dc or sc";

fn parse_fn(cur: &mut Cursor) -> Result<FnKind> {
    match cur.peek().clone() {
        Tok::Ident(name) => match FnKind::parse(&name) {
            Some(k) => {
                cur.next();
                Ok(k)
            }
            None => Err(cur.error(FN_EXPECTED)),
        },
        _ => Err(cur.error(FN_EXPECTED)),
    }
}

fn parse_factor(cur: &mut Cursor) -> Result<Factor> {
    if cur.is_ident("chain") {
        cur.next();
        cur.expect_sym("(")?;
        let kind = parse_fn(cur)?;
        cur.expect_sym(",")?;
        let len = match cur.peek().clone() {
            Tok::Ident(s) if s == "l" => ChainLen::L,
            Tok::Ident(s) if s == "p" => ChainLen::P,
            Tok::Number(v) if v.fract() == 0.0 && v >= 1.0 => ChainLen::Lit(v as u32),
            _ => return Err(cur.error("chain length: positive integer, `l` or `p`")),
        };
        cur.next();
        cur.expect_sym(",")?;
        let step = parse_shift(cur, ")")?;
        cur.expect_sym(")")?;
        return Ok(Factor::Chain { kind, len, step });
    }
    let kind = parse_fn(cur)?;
    cur.expect_sym("[")?;
    let shift = parse_shift(cur, "]")?;
    cur.expect_sym("]")?;
    let power = if cur.eat_sym("^") {
        let n = cur.expect_int("positive integer power")?;
        if n < 1 {
            return Err(cur.error("positive integer power"));
        }
        n as u32
    } else {
        1
    };
    Ok(Factor::Single(TermFactor { kind, shift, power }))
}

const SHIFT_EXPECTED: &str = "integer or shift symbol r, s, t";

/// `('+'|'-')? item (('+'|'-') item)*` with `item := int? (r|s|t)?`.
fn parse_shift(cur: &mut Cursor, close: &str) -> Result<Shift> {
    let mut sh = Shift::ZERO;
    let mut first = true;
    loop {
        if !first && cur.is_sym(close) {
            return Ok(sh);
        }
        let sign = if cur.eat_sym("+") {
            1
        } else if cur.eat_sym("-") {
            -1
        } else if first {
            1
        } else {
            return Err(cur.error(&format!("`+`, `-` or `{close}`")));
        };
        first = false;
        let n = match *cur.peek() {
            Tok::Number(v) if v.fract() == 0.0 && v >= 0.0 => {
                cur.next();
                Some(v as i64)
            }
            _ => None,
        };
        match cur.peek().clone() {
            Tok::Ident(sym) => {
                let slot = match sym.as_str() {
                    "r" => &mut sh.r,
                    "s" => &mut sh.s,
                    "t" => &mut sh.t,
                    _ => return Err(cur.error(SHIFT_EXPECTED)),
                };
                *slot += sign * n.unwrap_or(1);
                cur.next();
            }
            _ => match n {
                Some(n) => sh.constant += sign * n,
                None => return Err(cur.error(SHIFT_EXPECTED)),
            },
        }
    }
}

/// `sum <product> == <rhs>` where `<rhs>` is either a list of terms or
/// `const: <expr>`.
fn parse_shorthand(text: &str, line: usize, col: usize, n: usize) -> Result<IdentitySpec> {
    let mut cur = Cursor::from_str(text, line, col)?;
    let lhs = parse_side(&mut cur, Side::Left)?;
    cur.expect_sym("==")?;
    let rhs = if cur.is_ident("const") && *cur.peek_at(1) == Tok::Sym(":") {
        cur.next();
        cur.next();
        vec![SideTerm {
            coeff: parse_expr(&mut cur)?,
            basis: Basis::Const,
        }]
    } else {
        parse_side(&mut cur, Side::Right)?
    };
    cur.expect_end()?;
    let id = format!("inline.{n}");
    let mut spec = IdentitySpec {
        id,
        family: Family::Direct,
        period: PeriodKind::TwoK,
        constraints: vec![Constraint::Coprime(Expr::var("r"), Expr::var("p"))],
        l_values: Vec::new(),
        verify_then_trust: false,
        bindings: Vec::new(),
        lhs,
        rhs,
    };
    let probe = Params {
        p: 3,
        r: 1,
        s: 2,
        t: 3,
        l: 3,
    };
    let parity = spec.parity(&probe)?;
    spec.family = Family::from_parity(parity, spec.sign_pattern() == SignPattern::Alternating);
    spec.period = spec.family.period();
    Ok(spec)
}

/// Parses a single product such as `dn[0]^2*dn[+1]^2`, as accepted on the
/// command line.
pub fn parse_product(text: &str) -> Result<CyclicTerm> {
    let mut cur = Cursor::from_str(text, 1, 1)?;
    let pattern = if cur.is_ident("sum") {
        cur.next();
        None
    } else {
        Some(SignPattern::Uniform)
    };
    let term = match pattern {
        None => parse_cyclic(&mut cur, Side::Left)?,
        Some(p) => {
            let mut factors = vec![parse_factor(&mut cur)?];
            while cur.eat_sym("*") {
                factors.push(parse_factor(&mut cur)?);
            }
            CyclicTerm::new(factors, p)
        }
    };
    cur.expect_end()?;
    if term.has_zeta() {
        return Err(Error::Semantic {
            context: text.into(),
            message: "Z may only appear in right-hand basis sums".into(),
        });
    }
    Ok(term)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_catalog_is_valid() {
        let cat = parse_catalog("catalog version=1 tol=1e-9\n").unwrap();
        assert!(cat.identities.is_empty());
        assert!(parse_catalog("").unwrap().identities.is_empty());
    }

    #[test]
    fn unknown_shift_symbol_names_the_allowed_ones() {
        let err = parse_catalog("sum dn[0]*dn[+q] == const: 1").unwrap_err();
        match err {
            Error::Parse { line, expected, .. } => {
                assert_eq!(line, 1);
                for s in ["r", "s", "t"] {
                    assert!(expected.contains(s), "{expected}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zeta_inside_left_product_is_refused() {
        let text = "identity x family=MI-II T=2K\n  lhs: {1} * sum Z[0]*dn[+1]\n  rhs: {0} * const\n";
        assert!(matches!(parse_catalog(text), Err(Error::Semantic { .. })));
    }

    #[test]
    fn duplicate_ids_are_refused() {
        let block = "identity x family=MI-II T=2K\n  lhs: {1} * sum dn[0]^2\n  rhs: {1} * const\n";
        let err = parse_catalog(&format!("{block}{block}")).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn error_column_points_at_token() {
        let err = parse_catalog("identity x family=MI-II T=3K\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (1, 27)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# corpus\ncatalog version=1 tol=1e-9\n\nsum dn[0]*dn[+r] == const: 1 # trailing\n";
        let cat = parse_catalog(text).unwrap();
        assert_eq!(cat.identities.len(), 1);
        assert_eq!(cat.identities[0].id, "inline.1");
    }

    #[test]
    fn chain_expands_to_consecutive_shifts() {
        let t = parse_product("chain(dn, 3, r)").unwrap();
        let f = t.expand(&Params::new(7, 2)).unwrap();
        let shifts: Vec<i64> = f.iter().map(|x| x.shift.resolve(&Params::new(7, 2))).collect();
        assert_eq!(shifts, vec![0, 2, 4]);
    }
}
