//! Canonical text for field elements and field descriptors.
//!
//! Elements: `t1^2*t2 + t1 + 1`, fractions `(num)/(den)`, coefficients of
//! GF(2^k) other than 1 as `0b...` bitstrings, extension coordinates as
//! `a + (b)*sqrt(g)`. Descriptors: `gf(2) vars t1,t2 adjoin t1`.

use super::gf2k::Gf2k;
use super::poly::{Mono, Poly};
use super::ratfunc::RatFunc;
use super::{Field, FieldElem, FieldError};

pub fn render_poly(f: &Field, p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::with_capacity(p.len());
    for &(m, c) in p.terms() {
        let mut factors: Vec<String> = Vec::new();
        if c != 1 {
            factors.push(format!("{c:#b}"));
        }
        for (i, name) in f.vars().iter().enumerate() {
            match m.exp(i) {
                0 => {}
                1 => factors.push(name.clone()),
                e => factors.push(format!("{name}^{e}")),
            }
        }
        if factors.is_empty() {
            factors.push("1".into());
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

fn render_ratfunc(f: &Field, r: &RatFunc) -> String {
    if r.is_poly() {
        render_poly(f, r.num())
    } else {
        format!("({})/({})", render_poly(f, r.num()), render_poly(f, &r.den()))
    }
}

pub fn render_elem(f: &Field, x: &FieldElem) -> String {
    render_at(f, f.depth(), x)
}

fn render_at(f: &Field, depth: usize, x: &FieldElem) -> String {
    match x {
        FieldElem::Base(r) => render_ratfunc(f, r),
        FieldElem::Ext(p) => {
            let root = format!("sqrt({})", render_at(f, depth - 1, f.gamma(depth - 1)));
            let mut parts = Vec::new();
            if !p[0].is_zero() {
                parts.push(render_at(f, depth - 1, &p[0]));
            }
            if !p[1].is_zero() {
                if p[1].is_one() {
                    parts.push(root);
                } else {
                    parts.push(format!("({})*{}", render_at(f, depth - 1, &p[1]), root));
                }
            }
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" + ")
            }
        }
    }
}

pub fn render_descriptor(f: &Field) -> String {
    let k = f.base();
    let mut s = if k.is_prime() {
        "gf(2)".to_string()
    } else {
        format!("gf(2^{}, {:#b})", k.degree(), k.modulus())
    };
    if f.nvars() > 0 {
        s.push_str(" vars ");
        s.push_str(&f.vars().join(","));
    }
    for j in 0..f.depth() {
        let stage = f.ancestor(j);
        s.push_str(" adjoin ");
        s.push_str(&render_elem(&stage, f.gamma(j)));
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(u64),
    Bits(u64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, FieldError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '0' && i + 1 < chars.len() && chars[i + 1] == 'b' {
            let start = i + 2;
            let mut j = start;
            while j < chars.len() && (chars[j] == '0' || chars[j] == '1') {
                j += 1;
            }
            if j == start || j - start > 64 {
                return Err(FieldError::Parse { col, msg: "malformed bit literal".into() });
            }
            let bits: String = chars[start..j].iter().collect();
            out.push((col, Tok::Bits(u64::from_str_radix(&bits, 2).expect("binary digits"))));
            i = j;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let v = digits
                .parse::<u64>()
                .map_err(|_| FieldError::Parse { col, msg: "integer too large".into() })?;
            out.push((col, Tok::Num(v)));
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            out.push((col, Tok::Ident(chars[i..j].iter().collect())));
            i = j;
        } else if "+-*/^()".contains(c) {
            out.push((col, Tok::Op(c)));
            i += 1;
        } else {
            return Err(FieldError::Parse { col, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    f: &'a Field,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FieldError> {
        Err(FieldError::Parse { col: self.col(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FieldElem, FieldError> {
        // a leading sign is harmless in characteristic 2
        if !self.eat('-') {
            self.eat('+');
        }
        let mut acc = self.term()?;
        while self.eat('+') || self.eat('-') {
            let t = self.term()?;
            acc = self.f.add(&acc, &t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<FieldElem, FieldError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                let t = self.power()?;
                acc = self.f.mul(&acc, &t);
            } else if self.eat('/') {
                let col = self.col();
                let t = self.power()?;
                acc = self
                    .f
                    .div(&acc, &t)
                    .map_err(|_| FieldError::Parse { col, msg: "division by zero".into() })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<FieldElem, FieldError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let col = self.col();
        let e = match self.peek() {
            Some(Tok::Num(n)) => *n,
            _ => return self.err("expected exponent"),
        };
        self.pos += 1;
        let p = self.f.pow(&base, e);
        if neg {
            self.f
                .inv(&p)
                .map_err(|_| FieldError::Parse { col, msg: "negative power of zero".into() })
        } else {
            Ok(p)
        }
    }

    fn atom(&mut self) -> Result<FieldElem, FieldError> {
        let col = self.col();
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("unexpected end of expression"),
        };
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(self.f.constant(n & 1)),
            Tok::Bits(b) => {
                if !self.f.base().contains(b) {
                    return Err(FieldError::Parse {
                        col,
                        msg: "bit literal outside the coefficient field".into(),
                    });
                }
                Ok(self.f.constant(b))
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Tok::Ident(name) if name == "sqrt" => {
                if !self.eat('(') {
                    return self.err("expected `(` after sqrt");
                }
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                self.f
                    .sqrt(&e)
                    .map_err(|_| FieldError::Parse { col, msg: "sqrt of a non-square".into() })
            }
            Tok::Ident(name) => match self.f.vars().iter().position(|v| *v == name) {
                Some(i) => Ok(self.f.var(i)),
                None => Err(FieldError::Parse { col, msg: format!("unknown variable `{name}`") }),
            },
            Tok::Op(c) => Err(FieldError::Parse { col, msg: format!("unexpected `{c}`") }),
        }
    }
}

pub fn parse_elem(f: &Field, s: &str) -> Result<FieldElem, FieldError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(FieldError::Parse { col: 1, msg: "empty expression".into() });
    }
    let mut p = Parser { f, toks, pos: 0, end_col: s.chars().count() + 1 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parse `gf(2)` or `gf(2^k, 0b...)`, optional `vars a,b,...`, then any
/// number of `adjoin <expr>` stages.
pub fn parse_descriptor(s: &str) -> Result<Field, FieldError> {
    let bad = |m: &str| FieldError::BadDescriptor(m.to_string());
    let s = s.trim();
    let rest = s.strip_prefix("gf(").ok_or_else(|| bad("expected `gf(`"))?;
    let close = rest.find(')').ok_or_else(|| bad("unclosed `gf(`"))?;
    let inner: String = rest[..close].chars().filter(|c| !c.is_whitespace()).collect();
    let base = if inner == "2" {
        Gf2k::prime()
    } else {
        let (deg, modulus) = inner
            .strip_prefix("2^")
            .and_then(|x| x.split_once(','))
            .ok_or_else(|| bad("expected `gf(2)` or `gf(2^k, 0b...)`"))?;
        let deg: u32 = deg.parse().map_err(|_| bad("bad extension degree"))?;
        let modulus = modulus.strip_prefix("0b").ok_or_else(|| bad("modulus must be a 0b literal"))?;
        let modulus = u64::from_str_radix(modulus, 2).map_err(|_| bad("bad modulus"))?;
        Gf2k::new(deg, modulus)?
    };
    let mut rest = rest[close + 1..].trim();
    let mut vars: Vec<String> = Vec::new();
    if let Some(r) = rest.strip_prefix("vars") {
        let r = r.trim_start();
        let end = r.find(" adjoin").unwrap_or(r.len());
        vars = r[..end].split(',').map(|v| v.trim().to_string()).collect();
        rest = r[end..].trim();
    }
    let mut field = Field::with_var_names(base, vars)?;
    while !rest.is_empty() {
        let r = rest.strip_prefix("adjoin").ok_or_else(|| bad("expected `adjoin`"))?;
        let end = r.find(" adjoin").unwrap_or(r.len());
        let gamma = parse_elem(&field, r[..end].trim())?;
        field = field.adjoin_sqrt(&gamma)?;
        rest = r[end..].trim();
    }
    Ok(field)
}

/// Render a monomial by exponent vector (used by diagnostics).
pub fn render_mono(f: &Field, m: Mono) -> String {
    render_poly(f, &Poly::monomial(m, 1))
}
