//! Characteristic-2 field towers
//! `GF(2^k)(t1..tm)(sqrt(g1))...(sqrt(gj))` with exact canonical arithmetic.
//!
//! A [`Field`] is a cheap-to-clone handle that performs all arithmetic;
//! [`FieldElem`] values carry no context. An element of a field with `j`
//! purely inseparable stages is a depth-`j` binary tree of coordinates
//! `z = z0 + z1 * s_j` bottoming out in reduced rational functions.

pub mod frobenius;
pub mod gf2k;
pub mod linalg;
mod mgcd;
pub mod poly;
pub mod ratfunc;
pub mod text;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use frobenius::{
    in_fsquare_span, norm_field_basis, semilinear_solve, subset_products,
    two_independence_degree, SemilinearSolution,
};
pub use gf2k::Gf2k;
pub use linalg::Matrix;
pub use poly::{Mono, Poly, MAX_VARS};
pub use ratfunc::RatFunc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a square")]
    NotASquare,
    #[error("adjoined element is already a square in the previous stage")]
    AlreadySquare,
    #[error("field mismatch")]
    Mismatch,
    #[error("bad field descriptor: {0}")]
    BadDescriptor(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Base(RatFunc),
    Ext(Box<[FieldElem; 2]>),
}

impl FieldElem {
    pub fn depth(&self) -> usize {
        match self {
            FieldElem::Base(_) => 0,
            FieldElem::Ext(parts) => 1 + parts[0].depth(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Base(r) => r.is_zero(),
            FieldElem::Ext(parts) => parts[0].is_zero() && parts[1].is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Base(r) => r.is_one(),
            FieldElem::Ext(parts) => parts[0].is_one() && parts[1].is_zero(),
        }
    }

    pub fn as_base(&self) -> Option<&RatFunc> {
        match self {
            FieldElem::Base(r) => Some(r),
            FieldElem::Ext(_) => None,
        }
    }

    pub fn parts(&self) -> Option<&[FieldElem; 2]> {
        match self {
            FieldElem::Base(_) => None,
            FieldElem::Ext(p) => Some(p),
        }
    }

    /// Pivot-selection heuristic: smaller is cheaper to divide by.
    pub fn weight(&self) -> usize {
        match self {
            FieldElem::Base(r) => r.weight(),
            FieldElem::Ext(p) => 1 + p[0].weight() + 2 * p[1].weight(),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct FieldData {
    base: Gf2k,
    vars: Vec<String>,
    /// `gammas[j]` lives at depth `j`; stage `j+1` adjoins its square root.
    gammas: Vec<FieldElem>,
}

/// Handle to a field tower. Cloning is cheap.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.describe())
    }
}

impl Field {
    /// `GF(2^k)(vars)`; use [`Gf2k::prime`] for GF(2).
    pub fn new(base: Gf2k, vars: &[&str]) -> Result<Field, FieldError> {
        Self::with_var_names(base, vars.iter().map(|s| s.to_string()).collect())
    }

    pub fn with_var_names(base: Gf2k, vars: Vec<String>) -> Result<Field, FieldError> {
        if vars.len() > MAX_VARS {
            return Err(FieldError::BadDescriptor(format!(
                "at most {MAX_VARS} variables are supported"
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && v != "sqrt"
                && v != "gf";
            if !ok {
                return Err(FieldError::BadDescriptor(format!("invalid variable name `{v}`")));
            }
            if vars[..i].contains(v) {
                return Err(FieldError::BadDescriptor(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Field(Arc::new(FieldData { base, vars, gammas: Vec::new() })))
    }

    /// GF(2)(t1, ..., tm).
    pub fn rational(nvars: usize) -> Field {
        let names: Vec<String> = (1..=nvars).map(|i| format!("t{i}")).collect();
        Self::with_var_names(Gf2k::prime(), names).expect("valid default names")
    }

    pub fn base(&self) -> &Gf2k {
        &self.0.base
    }

    pub fn vars(&self) -> &[String] {
        &self.0.vars
    }

    pub fn nvars(&self) -> usize {
        self.0.vars.len()
    }

    /// Number of purely inseparable stages.
    pub fn depth(&self) -> usize {
        self.0.gammas.len()
    }

    pub fn gamma(&self, stage: usize) -> &FieldElem {
        &self.0.gammas[stage]
    }

    /// The tower truncated to its first `depth` stages.
    pub fn ancestor(&self, depth: usize) -> Field {
        assert!(depth <= self.depth());
        if depth == self.depth() {
            return self.clone();
        }
        Field(Arc::new(FieldData {
            base: self.0.base.clone(),
            vars: self.0.vars.clone(),
            gammas: self.0.gammas[..depth].to_vec(),
        }))
    }

    pub fn parent(&self) -> Option<Field> {
        (self.depth() > 0).then(|| self.ancestor(self.depth() - 1))
    }

    /// `log2 [F : F^2]`, the number of transcendental variables.
    pub fn frobenius_rank(&self) -> usize {
        self.nvars()
    }

    pub fn adjoin_sqrt(&self, gamma: &FieldElem) -> Result<Field, FieldError> {
        self.check(gamma)?;
        if self.is_square(gamma) {
            return Err(FieldError::AlreadySquare);
        }
        let mut gammas = self.0.gammas.clone();
        gammas.push(gamma.clone());
        Ok(Field(Arc::new(FieldData {
            base: self.0.base.clone(),
            vars: self.0.vars.clone(),
            gammas,
        })))
    }

    pub fn check(&self, x: &FieldElem) -> Result<(), FieldError> {
        if x.depth() == self.depth() {
            Ok(())
        } else {
            Err(FieldError::Mismatch)
        }
    }

    pub fn describe(&self) -> String {
        text::render_descriptor(self)
    }

    pub fn zero(&self) -> FieldElem {
        self.lift(FieldElem::Base(RatFunc::zero()), 0)
    }

    pub fn one(&self) -> FieldElem {
        self.lift(FieldElem::Base(RatFunc::one()), 0)
    }

    /// Element `c` of the coefficient field GF(2^k).
    pub fn constant(&self, c: u64) -> FieldElem {
        self.lift(FieldElem::Base(RatFunc::from_poly(Poly::constant(c))), 0)
    }

    pub fn from_bool(&self, b: bool) -> FieldElem {
        if b {
            self.one()
        } else {
            self.zero()
        }
    }

    /// The `i`-th transcendental variable (0-based).
    pub fn var(&self, i: usize) -> FieldElem {
        assert!(i < self.nvars());
        self.lift(FieldElem::Base(RatFunc::from_poly(Poly::monomial(Mono::var(i, 1), 1))), 0)
    }

    pub fn from_ratfunc(&self, r: RatFunc) -> FieldElem {
        self.lift(FieldElem::Base(r), 0)
    }

    /// The square root `s_j` adjoined at stage `j` (1-based), embedded.
    pub fn stage_generator(&self, stage: usize) -> FieldElem {
        assert!(stage >= 1 && stage <= self.depth());
        let low = self.ancestor(stage - 1);
        let s = FieldElem::Ext(Box::new([low.zero(), low.one()]));
        self.lift(s, stage)
    }

    /// Embed an element of the depth-`from` ancestor.
    pub fn lift(&self, x: FieldElem, from: usize) -> FieldElem {
        let mut x = x;
        for d in from..self.depth() {
            let z = self.zero_at(d);
            x = FieldElem::Ext(Box::new([x, z]));
        }
        x
    }

    fn zero_at(&self, depth: usize) -> FieldElem {
        let mut x = FieldElem::Base(RatFunc::zero());
        for _ in 0..depth {
            x = FieldElem::Ext(Box::new([x.clone(), x]));
        }
        x
    }

    /// Inverse of [`Field::lift`]: `Some` when `x` lies in the depth-`to` ancestor.
    pub fn descend(&self, x: &FieldElem, to: usize) -> Option<FieldElem> {
        let mut cur = x;
        for _ in to..self.depth() {
            let p = cur.parts()?;
            if !p[1].is_zero() {
                return None;
            }
            cur = &p[0];
        }
        Some(cur.clone())
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        add_elem(&self.0.base, a, b)
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.add(a, b)
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.mul_at(self.depth(), a, b)
    }

    pub fn square(&self, a: &FieldElem) -> FieldElem {
        self.square_at(self.depth(), a)
    }

    pub fn pow(&self, a: &FieldElem, mut e: u64) -> FieldElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.square(&base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem, FieldError> {
        self.inv_at(self.depth(), a).ok_or(FieldError::DivisionByZero)
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn is_square(&self, x: &FieldElem) -> bool {
        self.sqrt_opt(x).is_some()
    }

    pub fn sqrt(&self, x: &FieldElem) -> Result<FieldElem, FieldError> {
        self.sqrt_opt(x).ok_or(FieldError::NotASquare)
    }

    fn sqrt_opt(&self, x: &FieldElem) -> Option<FieldElem> {
        match x {
            FieldElem::Base(r) => r.sqrt(&self.0.base).map(FieldElem::Base),
            FieldElem::Ext(p) => {
                if !p[1].is_zero() {
                    return None;
                }
                // z0 = a^2 + gamma * b^2  gives  sqrt = a + b*s
                let parent = self.parent().expect("extension element has a parent");
                let gamma = self.gamma(self.depth() - 1).clone();
                let sol = in_fsquare_span(&parent, &p[0], &[gamma])?;
                Some(FieldElem::Ext(Box::new([sol[0].clone(), sol[1].clone()])))
            }
        }
    }

    pub(crate) fn mul_at(&self, depth: usize, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let k = &self.0.base;
        match (a, b) {
            (FieldElem::Base(x), FieldElem::Base(y)) => FieldElem::Base(x.mul(k, y)),
            (FieldElem::Ext(x), FieldElem::Ext(y)) => {
                let d = depth - 1;
                let g = &self.0.gammas[d];
                let lo = add_elem(
                    k,
                    &self.mul_at(d, &x[0], &y[0]),
                    &self.mul_at(d, g, &self.mul_at(d, &x[1], &y[1])),
                );
                let hi = add_elem(k, &self.mul_at(d, &x[0], &y[1]), &self.mul_at(d, &x[1], &y[0]));
                FieldElem::Ext(Box::new([lo, hi]))
            }
            _ => panic!("field elements of different depths"),
        }
    }

    /// `(a + b s)^2 = a^2 + gamma b^2`, an element of the previous stage.
    pub(crate) fn square_at(&self, depth: usize, a: &FieldElem) -> FieldElem {
        let k = &self.0.base;
        match a {
            FieldElem::Base(x) => FieldElem::Base(x.square(k)),
            FieldElem::Ext(x) => {
                let d = depth - 1;
                let lo = add_elem(
                    k,
                    &self.square_at(d, &x[0]),
                    &self.mul_at(d, &self.0.gammas[d], &self.square_at(d, &x[1])),
                );
                FieldElem::Ext(Box::new([lo, self.zero_at(d)]))
            }
        }
    }

    fn inv_at(&self, depth: usize, a: &FieldElem) -> Option<FieldElem> {
        let k = &self.0.base;
        match a {
            FieldElem::Base(x) => x.inv(k).map(FieldElem::Base),
            FieldElem::Ext(x) => {
                let d = depth - 1;
                // (a + b s)^{-1} = (a + b s) / (a^2 + gamma b^2)
                let sq = self.square_at(depth, a);
                let norm = match &sq {
                    FieldElem::Ext(p) => p[0].clone(),
                    _ => unreachable!(),
                };
                let ni = self.inv_at(d, &norm)?;
                Some(FieldElem::Ext(Box::new([
                    self.mul_at(d, &x[0], &ni),
                    self.mul_at(d, &x[1], &ni),
                ])))
            }
        }
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a FieldElem>) -> FieldElem {
        items.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }

    pub fn parse(&self, s: &str) -> Result<FieldElem, FieldError> {
        text::parse_elem(self, s)
    }

    pub fn render(&self, x: &FieldElem) -> String {
        text::render_elem(self, x)
    }

    /// Parse a descriptor such as `gf(2) vars t1,t2 adjoin t1`.
    pub fn from_descriptor(s: &str) -> Result<Field, FieldError> {
        text::parse_descriptor(s)
    }

    /// Coordinates over the depth-0 field: `2^depth` entries, bit `j` of the
    /// index selecting the factor `s_{j+1}`.
    pub fn base_coords(&self, x: &FieldElem) -> Vec<RatFunc> {
        fn walk(x: &FieldElem, out: &mut Vec<RatFunc>) {
            match x {
                FieldElem::Base(r) => out.push(r.clone()),
                FieldElem::Ext(p) => {
                    walk(&p[0], out);
                    walk(&p[1], out);
                }
            }
        }
        let mut out = Vec::with_capacity(1 << self.depth());
        walk(x, &mut out);
        out
    }

    /// Inverse of [`Field::base_coords`].
    pub fn from_base_coords(&self, coords: &[RatFunc]) -> FieldElem {
        assert_eq!(coords.len(), 1 << self.depth());
        fn build(c: &[RatFunc]) -> FieldElem {
            if c.len() == 1 {
                return FieldElem::Base(c[0].clone());
            }
            let h = c.len() / 2;
            FieldElem::Ext(Box::new([build(&c[..h]), build(&c[h..])]))
        }
        build(coords)
    }
}

fn add_elem(k: &Gf2k, a: &FieldElem, b: &FieldElem) -> FieldElem {
    match (a, b) {
        (FieldElem::Base(x), FieldElem::Base(y)) => FieldElem::Base(x.add(k, y)),
        (FieldElem::Ext(x), FieldElem::Ext(y)) => FieldElem::Ext(Box::new([
            add_elem(k, &x[0], &y[0]),
            add_elem(k, &x[1], &y[1]),
        ])),
        _ => panic!("field elements of different depths"),
    }
}
