//! Sparse multivariate polynomials over GF(2^k) with at most six variables.
//!
//! A monomial is packed into a `u128`: the total degree sits above the six
//! 16-bit exponent slots, so plain integer comparison is graded-lex order
//! with `t1 > t2 > ...`. Terms are kept sorted in decreasing order.

use super::gf2k::Gf2k;

pub const MAX_VARS: usize = 6;
const SLOT: u32 = 16;
const DEG_SHIFT: u32 = 96;
const SLOT_MASK: u128 = 0xffff;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub u128);

impl Mono {
    pub const ONE: Mono = Mono(0);

    fn shift(var: usize) -> u32 {
        (5 - var as u32) * SLOT
    }

    pub fn var(var: usize, exp: u32) -> Mono {
        debug_assert!(var < MAX_VARS);
        Mono(((exp as u128) << DEG_SHIFT) | ((exp as u128) << Self::shift(var)))
    }

    pub fn from_exps(exps: &[u32]) -> Mono {
        let mut m = 0u128;
        let mut total = 0u128;
        for (i, &e) in exps.iter().enumerate() {
            m |= (e as u128) << Self::shift(i);
            total += e as u128;
        }
        Mono(m | (total << DEG_SHIFT))
    }

    #[inline]
    pub fn exp(self, var: usize) -> u32 {
        ((self.0 >> Self::shift(var)) & SLOT_MASK) as u32
    }

    #[inline]
    pub fn degree(self) -> u32 {
        ((self.0 >> DEG_SHIFT) & SLOT_MASK) as u32
    }

    pub fn exps(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exp(i)).collect()
    }

    #[inline]
    pub fn mul(self, other: Mono) -> Mono {
        Mono(self.0 + other.0)
    }

    #[inline]
    pub fn divides(self, other: Mono) -> bool {
        (0..MAX_VARS).all(|i| self.exp(i) <= other.exp(i))
    }

    /// `other / self`, assuming divisibility.
    #[inline]
    pub fn div_of(self, other: Mono) -> Mono {
        Mono(other.0 - self.0)
    }

    pub fn min(self, other: Mono) -> Mono {
        let exps: Vec<u32> = (0..MAX_VARS).map(|i| self.exp(i).min(other.exp(i))).collect();
        Mono::from_exps(&exps)
    }

    pub fn is_even(self) -> bool {
        (0..MAX_VARS).all(|i| self.exp(i) % 2 == 0)
    }

    /// Exponent vector with every entry halved (the parity bits are dropped).
    pub fn halve(self) -> Mono {
        let exps: Vec<u32> = (0..MAX_VARS).map(|i| self.exp(i) / 2).collect();
        Mono::from_exps(&exps)
    }

    /// Bitmask of odd exponents, bit `i` for variable `i`.
    pub fn parity(self) -> usize {
        (0..MAX_VARS).fold(0, |acc, i| acc | (((self.exp(i) & 1) as usize) << i))
    }

    pub fn double(self) -> Mono {
        Mono(self.0 << 1)
    }

    /// Strip variable `var` from the monomial.
    pub fn without(self, var: usize) -> Mono {
        let e = self.exp(var) as u128;
        Mono(self.0 - (e << Self::shift(var)) - (e << DEG_SHIFT))
    }
}

/// Square-free monomial of a parity mask.
pub fn parity_mono(mask: usize) -> Mono {
    let exps: Vec<u32> = (0..MAX_VARS).map(|i| ((mask >> i) & 1) as u32).collect();
    Mono::from_exps(&exps)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, u64)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(1)
    }

    pub fn constant(c: u64) -> Poly {
        if c == 0 {
            Poly::zero()
        } else {
            Poly { terms: vec![(Mono::ONE, c)] }
        }
    }

    pub fn monomial(m: Mono, c: u64) -> Poly {
        if c == 0 {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Build from arbitrary terms: sorts and merges duplicates.
    pub fn from_terms(mut terms: Vec<(Mono, u64)>) -> Poly {
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms: merge_sorted(terms) }
    }

    pub fn terms(&self) -> &[(Mono, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0] == (Mono::ONE, 1)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == Mono::ONE)
    }

    pub fn constant_value(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(m, c)] if *m == Mono::ONE => Some(*c),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn lead(&self) -> Option<(Mono, u64)> {
        self.terms.first().copied()
    }

    pub fn lead_coeff(&self) -> u64 {
        self.terms.first().map(|t| t.1).unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.degree()).unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|t| t.0.exp(var)).max().unwrap_or(0)
    }

    pub fn mentions(&self, var: usize) -> bool {
        self.terms.iter().any(|t| t.0.exp(var) > 0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = a[i].1 ^ b[j].1;
                    if c != 0 {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn scale(&self, k: &Gf2k, c: u64) -> Poly {
        if c == 0 {
            return Poly::zero();
        }
        if c == 1 {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|&(m, a)| (m, k.mul(a, c))).collect(),
        }
    }

    pub fn mul_term(&self, k: &Gf2k, m: Mono, c: u64) -> Poly {
        if c == 0 {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|&(t, a)| (t.mul(m), if c == 1 { a } else { k.mul(a, c) }))
                .collect(),
        }
    }

    pub fn mul(&self, k: &Gf2k, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.terms.len() == 1 {
            let (m, c) = other.terms[0];
            return self.mul_term(k, m, c);
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms[0];
            return other.mul_term(k, m, c);
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        let prime = k.is_prime();
        for &(ma, ca) in &self.terms {
            for &(mb, cb) in &other.terms {
                let c = if prime { 1 } else { k.mul(ca, cb) };
                prods.push((ma.mul(mb), c));
            }
        }
        Poly::from_terms(prods)
    }

    /// Frobenius: squares the coefficients and doubles the exponents.
    pub fn square(&self, k: &Gf2k) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|&(m, c)| (m.double(), k.mul(c, c)))
                .collect(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.terms.iter().all(|t| t.0.is_even())
    }

    pub fn sqrt(&self, k: &Gf2k) -> Option<Poly> {
        if !self.is_square() {
            return None;
        }
        Some(Poly {
            terms: self.terms.iter().map(|&(m, c)| (m.halve(), k.sqrt(c))).collect(),
        })
    }

    /// Splits `self = sum_eps t^eps * P_eps^2` and returns the `P_eps` indexed
    /// by parity mask (length `2^nvars`).
    pub fn sqrt_components(&self, k: &Gf2k, nvars: usize) -> Vec<Poly> {
        let mut buckets: Vec<Vec<(Mono, u64)>> = vec![Vec::new(); 1 << nvars];
        for &(m, c) in &self.terms {
            buckets[m.parity()].push((m.halve(), k.sqrt(c)));
        }
        // halving is monotone on each parity class, so order survives
        buckets.into_iter().map(|terms| Poly { terms }).collect()
    }

    pub fn monic(&self, k: &Gf2k) -> Poly {
        let lc = self.lead_coeff();
        if lc <= 1 {
            return self.clone();
        }
        self.scale(k, k.inv(lc))
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, k: &Gf2k, other: &Poly) -> Option<Poly> {
        assert!(!other.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if other.terms.len() == 1 {
            let (m, c) = other.terms[0];
            if !self.terms.iter().all(|t| m.divides(t.0)) {
                return None;
            }
            let ci = k.inv(c);
            return Some(Poly {
                terms: self
                    .terms
                    .iter()
                    .map(|&(t, a)| (m.div_of(t), k.mul(a, ci)))
                    .collect(),
            });
        }
        let (lm, lc) = other.terms[0];
        let lci = k.inv(lc);
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((rm, rc)) = rem.lead() {
            if !lm.divides(rm) {
                return None;
            }
            let qm = lm.div_of(rm);
            let qc = k.mul(rc, lci);
            quot.push((qm, qc));
            rem = rem.add(&other.mul_term(k, qm, qc));
        }
        Some(Poly { terms: quot })
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let first = match it.next() {
            Some(t) => t.0,
            None => return Mono::ONE,
        };
        it.fold(first, |acc, t| acc.min(t.0))
    }

    /// View as a polynomial in `var`: coefficient of `var^i` at index `i`.
    pub fn coeffs_in(&self, var: usize) -> Vec<Poly> {
        let deg = self.degree_in(var) as usize;
        let mut out: Vec<Vec<(Mono, u64)>> = vec![Vec::new(); deg + 1];
        for &(m, c) in &self.terms {
            out[m.exp(var) as usize].push((m.without(var), c));
        }
        // stripping one variable can reorder terms
        out.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coeffs_in(k: &Gf2k, var: usize, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            let shifted = c.mul_term(k, Mono::var(var, i as u32), 1);
            terms.extend_from_slice(&shifted.terms);
        }
        Poly::from_terms(terms)
    }

    pub fn gcd(&self, k: &Gf2k, other: &Poly) -> Poly {
        gcd(k, self, other)
    }
}

fn merge_sorted(terms: Vec<(Mono, u64)>) -> Vec<(Mono, u64)> {
    let mut out: Vec<(Mono, u64)> = Vec::with_capacity(terms.len());
    for (m, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 ^= c,
            _ => out.push((m, c)),
        }
        if let Some(last) = out.last() {
            if last.1 == 0 {
                out.pop();
            }
        }
    }
    out
}

/// Monic greatest common divisor.
pub fn gcd(k: &Gf2k, a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic(k);
    }
    if b.is_zero() {
        return a.monic(k);
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic(k);
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let m = ma.min(mb);
    let a1 = a.div_exact(k, &Poly::monomial(ma, 1)).expect("monomial content divides");
    let b1 = b.div_exact(k, &Poly::monomial(mb, 1)).expect("monomial content divides");
    let g = if a1.is_constant() || b1.is_constant() {
        Poly::one()
    } else if k.is_prime() {
        super::mgcd::gcd_gf2(&a1, &b1).unwrap_or_else(|| gcd_rec(k, &a1, &b1))
    } else {
        gcd_rec(k, &a1, &b1)
    };
    g.mul_term(k, m, 1).monic(k)
}

fn pick_var(a: &Poly, b: &Poly) -> Option<usize> {
    let mut best: Option<(usize, u32)> = None;
    for v in 0..MAX_VARS {
        if a.mentions(v) && b.mentions(v) {
            let d = a.degree_in(v).max(b.degree_in(v));
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((v, d));
            }
        }
    }
    best.map(|(v, _)| v)
}

fn content_in(k: &Gf2k, p: &Poly, var: usize) -> Poly {
    let mut g = Poly::zero();
    for c in p.coeffs_in(var) {
        if c.is_zero() {
            continue;
        }
        g = gcd(k, &g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn gcd_rec(k: &Gf2k, a: &Poly, b: &Poly) -> Poly {
    let var = match pick_var(a, b) {
        Some(v) => v,
        // disjoint variable sets leave only constant common factors
        None => return Poly::one(),
    };
    let ca = content_in(k, a, var);
    let cb = content_in(k, b, var);
    let c = gcd(k, &ca, &cb);
    let mut p = split(k, a, var, &ca);
    let mut q = split(k, b, var, &cb);
    if len_v(&p) < len_v(&q) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = prem(k, &p, &q);
        if r.iter().all(|x| x.is_zero()) {
            break;
        }
        if len_v(&r) == 1 {
            q = vec![Poly::one()];
            break;
        }
        p = q;
        q = primitive(k, r);
    }
    let g = Poly::from_coeffs_in(k, var, &primitive(k, q));
    g.mul(k, &c).monic(k)
}

fn len_v(p: &[Poly]) -> usize {
    p.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1)
}

fn split(k: &Gf2k, p: &Poly, var: usize, content: &Poly) -> Vec<Poly> {
    p.coeffs_in(var)
        .into_iter()
        .map(|c| c.div_exact(k, content).expect("content divides coefficient"))
        .collect()
}

fn primitive(k: &Gf2k, mut p: Vec<Poly>) -> Vec<Poly> {
    p.truncate(len_v(&p));
    let mut g = Poly::zero();
    for c in &p {
        if !c.is_zero() {
            g = gcd(k, &g, c);
            if g.is_one() {
                return p;
            }
        }
    }
    p.into_iter()
        .map(|c| c.div_exact(k, &g).expect("content divides coefficient"))
        .collect()
}

/// Sparse pseudo-remainder of `a` by `b` as polynomials in the split variable.
fn prem(k: &Gf2k, a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = len_v(b) - 1;
    let lb = &b[db];
    let mut r: Vec<Poly> = a[..len_v(a)].to_vec();
    while len_v(&r) > db {
        let dr = len_v(&r) - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for (i, c) in r.iter_mut().enumerate() {
            *c = c.mul(k, lb);
            if i >= shift && i - shift <= db {
                *c = c.add(&b[i - shift].mul(k, &lr));
            }
        }
        r.truncate(len_v(&r));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(&[u32], u64)]) -> Poly {
        Poly::from_terms(terms.iter().map(|(e, c)| (Mono::from_exps(e), *c)).collect())
    }

    #[test]
    fn graded_lex_order() {
        assert!(Mono::from_exps(&[2]) > Mono::from_exps(&[1, 1]));
        assert!(Mono::from_exps(&[0, 2]) > Mono::from_exps(&[1]));
        assert!(Mono::from_exps(&[1, 1]) > Mono::from_exps(&[0, 2]));
    }

    #[test]
    fn square_of_binomial() {
        let k = Gf2k::prime();
        let a = p(&[(&[1], 1), (&[0], 1)]);
        assert_eq!(a.mul(&k, &a), p(&[(&[2], 1), (&[0], 1)]));
        assert_eq!(a.square(&k), a.mul(&k, &a));
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let k = Gf2k::prime();
        let f = p(&[(&[1, 1], 1), (&[0, 0], 1)]);
        let g = p(&[(&[2], 1), (&[0, 1], 1)]);
        let h = p(&[(&[1, 0, 1], 1), (&[0, 2], 1), (&[0], 1)]);
        let a = f.mul(&k, &g);
        let b = f.mul(&k, &h);
        assert_eq!(gcd(&k, &a, &b), f);
        assert_eq!(gcd(&k, &g, &h), Poly::one());
    }

    #[test]
    fn exact_division() {
        let k = Gf2k::prime();
        let f = p(&[(&[1], 1), (&[0, 1], 1)]);
        let g = p(&[(&[2], 1), (&[0], 1)]);
        let fg = f.mul(&k, &g);
        assert_eq!(fg.div_exact(&k, &f), Some(g.clone()));
        assert_eq!(g.div_exact(&k, &f), None);
    }
}
