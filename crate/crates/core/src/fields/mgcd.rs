//! Dense modular gcd for polynomials over GF(2): evaluate one variable at
//! points of a large extension field, recurse, and interpolate, checking
//! the candidate by exact division.

use std::sync::OnceLock;

use super::gf2k::{is_irreducible, Gf2k};
use super::poly::{Mono, Poly, MAX_VARS};

const EVAL_DEGREE: u32 = 32;

fn eval_field() -> &'static Gf2k {
    static FIELD: OnceLock<Gf2k> = OnceLock::new();
    FIELD.get_or_init(|| {
        let modulus = (0u64..)
            .map(|i| (1u64 << EVAL_DEGREE) | (2 * i + 1))
            .find(|&m| is_irreducible(m))
            .expect("an irreducible polynomial of degree 32 exists");
        Gf2k::new(EVAL_DEGREE, modulus).expect("irreducible modulus")
    })
}

/// Monic gcd of two nonzero polynomials over GF(2), or `None` when the
/// interpolation does not settle (the caller falls back to the slow path).
pub fn gcd_gf2(a: &Poly, b: &Poly) -> Option<Poly> {
    let k = eval_field();
    let mut points = Points::new();
    if coprime_by_images(k, a, b, &mut points) {
        return Some(Poly::one());
    }
    let mut vars: Vec<usize> = (0..MAX_VARS).filter(|&v| a.mentions(v) || b.mentions(v)).collect();
    // evaluate the variable of smallest degree first: fewest points
    vars.sort_by_key(|&v| std::cmp::Reverse(a.degree_in(v).max(b.degree_in(v))));
    let g = mgcd(k, a, b, &vars, &mut points)?;
    g.terms().iter().all(|&(_, c)| c <= 1).then_some(g)
}

/// Proves `gcd(a, b) = 1` when, for each shared variable `v`, some
/// evaluation of the other variables keeps the degree of `a` in `v` and
/// leaves coprime univariate images: a common factor of positive degree in
/// `v` would survive such an evaluation.
fn coprime_by_images(k: &Gf2k, a: &Poly, b: &Poly, points: &mut Points) -> bool {
    for v in (0..MAX_VARS).filter(|&v| a.mentions(v) && b.mentions(v)) {
        let mut ok = false;
        for _ in 0..2 {
            let pt: Vec<u64> = (0..MAX_VARS).map(|_| points.next()).collect();
            let ia = image(k, a, v, &pt);
            if ia.len() != a.degree_in(v) as usize + 1 {
                continue;
            }
            let ib = image(k, b, v, &pt);
            if dense_gcd(k, ia, ib).len() == 1 {
                ok = true;
            }
            break;
        }
        if !ok {
            return false;
        }
    }
    true
}

/// Univariate image in `v` after substituting `pt` for the other variables.
fn image(k: &Gf2k, p: &Poly, v: usize, pt: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; p.degree_in(v) as usize + 1];
    for &(m, c) in p.terms() {
        let mut val = c;
        for (w, &x) in pt.iter().enumerate() {
            if w != v {
                let e = m.exp(w);
                if e > 0 {
                    val = k.mul(val, k.pow(x, e as u64));
                }
            }
        }
        out[m.exp(v) as usize] ^= val;
    }
    trim(&mut out);
    out
}

struct Points(u64);

impl Points {
    fn new() -> Points {
        Points(0x9e37_79b9)
    }

    fn next(&mut self) -> u64 {
        // xorshift over 32-bit nonzero values
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 17;
        x ^= x << 5;
        x &= 0xffff_ffff;
        if x == 0 {
            x = 1;
        }
        self.0 = x;
        x
    }
}

fn eval_at(k: &Gf2k, p: &Poly, var: usize, c: u64) -> Poly {
    let deg = p.degree_in(var) as usize;
    let mut pw = Vec::with_capacity(deg + 1);
    let mut acc = 1u64;
    for _ in 0..=deg {
        pw.push(acc);
        acc = k.mul(acc, c);
    }
    let terms = p
        .terms()
        .iter()
        .map(|&(m, a)| (m.without(var), k.mul(a, pw[m.exp(var) as usize])))
        .filter(|&(_, a)| a != 0)
        .collect();
    Poly::from_terms(terms)
}

/// Dense coefficients of a polynomial in one variable.
fn to_dense(p: &Poly, var: usize) -> Vec<u64> {
    let mut out = vec![0u64; p.degree_in(var) as usize + 1];
    for &(m, c) in p.terms() {
        out[m.exp(var) as usize] ^= c;
    }
    out
}

fn from_dense(d: &[u64], var: usize) -> Poly {
    Poly::from_terms(
        d.iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (Mono::var(var, i as u32), c))
            .collect(),
    )
}

fn trim(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

fn dense_rem(k: &Gf2k, mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
    let db = b.len() - 1;
    let inv = k.inv(b[db]);
    while a.len() > db && !(a.len() == 1 && a[0] == 0) {
        let top = *a.last().unwrap();
        if top != 0 {
            let q = k.mul(top, inv);
            let shift = a.len() - 1 - db;
            for (i, &bc) in b.iter().enumerate() {
                if bc != 0 {
                    a[shift + i] ^= k.mul(q, bc);
                }
            }
        }
        a.pop();
        if a.is_empty() {
            a.push(0);
        }
    }
    trim(&mut a);
    a
}

fn dense_gcd(k: &Gf2k, a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    let (mut a, mut b) = (a, b);
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = dense_rem(k, a, &b);
        a = b;
        b = r;
    }
    let inv = k.inv(*a.last().unwrap());
    a.iter().map(|&c| k.mul(c, inv)).collect()
}

fn monic(k: &Gf2k, p: Poly) -> Poly {
    let lc = p.lead_coeff();
    if lc == 1 {
        p
    } else {
        p.scale(k, k.inv(lc))
    }
}

/// Coefficients of `p` in `K[y]` indexed by monomials in the other variables.
fn split_main(p: &Poly, y: usize) -> Vec<(Mono, Vec<u64>)> {
    let mut groups: Vec<(Mono, Vec<u64>)> = Vec::new();
    let mut sorted: Vec<(Mono, u32, u64)> = p.terms().iter().map(|&(m, c)| (m.without(y), m.exp(y), c)).collect();
    sorted.sort_by(|x, z| z.0.cmp(&x.0));
    for (m, e, c) in sorted {
        if groups.last().map_or(true, |g| g.0 != m) {
            groups.push((m, Vec::new()));
        }
        let d = &mut groups.last_mut().unwrap().1;
        if d.len() <= e as usize {
            d.resize(e as usize + 1, 0);
        }
        d[e as usize] ^= c;
    }
    groups
}

fn dense_eval(k: &Gf2k, d: &[u64], c: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &x| k.mul(acc, c) ^ x)
}

fn dense_mul(k: &Gf2k, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= k.mul(x, y);
        }
    }
    out
}

fn content_y(k: &Gf2k, p: &Poly, y: usize) -> Vec<u64> {
    let mut g: Option<Vec<u64>> = None;
    for (_, d) in split_main(p, y) {
        g = Some(match g {
            None => dense_gcd(k, d, vec![0]),
            Some(g) => dense_gcd(k, g, d),
        });
        if g.as_ref().is_some_and(|g| g.len() == 1) {
            break;
        }
    }
    g.unwrap_or_else(|| vec![1])
}

fn mgcd(k: &Gf2k, a: &Poly, b: &Poly, vars: &[usize], points: &mut Points) -> Option<Poly> {
    if a.is_zero() {
        return Some(monic(k, b.clone()));
    }
    if b.is_zero() {
        return Some(monic(k, a.clone()));
    }
    if a.is_constant() || b.is_constant() {
        return Some(Poly::one());
    }
    let Some((&y, rest)) = vars.split_last() else {
        return Some(Poly::one());
    };
    if rest.is_empty() {
        return Some(from_dense(&dense_gcd(k, to_dense(a, y), to_dense(b, y)), y));
    }
    if !a.mentions(y) && !b.mentions(y) {
        return mgcd(k, a, b, rest, points);
    }
    let ca = content_y(k, a, y);
    let cb = content_y(k, b, y);
    let c = from_dense(&dense_gcd(k, ca.clone(), cb.clone()), y);
    let a1 = a.div_exact(k, &from_dense(&ca, y))?;
    let b1 = b.div_exact(k, &from_dense(&cb, y))?;
    let lca = split_main(&a1, y).swap_remove(0).1;
    let lcb = split_main(&b1, y).swap_remove(0).1;
    let gamma = dense_gcd(k, lca.clone(), lcb.clone());
    let bound = gamma.len() - 1 + a1.degree_in(y).min(b1.degree_in(y)) as usize + 1;

    let mut lead: Option<Mono> = None;
    let mut interp = Poly::zero();
    let mut modulus = vec![1u64];
    let mut used = 0usize;
    for _ in 0..4 * bound + 64 {
        let pt = points.next();
        if dense_eval(k, &lca, pt) == 0 || dense_eval(k, &lcb, pt) == 0 {
            continue;
        }
        let ga = eval_at(k, &a1, y, pt);
        let gb = eval_at(k, &b1, y, pt);
        let g = mgcd(k, &ga, &gb, rest, points)?;
        if g.is_one() {
            return Some(monic(k, c));
        }
        let lm = g.terms()[0].0;
        match lead {
            Some(l) if lm > l => continue,
            Some(l) if lm == l => {}
            _ => {
                lead = Some(lm);
                interp = Poly::zero();
                modulus = vec![1];
                used = 0;
            }
        }
        let g = g.scale(k, dense_eval(k, &gamma, pt));
        // Newton step: interp += (g - interp(pt)) / modulus(pt) * modulus(y)
        let diff = g.add(&eval_at(k, &interp, y, pt));
        let stable = diff.is_zero();
        if !stable {
            let s = k.inv(dense_eval(k, &modulus, pt));
            let m_poly = from_dense(&modulus, y);
            interp = interp.add(&diff.scale(k, s).mul(k, &m_poly));
        }
        modulus = dense_mul(k, &modulus, &[pt, 1]);
        used += 1;
        if stable || used >= bound {
            let cont = content_y(k, &interp, y);
            let h = interp.div_exact(k, &from_dense(&cont, y))?;
            if a1.div_exact(k, &h).is_some() && b1.div_exact(k, &h).is_some() {
                return Some(monic(k, h.mul(k, &c)));
            }
            if used >= bound {
                lead = None;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(&[u32], u64)]) -> Poly {
        Poly::from_terms(terms.iter().map(|(e, c)| (Mono::from_exps(e), *c)).collect())
    }

    #[test]
    fn recovers_shared_factor() {
        let k = Gf2k::prime();
        let g = p(&[(&[1, 1, 0], 1), (&[0, 0, 2], 1), (&[0, 0, 0], 1)]);
        let x = p(&[(&[2, 0, 1], 1), (&[0, 1, 0], 1)]);
        let y = p(&[(&[0, 3, 0], 1), (&[1, 0, 0], 1), (&[0, 0, 0], 1)]);
        let got = gcd_gf2(&g.mul(&k, &x), &g.mul(&k, &y)).unwrap();
        assert_eq!(got, g);
        assert!(gcd_gf2(&x, &y).unwrap().is_one());
        assert_eq!(gcd_gf2(&g.mul(&k, &g), &g.mul(&k, &x)).unwrap(), g);
    }
}
