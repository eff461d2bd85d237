//! Reduced fractions of polynomials. The denominator is monic (leading
//! graded-lex coefficient 1) and omitted when it equals 1.

use super::gf2k::Gf2k;
use super::poly::{gcd, Poly};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RatFunc {
    num: Poly,
    den: Option<Poly>,
}

impl RatFunc {
    pub fn zero() -> RatFunc {
        RatFunc { num: Poly::zero(), den: None }
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(Poly::one())
    }

    pub fn from_poly(num: Poly) -> RatFunc {
        RatFunc { num, den: None }
    }

    /// Normalizing constructor; `den` must be nonzero.
    pub fn new(k: &Gf2k, num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.constant_value() {
            return RatFunc::from_poly(num.scale(k, k.inv(c)));
        }
        let g = gcd(k, &num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(k, &g).expect("gcd divides numerator"),
                den.div_exact(k, &g).expect("gcd divides denominator"),
            )
        };
        Self::with_monic_den(k, num, den)
    }

    fn with_monic_den(k: &Gf2k, num: Poly, den: Poly) -> RatFunc {
        let lc = den.lead_coeff();
        let (num, den) = if lc == 1 {
            (num, den)
        } else {
            let li = k.inv(lc);
            (num.scale(k, li), den.scale(k, li))
        };
        if den.is_one() {
            RatFunc { num, den: None }
        } else {
            RatFunc { num, den: Some(den) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> Poly {
        self.den.clone().unwrap_or_else(Poly::one)
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_none() && self.num.is_one()
    }

    pub fn constant_value(&self) -> Option<u64> {
        if self.den.is_some() {
            return None;
        }
        self.num.constant_value()
    }

    /// Rough size used to pick cheap pivots.
    pub fn weight(&self) -> usize {
        let n = self.num.len() * (1 + self.num.total_degree() as usize);
        match &self.den {
            None => n,
            Some(d) => n + 4 * d.len() * (1 + d.total_degree() as usize) + 8,
        }
    }

    pub fn add(&self, k: &Gf2k, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        match (&self.den, &other.den) {
            (None, None) => RatFunc::from_poly(self.num.add(&other.num)),
            (Some(a), Some(b)) if a == b => {
                RatFunc::new(k, self.num.add(&other.num), a.clone())
            }
            (None, Some(b)) => {
                // gcd(p*b + q, b) = gcd(q, b) = 1 already
                let num = self.num.mul(k, b).add(&other.num);
                if num.is_zero() {
                    return RatFunc::zero();
                }
                RatFunc { num, den: Some(b.clone()) }
            }
            (Some(a), None) => {
                let num = other.num.mul(k, a).add(&self.num);
                if num.is_zero() {
                    return RatFunc::zero();
                }
                RatFunc { num, den: Some(a.clone()) }
            }
            (Some(a), Some(b)) => {
                let g = gcd(k, a, b);
                if g.is_one() {
                    // reduced inputs with coprime denominators stay reduced
                    let num = self.num.mul(k, b).add(&other.num.mul(k, a));
                    if num.is_zero() {
                        return RatFunc::zero();
                    }
                    let den = a.mul(k, b);
                    return Self::with_monic_den(k, num, den);
                }
                let a1 = a.div_exact(k, &g).expect("gcd divides");
                let b1 = b.div_exact(k, &g).expect("gcd divides");
                let num = self.num.mul(k, &b1).add(&other.num.mul(k, &a1));
                let den = a1.mul(k, b);
                RatFunc::new(k, num, den)
            }
        }
    }

    pub fn mul(&self, k: &Gf2k, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero();
        }
        match (&self.den, &other.den) {
            (None, None) => RatFunc::from_poly(self.num.mul(k, &other.num)),
            _ => {
                let (n1, d2) = cancel(k, &self.num, other.den.as_ref());
                let (n2, d1) = cancel(k, &other.num, self.den.as_ref());
                let num = n1.mul(k, &n2);
                let den = match (d1, d2) {
                    (None, None) => return RatFunc::from_poly(num),
                    (Some(d), None) | (None, Some(d)) => d,
                    (Some(x), Some(y)) => x.mul(k, &y),
                };
                Self::with_monic_den(k, num, den)
            }
        }
    }

    pub fn square(&self, k: &Gf2k) -> RatFunc {
        RatFunc {
            num: self.num.square(k),
            den: self.den.as_ref().map(|d| d.square(k)),
        }
    }

    pub fn inv(&self, k: &Gf2k) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        let den = self.num.clone();
        let num = self.den();
        if let Some(c) = den.constant_value() {
            return Some(RatFunc::from_poly(num.scale(k, k.inv(c))));
        }
        Some(Self::with_monic_den(k, num, den))
    }

    pub fn is_square(&self) -> bool {
        match &self.den {
            None => self.num.is_square(),
            // p/q is a square iff p*q is, since gcd(p, q) = 1
            Some(d) => self.num.is_square() && d.is_square(),
        }
    }

    pub fn sqrt(&self, k: &Gf2k) -> Option<RatFunc> {
        let num = self.num.sqrt(k)?;
        let den = match &self.den {
            None => None,
            Some(d) => Some(d.sqrt(k)?),
        };
        Some(RatFunc { num, den })
    }
}

/// Divides `num` and `den` by their gcd; returns the reduced pair.
fn cancel(k: &Gf2k, num: &Poly, den: Option<&Poly>) -> (Poly, Option<Poly>) {
    match den {
        None => (num.clone(), None),
        Some(d) => {
            let g = gcd(k, num, d);
            if g.is_one() {
                (num.clone(), Some(d.clone()))
            } else {
                let n = num.div_exact(k, &g).expect("gcd divides");
                let d = d.div_exact(k, &g).expect("gcd divides");
                if d.is_one() {
                    (n, None)
                } else {
                    (n, Some(d))
                }
            }
        }
    }
}
