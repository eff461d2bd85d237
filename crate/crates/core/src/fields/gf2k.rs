//! Coefficient arithmetic in GF(2^k), elements stored as polynomial-basis
//! bitstrings (bit `i` is the coefficient of `w^i`).

use super::FieldError;

/// Largest supported extension degree of the coefficient field.
pub const MAX_DEGREE: u32 = 32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gf2k {
    degree: u32,
    modulus: u64,
}

impl Gf2k {
    /// GF(2).
    pub fn prime() -> Self {
        Gf2k { degree: 1, modulus: 0b11 }
    }

    /// GF(2^k) as GF(2)[w]/(modulus). The modulus must be irreducible of degree k.
    pub fn new(degree: u32, modulus: u64) -> Result<Self, FieldError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::BadDescriptor(format!(
                "coefficient field degree {degree} outside 1..={MAX_DEGREE}"
            )));
        }
        if modulus >> degree != 1 {
            return Err(FieldError::BadDescriptor(format!(
                "modulus {modulus:#b} does not have degree {degree}"
            )));
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::BadDescriptor(format!(
                "modulus {modulus:#b} is reducible over GF(2)"
            )));
        }
        Ok(Gf2k { degree, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_prime(&self) -> bool {
        self.degree == 1
    }

    pub fn contains(&self, a: u64) -> bool {
        a >> self.degree == 0
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.degree == 1 {
            return a & b;
        }
        reduce(clmul(a, b), self.modulus, self.degree)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        if self.degree == 1 {
            return 1;
        }
        // a^(2^k - 2)
        self.pow(a, (1u64 << self.degree) - 2)
    }

    /// The unique square root (the field is perfect): a^(2^(k-1)).
    pub fn sqrt(&self, a: u64) -> u64 {
        let mut r = a;
        for _ in 1..self.degree {
            r = self.mul(r, r);
        }
        r
    }
}

/// Carry-less product; inputs are below 2^32 so the result fits in 64 bits.
fn clmul(a: u64, b: u64) -> u64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("pclmulqdq") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { clmul_hw(a, b) };
        }
    }
    clmul_sw(a, b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq,sse2")]
unsafe fn clmul_hw(a: u64, b: u64) -> u64 {
    use std::arch::x86_64::{_mm_clmulepi64_si128, _mm_cvtsi128_si64, _mm_set_epi64x};
    let r = _mm_clmulepi64_si128(_mm_set_epi64x(0, a as i64), _mm_set_epi64x(0, b as i64), 0);
    _mm_cvtsi128_si64(r) as u64
}

fn clmul_sw(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Fold the bits above `degree` back down through the modulus tail.
fn reduce(mut x: u64, modulus: u64, degree: u32) -> u64 {
    let tail = modulus ^ (1u64 << degree);
    let mask = (1u64 << degree) - 1;
    while x >> degree != 0 {
        x = (x & mask) ^ clmul(x >> degree, tail);
    }
    x
}

fn poly_deg(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = poly_deg(b);
    while a != 0 && poly_deg(a) >= db {
        a ^= b << (poly_deg(a) - db);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Rabin-style test over GF(2): p of degree n is irreducible iff
/// x^(2^n) = x mod p and gcd(x^(2^(n/q)) - x, p) = 1 for each prime q | n.
pub fn is_irreducible(p: u64) -> bool {
    let n = poly_deg(p);
    if n <= 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let n = n as u32;
    let frob = |times: u32| -> u64 {
        // x^(2^times) mod p
        let mut r = 0b10u64;
        for _ in 0..times {
            r = reduce(clmul(r, r), p, n);
        }
        r
    };
    if frob(n) != 0b10 {
        return false;
    }
    let mut m = n;
    let mut q = 2;
    while m > 1 {
        if m % q == 0 {
            let g = poly_gcd(p, frob(n / q) ^ 0b10);
            if g != 1 {
                return false;
            }
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    true
}
