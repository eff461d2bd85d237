//! Seeded instance builders: quaternions with chosen involutions, tensor
//! products with their certificates, and basis scrambling that carries the
//! certificate along.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, Vector};
use crate::csa::{self, canonical_involution, int_conjugate, quaternion, Involution};
use crate::decompose::{check_certificate, phi_candidate, Certificate, DecomposeError};
use crate::fields::linalg::Matrix;
use crate::fields::{Field, FieldElem};
use crate::VerifyLevel;

/// An algebra with involution and a certificate for it.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub algebra: Algebra,
    pub involution: Involution,
    pub certificate: Certificate,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Int(x) o gamma` on `[a, b)` with `x = c0 + c1 v + c2 uv`; orthogonal
/// whenever `x` is invertible and not central.
pub fn orthogonal_quaternion(
    f: &Field,
    a: &FieldElem,
    b: &FieldElem,
    x: [&FieldElem; 3],
) -> Result<(Algebra, Involution), DecomposeError> {
    let (q, p) = quaternion(f, a, b)?;
    let gamma = canonical_involution(&q, &p)?;
    let elem = [x[0].clone(), f.zero(), x[1].clone(), x[2].clone()];
    if q.scalar_part(&elem).is_some() {
        return Err(DecomposeError::Precondition("central conjugating element".into()));
    }
    let sigma = int_conjugate(&q, &gamma, &elem)?;
    Ok((q, sigma))
}

/// `Int(v) o gamma` on `[a, b)`: discriminant `b`.
pub fn standard_orthogonal(f: &Field, a: &FieldElem, b: &FieldElem) -> Result<(Algebra, Involution), DecomposeError> {
    orthogonal_quaternion(f, a, b, [&f.zero(), &f.one(), &f.zero()])
}

pub fn symplectic_quaternion(f: &Field, a: &FieldElem, b: &FieldElem) -> Result<(Algebra, Involution), DecomposeError> {
    let (q, p) = quaternion(f, a, b)?;
    let gamma = canonical_involution(&q, &p)?;
    Ok((q, gamma))
}

/// `(M_2(F), t)`.
pub fn transpose_quaternion(f: &Field) -> (Algebra, Involution) {
    (csa::m2(f), csa::m2_transpose(f))
}

/// A small nonzero element: a variable, a product of two variables, or a
/// variable plus 1 or another variable.
pub fn random_element<R: Rng>(f: &Field, rng: &mut R) -> FieldElem {
    let n = f.nvars();
    if n == 0 {
        return f.one();
    }
    let x = f.var(rng.gen_range(0..n));
    let y = f.var(rng.gen_range(0..n));
    match rng.gen_range(0..4) {
        0 | 1 => x,
        2 => f.mul(&x, &y),
        _ if x != y => f.add(&x, &y),
        _ => f.add(&x, &f.one()),
    }
}

/// Parameters of `Int(c0 + c1 v + c2 uv) o gamma` on `[a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalSpec {
    pub a: FieldElem,
    pub b: FieldElem,
    pub x: [FieldElem; 3],
}

impl OrthogonalSpec {
    pub fn build(&self, f: &Field) -> Result<(Algebra, Involution), DecomposeError> {
        orthogonal_quaternion(f, &self.a, &self.b, [&self.x[0], &self.x[1], &self.x[2]])
    }
}

/// Random parameters with `b` a monomial and `x` one of `v`, `uv`,
/// `v + uv`, `1 + v`, so that `Nrd(x)` (the denominator of the involution
/// matrix) stays small.
pub fn random_orthogonal_spec<R: Rng>(f: &Field, rng: &mut R) -> OrthogonalSpec {
    let (zero, one) = (f.zero(), f.one());
    let a = if rng.gen_bool(0.2) { f.zero() } else { random_element(f, rng) };
    let b = random_monomial(f, rng);
    let x = match rng.gen_range(0..4) {
        0 => [zero.clone(), one.clone(), zero],
        1 => [zero.clone(), zero, one],
        2 => [zero, one.clone(), one],
        _ => [one.clone(), one, zero],
    };
    OrthogonalSpec { a, b, x }
}

/// A random orthogonal quaternion drawn from [`random_orthogonal_spec`].
pub fn random_orthogonal<R: Rng>(f: &Field, rng: &mut R) -> (Algebra, Involution) {
    loop {
        if let Ok(pair) = random_orthogonal_spec(f, rng).build(f) {
            return pair;
        }
    }
}

/// A variable or a product of two variables.
pub fn random_monomial<R: Rng>(f: &Field, rng: &mut R) -> FieldElem {
    let n = f.nvars();
    if n == 0 {
        return f.one();
    }
    let x = f.var(rng.gen_range(0..n));
    if rng.gen_bool(0.6) {
        x
    } else {
        f.mul(&x, &f.var(rng.gen_range(0..n)))
    }
}

/// Certified tensor product of the given factors.
pub fn product(label: impl Into<String>, factors: &[(Algebra, Involution)], level: VerifyLevel) -> Result<Instance, DecomposeError> {
    let (algebra, involution, certificate) = phi_candidate(factors, level)?;
    Ok(Instance { label: label.into(), algebra, involution, certificate })
}

/// Product of `n` random orthogonal quaternions.
pub fn random_orthogonal_product(f: &Field, n: usize, seed: u64, level: VerifyLevel) -> Result<Instance, DecomposeError> {
    let specs = random_orthogonal_specs(f, n, seed);
    let factors = specs.iter().map(|s| s.build(f)).collect::<Result<Vec<_>, _>>()?;
    product(format!("orth{n}-seed{seed}"), &factors, level)
}

/// The factor parameters behind [`random_orthogonal_product`].
pub fn random_orthogonal_specs(f: &Field, n: usize, seed: u64) -> Vec<OrthogonalSpec> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| loop {
            let s = random_orthogonal_spec(f, &mut r);
            if s.build(f).is_ok() {
                break s;
            }
        })
        .collect()
}

/// A sparse invertible matrix over GF(2): a permutation composed with a
/// few transvections. The first basis vector keeps its position so the
/// unit stays easy to read.
pub fn scramble_matrix<R: Rng>(f: &Field, d: usize, rng: &mut R) -> Matrix {
    let mut perm: Vec<usize> = (0..d).collect();
    perm[1..].shuffle(rng);
    let mut p = Matrix::zeros(f, d, d);
    for (c, &r) in perm.iter().enumerate() {
        p.set(r, c, f.one());
    }
    let moves = d.max(2);
    for _ in 0..moves {
        let i = rng.gen_range(0..d);
        let j = rng.gen_range(0..d);
        if i == j {
            continue;
        }
        // column operation: col_j += col_i
        for r in 0..d {
            let x = p.get(r, i);
            if !x.is_zero() {
                let y = f.add(p.get(r, j), x);
                p.set(r, j, y);
            }
        }
    }
    p
}

/// Re-express an instance in a random basis; the certificate is carried
/// over through `P^{-1}` and checked again.
pub fn scramble(inst: &Instance, seed: u64, level: VerifyLevel) -> Result<Instance, DecomposeError> {
    let f = inst.algebra.field();
    let mut r = rng(seed);
    let p = scramble_matrix(f, inst.algebra.dim(), &mut r);
    conjugate(inst, &p, format!("{}-scrambled{seed}", inst.label), level)
}

/// Transport an instance along the basis change given by the columns of
/// `p`. The transported involution is not re-validated (conjugation
/// preserves the axioms); the certificate is.
pub fn conjugate(inst: &Instance, p: &Matrix, label: String, level: VerifyLevel) -> Result<Instance, DecomposeError> {
    let f = inst.algebra.field();
    let (algebra, involution) = csa::change_basis(&inst.algebra, &inst.involution, p)?;
    let pinv = crate::fields::linalg::inverse(f, p).ok_or(crate::algebra::AlgebraError::SingularBasisChange)?;
    let map = |v: &Vector| pinv.mul_vec(f, v);
    let basis = inst.certificate.basis.iter().map(map).collect();
    let gens = inst.certificate.generators.iter().map(map).collect();
    let certificate = check_certificate(&algebra, &involution, basis, Some(gens), level)?;
    Ok(Instance { label, algebra, involution, certificate })
}

/// Replace the first certificate generator by the sum of the first two.
/// The generated subalgebra is unchanged, but the new generators are no
/// longer aligned with the tensor factors, which drives the extraction into
/// its non-scalar case.
pub fn mix_generators(inst: &Instance, level: VerifyLevel) -> Result<Instance, DecomposeError> {
    let g = &inst.certificate.generators;
    if g.len() < 2 {
        return Err(DecomposeError::Precondition("need two generators to mix".into()));
    }
    let mut gens = g.clone();
    gens[0] = inst.algebra.add(&g[0], &g[1]);
    let certificate = crate::decompose::certificate_from_generators(&inst.algebra, &inst.involution, gens, level)?;
    Ok(Instance { label: format!("{}-mixed", inst.label), certificate, ..inst.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scramble_keeps_certificate() {
        let f = Field::rational(3);
        let inst = random_orthogonal_product(&f, 2, 7, VerifyLevel::Full).unwrap();
        assert!(inst.certificate.is_valid());
        let s = scramble(&inst, 11, VerifyLevel::Full).unwrap();
        assert!(s.certificate.is_valid(), "{:?}", s.certificate.flags);
        assert_ne!(s.algebra, inst.algebra);
    }

    #[test]
    fn scramble_matrix_is_invertible() {
        let f = Field::rational(2);
        let mut r = rng(3);
        for d in [4, 16] {
            let p = scramble_matrix(&f, d, &mut r);
            assert_eq!(crate::fields::linalg::rank(&f, &p), d);
        }
    }
}
