//! Associative algebras with involution: quaternion presentations,
//! involution checks, `Sym`/`Alt`, type, reduced norms and discriminants.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Vector};
use crate::fields::linalg::{self, Coordinates, Matrix};
use crate::fields::{Field, FieldElem, FieldError};
use crate::VerifyLevel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsaError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("quaternion slot b must be nonzero")]
    ZeroB,
    #[error("involution matrix has the wrong shape")]
    Shape,
    #[error("sigma^2 != id")]
    NotInvolutive,
    #[error("sigma does not fix the unit")]
    UnitNotFixed,
    #[error("sigma(e{0} e{1}) != sigma(e{1}) sigma(e{0})")]
    NotAntiMultiplicative(usize, usize),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("not a quaternion algebra: {0}")]
    NotQuaternion(String),
    #[error("involution is not orthogonal")]
    NotOrthogonal,
    #[error("presentation relation fails: {0}")]
    Presentation(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvolutionType {
    Orthogonal,
    Symplectic,
}

/// A validated involution of the first kind, stored by its matrix.
#[derive(Clone, Debug)]
pub struct Involution {
    matrix: Matrix,
    cols: Vec<Vector>,
    alt: OnceLock<AltData>,
}

#[derive(Clone, Debug)]
struct AltData {
    basis: Vec<Vector>,
    /// Coordinates on `Alt + F` with the unit last; absent when `1 in Alt`.
    with_unit: Option<Coordinates>,
}

impl PartialEq for Involution {
    fn eq(&self, other: &Involution) -> bool {
        self.matrix == other.matrix
    }
}

impl Eq for Involution {}

impl Involution {
    /// Check `sigma^2 = id`, `sigma(1) = 1` and anti-multiplicativity on
    /// basis pairs (every pair for `Full`, a seeded sample for `Fast`).
    pub fn validate(alg: &Algebra, matrix: Matrix, level: VerifyLevel) -> Result<Involution, CsaError> {
        let f = alg.field();
        let d = alg.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(CsaError::Shape);
        }
        let inv = Involution::unchecked(matrix);
        for i in 0..d {
            if inv.apply(f, &inv.cols[i]) != alg.basis_vec(i) {
                return Err(CsaError::NotInvolutive);
            }
        }
        if inv.apply(f, alg.unit()) != *alg.unit() {
            return Err(CsaError::UnitNotFixed);
        }
        let check = |i: usize, j: usize| -> Result<(), CsaError> {
            let lhs = inv.apply(f, &alg.mul(&alg.basis_vec(i), &alg.basis_vec(j)));
            let rhs = alg.mul(&inv.cols[j], &inv.cols[i]);
            if lhs == rhs {
                Ok(())
            } else {
                Err(CsaError::NotAntiMultiplicative(i, j))
            }
        };
        match level {
            VerifyLevel::Full => {
                for i in 0..d {
                    for j in 0..d {
                        check(i, j)?;
                    }
                }
            }
            VerifyLevel::Fast => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1a7e_50f7);
                for i in 0..d {
                    check(i, i)?;
                    check(0, i)?;
                }
                for _ in 0..4 * d {
                    check(rng.gen_range(0..d), rng.gen_range(0..d))?;
                }
            }
        }
        Ok(inv)
    }

    fn unchecked(matrix: Matrix) -> Involution {
        let cols = matrix.to_cols();
        Involution { matrix, cols, alt: OnceLock::new() }
    }

    fn alt_data(&self, alg: &Algebra) -> &AltData {
        self.alt.get_or_init(|| {
            let f = alg.field();
            let cols: Vec<Vector> = self.cols.iter().enumerate().map(|(i, c)| {
                let mut c = c.clone();
                c[i] = f.add(&c[i], &f.one());
                c
            }).collect();
            let basis = linalg::span_basis(f, &cols, alg.dim());
            let mut with_unit = basis.clone();
            with_unit.push(alg.unit().clone());
            AltData { with_unit: Coordinates::new(f, with_unit), basis }
        })
    }

    /// Basis of `Alt(A, sigma)`, the image of `id + sigma`; cached.
    pub fn alt_basis(&self, alg: &Algebra) -> &[Vector] {
        &self.alt_data(alg).basis
    }

    /// Coordinates on `Alt + F` (unit last) for orthogonal involutions.
    pub fn alt_plus_unit(&self, alg: &Algebra) -> Option<&Coordinates> {
        self.alt_data(alg).with_unit.as_ref()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, f: &Field, x: &[FieldElem]) -> Vector {
        let mut out = vec![f.zero(); x.len()];
        for (c, col) in x.iter().zip(&self.cols) {
            if c.is_zero() {
                continue;
            }
            for (o, y) in out.iter_mut().zip(col) {
                if !y.is_zero() {
                    *o = f.add(o, &f.mul(c, y));
                }
            }
        }
        out
    }
}

/// Generators `u, v` of a quaternion algebra `[a, b)`:
/// `u^2 + u = a`, `v^2 = b`, `uv + vu = v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuaternionPresentation {
    pub a: FieldElem,
    pub b: FieldElem,
    pub u: Vector,
    pub v: Vector,
}

impl QuaternionPresentation {
    /// Check the relations for `u, v` inside `alg` and read off `a, b`.
    pub fn recognize(alg: &Algebra, u: Vector, v: Vector) -> Result<QuaternionPresentation, CsaError> {
        let a = alg
            .scalar_part(&alg.add(&alg.square(&u), &u))
            .ok_or(CsaError::Presentation("u^2 + u in F"))?;
        let b = alg.scalar_part(&alg.square(&v)).ok_or(CsaError::Presentation("v^2 in F"))?;
        if b.is_zero() {
            return Err(CsaError::ZeroB);
        }
        if alg.commutator(&u, &v) != v {
            return Err(CsaError::Presentation("uv + vu = v"));
        }
        let p = QuaternionPresentation { a, b, u, v };
        if linalg::span_basis(alg.field(), &p.basis(alg), alg.dim()).len() != 4 {
            return Err(CsaError::Presentation("1, u, v, uv independent"));
        }
        Ok(p)
    }

    /// `1, u, v, uv` as vectors of the ambient algebra.
    pub fn basis(&self, alg: &Algebra) -> Vec<Vector> {
        vec![alg.unit().clone(), self.u.clone(), self.v.clone(), alg.mul(&self.u, &self.v)]
    }

    /// The quaternion subalgebra in the basis `1, u, v, uv`.
    pub fn subalgebra(&self, alg: &Algebra) -> Result<(Algebra, Coordinates), CsaError> {
        Ok(alg.subalgebra(self.basis(alg))?)
    }

    /// The canonical involution `u -> u + 1, v -> v` on the span of the
    /// presentation, as a matrix in that basis.
    pub fn canonical_matrix(f: &Field) -> Matrix {
        let mut m = Matrix::identity(f, 4);
        m.set(0, 1, f.one());
        m
    }
}

/// `[a, b)` on the basis `1, u, v, uv`.
pub fn quaternion(f: &Field, a: &FieldElem, b: &FieldElem) -> Result<(Algebra, QuaternionPresentation), CsaError> {
    if b.is_zero() {
        return Err(CsaError::ZeroB);
    }
    let one = f.one();
    let ab = f.mul(a, b);
    let rows: [[Vec<(usize, FieldElem)>; 4]; 4] = [
        [vec![(0, one.clone())], vec![(1, one.clone())], vec![(2, one.clone())], vec![(3, one.clone())]],
        [
            vec![(1, one.clone())],
            vec![(0, a.clone()), (1, one.clone())],
            vec![(3, one.clone())],
            vec![(2, a.clone()), (3, one.clone())],
        ],
        [
            vec![(2, one.clone())],
            vec![(2, one.clone()), (3, one.clone())],
            vec![(0, b.clone())],
            vec![(0, b.clone()), (1, b.clone())],
        ],
        [vec![(3, one.clone())], vec![(2, a.clone())], vec![(1, b.clone())], vec![(0, ab)]],
    ];
    let table = rows.into_iter().flatten().collect();
    let alg = Algebra::new(f.clone(), 4, table, vec![one, f.zero(), f.zero(), f.zero()])?;
    alg.check_associative(VerifyLevel::Full)?;
    let pres = QuaternionPresentation { a: a.clone(), b: b.clone(), u: alg.basis_vec(1), v: alg.basis_vec(2) };
    Ok((alg, pres))
}

/// Canonical (symplectic) involution of a presented quaternion subalgebra
/// that spans the whole algebra.
pub fn canonical_involution(alg: &Algebra, pres: &QuaternionPresentation) -> Result<Involution, CsaError> {
    let f = alg.field();
    if alg.dim() != 4 {
        return Err(CsaError::NotQuaternion("dimension must be 4".into()));
    }
    let p = Matrix::from_cols(f, &pres.basis(alg), 4);
    let pinv = linalg::inverse(f, &p).ok_or(CsaError::Presentation("1, u, v, uv independent"))?;
    let m = p.mul(f, &QuaternionPresentation::canonical_matrix(f)).mul(f, &pinv);
    Involution::validate(alg, m, VerifyLevel::Full)
}

/// `M_2(F)` on matrix units `e11, e12, e21, e22` (index `2i + j`).
pub fn m2(f: &Field) -> Algebra {
    let mut table = Vec::with_capacity(16);
    for x in 0..4 {
        for y in 0..4 {
            let (i, j, k, l) = (x / 2, x % 2, y / 2, y % 2);
            table.push(if j == k { vec![(2 * i + l, f.one())] } else { vec![] });
        }
    }
    Algebra::new(f.clone(), 4, table, vec![f.one(), f.zero(), f.zero(), f.one()]).expect("well-formed table")
}

/// Transpose on [`m2`].
pub fn m2_transpose(f: &Field) -> Involution {
    let mut m = Matrix::identity(f, 4);
    m.set(1, 1, f.zero());
    m.set(2, 2, f.zero());
    m.set(1, 2, f.one());
    m.set(2, 1, f.one());
    Involution::validate(&m2(f), m, VerifyLevel::Full).expect("transpose is an involution")
}

/// `(Alt, Sym)`: image and kernel of `id + sigma`.
pub fn sym_alt(alg: &Algebra, sigma: &Involution) -> (Vec<Vector>, Vec<Vector>) {
    let f = alg.field();
    let m = sigma.matrix().add(f, &Matrix::identity(f, alg.dim()));
    let sym = linalg::kernel(f, &m);
    let alt = linalg::span_basis(f, &m.to_cols(), alg.dim());
    (sym, alt)
}

pub fn alt_space(alg: &Algebra, sigma: &Involution) -> Vec<Vector> {
    sigma.alt_basis(alg).to_vec()
}

/// Orthogonal iff `1` is not alternating.
pub fn involution_type(alg: &Algebra, sigma: &Involution) -> InvolutionType {
    if sigma.alt_plus_unit(alg).is_some() {
        InvolutionType::Orthogonal
    } else {
        InvolutionType::Symplectic
    }
}

pub fn inverse_element(alg: &Algebra, x: &[FieldElem]) -> Option<Vector> {
    let f = alg.field();
    let (y, _) = linalg::solve(f, &alg.left_matrix(x), alg.unit())?;
    (alg.mul(&y, x) == *alg.unit()).then_some(y)
}

/// `x -> s sigma(x) s^{-1}`, validated.
pub fn int_conjugate(alg: &Algebra, sigma: &Involution, s: &[FieldElem]) -> Result<Involution, CsaError> {
    let f = alg.field();
    let si = inverse_element(alg, s).ok_or(CsaError::NotInvertible)?;
    let m = alg.left_matrix(s).mul(f, &alg.right_matrix(&si)).mul(f, sigma.matrix());
    Involution::validate(alg, m, VerifyLevel::Full)
}

/// `(A (x) B, sigma (x) tau)` with Kronecker indexing.
pub fn tensor_with_involution(
    a: &Algebra,
    sigma: &Involution,
    b: &Algebra,
    tau: &Involution,
    level: VerifyLevel,
) -> Result<(Algebra, Involution), CsaError> {
    let t = a.tensor(b)?;
    let m = sigma.matrix().kron(a.field(), tau.matrix());
    let inv = Involution::validate(&t, m, level)?;
    Ok((t, inv))
}

/// `C_A(S)` with its induced structure and the coordinate map.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    pub algebra: Algebra,
    pub coords: Coordinates,
}

impl Subalgebra {
    pub fn basis(&self) -> &[Vector] {
        self.coords.basis()
    }

    /// Ambient vector of an element given in subalgebra coordinates.
    pub fn embed(&self, f: &Field, x: &[FieldElem]) -> Vector {
        self.coords.combine(f, x)
    }
}

pub fn centralizer(alg: &Algebra, s: &[Vector]) -> Result<Subalgebra, CsaError> {
    let basis = alg.centralizer(s);
    let (algebra, coords) = alg.subalgebra(basis)?;
    Ok(Subalgebra { algebra, coords })
}

/// `sqrt(det L_x)`.
pub fn nrd_quaternion(q: &Algebra, x: &[FieldElem]) -> Result<FieldElem, CsaError> {
    if q.dim() != 4 {
        return Err(CsaError::NotQuaternion("dimension must be 4".into()));
    }
    let f = q.field();
    let det = linalg::det(f, &q.left_matrix(x));
    f.sqrt(&det).map_err(|_| CsaError::NotQuaternion("det L_x is not a square".into()))
}

/// Reduced trace from `x^2 + Trd(x) x + Nrd(x) = 0`.
pub fn trd_quaternion(q: &Algebra, x: &[FieldElem]) -> Result<FieldElem, CsaError> {
    let f = q.field();
    let n = nrd_quaternion(q, x)?;
    if let Some(c) = q.scalar_part(x) {
        if f.square(&c) != n {
            return Err(CsaError::NotQuaternion("scalar norm mismatch".into()));
        }
        return Ok(f.zero());
    }
    let rhs = q.add(&q.square(x), &q.scalar(&n));
    let m = Matrix::from_cols(f, &[x.to_vec()], 4);
    let (t, _) = linalg::solve(f, &m, &rhs)
        .ok_or_else(|| CsaError::NotQuaternion("no quadratic relation".into()))?;
    Ok(t[0].clone())
}

/// `Nrd(w)` for a nonzero `w` in `Alt(Q, sigma)`.
pub fn disc_orthogonal(q: &Algebra, sigma: &Involution) -> Result<FieldElem, CsaError> {
    if involution_type(q, sigma) != InvolutionType::Orthogonal {
        return Err(CsaError::NotOrthogonal);
    }
    let alt = alt_space(q, sigma);
    let w = alt.first().ok_or(CsaError::NotOrthogonal)?;
    nrd_quaternion(q, w)
}

/// `(Q, sigma) ~ (M_2(F), t)`: orthogonal with trivial discriminant.
pub fn is_transpose_pair(q: &Algebra, sigma: &Involution) -> Result<bool, CsaError> {
    if involution_type(q, sigma) != InvolutionType::Orthogonal {
        return Ok(false);
    }
    let d = disc_orthogonal(q, sigma)?;
    Ok(q.field().is_square(&d))
}

/// Transport `(A, sigma)` to the basis given by the columns of `p`.
pub fn change_basis(alg: &Algebra, sigma: &Involution, p: &Matrix) -> Result<(Algebra, Involution), CsaError> {
    let f = alg.field();
    let (a2, pinv) = alg.change_basis(p)?;
    let m = pinv.mul(f, sigma.matrix()).mul(f, p);
    Ok((a2, Involution::unchecked(m)))
}

/// `e^2 = e`, `sigma(e) e = 0` and `dim eA = dim A / 2`.
pub fn verify_metabolic_idempotent(alg: &Algebra, sigma: &Involution, e: &[FieldElem]) -> bool {
    let f = alg.field();
    alg.square(e) == e
        && alg.is_zero(&alg.mul(&sigma.apply(f, e), e))
        && 2 * alg.rank_of_left_ideal(e) == alg.dim()
}

/// `sqrt(dim A)` when the dimension is a perfect square.
pub fn degree(alg: &Algebra) -> Option<usize> {
    let d = alg.dim();
    let r = (d as f64).sqrt().round() as usize;
    (r * r == d).then_some(r)
}
