//! Finite-dimensional unital algebras given by structure constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fields::linalg::{self, Coordinates, Matrix};
use crate::fields::{Field, FieldElem, FieldError};
use crate::VerifyLevel;

pub type Vector = Vec<FieldElem>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("structure constants are malformed: {0}")]
    Malformed(String),
    #[error("not associative: (e{0} e{1}) e{2} != e{0} (e{1} e{2})")]
    NotAssociative(usize, usize, usize),
    #[error("unit vector fails 1*e{0} = e{0} = e{0}*1")]
    NotUnital(usize),
    #[error("not commutative: e{0} e{1} != e{1} e{0}")]
    NotCommutative(usize, usize),
    #[error("basis change matrix is singular")]
    SingularBasisChange,
    #[error("subspace is not closed under multiplication or misses the unit")]
    NotSubalgebra,
    #[error("vectors are linearly dependent")]
    Dependent,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("element is not central")]
    NotCentral,
    #[error("element does not square to a non-square scalar")]
    NotQuadratic,
}

#[derive(Clone, Debug)]
pub struct Algebra {
    field: Field,
    dim: usize,
    /// `table[i * dim + j]` holds `e_i e_j` as sparse `(k, coefficient)`.
    table: Vec<Vec<(usize, FieldElem)>>,
    unit: Vector,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.dim == other.dim
            && self.unit == other.unit
            && self.table == other.table
    }
}

impl Algebra {
    /// Build from sparse rows; zero coefficients are dropped and repeated
    /// indices summed.
    pub fn new(
        field: Field,
        dim: usize,
        table: Vec<Vec<(usize, FieldElem)>>,
        unit: Vector,
    ) -> Result<Algebra, AlgebraError> {
        if table.len() != dim * dim {
            return Err(AlgebraError::Malformed(format!(
                "expected {} products, got {}",
                dim * dim,
                table.len()
            )));
        }
        if unit.len() != dim {
            return Err(AlgebraError::Malformed("unit vector has wrong length".into()));
        }
        let mut clean = Vec::with_capacity(table.len());
        for row in table {
            let mut merged: Vec<(usize, FieldElem)> = Vec::with_capacity(row.len());
            for (k, c) in row {
                if k >= dim {
                    return Err(AlgebraError::Malformed(format!("basis index {k} out of range")));
                }
                field.check(&c)?;
                match merged.iter_mut().find(|(kk, _)| *kk == k) {
                    Some(slot) => slot.1 = field.add(&slot.1, &c),
                    None => merged.push((k, c)),
                }
            }
            merged.retain(|(_, c)| !c.is_zero());
            merged.sort_by_key(|(k, _)| *k);
            clean.push(merged);
        }
        Ok(Algebra { field, dim, table: clean, unit })
    }

    /// Build from a product closure returning dense vectors.
    pub fn from_products(
        field: Field,
        dim: usize,
        unit: Vector,
        mut prod: impl FnMut(usize, usize) -> Vector,
    ) -> Result<Algebra, AlgebraError> {
        let mut table = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let v = prod(i, j);
                table.push(v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
            }
        }
        Algebra::new(field, dim, table, unit)
    }

    /// The one-dimensional algebra `F`.
    pub fn ground(field: &Field) -> Algebra {
        Algebra {
            field: field.clone(),
            dim: 1,
            table: vec![vec![(0, field.one())]],
            unit: vec![field.one()],
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &Vector {
        &self.unit
    }

    pub fn product_row(&self, i: usize, j: usize) -> &[(usize, FieldElem)] {
        &self.table[i * self.dim + j]
    }

    pub fn zero_vec(&self) -> Vector {
        vec![self.field.zero(); self.dim]
    }

    pub fn basis_vec(&self, i: usize) -> Vector {
        let mut v = self.zero_vec();
        v[i] = self.field.one();
        v
    }

    pub fn scalar(&self, c: &FieldElem) -> Vector {
        self.scale(c, &self.unit)
    }

    pub fn add(&self, x: &[FieldElem], y: &[FieldElem]) -> Vector {
        x.iter().zip(y).map(|(a, b)| self.field.add(a, b)).collect()
    }

    pub fn scale(&self, c: &FieldElem, x: &[FieldElem]) -> Vector {
        if c.is_zero() {
            return self.zero_vec();
        }
        x.iter()
            .map(|a| if a.is_zero() { a.clone() } else { self.field.mul(c, a) })
            .collect()
    }

    pub fn is_zero(&self, x: &[FieldElem]) -> bool {
        x.iter().all(|a| a.is_zero())
    }

    pub fn mul(&self, x: &[FieldElem], y: &[FieldElem]) -> Vector {
        let f = &self.field;
        let d = self.dim;
        let xs: Vec<usize> = (0..d).filter(|&i| !x[i].is_zero()).collect();
        let ys: Vec<usize> = (0..d).filter(|&j| !y[j].is_zero()).collect();
        let mut out = self.zero_vec();
        for &i in &xs {
            for &j in &ys {
                let row = &self.table[i * d + j];
                if row.is_empty() {
                    continue;
                }
                let c = f.mul(&x[i], &y[j]);
                for (k, s) in row {
                    let t = if s.is_one() { c.clone() } else { f.mul(&c, s) };
                    out[*k] = f.add(&out[*k], &t);
                }
            }
        }
        out
    }

    pub fn square(&self, x: &[FieldElem]) -> Vector {
        self.mul(x, x)
    }

    /// `x y + y x`.
    pub fn commutator(&self, x: &[FieldElem], y: &[FieldElem]) -> Vector {
        self.add(&self.mul(x, y), &self.mul(y, x))
    }

    /// Matrix of `y -> x y` (columns are images of basis vectors).
    pub fn left_matrix(&self, x: &[FieldElem]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim).map(|j| self.mul(x, &self.basis_vec(j))).collect();
        Matrix::from_cols(&self.field, &cols, self.dim)
    }

    /// Matrix of `y -> y x`.
    pub fn right_matrix(&self, x: &[FieldElem]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim).map(|j| self.mul(&self.basis_vec(j), x)).collect();
        Matrix::from_cols(&self.field, &cols, self.dim)
    }

    /// Matrix of `y -> x y + y x`.
    pub fn commutator_matrix(&self, x: &[FieldElem]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim)
            .map(|j| self.commutator(x, &self.basis_vec(j)))
            .collect();
        Matrix::from_cols(&self.field, &cols, self.dim)
    }

    /// Basis of `{y : y s = s y for all s in gens}`.
    pub fn centralizer(&self, gens: &[Vector]) -> Vec<Vector> {
        if gens.is_empty() {
            return (0..self.dim).map(|i| self.basis_vec(i)).collect();
        }
        let mut m = self.commutator_matrix(&gens[0]);
        for g in &gens[1..] {
            m = m.vstack(&self.commutator_matrix(g));
        }
        linalg::kernel(&self.field, &m)
    }

    pub fn check_unit(&self) -> Result<(), AlgebraError> {
        for i in 0..self.dim {
            let e = self.basis_vec(i);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                return Err(AlgebraError::NotUnital(i));
            }
        }
        Ok(())
    }

    fn assoc_triple(&self, i: usize, j: usize, k: usize) -> bool {
        let (ei, ej, ek) = (self.basis_vec(i), self.basis_vec(j), self.basis_vec(k));
        self.mul(&self.mul(&ei, &ej), &ek) == self.mul(&ei, &self.mul(&ej, &ek))
    }

    /// Associativity on all basis triples (`Full`) or on a seeded sample of
    /// triples plus random element triples (`Fast`).
    pub fn check_associative(&self, level: VerifyLevel) -> Result<(), AlgebraError> {
        let d = self.dim;
        match level {
            VerifyLevel::Full => {
                for i in 0..d {
                    for j in 0..d {
                        let eij = self.mul(&self.basis_vec(i), &self.basis_vec(j));
                        for k in 0..d {
                            let ek = self.basis_vec(k);
                            let lhs = self.mul(&eij, &ek);
                            let rhs = self.mul(&self.basis_vec(i), &self.mul(&self.basis_vec(j), &ek));
                            if lhs != rhs {
                                return Err(AlgebraError::NotAssociative(i, j, k));
                            }
                        }
                    }
                }
            }
            VerifyLevel::Fast => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a550c);
                let samples = (4 * d).min(d * d * d);
                for _ in 0..samples {
                    let (i, j, k) = (rng.gen_range(0..d), rng.gen_range(0..d), rng.gen_range(0..d));
                    if !self.assoc_triple(i, j, k) {
                        return Err(AlgebraError::NotAssociative(i, j, k));
                    }
                }
                // random 0/1 combinations catch failures spread over many triples
                for _ in 0..3 {
                    let x = self.random_bits(&mut rng);
                    let y = self.random_bits(&mut rng);
                    let z = self.random_bits(&mut rng);
                    if self.mul(&self.mul(&x, &y), &z) != self.mul(&x, &self.mul(&y, &z)) {
                        return self.check_associative(VerifyLevel::Full);
                    }
                }
            }
        }
        Ok(())
    }

    fn random_bits(&self, rng: &mut ChaCha8Rng) -> Vector {
        (0..self.dim).map(|_| self.field.from_bool(rng.gen_bool(0.5))).collect()
    }

    pub fn check_commutative(&self) -> Result<(), AlgebraError> {
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                if self.product_row(i, j) != self.product_row(j, i) {
                    return Err(AlgebraError::NotCommutative(i, j));
                }
            }
        }
        Ok(())
    }

    /// Induced algebra on the span of `basis`, which must contain the unit
    /// and be closed under multiplication. Returns the algebra and the
    /// coordinate map of the subspace.
    pub fn subalgebra(&self, basis: Vec<Vector>) -> Result<(Algebra, Coordinates), AlgebraError> {
        let f = &self.field;
        let coords = Coordinates::new(f, basis).ok_or(AlgebraError::Dependent)?;
        let m = coords.len();
        let unit = coords.coords(f, &self.unit).ok_or(AlgebraError::NotSubalgebra)?;
        let b = coords.basis().to_vec();
        let mut table = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let p = self.mul(&b[i], &b[j]);
                let c = coords.coords(f, &p).ok_or(AlgebraError::NotSubalgebra)?;
                table.push(c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect());
            }
        }
        Ok((Algebra { field: f.clone(), dim: m, table, unit }, coords))
    }

    /// Re-express in the basis given by the columns of `p`. Returns the new
    /// algebra and `p^{-1}` (which maps old coordinates to new ones).
    pub fn change_basis(&self, p: &Matrix) -> Result<(Algebra, Matrix), AlgebraError> {
        let f = &self.field;
        if p.rows() != self.dim || p.cols() != self.dim {
            return Err(AlgebraError::Dimension("basis change must be square".into()));
        }
        let pinv = linalg::inverse(f, p).ok_or(AlgebraError::SingularBasisChange)?;
        let cols = p.to_cols();
        let mut table = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let prod = self.mul(&cols[i], &cols[j]);
                let c = pinv.mul_vec(f, &prod);
                table.push(c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect());
            }
        }
        let unit = pinv.mul_vec(f, &self.unit);
        Ok((Algebra { field: f.clone(), dim: self.dim, table, unit }, pinv))
    }

    /// Kronecker product: basis `e_i (x) g_j` at index `i * dim(other) + j`.
    pub fn tensor(&self, other: &Algebra) -> Result<Algebra, AlgebraError> {
        if self.field != other.field {
            return Err(FieldError::Mismatch.into());
        }
        let f = &self.field;
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut table = Vec::with_capacity(d * d);
        for i in 0..da {
            for j in 0..db {
                for k in 0..da {
                    for l in 0..db {
                        let mut row = Vec::new();
                        for (m, a) in self.product_row(i, k) {
                            for (n, b) in other.product_row(j, l) {
                                row.push((m * db + n, f.mul(a, b)));
                            }
                        }
                        row.sort_by_key(|(x, _)| *x);
                        table.push(row);
                    }
                }
            }
        }
        let unit = tensor_vec(f, &self.unit, &other.unit);
        Ok(Algebra { field: f.clone(), dim: d, table, unit })
    }

    /// `A_K` for a tower `K` built on top of `F` by further `adjoin` stages.
    /// The basis is kept; structure constants are lifted.
    pub fn extend_scalars(&self, k: &Field) -> Result<Algebra, AlgebraError> {
        let d = self.field.depth();
        if k.depth() < d || k.ancestor(d) != self.field {
            return Err(AlgebraError::Dimension("target field does not extend the base field".into()));
        }
        let table = self
            .table
            .iter()
            .map(|row| row.iter().map(|(i, c)| (*i, k.lift(c.clone(), d))).collect())
            .collect();
        Ok(Algebra { field: k.clone(), dim: self.dim, table, unit: lift_vec(k, &self.unit, d) })
    }

    /// View the algebra over `L = F(s)` for a central `s` with `s^2 = g`,
    /// `g` a non-square in `F`.
    pub fn over_central_sqrt(&self, s: &[FieldElem]) -> Result<ScalarExtensionView, AlgebraError> {
        let f = &self.field;
        if !self.commutator_matrix(s).is_zero() {
            return Err(AlgebraError::NotCentral);
        }
        let g = self.scalar_part(&self.square(s)).ok_or(AlgebraError::NotQuadratic)?;
        if f.is_square(&g) {
            return Err(AlgebraError::NotQuadratic);
        }
        let l = f.adjoin_sqrt(&g)?;
        let mut chosen: Vec<Vector> = Vec::new();
        let mut span: Vec<Vector> = Vec::new();
        for i in 0..self.dim {
            let e = self.basis_vec(i);
            if linalg::in_span(f, &span, &e) {
                continue;
            }
            let mut trial = span.clone();
            trial.push(e.clone());
            trial.push(self.mul(s, &e));
            if linalg::span_basis(f, &trial, self.dim).len() == trial.len() {
                span = trial;
                chosen.push(e);
            }
        }
        if span.len() != self.dim {
            return Err(AlgebraError::Dimension("no basis over the quadratic subfield".into()));
        }
        let coords = Coordinates::new(f, span).ok_or(AlgebraError::Dependent)?;
        let mut view = ScalarExtensionView {
            algebra: Algebra::ground(&l),
            basis: chosen,
            element: s.to_vec(),
            coords,
        };
        let m = view.basis.len();
        let mut table = Vec::with_capacity(m * m);
        for a in &view.basis {
            for b in &view.basis {
                let v = view.lower_unchecked(f, &self.mul(a, b));
                table.push(v.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect());
            }
        }
        let unit = view.lower_unchecked(f, &self.unit);
        view.algebra = Algebra::new(l, m, table, unit)?;
        Ok(view)
    }

    /// `c` when `x = c * 1`.
    pub fn scalar_part(&self, x: &[FieldElem]) -> Option<FieldElem> {
        let f = &self.field;
        let p = self.unit.iter().position(|u| !u.is_zero())?;
        let c = f.div(&x[p], &self.unit[p]).ok()?;
        if self.scalar(&c) == x {
            Some(c)
        } else {
            None
        }
    }

    pub fn rank_of_left_ideal(&self, e: &[FieldElem]) -> usize {
        linalg::rank(&self.field, &self.left_matrix(e))
    }
}

/// An `F`-algebra re-read over `L = F(s)` for a central square root `s`.
#[derive(Clone, Debug)]
pub struct ScalarExtensionView {
    /// The algebra over `L` on the basis `c_j`.
    pub algebra: Algebra,
    /// `c_j` in the original coordinates; `{c_j, s c_j}` is an `F`-basis.
    pub basis: Vec<Vector>,
    pub element: Vector,
    coords: Coordinates,
}

impl ScalarExtensionView {
    fn lower_unchecked(&self, f: &Field, v: &[FieldElem]) -> Vector {
        self.coords
            .coords_unchecked(f, v)
            .chunks(2)
            .map(|p| FieldElem::Ext(Box::new([p[0].clone(), p[1].clone()])))
            .collect()
    }

    /// `L`-coordinates of an `F`-vector of the original algebra.
    pub fn lower(&self, f: &Field, v: &[FieldElem]) -> Option<Vector> {
        self.coords.coords(f, v)?;
        Some(self.lower_unchecked(f, v))
    }

    /// Back to `F`-coordinates: `sum (a_j + b_j s) c_j`.
    pub fn raise(&self, f: &Field, x: &[FieldElem]) -> Vector {
        let mut c = Vec::with_capacity(2 * x.len());
        for y in x {
            let p = y.parts().expect("element over the extension");
            c.push(p[0].clone());
            c.push(p[1].clone());
        }
        self.coords.combine(f, &c)
    }
}

/// Lift a vector over the depth-`from` ancestor of `k` into `k`.
pub fn lift_vec(k: &Field, v: &[FieldElem], from: usize) -> Vector {
    v.iter().map(|c| k.lift(c.clone(), from)).collect()
}

pub fn tensor_vec(f: &Field, x: &[FieldElem], y: &[FieldElem]) -> Vector {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for a in x {
        for b in y {
            out.push(if a.is_zero() || b.is_zero() { f.zero() } else { f.mul(a, b) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dual_numbers(f: &Field) -> Algebra {
        // basis 1, e with e^2 = 0
        Algebra::from_products(f.clone(), 2, vec![f.one(), f.zero()], |i, j| {
            let mut v = vec![f.zero(), f.zero()];
            match (i, j) {
                (0, k) | (k, 0) => v[k] = f.one(),
                _ => {}
            }
            v
        })
        .unwrap()
    }

    #[test]
    fn dual_numbers_are_valid() {
        let f = Field::rational(1);
        let a = dual_numbers(&f);
        a.check_unit().unwrap();
        a.check_associative(VerifyLevel::Full).unwrap();
        a.check_commutative().unwrap();
    }

    #[test]
    fn tensor_dimension_and_unit() {
        let f = Field::rational(1);
        let a = dual_numbers(&f);
        let t = a.tensor(&a).unwrap();
        assert_eq!(t.dim(), 4);
        t.check_unit().unwrap();
        t.check_associative(VerifyLevel::Full).unwrap();
    }

    #[test]
    fn identity_basis_change_is_noop() {
        let f = Field::rational(1);
        let a = dual_numbers(&f);
        let (b, _) = a.change_basis(&Matrix::identity(&f, 2)).unwrap();
        assert_eq!(a, b);
    }
}
