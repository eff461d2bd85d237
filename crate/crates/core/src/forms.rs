//! Symmetric bilinear forms and totally singular quadratic forms.
//!
//! In characteristic 2 the value `b(v, v) = sum_i v_i^2 b_ii` only sees the
//! diagonal, so representation and isotropy questions become Frobenius-twisted
//! linear systems and are decided exactly.

use serde::Serialize;
use thiserror::Error;

use crate::fields::linalg::{self, Matrix};
use crate::fields::{
    norm_field_basis, semilinear_solve, two_independence_degree, Field, FieldElem, FieldError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("slot {0} is zero")]
    ZeroSlot(usize),
    #[error("Gram matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("form was not constructed as a Pfister form")]
    NotPfister,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("target value is zero")]
    ZeroTarget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    field: Field,
    gram: Matrix,
    /// Slots when built by [`BilinearForm::pfister`].
    pfister_slots: Option<Vec<FieldElem>>,
}

impl BilinearForm {
    pub fn new(field: &Field, gram: Matrix) -> Result<BilinearForm, FormError> {
        if !gram.is_square() {
            return Err(FormError::LengthMismatch(gram.rows(), gram.cols()));
        }
        for i in 0..gram.rows() {
            field.check(gram.get(i, i))?;
            for j in i + 1..gram.cols() {
                if gram.get(i, j) != gram.get(j, i) {
                    return Err(FormError::NotSymmetric(i, j));
                }
            }
        }
        Ok(BilinearForm { field: field.clone(), gram, pfister_slots: None })
    }

    /// `<d1, ..., dn>`.
    pub fn diagonal(field: &Field, entries: &[FieldElem]) -> BilinearForm {
        BilinearForm {
            field: field.clone(),
            gram: Matrix::diagonal(field, entries),
            pfister_slots: None,
        }
    }

    /// `<<a1, ..., an>>`: diagonal entry at bitmask `I` is `prod_{i in I} a_i`.
    pub fn pfister(field: &Field, alphas: &[FieldElem]) -> Result<BilinearForm, FormError> {
        if let Some(i) = alphas.iter().position(|a| a.is_zero()) {
            return Err(FormError::ZeroSlot(i));
        }
        let diag = crate::fields::subset_products(field, alphas);
        Ok(BilinearForm {
            field: field.clone(),
            gram: Matrix::diagonal(field, &diag),
            pfister_slots: Some(alphas.to_vec()),
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn pfister_slots(&self) -> Option<&[FieldElem]> {
        self.pfister_slots.as_deref()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| i == j || self.gram.get(i, j).is_zero()))
    }

    pub fn diagonal_entries(&self) -> Vec<FieldElem> {
        (0..self.dim()).map(|i| self.gram.get(i, i).clone()).collect()
    }

    /// Drop the `<1>` slot of a Pfister form.
    pub fn pure_subform(&self) -> Result<BilinearForm, FormError> {
        if self.pfister_slots.is_none() {
            return Err(FormError::NotPfister);
        }
        let d = self.diagonal_entries();
        Ok(BilinearForm::diagonal(&self.field, &d[1..]))
    }

    pub fn orthogonal_sum(&self, other: &BilinearForm) -> Result<BilinearForm, FormError> {
        if self.field != other.field {
            return Err(FieldError::Mismatch.into());
        }
        let f = &self.field;
        let n = self.dim() + other.dim();
        let mut g = Matrix::zeros(f, n, n);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                g.set(i, j, self.gram.get(i, j).clone());
            }
        }
        let o = self.dim();
        for i in 0..other.dim() {
            for j in 0..other.dim() {
                g.set(o + i, o + j, other.gram.get(i, j).clone());
            }
        }
        Ok(BilinearForm { field: f.clone(), gram: g, pfister_slots: None })
    }

    pub fn tensor(&self, other: &BilinearForm) -> Result<BilinearForm, FormError> {
        if self.field != other.field {
            return Err(FieldError::Mismatch.into());
        }
        Ok(BilinearForm {
            field: self.field.clone(),
            gram: self.gram.kron(&self.field, &other.gram),
            pfister_slots: None,
        })
    }

    pub fn eval(&self, v: &[FieldElem], w: &[FieldElem]) -> FieldElem {
        let gw = self.gram.mul_vec(&self.field, w);
        let f = &self.field;
        v.iter().zip(&gw).fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
    }

    pub fn value(&self, v: &[FieldElem]) -> FieldElem {
        self.eval(v, v)
    }

    /// A vector `v` with `b(v, v) = target`, or `None` when no such vector
    /// exists. Exact for every symmetric Gram matrix.
    pub fn represents(&self, target: &FieldElem) -> Result<Option<Vec<FieldElem>>, FormError> {
        if target.is_zero() {
            return Err(FormError::ZeroTarget);
        }
        let gens: Vec<Vec<FieldElem>> =
            self.diagonal_entries().into_iter().map(|d| vec![d]).collect();
        Ok(semilinear_solve(&self.field, &gens, std::slice::from_ref(target)).particular)
    }

    /// A nonzero `v` with `b(v, v) = 0`, if one exists.
    pub fn isotropic_vector(&self) -> Option<Vec<FieldElem>> {
        let gens: Vec<Vec<FieldElem>> =
            self.diagonal_entries().into_iter().map(|d| vec![d]).collect();
        semilinear_solve(&self.field, &gens, &[self.field.zero()]).kernel.into_iter().next()
    }

    /// `<<a1,...,an>>` for constructed Pfister forms, a bracketed diagonal
    /// list for diagonal forms, row-major Gram otherwise.
    pub fn render(&self) -> String {
        let f = &self.field;
        let join = |xs: &[FieldElem]| xs.iter().map(|x| f.render(x)).collect::<Vec<_>>().join(", ");
        if let Some(slots) = &self.pfister_slots {
            return format!("<<{}>>", join(slots));
        }
        if self.is_diagonal() {
            return format!("[{}]", join(&self.diagonal_entries()));
        }
        let rows: Vec<String> = self.gram.to_rows().iter().map(|r| format!("[{}]", join(r))).collect();
        format!("[{}]", rows.join(", "))
    }
}

/// `[a1] + ... + [an]`, the quadratic form `x -> sum a_i x_i^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsQuadraticForm {
    pub coeffs: Vec<FieldElem>,
}

impl TsQuadraticForm {
    pub fn new(coeffs: Vec<FieldElem>) -> TsQuadraticForm {
        TsQuadraticForm { coeffs }
    }

    pub fn value(&self, f: &Field, x: &[FieldElem]) -> FieldElem {
        self.coeffs
            .iter()
            .zip(x)
            .fold(f.zero(), |acc, (a, xi)| f.add(&acc, &f.mul(a, &f.square(xi))))
    }

    /// `Ok(())` when anisotropic, otherwise a nonzero isotropic vector.
    pub fn anisotropy(&self, f: &Field) -> Result<(), Vec<FieldElem>> {
        let gens: Vec<Vec<FieldElem>> = self.coeffs.iter().map(|a| vec![a.clone()]).collect();
        match semilinear_solve(f, &gens, &[f.zero()]).kernel.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(v),
        }
    }

    pub fn is_anisotropic(&self, f: &Field) -> bool {
        self.anisotropy(f).is_ok()
    }

    pub fn render(&self, f: &Field) -> String {
        self.coeffs.iter().map(|a| format!("[{}]", f.render(a))).collect::<Vec<_>>().join(" + ")
    }
}

/// Metabolicity of `<<alphas>>`: an isotropic vector when metabolic.
pub fn pfister_is_metabolic(f: &Field, alphas: &[FieldElem]) -> Result<Option<Vec<FieldElem>>, FormError> {
    let b = BilinearForm::pfister(f, alphas)?;
    if two_independence_degree(f, alphas) == alphas.len() {
        return Ok(None);
    }
    let v = b.isotropic_vector().expect("dependent slots give an isotropic vector");
    Ok(Some(v))
}

/// `M` invertible and `M^T G_b M = G_c`.
pub fn verify_isometry(b: &BilinearForm, c: &BilinearForm, m: &Matrix) -> bool {
    let f = &b.field;
    if b.dim() != c.dim() || m.rows() != b.dim() || m.cols() != c.dim() {
        return false;
    }
    if linalg::rank(f, m) != m.rows() {
        return false;
    }
    m.transpose().mul(f, &b.gram).mul(f, m) == c.gram
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PVerdict {
    /// Proven by exact computation or a verified witness.
    Equivalent,
    /// Proven false.
    NotEquivalent,
    /// The necessary invariants agree; no isometry was exhibited.
    Consistent,
    /// A necessary invariant differs.
    Inconsistent,
    /// The supplied witness does not verify (no conclusion either way).
    WitnessRejected,
}

/// Equality of norm fields `F^2(a) = F^2(b)` by mutual membership.
pub fn same_norm_field(f: &Field, a: &[FieldElem], b: &[FieldElem]) -> bool {
    let ba = norm_field_basis(f, a);
    let bb = norm_field_basis(f, b);
    if ba.len() != bb.len() {
        return false;
    }
    ba.iter().all(|x| crate::fields::in_fsquare_span(f, x, &bb).is_some())
        && bb.iter().all(|x| crate::fields::in_fsquare_span(f, x, &ba).is_some())
}

/// Simple P-equivalence of `<<alphas>>` and `<<betas>>`: the lists agree
/// outside a pair of positions `(i, j)` where the binary Pfister forms are
/// isometric. `witness` supplies `(i, j, M)` with `M` a 4x4 isometry.
pub fn simply_p_equivalent(
    f: &Field,
    alphas: &[FieldElem],
    betas: &[FieldElem],
    witness: Option<(usize, usize, &Matrix)>,
) -> Result<PVerdict, FormError> {
    if alphas.len() != betas.len() {
        return Err(FormError::LengthMismatch(alphas.len(), betas.len()));
    }
    for (i, x) in alphas.iter().chain(betas).enumerate() {
        if x.is_zero() {
            return Err(FormError::ZeroSlot(i % alphas.len().max(1)));
        }
    }
    let n = alphas.len();
    if n == 0 {
        return Ok(PVerdict::Equivalent);
    }
    if n == 1 {
        let prod = f.mul(&alphas[0], &betas[0]);
        return Ok(if f.is_square(&prod) { PVerdict::Equivalent } else { PVerdict::NotEquivalent });
    }
    if let Some((i, j, m)) = witness {
        if i >= n || j >= n || i == j {
            return Ok(PVerdict::WitnessRejected);
        }
        let rest_equal = (0..n).filter(|&k| k != i && k != j).all(|k| alphas[k] == betas[k]);
        let bi = BilinearForm::pfister(f, &[alphas[i].clone(), alphas[j].clone()])?;
        let bj = BilinearForm::pfister(f, &[betas[i].clone(), betas[j].clone()])?;
        return Ok(if rest_equal && verify_isometry(&bi, &bj, m) {
            PVerdict::Equivalent
        } else {
            PVerdict::WitnessRejected
        });
    }
    let differing: Vec<usize> = (0..n).filter(|&k| alphas[k] != betas[k]).collect();
    if differing.is_empty() {
        return Ok(PVerdict::Equivalent);
    }
    if differing.len() > 2 {
        return Ok(PVerdict::Inconsistent);
    }
    let (i, j) = match differing.as_slice() {
        [a, b] => (*a, *b),
        [a] => (*a, if *a == 0 { 1 } else { 0 }),
        _ => unreachable!(),
    };
    let pa = [alphas[i].clone(), alphas[j].clone()];
    let pb = [betas[i].clone(), betas[j].clone()];
    let met_a = pfister_is_metabolic(f, &pa)?.is_some();
    let met_b = pfister_is_metabolic(f, &pb)?.is_some();
    Ok(if same_norm_field(f, &pa, &pb) && met_a == met_b {
        PVerdict::Consistent
    } else {
        PVerdict::Inconsistent
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::rational(2)
    }

    #[test]
    fn pfister_layout() {
        let f = f2();
        let (a, b) = (f.var(0), f.var(1));
        let p = BilinearForm::pfister(&f, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.diagonal_entries(), vec![f.one(), a.clone(), b.clone(), f.mul(&a, &b)]);
        let pure = p.pure_subform().unwrap();
        assert_eq!(pure.diagonal_entries(), vec![a.clone(), b.clone(), f.mul(&a, &b)]);
        assert!(BilinearForm::pfister(&f, &[f.zero()]).is_err());
        assert_eq!(p.render(), "<<t1, t2>>");
    }

    #[test]
    fn kronecker_order() {
        let f = f2();
        let (a, b) = (f.var(0), f.var(1));
        let x = BilinearForm::diagonal(&f, &[f.one(), a.clone()]);
        let y = BilinearForm::diagonal(&f, &[f.one(), b.clone()]);
        let t = x.tensor(&y).unwrap();
        assert_eq!(t.diagonal_entries(), vec![f.one(), b.clone(), a.clone(), f.mul(&a, &b)]);
    }

    #[test]
    fn representation_examples() {
        let f = f2();
        let p = BilinearForm::pfister(&f, &[f.var(0)]).unwrap();
        assert_eq!(p.represents(&f.var(0)).unwrap(), Some(vec![f.zero(), f.one()]));
        assert_eq!(p.represents(&f.parse("t1+1").unwrap()).unwrap(), Some(vec![f.one(), f.one()]));
        assert_eq!(p.represents(&f.var(1)).unwrap(), None);
    }

    #[test]
    fn anisotropy_examples() {
        let f = f2();
        assert!(TsQuadraticForm::new(vec![f.var(0), f.var(1)]).is_anisotropic(&f));
        let q = TsQuadraticForm::new(vec![f.var(0), f.var(0)]);
        let v = q.anisotropy(&f).unwrap_err();
        assert!(q.value(&f, &v).is_zero());
        let q = TsQuadraticForm::new(vec![f.one(), f.var(0), f.parse("t1+1").unwrap()]);
        let v = q.anisotropy(&f).unwrap_err();
        assert!(v.iter().any(|x| !x.is_zero()));
        assert!(q.value(&f, &v).is_zero());
    }

    #[test]
    fn metabolic_examples() {
        let f = f2();
        let v = pfister_is_metabolic(&f, &[f.one(), f.var(0)]).unwrap().unwrap();
        let b = BilinearForm::pfister(&f, &[f.one(), f.var(0)]).unwrap();
        assert!(b.value(&v).is_zero());
        assert!(pfister_is_metabolic(&f, &[f.var(0), f.var(1)]).unwrap().is_none());
        let dep = [f.var(0), f.parse("t1+1").unwrap()];
        assert!(pfister_is_metabolic(&f, &dep).unwrap().is_some());
    }

    #[test]
    fn isometry_witnesses() {
        let f = f2();
        let (a, b) = (f.var(0), f.var(1));
        let x = BilinearForm::diagonal(&f, &[a.clone(), b.clone()]);
        let y = BilinearForm::diagonal(&f, &[b.clone(), a.clone()]);
        let swap = Matrix::from_rows(vec![vec![f.zero(), f.one()], vec![f.one(), f.zero()]]);
        assert!(verify_isometry(&x, &x, &Matrix::identity(&f, 2)));
        assert!(verify_isometry(&x, &y, &swap));
        // <<t1>> ~ <<t1 * t1^2>> through diag(1, t1)
        let p = BilinearForm::pfister(&f, &[a.clone()]).unwrap();
        let q = BilinearForm::pfister(&f, &[f.mul(&a, &f.square(&a))]).unwrap();
        let m = Matrix::diagonal(&f, &[f.one(), a.clone()]);
        assert!(verify_isometry(&p, &q, &m));
    }

    #[test]
    fn p_equivalence_examples() {
        let f = f2();
        let (t1, t2) = (f.var(0), f.var(1));
        let scaled = f.mul(&t1, &f.square(&f.parse("t2+1").unwrap()));
        assert_eq!(
            simply_p_equivalent(&f, &[t1.clone()], &[scaled], None).unwrap(),
            PVerdict::Equivalent
        );
        assert_eq!(
            simply_p_equivalent(&f, &[t1.clone()], &[t2.clone()], None).unwrap(),
            PVerdict::NotEquivalent
        );
        let mut swap = Matrix::identity(&f, 4);
        swap.set(1, 1, f.zero());
        swap.set(2, 2, f.zero());
        swap.set(1, 2, f.one());
        swap.set(2, 1, f.one());
        let verdict = simply_p_equivalent(
            &f,
            &[t1.clone(), t2.clone()],
            &[t2.clone(), t1.clone()],
            Some((0, 1, &swap)),
        )
        .unwrap();
        assert_eq!(verdict, PVerdict::Equivalent);
        let no_witness =
            simply_p_equivalent(&f, &[t1.clone(), t2.clone()], &[t2.clone(), t1.clone()], None).unwrap();
        assert_eq!(no_witness, PVerdict::Consistent);
    }
}
