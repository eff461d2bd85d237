//! Totally singular conic algebras: commutative algebras in which every
//! element squares into the ground field.

use std::sync::OnceLock;

use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Vector};
use crate::fields::linalg::{self, Matrix};
use crate::fields::{in_fsquare_span, semilinear_solve, subset_products, Field, FieldElem};
use crate::forms::same_norm_field;
use crate::VerifyLevel;

/// Largest dimension for the general derivation solver (`d^2` unknowns).
const GENERAL_DERIVATION_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConicError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("basis square outside F: e{0}^2 is not a scalar")]
    SquareOutsideField(usize),
    #[error("algebra is not rho-generated")]
    NotRhoGenerated,
    #[error("no derivation extension")]
    NoDerivationExtension,
    #[error("square condition violated for generator {0}")]
    SquareCondition(usize),
    #[error("images of generators {0} and {1} do not commute")]
    ImagesDoNotCommute(usize, usize),
    #[error("generator products do not form a basis")]
    NotGenerating,
    #[error("R_n needs n >= 4, got {0}")]
    InvalidRn(usize),
    #[error("dimension {0} exceeds the cap {1}")]
    DimensionCap(usize, usize),
    #[error("expected {0} items, got {1}")]
    Arity(usize, usize),
    #[error("map is not multiplicative on e{0} e{1}")]
    NotMultiplicative(usize, usize),
    #[error("inconsistent rank data: {0}")]
    Inconsistent(String),
}

/// A subfield `K` of `A` given as a square-root tower over `F`.
#[derive(Clone, Debug)]
pub struct SubfieldEmbedding {
    /// `K = F(sqrt b_1, ..., sqrt b_r)`.
    pub field: Field,
    /// Elements `v_j` of `A` with `v_j^2 = squares[j]`.
    pub generators: Vec<Vector>,
    pub squares: Vec<FieldElem>,
    /// Columns are images of the tower basis (bitmask order).
    pub embedding: Matrix,
    /// Elements `u_i` of the maximal ideal with `u_i^2 = 0` whose classes
    /// form a `K`-basis of `m / m^2`.
    pub complement: Vec<Vector>,
}

impl SubfieldEmbedding {
    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    /// Image of `x in K` in `A`.
    pub fn embed(&self, alg: &Algebra, x: &FieldElem) -> Vector {
        self.embed_at(alg, x, self.degree())
    }

    fn embed_at(&self, alg: &Algebra, x: &FieldElem, depth: usize) -> Vector {
        match x.parts() {
            None => alg.scalar(x),
            Some([a, b]) => {
                let lo = self.embed_at(alg, a, depth - 1);
                let hi = self.embed_at(alg, b, depth - 1);
                alg.add(&lo, &alg.mul(&self.generators[depth - 1], &hi))
            }
        }
    }

    /// Injective, unital and multiplicative on the tower basis.
    pub fn verify(&self, alg: &Algebra) -> bool {
        let f = alg.field();
        let n = 1usize << self.degree();
        if linalg::rank(f, &self.embedding) != n {
            return false;
        }
        if self.embed(alg, &self.field.one()) != *alg.unit() {
            return false;
        }
        self.generators.iter().zip(&self.squares).all(|(v, b)| alg.square(v) == alg.scalar(b))
            && (0..self.degree()).all(|i| {
                (i + 1..self.degree())
                    .all(|j| alg.commutator(&self.generators[i], &self.generators[j]).iter().all(|c| c.is_zero()))
            })
    }
}

#[derive(Clone, Debug)]
struct Analysis {
    ideal: Vec<Vector>,
    ideal_square: Vec<Vector>,
    subfield: SubfieldEmbedding,
    loewy: usize,
    socle_dim: usize,
}

#[derive(Clone, Debug)]
pub struct ConicAlgebra {
    alg: Algebra,
    labels: Vec<String>,
    squares: Vec<FieldElem>,
    analysis: OnceLock<Analysis>,
}

impl ConicAlgebra {
    /// Check commutativity, associativity, the unit and that every basis
    /// element squares into `F * 1`.
    pub fn validate(alg: Algebra, level: VerifyLevel) -> Result<ConicAlgebra, ConicError> {
        alg.check_unit()?;
        alg.check_commutative()?;
        alg.check_associative(level)?;
        let mut squares = Vec::with_capacity(alg.dim());
        for i in 0..alg.dim() {
            let sq = alg.square(&alg.basis_vec(i));
            squares.push(alg.scalar_part(&sq).ok_or(ConicError::SquareOutsideField(i))?);
        }
        let labels = (0..alg.dim()).map(|i| format!("b{i}")).collect();
        Ok(ConicAlgebra { alg, labels, squares, analysis: OnceLock::new() })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> ConicAlgebra {
        assert_eq!(labels.len(), self.alg.dim());
        self.labels = labels;
        self
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn field(&self) -> &Field {
        self.alg.field()
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `b_i^2` as scalars.
    pub fn squares(&self) -> &[FieldElem] {
        &self.squares
    }

    /// `x^2 = sum_i x_i^2 b_i^2`.
    pub fn square_of(&self, x: &[FieldElem]) -> FieldElem {
        let f = self.field();
        x.iter()
            .zip(&self.squares)
            .fold(f.zero(), |acc, (c, b)| f.add(&acc, &f.mul(&f.square(c), b)))
    }

    fn analysis(&self) -> &Analysis {
        self.analysis.get_or_init(|| analyse(&self.alg, &self.squares))
    }

    /// `F`-basis of `m = {x : x^2 = 0}`.
    pub fn maximal_ideal(&self) -> &[Vector] {
        &self.analysis().ideal
    }

    pub fn ideal_square(&self) -> &[Vector] {
        &self.analysis().ideal_square
    }

    pub fn maximal_subfield(&self) -> &SubfieldEmbedding {
        &self.analysis().subfield
    }

    /// `log2 [K : F]`.
    pub fn residue_rank(&self) -> usize {
        self.maximal_subfield().degree()
    }

    /// `r_F(K) + dim_K(m / m^2)`.
    pub fn min_rank(&self) -> usize {
        let r = self.residue_rank();
        r + self.maximal_subfield().complement.len()
    }

    pub fn loewy_length(&self) -> usize {
        self.analysis().loewy
    }

    pub fn socle_dim(&self) -> usize {
        self.analysis().socle_dim
    }

    /// The socle `ann(m)` is one-dimensional over `K`. Fields count.
    pub fn is_frobenius(&self) -> bool {
        self.socle_dim() == 1 << self.residue_rank()
    }

    /// `dim A = 2^{r_F(A)}`, cross-checked against
    /// `r_F(A) = ll(A) + r_F(A/m) - 1`.
    pub fn is_rho_generated(&self) -> Result<bool, ConicError> {
        let rank = self.min_rank();
        let by_dim = rank < usize::BITS as usize && self.dim() == 1usize << rank;
        let by_loewy = rank + 1 == self.loewy_length() + self.residue_rank();
        if by_dim != by_loewy {
            return Err(ConicError::Inconsistent(format!(
                "dim {} with r_F = {rank}, ll = {}, r_F(K) = {}",
                self.dim(),
                self.loewy_length(),
                self.residue_rank()
            )));
        }
        Ok(by_dim)
    }

    /// Leibniz extension of `gens[i] -> images[i]` to a derivation of `A`.
    pub fn extend_derivation(&self, gens: &[Vector], images: &[Vector]) -> Result<Matrix, ConicError> {
        if gens.len() != images.len() {
            return Err(ConicError::Arity(gens.len(), images.len()));
        }
        let d = match self.clifford_basis(gens) {
            Some(m) => self.derivation_on_products(gens, images, &m)?,
            None => self.derivation_general(gens, images)?,
        };
        if self.leibniz_failure(&d).is_some() {
            return Err(ConicError::NoDerivationExtension);
        }
        Ok(d)
    }

    /// Matrix whose columns are the subset products of `gens`, when those
    /// form a basis.
    fn clifford_basis(&self, gens: &[Vector]) -> Option<Matrix> {
        if gens.len() >= usize::BITS as usize || 1usize << gens.len() != self.dim() {
            return None;
        }
        let prods = vector_subset_products(&self.alg, gens);
        let m = Matrix::from_cols(self.field(), &prods, self.dim());
        linalg::inverse(self.field(), &m).map(|_| m)
    }

    fn derivation_on_products(&self, gens: &[Vector], images: &[Vector], basis: &Matrix) -> Result<Matrix, ConicError> {
        let a = &self.alg;
        let f = a.field();
        let n = gens.len();
        let prods = basis.to_cols();
        let mut delta: Vec<Vector> = vec![a.zero_vec()];
        for mask in 1usize..1 << n {
            let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
            let rest = mask & !(1 << top);
            let v = a.add(&a.mul(&prods[rest], &images[top]), &a.mul(&delta[rest], &gens[top]));
            delta.push(v);
        }
        let dm = Matrix::from_cols(f, &delta, a.dim());
        let inv = linalg::inverse(f, basis).ok_or(ConicError::NotGenerating)?;
        Ok(dm.mul(f, &inv))
    }

    fn derivation_general(&self, gens: &[Vector], images: &[Vector]) -> Result<Matrix, ConicError> {
        let a = &self.alg;
        let f = a.field();
        let d = a.dim();
        if d > GENERAL_DERIVATION_CAP {
            return Err(ConicError::DimensionCap(d, GENERAL_DERIVATION_CAP));
        }
        // unknown D[r][c] sits at column r * d + c
        let var = |r: usize, c: usize| r * d + c;
        let lefts: Vec<Matrix> = (0..d).map(|i| a.left_matrix(&a.basis_vec(i))).collect();
        let mut rows: Vec<Vec<FieldElem>> = Vec::new();
        let mut rhs: Vec<FieldElem> = Vec::new();
        for i in 0..d {
            for j in i..d {
                let prod = a.mul(&a.basis_vec(i), &a.basis_vec(j));
                for k in 0..d {
                    let mut row = vec![f.zero(); d * d];
                    // D(e_i e_j)_k
                    for (c, pc) in prod.iter().enumerate() {
                        if !pc.is_zero() {
                            row[var(k, c)] = f.add(&row[var(k, c)], pc);
                        }
                    }
                    // (e_i D e_j)_k and (e_j D e_i)_k
                    for c in 0..d {
                        let li = lefts[i].get(k, c);
                        if !li.is_zero() {
                            row[var(c, j)] = f.add(&row[var(c, j)], li);
                        }
                        let lj = lefts[j].get(k, c);
                        if !lj.is_zero() {
                            row[var(c, i)] = f.add(&row[var(c, i)], lj);
                        }
                    }
                    if row.iter().any(|x| !x.is_zero()) {
                        rows.push(row);
                        rhs.push(f.zero());
                    }
                }
            }
        }
        for (g, img) in gens.iter().zip(images) {
            for k in 0..d {
                let mut row = vec![f.zero(); d * d];
                for c in 0..d {
                    row[var(k, c)] = g[c].clone();
                }
                rows.push(row);
                rhs.push(img[k].clone());
            }
        }
        let m = Matrix::from_rows_with_width(rows, d * d);
        let (x, _) = linalg::solve(f, &m, &rhs).ok_or(ConicError::NoDerivationExtension)?;
        Ok(Matrix::from_rows(x.chunks(d).map(|r| r.to_vec()).collect()))
    }

    fn leibniz_failure(&self, dm: &Matrix) -> Option<(usize, usize)> {
        let a = &self.alg;
        let f = a.field();
        let de: Vec<Vector> = dm.to_cols();
        for i in 0..a.dim() {
            for j in i..a.dim() {
                let (ei, ej) = (a.basis_vec(i), a.basis_vec(j));
                let lhs = dm.mul_vec(f, &a.mul(&ei, &ej));
                let rhs = a.add(&a.mul(&ei, &de[j]), &a.mul(&de[i], &ej));
                if lhs != rhs {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// The algebra map `A -> target` sending `gens[i] -> images[i]`, when
    /// the subset products of `gens` form a basis.
    pub fn hom_from_generators(
        &self,
        gens: &[Vector],
        target: &Algebra,
        images: &[Vector],
    ) -> Result<Matrix, ConicError> {
        if gens.len() != images.len() {
            return Err(ConicError::Arity(gens.len(), images.len()));
        }
        let a = &self.alg;
        let f = a.field();
        let basis = self.clifford_basis(gens).ok_or(ConicError::NotGenerating)?;
        for (i, (g, img)) in gens.iter().zip(images).enumerate() {
            let b = a.scalar_part(&a.square(g)).ok_or(ConicError::SquareCondition(i))?;
            if target.square(img) != target.scalar(&b) {
                return Err(ConicError::SquareCondition(i));
            }
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if target.commutator(&images[i], &images[j]).iter().any(|c| !c.is_zero()) {
                    return Err(ConicError::ImagesDoNotCommute(i, j));
                }
            }
        }
        let img_prods = vector_subset_products(target, images);
        let fm = Matrix::from_cols(f, &img_prods, target.dim());
        let inv = linalg::inverse(f, &basis).ok_or(ConicError::NotGenerating)?;
        let h = fm.mul(f, &inv);
        if h.mul_vec(f, a.unit()) != *target.unit() {
            return Err(ConicError::NotMultiplicative(0, 0));
        }
        let cols = h.to_cols();
        for i in 0..a.dim() {
            for j in i..a.dim() {
                let lhs = h.mul_vec(f, &a.mul(&a.basis_vec(i), &a.basis_vec(j)));
                if lhs != target.mul(&cols[i], &cols[j]) {
                    return Err(ConicError::NotMultiplicative(i, j));
                }
            }
        }
        Ok(h)
    }

    /// Equal dimension and `F^2(squares) = F^2(squares')`; both algebras
    /// must be rho-generated.
    pub fn isomorphic(&self, other: &ConicAlgebra) -> Result<bool, ConicError> {
        if !self.is_rho_generated()? || !other.is_rho_generated()? {
            return Err(ConicError::NotRhoGenerated);
        }
        if self.field() != other.field() {
            return Ok(false);
        }
        Ok(self.dim() == other.dim() && same_norm_field(self.field(), &self.squares, &other.squares))
    }

    pub fn tensor(&self, other: &ConicAlgebra) -> Result<ConicAlgebra, ConicError> {
        let t = self.alg.tensor(&other.alg)?;
        let labels = self
            .labels
            .iter()
            .flat_map(|a| other.labels.iter().map(move |b| format!("{a}*{b}")))
            .collect();
        Ok(ConicAlgebra::validate(t, VerifyLevel::Fast)?.with_labels(labels))
    }
}

/// Products over every subset of `gens`, bitmask order.
pub fn vector_subset_products(alg: &Algebra, gens: &[Vector]) -> Vec<Vector> {
    let mut out = vec![alg.unit().clone()];
    for g in gens {
        let more: Vec<Vector> = out.iter().map(|p| alg.mul(p, g)).collect();
        out.extend(more);
    }
    out
}

fn analyse(alg: &Algebra, squares: &[FieldElem]) -> Analysis {
    let f = alg.field();
    let d = alg.dim();
    let gens: Vec<Vec<FieldElem>> = squares.iter().map(|b| vec![b.clone()]).collect();
    let ideal = semilinear_solve(f, &gens, &[f.zero()]).kernel;

    let mut products = Vec::new();
    for (i, x) in ideal.iter().enumerate() {
        for y in &ideal[i..] {
            products.push(alg.mul(x, y));
        }
    }
    let ideal_square = linalg::span_basis(f, &products, d);

    let subfield = build_subfield(alg, squares, &ideal_square);

    let mut loewy = 1;
    let mut power = ideal.clone();
    while !power.is_empty() {
        loewy += 1;
        let mut next = Vec::new();
        for x in &power {
            for y in &ideal {
                next.push(alg.mul(x, y));
            }
        }
        power = linalg::span_basis(f, &next, d);
    }

    // m is generated as an ideal by the complement, so ann(m) is cut out
    // by the complement alone
    let socle_dim = if subfield.complement.is_empty() {
        d
    } else {
        let mut m = alg.left_matrix(&subfield.complement[0]);
        for u in &subfield.complement[1..] {
            m = m.vstack(&alg.left_matrix(u));
        }
        d - linalg::rank(f, &m)
    };

    Analysis { ideal, ideal_square, subfield, loewy, socle_dim }
}

fn build_subfield(alg: &Algebra, squares: &[FieldElem], ideal_square: &[Vector]) -> SubfieldEmbedding {
    let f = alg.field();
    let d = alg.dim();
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_sq: Vec<FieldElem> = Vec::new();
    for (i, b) in squares.iter().enumerate() {
        if in_fsquare_span(f, b, &chosen_sq).is_none() {
            chosen.push(i);
            chosen_sq.push(b.clone());
        }
    }
    let mut field = f.clone();
    for b in &chosen_sq {
        field = field
            .adjoin_sqrt(&field.lift(b.clone(), f.depth()))
            .expect("greedy choice keeps the square class new");
    }
    let generators: Vec<Vector> = chosen.iter().map(|&i| alg.basis_vec(i)).collect();
    let k_basis = vector_subset_products(alg, &generators);
    let embedding = Matrix::from_cols(f, &k_basis, d);

    let mut candidates = Vec::new();
    for (i, b) in squares.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let c = in_fsquare_span(f, b, &chosen_sq).expect("norm field contains every square");
        let k = linalg::combine(f, &k_basis, &c, d);
        let u = alg.add(&alg.basis_vec(i), &k);
        if u.iter().any(|x| !x.is_zero()) {
            candidates.push(u);
        }
    }
    let mut span: Vec<Vector> = ideal_square.to_vec();
    let mut complement = Vec::new();
    for u in candidates {
        if linalg::in_span(f, &span, &u) {
            continue;
        }
        span.extend(k_basis.iter().map(|k| alg.mul(k, &u)));
        span = linalg::span_basis(f, &span, d);
        complement.push(u);
    }
    SubfieldEmbedding { field, generators, squares: chosen_sq, embedding, complement }
}

/// Clifford algebra of `[a_1] + ... + [a_n]`: basis `e_I` by bitmask with
/// `e_I e_J = (prod_{i in I & J} a_i) e_{I ^ J}`.
pub fn clifford(f: &Field, alphas: &[FieldElem]) -> Result<ConicAlgebra, ConicError> {
    let n = alphas.len();
    let d = 1usize << n;
    let prods = subset_products(f, alphas);
    let mut table = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            table.push(vec![(i ^ j, prods[i & j].clone())]);
        }
    }
    let mut unit = vec![f.zero(); d];
    unit[0] = f.one();
    let alg = Algebra::new(f.clone(), d, table, unit)?;
    let labels = (0..d)
        .map(|m| {
            if m == 0 {
                "1".to_string()
            } else {
                (0..n).filter(|i| m >> i & 1 == 1).map(|i| format!("e{}", i + 1)).collect()
            }
        })
        .collect();
    Ok(ConicAlgebra::validate(alg, VerifyLevel::Fast)?.with_labels(labels))
}

/// `R_n` with basis `1, u_1, ..., u_{n-1}`: `u_i^2 = u_1 u_i = 0` and
/// `u_i u_j = u_1` for distinct `i, j >= 2`.
pub fn rn_family(f: &Field, n: usize) -> Result<ConicAlgebra, ConicError> {
    if n < 4 {
        return Err(ConicError::InvalidRn(n));
    }
    let mut table = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let row = match (i, j) {
                (0, k) | (k, 0) => vec![(k, f.one())],
                (a, b) if a >= 2 && b >= 2 && a != b => vec![(1, f.one())],
                _ => vec![],
            };
            table.push(row);
        }
    }
    let mut unit = vec![f.zero(); n];
    unit[0] = f.one();
    let alg = Algebra::new(f.clone(), n, table, unit)?;
    let labels = (0..n).map(|i| if i == 0 { "1".into() } else { format!("u{i}") }).collect();
    Ok(ConicAlgebra::validate(alg, VerifyLevel::Full)?.with_labels(labels))
}

/// `A` as an algebra over `F(s)` for `s` in `A` with `s^2` a non-square.
pub fn over_subfield(a: &ConicAlgebra, s: &[FieldElem]) -> Result<ConicAlgebra, ConicError> {
    let view = a.algebra().over_central_sqrt(s)?;
    ConicAlgebra::validate(view.algebra, VerifyLevel::Fast)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::rational(3)
    }

    #[test]
    fn validation() {
        let f = f3();
        assert!(ConicAlgebra::validate(Algebra::ground(&f), VerifyLevel::Full).is_ok());
        assert!(clifford(&f, &[f.var(0)]).is_ok());
        // b^2 = b
        let table = vec![vec![(0, f.one())], vec![(1, f.one())], vec![(1, f.one())], vec![(1, f.one())]];
        let alg = Algebra::new(f.clone(), 2, table, vec![f.one(), f.zero()]).unwrap();
        assert_eq!(
            ConicAlgebra::validate(alg, VerifyLevel::Full).unwrap_err(),
            ConicError::SquareOutsideField(1)
        );
    }

    #[test]
    fn ideal_examples() {
        let f = f3();
        let c = clifford(&f, &[f.var(0), f.var(1)]).unwrap();
        assert!(c.maximal_ideal().is_empty());
        assert_eq!(c.loewy_length(), 1);
        let z = clifford(&f, &[f.zero(), f.zero()]).unwrap();
        assert_eq!(z.maximal_ideal().len(), 3);
        assert_eq!(z.loewy_length(), 3);
        let r6 = rn_family(&f, 6).unwrap();
        let m = r6.maximal_ideal();
        assert_eq!(m.len(), 5);
        assert!(m.iter().all(|v| v[0].is_zero()));
        assert_eq!(r6.loewy_length(), 3);
    }

    #[test]
    fn subfield_examples() {
        let f = f3();
        let c = clifford(&f, &[f.var(0), f.var(1)]).unwrap();
        let k = c.maximal_subfield();
        assert_eq!(k.degree(), 2);
        assert!(k.verify(c.algebra()));
        assert!(clifford(&f, &[f.zero()]).unwrap().maximal_subfield().degree() == 0);
        let mixed = clifford(&f, &[f.var(0), f.zero()]).unwrap();
        let k = mixed.maximal_subfield();
        assert_eq!((k.degree(), k.complement.len()), (1, 1));
        for u in &k.complement {
            assert!(mixed.algebra().square(u).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn rank_and_frobenius() {
        let f = f3();
        for n in 4..=8 {
            let r = rn_family(&f, n).unwrap();
            assert_eq!(r.min_rank(), n - 2);
            assert_eq!(r.is_frobenius(), n % 2 == 0, "n = {n}");
            assert_eq!(r.is_rho_generated().unwrap(), n == 4);
        }
        let c = clifford(&f, &[f.var(0), f.var(1), f.var(2)]).unwrap();
        assert_eq!(c.min_rank(), 3);
        assert!(c.is_frobenius());
        assert!(c.is_rho_generated().unwrap());
        let g = ConicAlgebra::validate(Algebra::ground(&f), VerifyLevel::Full).unwrap();
        assert_eq!(g.min_rank(), 0);
        assert!(g.is_rho_generated().unwrap());
    }

    #[test]
    fn clifford_squares() {
        let f = f3();
        let (a, b) = (f.var(0), f.var(1));
        let c = clifford(&f, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(c.dim(), 4);
        assert_eq!(c.squares()[3], f.mul(&a, &b));
        assert_eq!(clifford(&f, &[]).unwrap().dim(), 1);
    }

    #[test]
    fn derivations() {
        let f = f3();
        let c = clifford(&f, &[f.var(0), f.var(1)]).unwrap();
        let a = c.algebra();
        let gens = vec![a.basis_vec(1), a.basis_vec(2)];
        let d = c.extend_derivation(&gens, &[a.basis_vec(1), a.zero_vec()]).unwrap();
        assert_eq!(d.mul_vec(&f, &a.basis_vec(3)), a.basis_vec(3));
        let zero = c.extend_derivation(&gens, &[a.zero_vec(), a.zero_vec()]).unwrap();
        assert!(zero.is_zero());

        let r6 = rn_family(&f, 6).unwrap();
        let ra = r6.algebra();
        let gens: Vec<Vector> = (2..6).map(|i| ra.basis_vec(i)).collect();
        let mut images = vec![ra.zero_vec(); 4];
        images[0] = ra.unit().clone();
        assert_eq!(r6.extend_derivation(&gens, &images).unwrap_err(), ConicError::NoDerivationExtension);
    }

    #[test]
    fn homomorphisms() {
        let f = f3();
        let c = clifford(&f, &[f.var(0), f.var(1)]).unwrap();
        let a = c.algebra();
        let gens = vec![a.basis_vec(1), a.basis_vec(2)];
        let id = c.hom_from_generators(&gens, a, &gens).unwrap();
        assert_eq!(id, Matrix::identity(&f, 4));

        let t1 = f.var(0);
        let sq = clifford(&f, &[f.square(&t1)]).unwrap();
        let g = Algebra::ground(&f);
        let h = sq
            .hom_from_generators(&[sq.algebra().basis_vec(1)], &g, &[vec![t1.clone()]])
            .unwrap();
        assert_eq!(h.rows(), 1);
        assert_eq!(
            sq.hom_from_generators(&[sq.algebra().basis_vec(1)], &g, &[vec![f.var(1)]]).unwrap_err(),
            ConicError::SquareCondition(0)
        );
    }

    #[test]
    fn isomorphism_examples() {
        let f = f3();
        let (t1, t2, t3) = (f.var(0), f.var(1), f.var(2));
        let a = clifford(&f, &[t1.clone(), t2.clone()]).unwrap();
        let b = clifford(&f, &[t2.clone(), f.mul(&t1, &t2)]).unwrap();
        let c = clifford(&f, &[t1.clone(), t3]).unwrap();
        assert!(a.isomorphic(&b).unwrap());
        assert!(!a.isomorphic(&c).unwrap());
        assert!(a.isomorphic(&a).unwrap());
        let r8 = rn_family(&f, 8).unwrap();
        assert_eq!(r8.isomorphic(&a).unwrap_err(), ConicError::NotRhoGenerated);
    }

    #[test]
    fn tensors() {
        let f = f3();
        let (a, b) = (f.var(0), f.var(1));
        let x = clifford(&f, &[a.clone()]).unwrap();
        let y = clifford(&f, &[b.clone()]).unwrap();
        let t = x.tensor(&y).unwrap();
        let c = clifford(&f, &[a.clone(), b.clone()]).unwrap();
        // e_i (x) e_j at i*2 + j versus bitmask e1 = 1, e2 = 2
        let perm = [0usize, 2, 1, 3];
        let p = Matrix::from_cols(&f, &perm.iter().map(|&k| t.algebra().basis_vec(k)).collect::<Vec<_>>(), 4);
        let (re, _) = t.algebra().change_basis(&p).unwrap();
        assert_eq!(&re, c.algebra());
        let g = ConicAlgebra::validate(Algebra::ground(&f), VerifyLevel::Full).unwrap();
        assert_eq!(x.tensor(&g).unwrap().algebra(), x.algebra());
    }

    #[test]
    fn rank_additivity_over_subfield() {
        let f = f3();
        let c = clifford(&f, &[f.var(0), f.var(1), f.var(2)]).unwrap();
        let over = over_subfield(&c, &c.algebra().basis_vec(1)).unwrap();
        assert_eq!(over.dim(), 4);
        assert_eq!(over.min_rank() + 1, c.min_rank());
    }
}
