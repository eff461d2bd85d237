//! Invariant-level classification of orthogonal involutions carrying a
//! certificate: the conic algebra `Phi(A, sigma)`, the split-transpose
//! conditions, metabolicity with an explicit `(M_2(F), t)` factor, and the
//! comparison of computed invariants.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, Vector};
use crate::conic::{vector_subset_products, ConicAlgebra, ConicError};
use crate::csa::{self, centralizer, CsaError, Involution, InvolutionType};
use crate::decompose::{
    certificate_from_generators, full_decomposition, pfister_from_report, restrict_involution, Certificate,
    DecomposeError, PfisterInvariant, QuaternionFactor,
};
use crate::fields::linalg::{self, Coordinates, Matrix};
use crate::fields::{norm_field_basis, semilinear_solve, subset_products, Field, FieldElem};
use crate::forms::{pfister_is_metabolic, same_norm_field, FormError, TsQuadraticForm};
use crate::VerifyLevel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error(transparent)]
    Csa(#[from] CsaError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("involution is not orthogonal")]
    NotOrthogonal,
    #[error("degrees differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    /// Conditions that must agree were computed independently and did not.
    #[error("equivalent conditions disagree: {0}")]
    TheoremViolation(String),
    #[error("no (M_2(F), t) factor could be constructed: {0}")]
    SplitNotFound(String),
}

/// `Phi(A, sigma)`: the certificate algebra `S` with its own structure
/// constants.
pub fn phi_algebra(alg: &Algebra, sigma: &Involution, cert: &Certificate) -> Result<ConicAlgebra, ClassifyError> {
    cert.require()?;
    if let Some(c) = cert.conic() {
        return Ok(c.clone());
    }
    debug_assert!(cert.basis.iter().all(|b| sigma.apply(alg.field(), b) == *b));
    let (s, _) = alg.subalgebra(cert.basis.clone()).map_err(DecomposeError::from)?;
    Ok(ConicAlgebra::validate(s, VerifyLevel::Full)?)
}

/// Dimension of `Phi` and a 2-basis of the norm field of its maximal subfield.
#[derive(Clone, Debug, Serialize)]
pub struct Fingerprint {
    pub dim: usize,
    #[serde(skip)]
    pub norm_field: Vec<FieldElem>,
    #[serde(rename = "norm_field")]
    pub norm_field_text: Vec<String>,
}

impl Fingerprint {
    pub fn of(phi: &ConicAlgebra) -> Fingerprint {
        let f = phi.field();
        let norm_field = norm_field_basis(f, &phi.maximal_subfield().squares);
        let norm_field_text = norm_field.iter().map(|x| f.render(x)).collect();
        Fingerprint { dim: phi.dim(), norm_field, norm_field_text }
    }

    pub fn matches(&self, f: &Field, other: &Fingerprint) -> bool {
        self.dim == other.dim && same_norm_field(f, &self.norm_field, &other.norm_field)
    }
}

/// The four split-transpose conditions. `split` is reported as the
/// conjunction of the other three; no isomorphism is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TransposeFlags {
    pub split: bool,
    pub alphas_square: bool,
    pub s_squares_square: bool,
    pub residue_trivial: bool,
}

/// Everything computed once per instance and compared across instances.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantRecord {
    #[serde(skip)]
    pub alphas: Vec<FieldElem>,
    #[serde(rename = "alphas")]
    pub alphas_text: Vec<String>,
    #[serde(skip)]
    pub norm_field: Vec<FieldElem>,
    #[serde(rename = "norm_field")]
    pub norm_field_text: Vec<String>,
    pub anisotropic: bool,
    pub transpose: bool,
    pub metabolic: bool,
    pub fingerprint: Fingerprint,
}

/// Computed invariants with the data they came from.
#[derive(Clone, Debug)]
pub struct Invariants {
    pub record: InvariantRecord,
    pub pfister: PfisterInvariant,
    pub phi: ConicAlgebra,
    pub transpose: TransposeFlags,
    /// `<<alphas>>` metabolic (an isotropic vector exists).
    pub pfister_metabolic: bool,
    /// `Phi` has a nonzero maximal ideal.
    pub phi_not_field: bool,
}

/// Decompose, then evaluate every invariant and cross-check the ones that
/// must agree.
pub fn invariants(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    level: VerifyLevel,
) -> Result<Invariants, ClassifyError> {
    if cert.involution_type != InvolutionType::Orthogonal {
        return Err(ClassifyError::NotOrthogonal);
    }
    let f = alg.field();
    let report = full_decomposition(alg, sigma, cert, level)?;
    if !report.checks.all_pass() {
        return Err(DecomposeError::Inconsistent("decomposition checks failed".into()).into());
    }
    let pfister = pfister_from_report(alg, sigma, report)?;
    let phi = phi_algebra(alg, sigma, cert)?;
    let transpose = transpose_flags(f, &pfister.alphas, &phi)?;

    let pfister_metabolic = pfister_is_metabolic(f, &pfister.alphas)?.is_some();
    let phi_not_field = !phi.maximal_ideal().is_empty();
    if pfister_metabolic != phi_not_field {
        return Err(ClassifyError::TheoremViolation(format!(
            "Pfister form metabolic = {pfister_metabolic}, Phi not a field = {phi_not_field}"
        )));
    }
    let anisotropic = TsQuadraticForm::new(subset_products(f, &pfister.alphas)).is_anisotropic(f);
    if anisotropic == pfister_metabolic {
        return Err(ClassifyError::TheoremViolation(format!(
            "anisotropic = {anisotropic}, metabolic = {pfister_metabolic}"
        )));
    }

    let norm_field = norm_field_basis(f, &pfister.alphas);
    let record = InvariantRecord {
        alphas_text: pfister.alphas.iter().map(|a| f.render(a)).collect(),
        alphas: pfister.alphas.clone(),
        norm_field_text: norm_field.iter().map(|a| f.render(a)).collect(),
        norm_field,
        anisotropic,
        transpose: transpose.split,
        metabolic: pfister_metabolic,
        fingerprint: Fingerprint::of(&phi),
    };
    Ok(Invariants { record, pfister, phi, transpose, pfister_metabolic, phi_not_field })
}

fn transpose_flags(f: &Field, alphas: &[FieldElem], phi: &ConicAlgebra) -> Result<TransposeFlags, ClassifyError> {
    let alphas_square = alphas.iter().all(|a| f.is_square(a));
    // x^2 = sum c_i^2 b_i^2 for x = sum c_i b_i, so the basis decides it
    let s_squares_square = phi.squares().iter().all(|b| f.is_square(b));
    let residue_trivial = phi.residue_rank() == 0;
    if alphas_square != s_squares_square || s_squares_square != residue_trivial {
        return Err(ClassifyError::TheoremViolation(format!(
            "alphas square = {alphas_square}, S squares square = {s_squares_square}, residue trivial = {residue_trivial}"
        )));
    }
    Ok(TransposeFlags {
        split: alphas_square && s_squares_square && residue_trivial,
        alphas_square,
        s_squares_square,
        residue_trivial,
    })
}

/// The split-transpose conditions, computed independently and required to
/// agree.
pub fn transpose_suite(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    level: VerifyLevel,
) -> Result<TransposeFlags, ClassifyError> {
    Ok(invariants(alg, sigma, cert, level)?.transpose)
}

/// `(A, sigma) = (M_2(F), t) (x) (B, tau)` made explicit.
#[derive(Clone, Debug)]
pub struct MetabolicSplit {
    /// `e_11, e_12, e_21, e_22` in ambient coordinates, with
    /// `sigma(e_ij) = e_ji`.
    pub matrix_units: Vec<Vector>,
    /// The quaternion factor the units span.
    pub factor: QuaternionFactor,
    pub idempotent: Vector,
    pub b_algebra: Algebra,
    pub b_involution: Involution,
    /// Columns `e_ij b_k` in Kronecker order.
    pub basis_change: Matrix,
    pub idempotent_verified: bool,
    pub reconstruction_verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetabolicFlags {
    /// A verified metabolic idempotent was produced.
    pub idempotent: bool,
    pub pfister_metabolic: bool,
    pub phi_not_field: bool,
    pub reconstruction: Option<bool>,
    /// Outcome of a random idempotent search in the anisotropic case;
    /// never used as a proof.
    pub random_search: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct MetabolicReport {
    pub invariants: Invariants,
    pub flags: MetabolicFlags,
    pub split: Option<MetabolicSplit>,
}

/// Metabolicity by the Pfister form and by `Phi`, and in the metabolic
/// case an explicit idempotent and `(M_2(F), t) (x) (B, tau)` factorization.
pub fn metabolic_suite(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    level: VerifyLevel,
    seed: u64,
) -> Result<MetabolicReport, ClassifyError> {
    let inv = invariants(alg, sigma, cert, level)?;
    if !inv.pfister_metabolic {
        let found = random_idempotent_search(alg, sigma, seed, 8);
        let flags = MetabolicFlags {
            idempotent: false,
            pfister_metabolic: false,
            phi_not_field: false,
            reconstruction: None,
            random_search: Some(if found { "found" } else { "not found" }),
        };
        if found {
            return Err(ClassifyError::TheoremViolation("metabolic idempotent for an anisotropic form".into()));
        }
        return Ok(MetabolicReport { invariants: inv, flags, split: None });
    }
    let factor = trivial_disc_factor(alg, sigma, cert, &inv.pfister, level)?;
    let split = split_off(alg, sigma, factor, level)?;
    let flags = MetabolicFlags {
        idempotent: split.idempotent_verified,
        pfister_metabolic: true,
        phi_not_field: inv.phi_not_field,
        reconstruction: Some(split.reconstruction_verified),
        random_search: None,
    };
    Ok(MetabolicReport { invariants: inv, flags, split: Some(split) })
}

fn random_idempotent_search(alg: &Algebra, sigma: &Involution, seed: u64, tries: usize) -> bool {
    let f = alg.field();
    let mut r = crate::corpus::rng(seed);
    (0..tries).any(|_| {
        let x: Vector = (0..alg.dim()).map(|_| f.from_bool(r.gen_bool(0.5))).collect();
        csa::verify_metabolic_idempotent(alg, sigma, &x)
    })
}

fn square_alpha(f: &Field, q: &QuaternionFactor) -> bool {
    q.alpha.as_ref().is_some_and(|a| !a.is_zero() && f.is_square(a))
}

/// A quaternion factor whose alternating generator squares to a nonzero
/// square. Taken from the given decomposition when possible; otherwise an
/// alternating `x` in `S` with `x^2 = 1` is built from the isotropy of
/// `<<alphas>>` and swapped in for one of the generators.
fn trivial_disc_factor(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    pf: &PfisterInvariant,
    level: VerifyLevel,
) -> Result<QuaternionFactor, ClassifyError> {
    let f = alg.field();
    if let Some(q) = pf.report.factors.iter().find(|q| square_alpha(f, q)) {
        return Ok(q.clone());
    }
    let gens = &pf.report.alternating_generators;
    let n = gens.len();
    let prods = subset_products(f, &pf.alphas);
    let pure: Vec<Vec<FieldElem>> = prods[1..].iter().map(|p| vec![p.clone()]).collect();
    let coeffs = semilinear_solve(f, &pure, &[f.one()])
        .particular
        .ok_or_else(|| ClassifyError::SplitNotFound("pure subform does not represent 1".into()))?;
    let elems = vector_subset_products(alg, gens);
    let mut x = alg.zero_vec();
    for (c, p) in coeffs.iter().zip(&elems[1..]) {
        if !c.is_zero() {
            x = alg.add(&x, &alg.scale(c, p));
        }
    }
    if alg.square(&x) != *alg.unit() {
        return Err(ClassifyError::TheoremViolation("x^2 = 1 for the represented vector".into()));
    }
    for j in 0..n {
        let mask_has_j = coeffs.iter().enumerate().any(|(i, c)| !c.is_zero() && (i + 1) & (1 << j) != 0);
        if !mask_has_j {
            continue;
        }
        let mut new_gens = vec![x.clone()];
        new_gens.extend(gens.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, g)| g.clone()));
        let Ok(c) = certificate_from_generators(alg, sigma, new_gens, level) else { continue };
        if !c.is_valid() || c.basis.len() != cert.basis.len() {
            continue;
        }
        let Ok(report) = full_decomposition(alg, sigma, &c, level) else { continue };
        if !report.checks.all_pass() {
            continue;
        }
        if let Some(q) = report.factors.into_iter().find(|q| square_alpha(f, q)) {
            return Ok(q);
        }
    }
    Err(ClassifyError::SplitNotFound("no generator exchange produced a trivial-discriminant factor".into()))
}

/// Realize a trivial-discriminant factor as `(M_2(F), t)` and split it off.
fn split_off(
    alg: &Algebra,
    sigma: &Involution,
    factor: QuaternionFactor,
    level: VerifyLevel,
) -> Result<MetabolicSplit, ClassifyError> {
    let f = alg.field();
    let q = &factor.algebra;
    let tau_q = &factor.involution;
    let qc = Coordinates::new(f, factor.basis.clone()).ok_or(DecomposeError::Relation("factor basis independent"))?;
    let w_amb = factor.alternating.as_ref().ok_or(ClassifyError::NotOrthogonal)?;
    let w = qc.coords(f, w_amb).ok_or(DecomposeError::Relation("alternating generator in factor"))?;
    let alpha = factor.alpha.clone().ok_or(ClassifyError::NotOrthogonal)?;
    let c = f.sqrt(&alpha).map_err(DecomposeError::from)?;
    let w = q.scale(&f.inv(&c).map_err(DecomposeError::from)?, &w);
    let n0 = q.add(q.unit(), &w);

    // e = n0 y with n0 y n0 = n0
    let sys = q.left_matrix(&n0).mul(f, &q.right_matrix(&n0));
    let (y, _) = linalg::solve(f, &sys, &n0).ok_or_else(|| ClassifyError::SplitNotFound("n0 y n0 = n0".into()))?;
    let e = q.mul(&n0, &y);

    // g = e_11: e g = 0, g (1 + e) = 1 + e, sigma(g) = g
    let one_e = q.add(q.unit(), &e);
    let sym = tau_q.matrix().add(f, &Matrix::identity(f, 4));
    let sys = q.left_matrix(&e).vstack(&q.right_matrix(&one_e)).vstack(&sym);
    let mut rhs = q.zero_vec();
    rhs.extend(one_e.iter().cloned());
    rhs.extend(q.zero_vec());
    let (g, _) = linalg::solve(f, &sys, &rhs).ok_or_else(|| ClassifyError::SplitNotFound("matrix unit e_11".into()))?;
    let units_q = vec![
        g.clone(),
        q.mul(&g, &e),
        q.mul(&tau_q.apply(f, &e), &g),
        q.add(q.unit(), &g),
    ];
    let p = Matrix::from_cols(f, &units_q, 4);
    let (q2, t2) = csa::change_basis(q, tau_q, &p)?;
    if q2 != csa::m2(f) || t2 != csa::m2_transpose(f) {
        return Err(ClassifyError::SplitNotFound("matrix units do not realize (M_2(F), t)".into()));
    }
    if e != q.add(&units_q[1], &units_q[3]) {
        return Err(ClassifyError::TheoremViolation("e = e_12 + e_22".into()));
    }

    let units: Vec<Vector> = units_q.iter().map(|u| qc.combine(f, u)).collect();
    let idempotent = qc.combine(f, &e);
    let idempotent_verified = csa::verify_metabolic_idempotent(alg, sigma, &idempotent);

    let b = centralizer(alg, &factor.basis)?;
    let b_involution = restrict_involution(alg, sigma, &b.algebra, &b.coords, level)?;
    let cols: Vec<Vector> = units.iter().flat_map(|m| b.basis().iter().map(move |x| alg.mul(m, x))).collect();
    let basis_change = Matrix::from_cols(f, &cols, alg.dim());
    let reconstruction_verified = match csa::change_basis(alg, sigma, &basis_change) {
        Ok((a2, s2)) => {
            let (m, t) = (csa::m2(f), csa::m2_transpose(f));
            let (target, target_inv) = csa::tensor_with_involution(&m, &t, &b.algebra, &b_involution, level)?;
            a2 == target && s2 == target_inv
        }
        Err(_) => false,
    };
    Ok(MetabolicSplit {
        matrix_units: units,
        factor,
        idempotent,
        b_algebra: b.algebra,
        b_involution,
        basis_change,
        idempotent_verified,
        reconstruction_verified,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    Different,
}

/// The three comparisons behind a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub norm_fields_equal: bool,
    pub metabolic_agree: bool,
    pub fingerprints_equal: bool,
}

/// Compare computed invariants: norm fields of the alpha lists, metabolicity
/// and the `Phi` fingerprints. "Equal" means only that these agree.
pub fn same_invariant(f: &Field, a: &InvariantRecord, b: &InvariantRecord) -> Result<Comparison, ClassifyError> {
    if a.fingerprint.dim != b.fingerprint.dim {
        return Err(ClassifyError::DegreeMismatch(a.fingerprint.dim, b.fingerprint.dim));
    }
    let norm_fields_equal = same_norm_field(f, &a.alphas, &b.alphas);
    let metabolic_agree = a.metabolic == b.metabolic;
    let fingerprints_equal = a.fingerprint.matches(f, &b.fingerprint);
    let verdict = if norm_fields_equal && metabolic_agree && fingerprints_equal {
        Verdict::Equal
    } else {
        Verdict::Different
    };
    Ok(Comparison { verdict, norm_fields_equal, metabolic_agree, fingerprints_equal })
}

/// [`same_invariant`] straight from two certified instances.
pub fn compare_instances(
    (alg, sigma, cert): (&Algebra, &Involution, &Certificate),
    (alg2, sigma2, cert2): (&Algebra, &Involution, &Certificate),
    level: VerifyLevel,
) -> Result<Comparison, ClassifyError> {
    if alg.dim() != alg2.dim() {
        let deg = |a: &Algebra| csa::degree(a).unwrap_or(0);
        return Err(ClassifyError::DegreeMismatch(deg(alg), deg(alg2)));
    }
    let a = invariants(alg, sigma, cert, level)?;
    let b = invariants(alg2, sigma2, cert2, level)?;
    same_invariant(alg.field(), &a.record, &b.record)
}
