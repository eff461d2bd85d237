//! Certificates of total decomposability and the quaternion-by-quaternion
//! decomposition they drive, together with the associative form on the
//! certificate algebra, the Pfister invariant, generator regeneration, and
//! the descent / centralizer-restriction constructions.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{lift_vec, Algebra, AlgebraError, ScalarExtensionView, Vector};
use crate::conic::{vector_subset_products, ConicAlgebra, ConicError};
use crate::csa::{
    self, alt_space, centralizer, disc_orthogonal, involution_type, CsaError, Involution, InvolutionType,
    QuaternionPresentation,
};
use crate::fields::linalg::{self, Coordinates, Matrix};
use crate::fields::{Field, FieldElem, FieldError};
use crate::forms::{verify_isometry, BilinearForm, FormError};
use crate::VerifyLevel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Csa(#[from] CsaError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("certificate invalid: {0}")]
    InvalidCertificate(String),
    #[error("inner derivation system is inconsistent")]
    InnerDerivation,
    #[error("internal relation check failed: {0}")]
    Relation(&'static str),
    #[error("involution is not orthogonal")]
    NotOrthogonal,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("isometry witness does not verify")]
    Witness,
    #[error("computed invariants disagree: {0}")]
    Inconsistent(String),
    #[error("every pivot gives a nilpotent second generator")]
    Degenerate,
}

/// The checks behind a certificate, each computed independently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateFlags {
    pub in_sym: bool,
    pub conic_valid: bool,
    pub rho_generated: bool,
    pub self_centralizing: bool,
    /// Only evaluated for orthogonal involutions.
    pub in_alt_plus_f: Option<bool>,
    pub generators_span: bool,
}

impl CertificateFlags {
    pub fn all_pass(&self) -> bool {
        self.in_sym
            && self.conic_valid
            && self.rho_generated
            && self.self_centralizing
            && self.in_alt_plus_f != Some(false)
            && self.generators_span
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.in_sym, "S is not contained in Sym"),
            (self.conic_valid, "S is not a totally singular conic subalgebra"),
            (self.rho_generated, "S is not rho-generated"),
            (self.self_centralizing, "C_A(S) != S"),
            (self.in_alt_plus_f != Some(false), "S is not contained in Alt + F"),
            (self.generators_span, "generators do not generate S"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, why)| why)
    }
}

/// A commutative subalgebra `S` of symmetric elements with `C_A(S) = S`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub basis: Vec<Vector>,
    /// `u_1, ..., u_r` whose subset products span `S`.
    pub generators: Vec<Vector>,
    pub flags: CertificateFlags,
    pub involution_type: InvolutionType,
    conic: Option<ConicAlgebra>,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.flags.all_pass()
    }

    pub fn require(&self) -> Result<(), DecomposeError> {
        match self.flags.first_failure() {
            None => Ok(()),
            Some(why) => Err(DecomposeError::InvalidCertificate(why.into())),
        }
    }

    /// `S` with its induced structure, in the coordinates of `basis`.
    pub fn conic(&self) -> Option<&ConicAlgebra> {
        self.conic.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Run the certificate checks on the span of `basis`. Generators default to
/// a minimal generating set read off the conic structure.
pub fn check_certificate(
    alg: &Algebra,
    sigma: &Involution,
    basis: Vec<Vector>,
    generators: Option<Vec<Vector>>,
    level: VerifyLevel,
) -> Result<Certificate, DecomposeError> {
    let f = alg.field();
    let s_coords = Coordinates::new(f, basis.clone()).ok_or(AlgebraError::Dependent)?;
    let itype = involution_type(alg, sigma);
    let in_sym = basis.iter().all(|b| sigma.apply(f, b) == *b);
    let conic = match alg.subalgebra(basis.clone()) {
        Ok((sub, _)) => ConicAlgebra::validate(sub, level).ok(),
        Err(AlgebraError::NotSubalgebra) => None,
        Err(e) => return Err(e.into()),
    };
    let conic_valid = conic.is_some();
    let rho_generated = match &conic {
        Some(c) => c.is_rho_generated()?,
        None => false,
    };
    let self_centralizing = conic_valid && alg.centralizer(&basis).len() == basis.len();
    let in_alt_plus_f = sigma
        .alt_plus_unit(alg)
        .map(|c| basis.iter().all(|b| c.coords(f, b).is_some()));
    let generators = match generators {
        Some(g) => g,
        None => match &conic {
            Some(c) => {
                let sub = c.maximal_subfield();
                sub.generators.iter().chain(&sub.complement).map(|g| s_coords.combine(f, g)).collect()
            }
            None => Vec::new(),
        },
    };
    let generators_span = generators.len() < usize::BITS as usize
        && 1usize << generators.len() == basis.len()
        && generators.iter().all(|g| s_coords.coords(f, g).is_some())
        && linalg::span_basis(f, &vector_subset_products(alg, &generators), alg.dim()).len() == basis.len();
    let flags = CertificateFlags {
        in_sym,
        conic_valid,
        rho_generated,
        self_centralizing,
        in_alt_plus_f,
        generators_span,
    };
    Ok(Certificate { basis, generators, flags, involution_type: itype, conic })
}

/// Certificate from generators alone: `S` is spanned by their subset products.
pub fn certificate_from_generators(
    alg: &Algebra,
    sigma: &Involution,
    generators: Vec<Vector>,
    level: VerifyLevel,
) -> Result<Certificate, DecomposeError> {
    let basis = vector_subset_products(alg, &generators);
    check_certificate(alg, sigma, basis, Some(generators), level)
}

/// Extend scalars to a tower `K` over `F` and re-run every certificate
/// check on `S_K` inside `(A_K, sigma_K)`.
pub fn extend_scalars(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    k: &Field,
    level: VerifyLevel,
) -> Result<(Algebra, Involution, Certificate), DecomposeError> {
    let d = alg.field().depth();
    let ak = alg.extend_scalars(k)?;
    let sk = Involution::validate(&ak, sigma.matrix().map(|c| k.lift(c.clone(), d)), level)?;
    let lift = |vs: &[Vector]| vs.iter().map(|v| lift_vec(k, v, d)).collect::<Vec<_>>();
    let ck = check_certificate(&ak, &sk, lift(&cert.basis), Some(lift(&cert.generators)), level)?;
    Ok((ak, sk, ck))
}

/// A symmetric element `v` of a quaternion factor with `v^2` a nonzero
/// scalar: alternating for orthogonal involutions, a shifted trace-zero
/// symmetric element otherwise.
pub fn factor_generator(q: &Algebra, sigma: &Involution) -> Result<Vector, DecomposeError> {
    let f = q.field();
    let v = match involution_type(q, sigma) {
        InvolutionType::Orthogonal => alt_space(q, sigma).into_iter().next().ok_or(DecomposeError::NotOrthogonal)?,
        InvolutionType::Symplectic => {
            let (sym, _) = csa::sym_alt(q, sigma);
            sym.into_iter()
                .find(|w| q.scalar_part(w).is_none())
                .ok_or(DecomposeError::Relation("symmetric element outside F"))?
        }
    };
    let sq = q.scalar_part(&q.square(&v)).ok_or(DecomposeError::Relation("v^2 in F"))?;
    Ok(if sq.is_zero() { q.add(&v, q.unit()) } else { v }).map(|v| {
        debug_assert!(q.scalar_part(&q.square(&v)).is_some_and(|c| !c.is_zero()));
        let _ = f;
        v
    })
}

/// Tensor the factors and certify `S = F[v_1, ..., v_n]` with one `v_i`
/// per factor.
pub fn phi_candidate(
    factors: &[(Algebra, Involution)],
    level: VerifyLevel,
) -> Result<(Algebra, Involution, Certificate), DecomposeError> {
    let (first, rest) = factors.split_first().ok_or(DecomposeError::Precondition("no factors".into()))?;
    let f = first.0.field().clone();
    let mut alg = first.0.clone();
    let mut sigma = first.1.clone();
    let mut gens = vec![factor_generator(&first.0, &first.1)?];
    for (q, s) in rest {
        let v = factor_generator(q, s)?;
        gens = gens.iter().map(|g| crate::algebra::tensor_vec(&f, g, q.unit())).collect();
        gens.push(crate::algebra::tensor_vec(&f, alg.unit(), &v));
        let (t, st) = csa::tensor_with_involution(&alg, &sigma, q, s, level)?;
        alg = t;
        sigma = st;
    }
    let cert = certificate_from_generators(&alg, &sigma, gens, level)?;
    Ok((alg, sigma, cert))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    /// `delta(s)` is a scalar: `Q = F[u_1, eta]`.
    #[serde(rename = "case1")]
    Scalar,
    /// `delta(s)` is not a scalar: `Q = F[eta, delta(s)]`.
    #[serde(rename = "case2")]
    NonScalar,
}

/// One step of quaternion extraction.
#[derive(Clone, Debug)]
pub struct Extraction {
    /// `u = eta` and `v = u_1` or `delta(s)`.
    pub presentation: QuaternionPresentation,
    pub case: CaseTag,
    pub pivot: usize,
    pub xi: Vector,
    /// Invertible element of `S` inside `Alt(Q)`, for orthogonal `Q`.
    pub alternating: Option<Vector>,
    pub factor_type: InvolutionType,
    /// The other generators, normalized; they commute with `Q`.
    pub remaining: Vec<Vector>,
}

fn normalize_generators(alg: &Algebra, gens: &[Vector]) -> Result<Vec<Vector>, DecomposeError> {
    gens.iter()
        .map(|g| {
            let sq = alg.scalar_part(&alg.square(g)).ok_or(DecomposeError::Relation("generator square in F"))?;
            Ok(if sq.is_zero() { alg.add(g, alg.unit()) } else { g.clone() })
        })
        .collect()
}

/// Extract a `sigma`-invariant quaternion subalgebra using the generator at
/// `pivot`; the remaining generators centralize it.
pub fn extract_quaternion(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    pivot: usize,
) -> Result<Extraction, DecomposeError> {
    cert.require()?;
    extract_with(alg, sigma, &cert.generators, pivot)
}

fn extract_with(alg: &Algebra, sigma: &Involution, gens: &[Vector], pivot: usize) -> Result<Extraction, DecomposeError> {
    let f = alg.field();
    if pivot >= gens.len() {
        return Err(DecomposeError::Precondition(format!("pivot {pivot} out of range")));
    }
    let mut gens = normalize_generators(alg, gens)?;
    let p = gens.remove(pivot);
    gens.insert(0, p);
    let r = gens.len();

    let prods = vector_subset_products(alg, &gens);
    let (s_alg, s_coords) = alg.subalgebra(prods)?;
    let s = ConicAlgebra::validate(s_alg, VerifyLevel::Fast)?;
    let sg: Vec<Vector> = (0..r).map(|i| s.algebra().basis_vec(1 << i)).collect();
    let mut images = vec![s.algebra().zero_vec(); r];
    images[0] = sg[0].clone();
    let delta = s.extend_derivation(&sg, &images)?;

    // xi u_i + u_i xi = delta(u_i) on the generators
    let mut system = alg.commutator_matrix(&gens[0]);
    let mut rhs = gens[0].clone();
    for g in &gens[1..] {
        system = system.vstack(&alg.commutator_matrix(g));
        rhs.extend(alg.zero_vec());
    }
    let (xi, _) = linalg::solve(f, &system, &rhs).ok_or(DecomposeError::InnerDerivation)?;
    let eta = alg.square(&xi);
    if alg.scalar_part(&alg.add(&alg.square(&eta), &eta)).is_none() {
        return Err(DecomposeError::Relation("eta^2 + eta in F"));
    }
    let s_elem = alg.add(&sigma.apply(f, &xi), &xi);
    let s_c = s_coords.coords(f, &s_elem).ok_or(DecomposeError::Relation("sigma(xi) + xi in S"))?;
    let ds = s_coords.combine(f, &delta.mul_vec(f, &s_c));

    let (case, v) = match alg.scalar_part(&ds) {
        Some(_) => (CaseTag::Scalar, gens[0].clone()),
        None => {
            let sq = alg.scalar_part(&alg.square(&ds)).ok_or(DecomposeError::Relation("delta(s)^2 in F"))?;
            if sq.is_zero() {
                return Err(DecomposeError::Degenerate);
            }
            (CaseTag::NonScalar, ds.clone())
        }
    };
    let pres = QuaternionPresentation::recognize(alg, eta, v)?;
    let qb = pres.basis(alg);
    if !qb.iter().all(|q| linalg::in_span(f, &qb, &sigma.apply(f, q))) {
        return Err(DecomposeError::Relation("sigma(Q) = Q"));
    }
    for g in &gens[1..] {
        if !alg.is_zero(&alg.commutator(g, &pres.u)) || !alg.is_zero(&alg.commutator(g, &pres.v)) {
            return Err(DecomposeError::Relation("remaining generators centralize Q"));
        }
    }
    let (q_alg, q_coords) = pres.subalgebra(alg)?;
    let q_sigma = restrict_involution(alg, sigma, &q_alg, &q_coords, VerifyLevel::Full)?;
    let factor_type = involution_type(&q_alg, &q_sigma);
    let alternating = match factor_type {
        InvolutionType::Symplectic => None,
        InvolutionType::Orthogonal => {
            let w = match case {
                CaseTag::Scalar => gens[0].clone(),
                CaseTag::NonScalar => {
                    let s2 = alg.scalar_part(&alg.square(&s_elem)).ok_or(DecomposeError::Relation("s^2 in F"))?;
                    alg.add(&ds, &alg.scalar(&s2))
                }
            };
            let alt_q: Vec<Vector> = qb.iter().map(|q| alg.add(q, &sigma.apply(f, q))).collect();
            if !linalg::in_span(f, &alt_q, &w) || w.iter().all(|x| x.is_zero()) {
                return Err(DecomposeError::Relation("alternating element of S in Alt(Q)"));
            }
            Some(w)
        }
    };
    Ok(Extraction {
        presentation: pres,
        case,
        pivot,
        xi,
        alternating,
        factor_type,
        remaining: gens[1..].to_vec(),
    })
}

/// `sigma` restricted to a stable subalgebra, in its coordinates.
pub fn restrict_involution(
    alg: &Algebra,
    sigma: &Involution,
    sub: &Algebra,
    coords: &Coordinates,
    level: VerifyLevel,
) -> Result<Involution, DecomposeError> {
    let f = alg.field();
    let mut cols = Vec::with_capacity(coords.len());
    for b in coords.basis() {
        cols.push(coords.coords(f, &sigma.apply(f, b)).ok_or(DecomposeError::Relation("subalgebra is sigma-stable"))?);
    }
    Ok(Involution::validate(sub, Matrix::from_cols(f, &cols, coords.len()), level)?)
}

/// A quaternion factor of a decomposition, expressed in the ambient algebra.
#[derive(Clone, Debug)]
pub struct QuaternionFactor {
    pub a: FieldElem,
    pub b: FieldElem,
    /// `1, u, v, uv` in the ambient coordinates.
    pub basis: Vec<Vector>,
    /// The factor on the basis `1, u, v, uv` with the restricted involution.
    pub algebra: Algebra,
    pub involution: Involution,
    pub involution_type: InvolutionType,
    pub case: CaseTag,
    pub pivot: usize,
    pub alternating: Option<Vector>,
    /// `v_i^2` of the alternating generator.
    pub alpha: Option<FieldElem>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReportChecks {
    pub sigma_invariant: bool,
    pub commuting: bool,
    pub dimension_product: bool,
    pub kronecker_basis: bool,
    /// The remaining fields are only evaluated for orthogonal involutions.
    pub generators_invertible: Option<bool>,
    pub generators_in_s: Option<bool>,
    pub generators_in_factor_alt: Option<bool>,
    pub subset_products_alt: Option<bool>,
    pub recertified_levels: usize,
}

impl ReportChecks {
    pub fn all_pass(&self) -> bool {
        self.sigma_invariant
            && self.commuting
            && self.dimension_product
            && self.kronecker_basis
            && [
                self.generators_invertible,
                self.generators_in_s,
                self.generators_in_factor_alt,
                self.subset_products_alt,
            ]
            .iter()
            .all(|x| *x != Some(false))
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub factors: Vec<QuaternionFactor>,
    pub involution_type: InvolutionType,
    /// `v_1, ..., v_n` for orthogonal involutions.
    pub alternating_generators: Vec<Vector>,
    pub checks: ReportChecks,
    /// Pivots abandoned because the second generator came out nilpotent.
    pub pivot_retries: usize,
}

impl DecompositionReport {
    pub fn alphas(&self) -> Vec<FieldElem> {
        self.factors.iter().filter_map(|q| q.alpha.clone()).collect()
    }

    pub fn cases(&self) -> Vec<CaseTag> {
        self.factors.iter().map(|q| q.case).collect()
    }
}

/// Membership in `Alt(A, sigma)` and the scalar part along `F + Alt`,
/// read off coordinates on `Alt + F` with the unit last.
pub struct AltTest<'a> {
    coords: &'a Coordinates,
}

impl<'a> AltTest<'a> {
    pub fn new(alg: &Algebra, sigma: &'a Involution) -> Result<AltTest<'a>, DecomposeError> {
        let coords = sigma.alt_plus_unit(alg).ok_or(DecomposeError::NotOrthogonal)?;
        Ok(AltTest { coords })
    }

    pub fn contains(&self, f: &Field, x: &[FieldElem]) -> bool {
        self.scalar_in(f, x).is_some_and(|c| c.is_zero())
    }

    fn scalar_in(&self, f: &Field, x: &[FieldElem]) -> Option<FieldElem> {
        self.coords.coords(f, x).map(|mut c| c.pop().expect("unit coordinate"))
    }

    /// `alpha` with `x - alpha` alternating, if `x` lies in `F + Alt`.
    pub fn scalar_part(&self, alg: &Algebra, x: &[FieldElem]) -> Option<FieldElem> {
        self.scalar_in(alg.field(), x)
    }
}

struct Frame {
    alg: Algebra,
    sigma: Involution,
    /// Columns are the frame basis in ambient coordinates.
    embed: Matrix,
    gens: Vec<Vector>,
}

/// Split off quaternions one at a time, recursing into centralizers, and
/// verify the result in the ambient algebra.
pub fn full_decomposition(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    level: VerifyLevel,
) -> Result<DecompositionReport, DecomposeError> {
    cert.require()?;
    let f = alg.field();
    let d = alg.dim();
    let mut frame = Frame {
        alg: alg.clone(),
        sigma: sigma.clone(),
        embed: Matrix::identity(f, d),
        gens: cert.generators.clone(),
    };
    let mut factors = Vec::new();
    let mut retries = 0;
    let mut recertified = 0;
    while frame.alg.dim() > 1 {
        if !factors.is_empty() {
            let c = certificate_from_generators(&frame.alg, &frame.sigma, frame.gens.clone(), level)?;
            c.require()?;
            recertified += 1;
        }
        let mut found = None;
        for pivot in 0..frame.gens.len() {
            match extract_with(&frame.alg, &frame.sigma, &frame.gens, pivot) {
                Ok(ex) => {
                    found = Some(ex);
                    break;
                }
                Err(DecomposeError::Degenerate) => retries += 1,
                Err(e) => return Err(e),
            }
        }
        let ex = found.ok_or(DecomposeError::Degenerate)?;
        let up = |v: &[FieldElem]| frame.embed.mul_vec(f, v);
        let qb_local = ex.presentation.basis(&frame.alg);
        let (q_alg, q_coords) = ex.presentation.subalgebra(&frame.alg)?;
        let q_sigma = restrict_involution(&frame.alg, &frame.sigma, &q_alg, &q_coords, VerifyLevel::Full)?;
        let alternating = ex.alternating.as_ref().map(|w| up(w));
        let alpha = match &alternating {
            Some(w) => Some(alg.scalar_part(&alg.square(w)).ok_or(DecomposeError::Relation("v^2 in F"))?),
            None => None,
        };
        factors.push(QuaternionFactor {
            a: ex.presentation.a.clone(),
            b: ex.presentation.b.clone(),
            basis: qb_local.iter().map(|q| up(q)).collect(),
            algebra: q_alg,
            involution: q_sigma,
            involution_type: ex.factor_type,
            case: ex.case,
            pivot: ex.pivot,
            alternating,
            alpha,
        });

        let cent = centralizer(&frame.alg, &qb_local)?;
        let sigma_b = restrict_involution(&frame.alg, &frame.sigma, &cent.algebra, &cent.coords, level)?;
        let embed_b = frame.embed.mul(f, &Matrix::from_cols(f, cent.basis(), frame.alg.dim()));
        let mut gens_b = Vec::with_capacity(ex.remaining.len());
        for g in &ex.remaining {
            gens_b.push(cent.coords.coords(f, g).ok_or(DecomposeError::Relation("generators in C(Q)"))?);
        }
        frame = Frame { alg: cent.algebra, sigma: sigma_b, embed: embed_b, gens: gens_b };
    }
    let itype = cert.involution_type;
    let alternating_generators: Vec<Vector> = factors.iter().filter_map(|q| q.alternating.clone()).collect();
    let mut report = DecompositionReport {
        factors,
        involution_type: itype,
        alternating_generators,
        checks: ReportChecks { recertified_levels: recertified, ..Default::default() },
        pivot_retries: retries,
    };
    report.checks = verify_report(alg, sigma, cert, &report)?;
    report.checks.recertified_levels = recertified;
    Ok(report)
}

fn verify_report(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    report: &DecompositionReport,
) -> Result<ReportChecks, DecomposeError> {
    let f = alg.field();
    let d = alg.dim();
    let factors = &report.factors;
    let sigma_invariant = factors
        .iter()
        .all(|q| q.basis.iter().all(|x| linalg::in_span(f, &q.basis, &sigma.apply(f, x))));
    let mut commuting = true;
    for (i, p) in factors.iter().enumerate() {
        for q in &factors[i + 1..] {
            for x in &p.basis[1..] {
                for y in &q.basis[1..] {
                    if !alg.is_zero(&alg.commutator(x, y)) {
                        commuting = false;
                    }
                }
            }
        }
    }
    let dimension_product = 2 * factors.len() < usize::BITS as usize && 1usize << (2 * factors.len()) == d;
    let mut products = vec![alg.unit().clone()];
    for q in factors {
        products = products.iter().flat_map(|p| q.basis.iter().map(move |x| (p, x))).map(|(p, x)| alg.mul(p, x)).collect();
    }
    let kronecker_basis = dimension_product && linalg::rank(f, &Matrix::from_cols(f, &products, d)) == d;

    let mut checks = ReportChecks {
        sigma_invariant,
        commuting,
        dimension_product,
        kronecker_basis,
        ..Default::default()
    };
    if report.involution_type == InvolutionType::Orthogonal {
        let gens = &report.alternating_generators;
        let all_present = gens.len() == factors.len();
        checks.generators_invertible = Some(
            all_present
                && gens.iter().all(|v| alg.scalar_part(&alg.square(v)).is_some_and(|c| !c.is_zero())),
        );
        let s_coords = Coordinates::new(f, cert.basis.clone()).ok_or(AlgebraError::Dependent)?;
        checks.generators_in_s = Some(all_present && gens.iter().all(|v| s_coords.coords(f, v).is_some()));
        checks.generators_in_factor_alt = Some(all_present && factors.iter().all(|q| {
            let w = q.alternating.as_ref().expect("orthogonal factor");
            let alt: Vec<Vector> = q.basis.iter().map(|x| alg.add(x, &sigma.apply(f, x))).collect();
            linalg::in_span(f, &alt, w)
        }));
        let test = AltTest::new(alg, sigma)?;
        checks.subset_products_alt = Some(
            all_present && vector_subset_products(alg, gens).iter().skip(1).all(|p| test.contains(f, p)),
        );
    }
    Ok(checks)
}

/// Gram matrix of the associative form on the span of `basis`:
/// `s(x, y)` is the scalar `alpha` with `xy - alpha` alternating.
pub fn s_form_on(alg: &Algebra, sigma: &Involution, basis: &[Vector]) -> Result<BilinearForm, DecomposeError> {
    let f = alg.field();
    if involution_type(alg, sigma) != InvolutionType::Orthogonal {
        return Err(DecomposeError::NotOrthogonal);
    }
    let test = AltTest::new(alg, sigma)?;
    let n = basis.len();
    let mut gram = Matrix::zeros(f, n, n);
    for i in 0..n {
        for j in i..n {
            let a = test
                .scalar_part(alg, &alg.mul(&basis[i], &basis[j]))
                .ok_or(DecomposeError::Inconsistent("product outside F + Alt".into()))?;
            gram.set(i, j, a.clone());
            gram.set(j, i, a);
        }
    }
    let form = BilinearForm::new(f, gram)?;
    let coords = Coordinates::new(f, basis.to_vec()).ok_or(AlgebraError::Dependent)?;
    // associativity s(x, yz) = s(xy, z) through coordinates in S
    for i in 0..n {
        for j in 0..n {
            let xy = coords.coords(f, &alg.mul(&basis[i], &basis[j]));
            for k in 0..n {
                let yz = coords.coords(f, &alg.mul(&basis[j], &basis[k]));
                let (Some(xy), Some(yz)) = (&xy, yz) else {
                    return Err(DecomposeError::Inconsistent("S is not closed".into()));
                };
                let ei = coords_unit(f, n, i);
                let ek = coords_unit(f, n, k);
                if form.eval(&ei, &yz) != form.eval(xy, &ek) {
                    return Err(DecomposeError::Inconsistent("s is not associative".into()));
                }
            }
        }
        let sq = alg.scalar_part(&alg.square(&basis[i]));
        if sq.as_ref() != Some(form.gram().get(i, i)) {
            return Err(DecomposeError::Inconsistent("s(v, v) != v^2".into()));
        }
    }
    if let Some(one) = coords.coords(f, alg.unit()) {
        for (i, b) in basis.iter().enumerate() {
            if test.contains(f, b) && !form.eval(&one, &coords_unit(f, n, i)).is_zero() {
                return Err(DecomposeError::Inconsistent("1 is not orthogonal to S_0".into()));
            }
        }
    }
    Ok(form)
}

fn coords_unit(f: &Field, n: usize, i: usize) -> Vec<FieldElem> {
    (0..n).map(|j| f.from_bool(i == j)).collect()
}

/// The associative form on the certificate algebra, in its basis.
pub fn s_form(alg: &Algebra, sigma: &Involution, cert: &Certificate) -> Result<BilinearForm, DecomposeError> {
    cert.require()?;
    s_form_on(alg, sigma, &cert.basis)
}

#[derive(Clone, Debug)]
pub struct PfisterInvariant {
    pub alphas: Vec<FieldElem>,
    pub form: BilinearForm,
    pub report: DecompositionReport,
}

/// `<<alpha_1, ..., alpha_n>>` from a decomposition, cross-checked against
/// the factor discriminants and the associative form on the generators.
pub fn pfister_invariant(
    alg: &Algebra,
    sigma: &Involution,
    cert: &Certificate,
    level: VerifyLevel,
) -> Result<PfisterInvariant, DecomposeError> {
    if cert.involution_type != InvolutionType::Orthogonal {
        return Err(DecomposeError::NotOrthogonal);
    }
    let report = full_decomposition(alg, sigma, cert, level)?;
    if !report.checks.all_pass() {
        return Err(DecomposeError::Inconsistent("decomposition checks failed".into()));
    }
    pfister_from_report(alg, sigma, report)
}

pub fn pfister_from_report(
    alg: &Algebra,
    sigma: &Involution,
    report: DecompositionReport,
) -> Result<PfisterInvariant, DecomposeError> {
    let f = alg.field();
    let alphas = report.alphas();
    for (q, a) in report.factors.iter().zip(&alphas) {
        let disc = disc_orthogonal(&q.algebra, &q.involution)?;
        if !f.is_square(&f.mul(&disc, a)) {
            return Err(DecomposeError::Inconsistent("factor discriminant differs from v^2".into()));
        }
    }
    let form = BilinearForm::pfister(f, &alphas)?;
    let prods = vector_subset_products(alg, &report.alternating_generators);
    let s = s_form_on(alg, sigma, &prods)?;
    if s.gram() != form.gram() {
        return Err(DecomposeError::Inconsistent("s differs from the Pfister form on the generators".into()));
    }
    Ok(PfisterInvariant { alphas, form, report })
}

/// Replace `gens[i], gens[j]` by alternating generators with squares
/// `beta_i, beta_j`, given `M` with `M^T <a_i, a_j, a_i a_j> M = <b_i, b_j, b_i b_j>`.
pub fn regenerate(
    alg: &Algebra,
    sigma: &Involution,
    gens: &[Vector],
    (i, j): (usize, usize),
    (beta_i, beta_j): (&FieldElem, &FieldElem),
    m: &Matrix,
) -> Result<Vec<Vector>, DecomposeError> {
    let f = alg.field();
    if i >= gens.len() || j >= gens.len() || i == j {
        return Err(DecomposeError::Precondition("pair out of range".into()));
    }
    let sq = |v: &Vector| alg.scalar_part(&alg.square(v)).ok_or(DecomposeError::Relation("v^2 in F"));
    let (ai, aj) = (sq(&gens[i])?, sq(&gens[j])?);
    let b0 = BilinearForm::diagonal(f, &[ai.clone(), aj.clone(), f.mul(&ai, &aj)]);
    let c0 = BilinearForm::diagonal(f, &[beta_i.clone(), beta_j.clone(), f.mul(beta_i, beta_j)]);
    if !verify_isometry(&b0, &c0, m) {
        return Err(DecomposeError::Witness);
    }
    let w = [gens[i].clone(), gens[j].clone(), alg.mul(&gens[i], &gens[j])];
    let image = |col: usize| linalg::combine(f, &w, &m.col(col), alg.dim());
    let mut out = gens.to_vec();
    out[i] = image(0);
    out[j] = image(1);
    let squares: Vec<FieldElem> = out.iter().map(sq).collect::<Result<_, _>>()?;
    if &squares[i] != beta_i || &squares[j] != beta_j {
        return Err(DecomposeError::Inconsistent("regenerated squares".into()));
    }
    let test = AltTest::new(alg, sigma)?;
    let prods = vector_subset_products(alg, &out);
    if !prods.iter().skip(1).all(|p| test.contains(f, p)) {
        return Err(DecomposeError::Inconsistent("regenerated products are not alternating".into()));
    }
    if linalg::span_basis(f, &prods, alg.dim()).len() != prods.len() {
        return Err(DecomposeError::Inconsistent("regenerated generators are dependent".into()));
    }
    if s_form_on(alg, sigma, &prods)?.gram() != BilinearForm::pfister(f, &squares)?.gram() {
        return Err(DecomposeError::Inconsistent("s on regenerated basis".into()));
    }
    Ok(out)
}

/// A quaternion `F`-form of a quaternion algebra over a tower `K / F`.
#[derive(Clone, Debug)]
pub struct Descent {
    pub algebra: Algebra,
    pub involution: Involution,
    pub a: FieldElem,
    pub b: FieldElem,
    /// `1, eta, v, eta v` in the coordinates of the `K`-algebra.
    pub basis: Vec<Vector>,
    /// `eta + sigma(eta) = alpha u`.
    pub alpha: FieldElem,
    pub alpha_in_base: bool,
}

/// Find a `sigma`-stable quaternion `F`-subalgebra `Q_0` with
/// `Q = Q_0 (x) K`, for `K^2 in F` and `Alt(Q)` squaring into `F`.
pub fn descend_quaternion(q: &Algebra, sigma: &Involution, base: &Field) -> Result<Descent, DecomposeError> {
    let k = q.field();
    let bd = base.depth();
    if q.dim() != 4 || k.depth() <= bd || k.ancestor(bd) != *base {
        return Err(DecomposeError::Precondition("quaternion over a tower above the base".into()));
    }
    for stage in bd..k.depth() {
        let low = k.ancestor(stage);
        if low.descend(k.gamma(stage), bd).is_none() {
            return Err(DecomposeError::Precondition(format!("stage {} is not a square root of a base element", stage + 1)));
        }
    }
    if involution_type(q, sigma) != InvolutionType::Orthogonal {
        return Err(DecomposeError::NotOrthogonal);
    }
    let down = |x: &FieldElem| k.descend(x, bd);
    let u = alt_space(q, sigma).into_iter().next().ok_or(DecomposeError::NotOrthogonal)?;
    let u2 = q.scalar_part(&q.square(&u)).ok_or(DecomposeError::Relation("u^2 in K"))?;
    if down(&u2).is_none() {
        return Err(DecomposeError::Precondition("alternating square is not in the base field".into()));
    }
    let (xi, _) = linalg::solve(k, &q.commutator_matrix(&u), &u).ok_or(DecomposeError::InnerDerivation)?;
    let eta = q.square(&xi);
    let a = q
        .scalar_part(&q.add(&q.square(&eta), &eta))
        .and_then(|c| down(&c))
        .ok_or(DecomposeError::Relation("eta^2 + eta in F"))?;
    let w = q.add(&eta, &sigma.apply(k, &eta));
    let p = u.iter().position(|x| !x.is_zero()).expect("nonzero alternating element");
    let alpha = k.div(&w[p], &u[p])?;
    if q.scale(&alpha, &u) != w {
        return Err(DecomposeError::Relation("eta + sigma(eta) in K u"));
    }
    let alpha_in_base = down(&alpha).is_some();
    let v = if alpha_in_base { u } else { q.scale(&alpha, &u) };
    let pres = QuaternionPresentation::recognize(q, eta, v)?;
    let b = down(&pres.b).ok_or(DecomposeError::Relation("v^2 in F"))?;
    let basis = pres.basis(q);
    let p_mat = Matrix::from_cols(k, &basis, 4);
    let (q_k, pinv) = q.change_basis(&p_mat)?;
    let (q0, _) = csa::quaternion(base, &a, &b)?;
    let lift = |x: &FieldElem| k.lift(x.clone(), bd);
    let (q0_k, _) = csa::quaternion(k, &lift(&a), &lift(&b))?;
    if q_k != q0_k {
        return Err(DecomposeError::Inconsistent("Q differs from Q_0 (x) K".into()));
    }
    let sig_k = pinv.mul(k, sigma.matrix()).mul(k, &p_mat);
    let mut sig0 = Matrix::zeros(base, 4, 4);
    for r in 0..4 {
        for c in 0..4 {
            sig0.set(r, c, down(sig_k.get(r, c)).ok_or(DecomposeError::Relation("sigma(Q_0) = Q_0"))?);
        }
    }
    let involution = Involution::validate(&q0, sig0, VerifyLevel::Full)?;
    Ok(Descent { algebra: q0, involution, a, b, basis, alpha, alpha_in_base })
}

/// `B = C_A(u)` as an algebra over `K = F[u]` with the restricted involution
/// and the other alternating generators carried over.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub view: ScalarExtensionView,
    pub involution: Involution,
    pub generators: Vec<Vector>,
    pub alphas: Vec<FieldElem>,
    pub pfister: BilinearForm,
}

impl Restriction {
    pub fn algebra(&self) -> &Algebra {
        &self.view.algebra
    }
}

pub fn restrict_to_centralizer(
    alg: &Algebra,
    sigma: &Involution,
    gens: &[Vector],
    k: usize,
    level: VerifyLevel,
) -> Result<Restriction, DecomposeError> {
    let f = alg.field();
    let u = gens.get(k).ok_or(DecomposeError::Precondition("generator index".into()))?;
    let c = alg.scalar_part(&alg.square(u)).ok_or(DecomposeError::Relation("u^2 in F"))?;
    if c.is_zero() || f.is_square(&c) {
        return Err(DecomposeError::Precondition("u^2 is a square".into()));
    }
    let b = centralizer(alg, std::slice::from_ref(u))?;
    let u_b = b.coords.coords(f, u).expect("u centralizes itself");
    let view = b.algebra.over_central_sqrt(&u_b)?;
    let l = view.algebra.field().clone();
    let mut cols = Vec::with_capacity(view.basis.len());
    for cj in &view.basis {
        let amb = b.embed(f, cj);
        let img = b.coords.coords(f, &sigma.apply(f, &amb)).ok_or(DecomposeError::Relation("sigma(B) = B"))?;
        cols.push(view.lower(f, &img).ok_or(DecomposeError::Relation("sigma(B) = B"))?);
    }
    let m = view.basis.len();
    let involution = Involution::validate(&view.algebra, Matrix::from_cols(&l, &cols, m), level)?;
    if involution_type(&view.algebra, &involution) != InvolutionType::Orthogonal {
        return Err(DecomposeError::Inconsistent("restriction lost orthogonality".into()));
    }
    let mut generators = Vec::new();
    let mut alphas = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if i == k {
            continue;
        }
        let gb = b.coords.coords(f, g).ok_or(DecomposeError::Relation("generators commute with u"))?;
        generators.push(view.lower(f, &gb).expect("B coordinates lower to K"));
        let a = alg.scalar_part(&alg.square(g)).ok_or(DecomposeError::Relation("v^2 in F"))?;
        alphas.push(l.lift(a, f.depth()));
    }
    let cert = certificate_from_generators(&view.algebra, &involution, generators.clone(), level)?;
    cert.require()?;
    let test = AltTest::new(&view.algebra, &involution)?;
    if !cert.basis.iter().skip(1).all(|p| test.contains(&l, p)) {
        return Err(DecomposeError::Inconsistent("carried generators are not alternating".into()));
    }
    let pfister = BilinearForm::pfister(&l, &alphas)?;
    if s_form_on(&view.algebra, &involution, &cert.basis)?.gram() != pfister.gram() {
        return Err(DecomposeError::Inconsistent("Pfister invariant over K".into()));
    }
    Ok(Restriction { view, involution, generators, alphas, pfister })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csa::{canonical_involution, int_conjugate, quaternion};

    fn orth(f: &Field, a: &str, b: &str) -> (Algebra, Involution) {
        let (q, p) = quaternion(f, &f.parse(a).unwrap(), &f.parse(b).unwrap()).unwrap();
        let g = canonical_involution(&q, &p).unwrap();
        let s = int_conjugate(&q, &g, &p.v).unwrap();
        (q, s)
    }

    #[test]
    fn single_orthogonal_factor() {
        let f = Field::rational(2);
        let (q, s) = orth(&f, "t1", "t2");
        let (a, sigma, cert) = phi_candidate(&[(q.clone(), s.clone())], VerifyLevel::Full).unwrap();
        assert!(cert.is_valid());
        assert_eq!(cert.dim(), 2);
        let v = &cert.generators[0];
        assert_eq!(a.scalar_part(&a.square(v)), Some(f.var(1)));
        let rep = full_decomposition(&a, &sigma, &cert, VerifyLevel::Full).unwrap();
        assert_eq!(rep.factors.len(), 1);
        assert!(rep.checks.all_pass());
        let pf = pfister_invariant(&a, &sigma, &cert, VerifyLevel::Full).unwrap();
        assert_eq!(pf.alphas, vec![f.var(1)]);
    }

    #[test]
    fn symplectic_factor_certificate() {
        let f = Field::rational(2);
        let (q, p) = quaternion(&f, &f.var(0), &f.var(1)).unwrap();
        let g = canonical_involution(&q, &p).unwrap();
        let (a, sigma, cert) = phi_candidate(&[(q, g)], VerifyLevel::Full).unwrap();
        assert!(cert.is_valid(), "{:?}", cert.flags);
        assert_eq!(cert.flags.in_alt_plus_f, None);
        let rep = full_decomposition(&a, &sigma, &cert, VerifyLevel::Full).unwrap();
        assert_eq!(rep.factors.len(), 1);
        assert!(rep.checks.all_pass());
    }

    #[test]
    fn failing_certificates() {
        let f = Field::rational(2);
        let (q, s) = orth(&f, "t1", "t2");
        let c = check_certificate(&q, &s, vec![q.unit().clone()], None, VerifyLevel::Full).unwrap();
        assert!(!c.flags.self_centralizing);
        assert!(!c.is_valid());
        let u = q.basis_vec(1);
        let c = check_certificate(&q, &s, vec![q.unit().clone(), u], None, VerifyLevel::Full).unwrap();
        assert!(!c.flags.conic_valid);
        assert!(c.require().is_err());
    }

    #[test]
    fn two_factors_and_form() {
        let f = Field::rational(2);
        let (a, sigma, cert) =
            phi_candidate(&[orth(&f, "t1", "t1"), orth(&f, "t2", "t2")], VerifyLevel::Full).unwrap();
        assert!(cert.is_valid());
        assert_eq!(cert.dim(), 4);
        let rep = full_decomposition(&a, &sigma, &cert, VerifyLevel::Full).unwrap();
        assert_eq!(rep.factors.len(), 2);
        assert!(rep.checks.all_pass(), "{:?}", rep.checks);
        let s = s_form(&a, &sigma, &cert).unwrap();
        assert_eq!(s.gram().get(0, 0), &f.one());
        let pf = pfister_from_report(&a, &sigma, rep).unwrap();
        let mut alphas = pf.alphas.clone();
        alphas.sort_by_key(|x| f.render(x));
        assert_eq!(alphas, vec![f.var(0), f.var(1)]);
        // s(v1, v2) = 0
        let prods = vector_subset_products(&a, &pf.report.alternating_generators);
        let sf = s_form_on(&a, &sigma, &prods).unwrap();
        assert!(sf.gram().get(1, 2).is_zero());
        assert_eq!(sf.gram(), pf.form.gram());
    }

    #[test]
    fn regeneration_witnesses() {
        let f = Field::rational(2);
        let (a, sigma, cert) =
            phi_candidate(&[orth(&f, "t1", "t1"), orth(&f, "t2", "t2")], VerifyLevel::Full).unwrap();
        let gens = cert.generators.clone();
        let sq = |v: &Vector| a.scalar_part(&a.square(v)).unwrap();
        let (a1, a2) = (sq(&gens[0]), sq(&gens[1]));
        let id = Matrix::identity(&f, 3);
        assert_eq!(regenerate(&a, &sigma, &gens, (0, 1), (&a1, &a2), &id).unwrap(), gens);
        let swap = Matrix::from_rows(vec![
            vec![f.zero(), f.one(), f.zero()],
            vec![f.one(), f.zero(), f.zero()],
            vec![f.zero(), f.zero(), f.one()],
        ]);
        let swapped = regenerate(&a, &sigma, &gens, (0, 1), (&a2, &a1), &swap).unwrap();
        assert_eq!(swapped, vec![gens[1].clone(), gens[0].clone()]);
        let lam = f.parse("t1 + t2").unwrap();
        let scale = Matrix::diagonal(&f, &[lam.clone(), f.one(), lam.clone()]);
        let b1 = f.mul(&a1, &f.square(&lam));
        let scaled = regenerate(&a, &sigma, &gens, (0, 1), (&b1, &a2), &scale).unwrap();
        assert_eq!(scaled[0], a.scale(&lam, &gens[0]));
        assert_eq!(
            regenerate(&a, &sigma, &gens, (0, 1), (&a2, &a1), &id).unwrap_err(),
            DecomposeError::Witness
        );
    }

    #[test]
    fn descent_of_extended_quaternion() {
        let f = Field::rational(2);
        let k = f.adjoin_sqrt(&f.var(1)).unwrap();
        let lift = |s: &str| k.lift(f.parse(s).unwrap(), 0);
        let (q, p) = quaternion(&k, &lift("t1"), &lift("t1 + t2")).unwrap();
        let g = canonical_involution(&q, &p).unwrap();
        let s = int_conjugate(&q, &g, &p.v).unwrap();
        let d = descend_quaternion(&q, &s, &f).unwrap();
        assert_eq!(d.algebra.field(), &f);
        assert!(csa::involution_type(&d.algebra, &d.involution) == InvolutionType::Orthogonal);

        // Alt generated by an element squaring to a proper K-element
        let (q2, p2) = quaternion(&k, &lift("t1"), &k.stage_generator(1)).unwrap();
        let g2 = canonical_involution(&q2, &p2).unwrap();
        let s2 = int_conjugate(&q2, &g2, &p2.v).unwrap();
        assert!(matches!(descend_quaternion(&q2, &s2, &f), Err(DecomposeError::Precondition(_))));
    }

    #[test]
    fn restriction_to_centralizer() {
        let f = Field::rational(2);
        let (a, sigma, cert) =
            phi_candidate(&[orth(&f, "t1", "t1"), orth(&f, "t2", "t2")], VerifyLevel::Full).unwrap();
        let r = restrict_to_centralizer(&a, &sigma, &cert.generators, 1, VerifyLevel::Full).unwrap();
        assert_eq!(r.algebra().dim(), 4);
        assert_eq!(r.generators.len(), 1);
        assert_eq!(r.pfister.dim(), 2);

        let (q, s) = orth(&f, "t1", "t2");
        let (a, sigma, cert) = phi_candidate(&[(q, s)], VerifyLevel::Full).unwrap();
        let r = restrict_to_centralizer(&a, &sigma, &cert.generators, 0, VerifyLevel::Full).unwrap();
        assert_eq!(r.algebra().dim(), 1);
        assert!(r.generators.is_empty());
    }
}
