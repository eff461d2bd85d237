use char2alg::classify::{invariants, same_invariant, Verdict};
use char2alg::conic::clifford;
use char2alg::corpus;
use char2alg::decompose::full_decomposition;
use char2alg::fields::{Field, FieldElem};
use char2alg::forms::{same_norm_field, BilinearForm};
use char2alg::VerifyLevel;
use proptest::prelude::*;

fn field() -> Field {
    Field::rational(3)
}

/// Small elements: sums of monomials of degree below 3 in t1, t2, t3.
fn elem() -> impl Strategy<Value = Vec<[u32; 3]>> {
    prop::collection::vec([0u32..3, 0u32..3, 0u32..3], 1..4)
}

fn build(f: &Field, terms: &[[u32; 3]]) -> FieldElem {
    let mut acc = f.zero();
    for t in terms {
        let m = (0..3).fold(f.one(), |m, i| f.mul(&m, &f.pow(&f.var(i), t[i] as u64)));
        acc = f.add(&acc, &m);
    }
    acc
}

/// A slot: zero, one, a variable, or a product of two variables.
fn slot() -> impl Strategy<Value = u8> {
    0u8..8
}

fn slot_value(f: &Field, s: u8) -> FieldElem {
    match s {
        0 => f.zero(),
        1 => f.one(),
        2..=4 => f.var((s - 2) as usize),
        5 => f.mul(&f.var(0), &f.var(1)),
        6 => f.mul(&f.var(1), &f.var(2)),
        _ => f.add(&f.var(0), &f.var(2)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frobenius_is_additive(a in elem(), b in elem()) {
        let f = field();
        let (x, y) = (build(&f, &a), build(&f, &b));
        prop_assert_eq!(f.square(&f.add(&x, &y)), f.add(&f.square(&x), &f.square(&y)));
        let s = f.square(&x);
        prop_assert!(f.is_square(&s));
        prop_assert_eq!(f.sqrt(&s).unwrap(), x);
    }

    #[test]
    fn field_inverse(a in elem()) {
        let f = field();
        let x = build(&f, &a);
        prop_assume!(!x.is_zero());
        prop_assert!(f.mul(&x, &f.inv(&x).unwrap()).is_one());
    }

    #[test]
    fn clifford_models_are_rho_generated(slots in prop::collection::vec(slot(), 1..4)) {
        let f = field();
        let alphas: Vec<FieldElem> = slots.iter().map(|&s| slot_value(&f, s)).collect();
        let c = clifford(&f, &alphas).unwrap();
        let n = alphas.len();
        prop_assert_eq!(c.dim(), 1 << n);
        prop_assert!(c.is_rho_generated().unwrap());
        prop_assert_eq!(c.min_rank(), n);
        prop_assert!(c.is_frobenius());
        prop_assert!(c.loewy_length() + c.residue_rank() <= c.min_rank() + 1);
        // codim m = 2^(2-independence degree of the slots)
        let r = char2alg::fields::two_independence_degree(&f, &alphas);
        prop_assert_eq!(c.dim() - c.maximal_ideal().len(), 1 << r);
    }

    #[test]
    fn pfister_diagonal_is_subset_products(slots in prop::collection::vec(slot(), 1..4)) {
        let f = field();
        let alphas: Vec<FieldElem> = slots.iter().map(|&s| slot_value(&f, s)).collect();
        prop_assume!(alphas.iter().all(|a| !a.is_zero()));
        let b = BilinearForm::pfister(&f, &alphas).unwrap();
        let prods = char2alg::fields::subset_products(&f, &alphas);
        prop_assert!(b.is_diagonal());
        prop_assert_eq!(b.diagonal_entries(), prods);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scrambling_preserves_the_decomposition(seed in 0u64..1000, scramble in 0u64..1000) {
        let f = field();
        let level = VerifyLevel::Fast;
        let inst = corpus::random_orthogonal_product(&f, 2, seed, level).unwrap();
        let s = corpus::scramble(&inst, scramble, level).unwrap();
        prop_assert!(s.certificate.is_valid());
        let a = full_decomposition(&inst.algebra, &inst.involution, &inst.certificate, level).unwrap();
        let b = full_decomposition(&s.algebra, &s.involution, &s.certificate, level).unwrap();
        prop_assert!(a.checks.all_pass() && b.checks.all_pass());
        prop_assert!(same_norm_field(&f, &a.alphas(), &b.alphas()));
    }

    #[test]
    fn same_invariant_is_reflexive_and_symmetric(s1 in 0u64..500, s2 in 0u64..500) {
        let f = field();
        let level = VerifyLevel::Fast;
        let x = corpus::random_orthogonal_product(&f, 1, s1, level).unwrap();
        let y = corpus::random_orthogonal_product(&f, 1, s2, level).unwrap();
        let ix = invariants(&x.algebra, &x.involution, &x.certificate, level).unwrap();
        let iy = invariants(&y.algebra, &y.involution, &y.certificate, level).unwrap();
        prop_assert_eq!(same_invariant(&f, &ix.record, &ix.record).unwrap().verdict, Verdict::Equal);
        let xy = same_invariant(&f, &ix.record, &iy.record).unwrap();
        let yx = same_invariant(&f, &iy.record, &ix.record).unwrap();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn metabolic_flags_agree(seed in 0u64..500) {
        let f = field();
        let level = VerifyLevel::Fast;
        let inst = corpus::random_orthogonal_product(&f, 2, seed, level).unwrap();
        let rep = char2alg::classify::metabolic_suite(&inst.algebra, &inst.involution, &inst.certificate, level, seed).unwrap();
        prop_assert_eq!(rep.flags.pfister_metabolic, rep.flags.phi_not_field);
        prop_assert_eq!(rep.invariants.record.anisotropic, !rep.flags.pfister_metabolic);
        if let Some(split) = rep.split {
            prop_assert!(split.idempotent_verified && split.reconstruction_verified);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn certificates_survive_scalar_extension(seed in 0u64..500, var in 0usize..3) {
        let f = field();
        let level = VerifyLevel::Fast;
        let inst = corpus::random_orthogonal_product(&f, 2, seed, level).unwrap();
        let k = f.adjoin_sqrt(&f.var(var)).unwrap();
        let (ak, sk, ck) =
            char2alg::decompose::extend_scalars(&inst.algebra, &inst.involution, &inst.certificate, &k, level).unwrap();
        prop_assert!(ck.is_valid(), "{:?}", ck.flags.first_failure());
        prop_assert_eq!(ck.dim(), inst.certificate.dim());
        let rep = full_decomposition(&ak, &sk, &ck, level).unwrap();
        prop_assert!(rep.checks.all_pass());
    }

    #[test]
    fn adjoining_root_of_the_alphas_splits(seed in 0u64..500) {
        let f = field();
        let level = VerifyLevel::Fast;
        let inst = corpus::random_orthogonal_product(&f, 1, seed, level).unwrap();
        let alphas = full_decomposition(&inst.algebra, &inst.involution, &inst.certificate, level).unwrap().alphas();
        let mut k = f.clone();
        for a in &alphas {
            let lifted = k.lift(a.clone(), 0);
            if !k.is_square(&lifted) {
                k = k.adjoin_sqrt(&lifted).unwrap();
            }
        }
        let (ak, sk, ck) =
            char2alg::decompose::extend_scalars(&inst.algebra, &inst.involution, &inst.certificate, &k, level).unwrap();
        let flags = char2alg::classify::transpose_suite(&ak, &sk, &ck, level).unwrap();
        prop_assert!(flags.split && flags.alphas_square);
    }
}
