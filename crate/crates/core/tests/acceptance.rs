//! Acceptance run: one PASS/FAIL line per criterion. Tolerances are exact
//! equalities; time limits are pinned below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use char2alg::algebra::Algebra;
use char2alg::classify::{self, invariants, metabolic_suite, same_invariant, transpose_suite, Verdict};
use char2alg::conic::{clifford, over_subfield, rn_family, vector_subset_products, ConicAlgebra};
use char2alg::corpus::{self, Instance};
use char2alg::decompose::{full_decomposition, s_form_on, CaseTag, DecompositionReport};
use char2alg::fields::{in_fsquare_span, two_independence_degree, Field, FieldElem};
use char2alg::VerifyLevel;
use rand::Rng;

const LEVEL: VerifyLevel = VerifyLevel::Fast;

const LIMIT_RN: Duration = Duration::from_secs(1);
const LIMIT_RHO: Duration = Duration::from_secs(10);
const LIMIT_LOEWY: Duration = Duration::from_secs(5);
const LIMIT_ROUND_TRIP_SMALL: Duration = Duration::from_secs(60);
const LIMIT_ROUND_TRIP_DEG8: Duration = Duration::from_secs(300);
const LIMIT_GRAM: Duration = Duration::from_secs(120);
const LIMIT_CLASSIFY: Duration = Duration::from_secs(120);
const LIMIT_METABOLIC: Duration = Duration::from_secs(120);
const LIMIT_TRANSPOSE: Duration = Duration::from_secs(120);
const LIMIT_FROBENIUS: Duration = Duration::from_secs(10);

const ROUND_TRIP_SEEDS: u64 = 20;
const CONJUGATIONS: u64 = 50;
const FROBENIUS_CHECKS: usize = 1000;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn run(id: &str, name: &str, limit: Duration, body: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panic: {msg}"))
    });
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over the time limit")),
        Err(e) => (false, e),
    };
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {name} | {detail} | {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    ok
}

fn f3() -> Field {
    Field::rational(3)
}

/// Exponent-parity vector of a monomial in up to 8 variables.
fn parity(exps: &[u32]) -> u8 {
    exps.iter().enumerate().fold(0, |m, (i, e)| m | (((e & 1) as u8) << i))
}

fn monomial(f: &Field, exps: &[u32]) -> FieldElem {
    exps.iter().enumerate().fold(f.one(), |acc, (i, &e)| f.mul(&acc, &f.pow(&f.var(i), e as u64)))
}

/// Row-reduced GF(2) span of bit vectors.
fn gf2_basis(vecs: &[u8]) -> Vec<u8> {
    let mut basis: Vec<u8> = Vec::new();
    for &v in vecs {
        let mut x = v;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

fn gf2_contains(basis: &[u8], v: u8) -> bool {
    let mut x = v;
    for &b in basis {
        x = x.min(x ^ b);
    }
    x == 0
}

fn same_parity_span(a: &[u8], b: &[u8]) -> bool {
    let (ba, bb) = (gf2_basis(a), gf2_basis(b));
    ba.len() == bb.len() && a.iter().all(|&x| gf2_contains(&bb, x)) && b.iter().all(|&x| gf2_contains(&ba, x))
}

/// `(A, sigma) = tensor of [1, d_i)` with `Int(v) o gamma`, discriminants
/// `d_i` given as exponent vectors.
fn with_discs(f: &Field, discs: &[Vec<u32>]) -> Instance {
    let factors: Vec<_> = discs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let a = if i % 2 == 0 { f.one() } else { f.var(i % f.nvars()) };
            corpus::standard_orthogonal(f, &a, &monomial(f, d)).expect("quaternion")
        })
        .collect();
    corpus::product(format!("discs{discs:?}"), &factors, LEVEL).expect("certified product")
}

/// `Nrd(c0 + c1 v + c2 uv)` on `[a, b)`, written out.
fn nrd(f: &Field, s: &corpus::OrthogonalSpec) -> FieldElem {
    let [c0, c1, c2] = &s.x;
    let ab = f.mul(&s.a, &s.b);
    f.sum(&[
        f.square(c0),
        f.mul(&s.b, &f.square(c1)),
        f.mul(&ab, &f.square(c2)),
        f.mul(&s.b, &f.mul(c1, c2)),
    ])
}

fn vzero(v: &[FieldElem]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Quaternion relations of every factor, checked in the ambient algebra.
fn factor_relations(alg: &Algebra, rep: &DecompositionReport) -> Result<(), String> {
    for (k, q) in rep.factors.iter().enumerate() {
        let (one, u, v, uv) = (&q.basis[0], &q.basis[1], &q.basis[2], &q.basis[3]);
        ensure!(one == alg.unit(), "factor {k}: first basis vector is not 1");
        ensure!(alg.add(&alg.square(u), u) == alg.scalar(&q.a), "factor {k}: u^2 + u != a");
        ensure!(alg.square(v) == alg.scalar(&q.b), "factor {k}: v^2 != b");
        ensure!(alg.mul(u, v) == *uv, "factor {k}: uv");
        ensure!(alg.add(uv, &alg.mul(v, u)) == *v, "factor {k}: uv + vu != v");
    }
    Ok(())
}

fn criterion_1() -> Check {
    let f = Field::rational(1);
    for n in 4..=9 {
        let r = rn_family(&f, n).map_err(|e| e.to_string())?;
        ensure!(r.min_rank() == n - 2, "R_{n}: r_F = {}", r.min_rank());
        ensure!(r.is_frobenius() == (n % 2 == 0), "R_{n}: frobenius = {}", r.is_frobenius());
        let rho = r.is_rho_generated().map_err(|e| e.to_string())?;
        ensure!(n < 5 || !rho, "R_{n}: rho-generated");
        ensure!(r.loewy_length() == 3, "R_{n}: ll = {}", r.loewy_length());
    }
    Ok("n = 4..9".into())
}

fn conic_corpus() -> Vec<(String, ConicAlgebra, Option<usize>)> {
    let f = f3();
    let t = |i: usize| f.var(i);
    let mut out: Vec<(String, ConicAlgebra, Option<usize>)> = Vec::new();
    let slot_lists: Vec<Vec<FieldElem>> = vec![
        vec![t(0)],
        vec![f.zero()],
        vec![f.one()],
        vec![t(0), t(1)],
        vec![t(0), t(0)],
        vec![f.zero(), f.zero()],
        vec![t(0), f.zero()],
        vec![t(0), f.mul(&t(0), &t(1))],
        vec![t(0), t(1), t(2)],
        vec![t(0), t(1), f.mul(&t(0), &t(1))],
        vec![t(0), f.zero(), t(2)],
        vec![f.zero(), f.zero(), f.zero()],
        vec![f.add(&t(0), &t(1)), t(2), f.one()],
        vec![t(0), t(1), t(2), f.mul(&t(1), &t(2))],
        vec![t(0), t(1), t(2), f.zero()],
        vec![f.zero(), f.zero(), f.zero(), f.zero()],
        vec![t(0), t(1), t(2), f.mul(&t(0), &f.mul(&t(1), &t(2)))],
        vec![t(0), f.square(&t(1)), t(2), f.add(&t(0), &t(2))],
    ];
    for s in slot_lists {
        let n = s.len();
        let label = format!("clifford{:?}", s.iter().map(|x| f.render(x)).collect::<Vec<_>>());
        out.push((label, clifford(&f, &s).expect("clifford"), Some(n)));
    }
    for n in 4..=9 {
        out.push((format!("R_{n}"), rn_family(&f, n).expect("R_n"), None));
    }
    let c1 = clifford(&f, &[t(0)]).unwrap();
    let c0 = clifford(&f, &[f.zero()]).unwrap();
    let c12 = clifford(&f, &[t(1), t(2)]).unwrap();
    let r4 = rn_family(&f, 4).unwrap();
    let r5 = rn_family(&f, 5).unwrap();
    let mixes = [
        ("R_4 x C[t1]", &r4, &c1),
        ("R_5 x C[0]", &r5, &c0),
        ("R_4 x C[t2,t3]", &r4, &c12),
        ("C[t1] x C[t2,t3]", &c1, &c12),
        ("C[0] x C[t2,t3]", &c0, &c12),
        ("R_5 x C[t1]", &r5, &c1),
        ("R_4 x R_4", &r4, &r4),
    ];
    for (label, a, b) in mixes {
        out.push((label.to_string(), a.tensor(b).expect("tensor"), None));
    }
    out
}

fn criterion_2(corpus: &[(String, ConicAlgebra, Option<usize>)]) -> Check {
    ensure!(corpus.len() >= 30, "corpus has {} algebras", corpus.len());
    let mut rho_count = 0;
    for (label, a, slots) in corpus {
        let rho = a.is_rho_generated().map_err(|e| format!("{label}: {e}"))?;
        let r = a.min_rank();
        let by_dim = a.dim() == 1 << r;
        let by_loewy = r == a.loewy_length() + a.residue_rank() - 1;
        ensure!(rho == by_dim && rho == by_loewy, "{label}: rho {rho}, dim {by_dim}, loewy {by_loewy}");
        if let Some(n) = slots {
            ensure!(rho && r == *n, "{label}: Clifford model with {n} slots has r_F = {r}");
        }
        if rho {
            rho_count += 1;
            ensure!(a.is_frobenius(), "{label}: rho-generated but not Frobenius");
        }
    }
    Ok(format!("{} algebras, {rho_count} rho-generated", corpus.len()))
}

fn criterion_3(corpus: &[(String, ConicAlgebra, Option<usize>)]) -> Check {
    let mut additivity = 0;
    for (label, a, _) in corpus {
        let (ll, r, rk) = (a.loewy_length(), a.min_rank(), a.residue_rank());
        ensure!(ll + rk <= r + 1, "{label}: ll {ll} > r_F {r} - r_F(K) {rk} + 1");
        if a.dim() > 16 {
            continue;
        }
        if let Some(s) = a.maximal_subfield().generators.first() {
            let over = over_subfield(a, s).map_err(|e| format!("{label}: {e}"))?;
            ensure!(over.min_rank() + 1 == r, "{label}: r_L {} + 1 != r_F {r}", over.min_rank());
            additivity += 1;
        }
    }
    Ok(format!("bound on {} algebras, additivity on {additivity}", corpus.len()))
}

struct RoundTrip {
    inst: Instance,
    report: DecompositionReport,
}

fn round_trip(f: &Field, n: usize, seed: u64, mixed: bool) -> Result<RoundTrip, String> {
    let specs = corpus::random_orthogonal_specs(f, n, seed);
    let mut inst = corpus::random_orthogonal_product(f, n, seed, LEVEL).map_err(|e| e.to_string())?;
    if mixed {
        inst = corpus::mix_generators(&inst, LEVEL).map_err(|e| e.to_string())?;
    }
    let inst = corpus::scramble(&inst, 1000 + seed, LEVEL).map_err(|e| e.to_string())?;
    let tag = format!("deg {} seed {seed}", 1 << n);
    ensure!(inst.certificate.is_valid(), "{tag}: certificate {:?}", inst.certificate.flags);
    let report = full_decomposition(&inst.algebra, &inst.involution, &inst.certificate, LEVEL)
        .map_err(|e| format!("{tag}: {e}"))?;
    ensure!(report.checks.all_pass(), "{tag}: {:?}", report.checks);
    ensure!(report.factors.len() == n, "{tag}: {} factors", report.factors.len());
    factor_relations(&inst.algebra, &report).map_err(|e| format!("{tag}: {e}"))?;
    let discs: Vec<FieldElem> = specs.iter().map(|s| nrd(f, s)).collect();
    let alphas = report.alphas();
    ensure!(
        char2alg::forms::same_norm_field(f, &alphas, &discs),
        "{tag}: norm field of alphas differs from the factor discriminants"
    );
    if n == 1 {
        ensure!(f.is_square(&f.mul(&alphas[0], &discs[0])), "{tag}: alpha and Nrd(x) differ mod squares");
    }
    Ok(RoundTrip { inst, report })
}

fn criterion_4_small(store: &mut Vec<RoundTrip>) -> Check {
    let f = f3();
    let mut cases = [0usize; 2];
    for n in [1, 2] {
        for seed in 0..ROUND_TRIP_SEEDS {
            let rt = round_trip(&f, n, seed, n > 1 && seed % 2 == 1)?;
            for c in rt.report.cases() {
                cases[(c == CaseTag::NonScalar) as usize] += 1;
            }
            store.push(rt);
        }
    }
    // pinned fixtures
    let case1 = round_trip(&f, 2, 0, false)?;
    ensure!(case1.report.cases().contains(&CaseTag::Scalar), "deg 4 seed 0 does not use the scalar case");
    let case2 = round_trip(&f, 2, 1, true)?;
    ensure!(case2.report.cases()[0] == CaseTag::NonScalar, "deg 4 seed 1 (mixed) does not use the non-scalar case");
    Ok(format!("{} instances of deg 2 and 4, case1 {} / case2 {} extractions", 2 * ROUND_TRIP_SEEDS, cases[0], cases[1]))
}

fn criterion_4_deg8(store: &mut Vec<RoundTrip>) -> Check {
    let f = f3();
    let mut cases = [0usize; 2];
    for seed in 0..ROUND_TRIP_SEEDS {
        let rt = round_trip(&f, 3, seed, seed % 2 == 1)?;
        for c in rt.report.cases() {
            cases[(c == CaseTag::NonScalar) as usize] += 1;
        }
        store.push(rt);
    }
    ensure!(cases[0] > 0 && cases[1] > 0, "cases {cases:?}");
    Ok(format!("{ROUND_TRIP_SEEDS} instances of deg 8, case1 {} / case2 {}", cases[0], cases[1]))
}

fn criterion_5<'a>(store: impl IntoIterator<Item = &'a RoundTrip>) -> Check {
    let mut count = 0;
    for rt in store {
        let (alg, sigma) = (&rt.inst.algebra, &rt.inst.involution);
        let f = alg.field();
        let gens = &rt.report.alternating_generators;
        let prods = vector_subset_products(alg, gens);
        let s = s_form_on(alg, sigma, &prods).map_err(|e| e.to_string())?;
        let alphas = rt.report.alphas();
        let d = prods.len();
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j {
                    (0..alphas.len()).filter(|k| i >> k & 1 == 1).fold(f.one(), |acc, k| f.mul(&acc, &alphas[k]))
                } else {
                    f.zero()
                };
                ensure!(*s.gram().get(i, j) == expected, "{}: Gram entry ({i}, {j})", rt.inst.label);
            }
        }
        count += 1;
    }
    Ok(format!("{count} instances, exact Gram equality"))
}

fn criterion_6() -> Check {
    let f = f3();
    let mut instances: Vec<Instance> = Vec::new();
    for seed in 0..4 {
        instances.push(corpus::random_orthogonal_product(&f, 1, seed, LEVEL).map_err(|e| e.to_string())?);
        instances.push(corpus::random_orthogonal_product(&f, 2, seed, LEVEL).map_err(|e| e.to_string())?);
    }
    instances.push(with_discs(&f, &[vec![1, 0, 0], vec![1, 0, 0]]));
    instances.push(with_discs(&f, &[vec![0, 0, 0], vec![0, 1, 0]]));
    let mut conj = 0;
    for (idx, inst) in instances.iter().enumerate() {
        let base = invariants(&inst.algebra, &inst.involution, &inst.certificate, LEVEL).map_err(|e| e.to_string())?;
        let mut r = corpus::rng(7000 + idx as u64);
        for k in 0..CONJUGATIONS {
            let p = corpus::scramble_matrix(&f, inst.algebra.dim(), &mut r);
            let c = corpus::conjugate(inst, &p, format!("{}-conj{k}", inst.label), LEVEL).map_err(|e| e.to_string())?;
            let other = invariants(&c.algebra, &c.involution, &c.certificate, LEVEL).map_err(|e| e.to_string())?;
            let cmp = same_invariant(&f, &base.record, &other.record).map_err(|e| e.to_string())?;
            ensure!(cmp.verdict == Verdict::Equal, "{} conjugation {k}: {cmp:?}", inst.label);
            conj += 1;
        }
    }

    let e = |v: [u32; 3]| v.to_vec();
    let pairs: Vec<(Vec<Vec<u32>>, Vec<Vec<u32>>)> = vec![
        (vec![e([1, 0, 0])], vec![e([0, 1, 0])]),
        (vec![e([1, 0, 0])], vec![e([0, 0, 1])]),
        (vec![e([0, 1, 0])], vec![e([0, 0, 1])]),
        (vec![e([1, 1, 0])], vec![e([1, 0, 1])]),
        (vec![e([1, 0, 0])], vec![e([1, 1, 1])]),
        (vec![e([1, 0, 0]), e([0, 1, 0])], vec![e([1, 0, 0]), e([0, 0, 1])]),
        (vec![e([1, 0, 0]), e([0, 1, 0])], vec![e([0, 1, 0]), e([0, 0, 1])]),
        (vec![e([1, 0, 0]), e([0, 1, 1])], vec![e([0, 1, 0]), e([1, 0, 1])]),
        (vec![e([1, 0, 0]), e([0, 1, 0])], vec![e([1, 0, 0]), e([1, 0, 0])]),
        (vec![e([1, 1, 0]), e([0, 0, 1])], vec![e([1, 1, 1]), e([0, 0, 1])]),
        (vec![e([0, 0, 1]), e([1, 0, 0])], vec![e([0, 0, 1]), e([0, 0, 1])]),
        (vec![e([1, 0, 0]), e([0, 1, 0])], vec![e([0, 1, 0]), e([1, 1, 0])]),
        (vec![e([1, 0, 1]), e([0, 1, 0])], vec![e([0, 1, 0]), e([1, 1, 1])]),
    ];
    let (mut different, mut equal) = (0, 0);
    for (a, b) in &pairs {
        let pa: Vec<u8> = a.iter().map(|x| parity(x)).collect();
        let pb: Vec<u8> = b.iter().map(|x| parity(x)).collect();
        let oracle_equal = same_parity_span(&pa, &pb) && gf2_basis(&pa).len() == gf2_basis(&pb).len();
        let ia = with_discs(&f, a);
        let ib = with_discs(&f, b);
        let cmp = classify::compare_instances(
            (&ia.algebra, &ia.involution, &ia.certificate),
            (&ib.algebra, &ib.involution, &ib.certificate),
            LEVEL,
        )
        .map_err(|e| e.to_string())?;
        let expected = if oracle_equal { Verdict::Equal } else { Verdict::Different };
        ensure!(cmp.verdict == expected, "{a:?} vs {b:?}: {cmp:?}, parity oracle says {expected:?}");
        if oracle_equal {
            equal += 1;
        } else {
            different += 1;
        }
    }
    ensure!(different >= 10, "only {different} engineered different pairs");
    Ok(format!("{conj} conjugations equal; {different} pairs different, {equal} equal"))
}

fn criterion_7() -> Check {
    let f = f3();
    let e = |v: [u32; 3]| v.to_vec();
    let mut instances: Vec<(Instance, Vec<u8>)> = Vec::new();
    let lists: Vec<Vec<Vec<u32>>> = vec![
        vec![e([0, 0, 0])],
        vec![e([1, 0, 0])],
        vec![e([1, 0, 0]), e([1, 0, 0])],
        vec![e([1, 0, 0]), e([0, 1, 0])],
        vec![e([0, 0, 0]), e([0, 1, 0])],
        vec![e([1, 1, 0]), e([1, 1, 2])],
        vec![e([1, 0, 0]), e([0, 1, 0]), e([1, 1, 0])],
        vec![e([1, 0, 0]), e([0, 1, 0]), e([0, 0, 1])],
    ];
    for l in lists {
        let p = l.iter().map(|x| parity(x)).collect();
        instances.push((with_discs(&f, &l), p));
    }
    let scr = corpus::scramble(&with_discs(&f, &[e([0, 1, 0]), e([0, 1, 0])]), 5, LEVEL).map_err(|e| e.to_string())?;
    instances.push((scr, vec![parity(&[0, 1, 0]); 2]));
    let mut expected: Vec<bool> = instances.iter().map(|(_, p)| gf2_basis(p).len() < p.len()).collect();
    for seed in 0..6 {
        let n = 1 + (seed as usize % 2);
        let discs: Vec<FieldElem> = corpus::random_orthogonal_specs(&f, n, seed).iter().map(|s| nrd(&f, s)).collect();
        let inst = corpus::random_orthogonal_product(&f, n, seed, LEVEL).map_err(|e| e.to_string())?;
        let inst = corpus::scramble(&inst, 300 + seed, LEVEL).map_err(|e| e.to_string())?;
        expected.push(two_independence_degree(&f, &discs) < n);
        instances.push((inst, Vec::new()));
    }
    let (mut met, mut aniso) = (0, 0);
    for (k, (inst, _)) in instances.iter().enumerate() {
        let oracle_metabolic = expected[k];
        let rep = metabolic_suite(&inst.algebra, &inst.involution, &inst.certificate, LEVEL, k as u64)
            .map_err(|e| format!("{}: {e}", inst.label))?;
        ensure!(rep.flags.pfister_metabolic == rep.flags.phi_not_field, "{}: flags disagree", inst.label);
        ensure!(rep.flags.pfister_metabolic == oracle_metabolic, "{}: metabolic {}", inst.label, rep.flags.pfister_metabolic);
        if oracle_metabolic {
            let split = rep.split.as_ref().ok_or_else(|| format!("{}: no split", inst.label))?;
            ensure!(split.idempotent_verified, "{}: idempotent", inst.label);
            let e = &split.idempotent;
            let a = &inst.algebra;
            ensure!(a.square(e) == *e, "{}: e^2 != e", inst.label);
            ensure!(vzero(&a.mul(&inst.involution.apply(&f, e), e)), "{}: sigma(e) e != 0", inst.label);
            ensure!(split.reconstruction_verified, "{}: reconstruction", inst.label);
            ensure!(split.b_algebra.dim() * 4 == a.dim(), "{}: B has dim {}", inst.label, split.b_algebra.dim());
            met += 1;
        } else {
            ensure!(!rep.invariants.record.metabolic && rep.invariants.record.anisotropic, "{}: anisotropy", inst.label);
            ensure!(rep.split.is_none(), "{}: split for an anisotropic form", inst.label);
            aniso += 1;
        }
    }
    Ok(format!("{met} metabolic with verified splits, {aniso} anisotropic"))
}

fn criterion_8(store: &[RoundTrip]) -> Check {
    let f = f3();
    let e = |v: [u32; 3]| v.to_vec();
    let trivial = vec![
        vec![e([0, 0, 0])],
        vec![e([0, 0, 0]), e([0, 0, 0])],
        vec![e([2, 0, 0]), e([0, 0, 0])],
        vec![e([0, 2, 0]), e([2, 0, 2]), e([0, 0, 0])],
    ];
    let nonsquare = vec![vec![e([1, 0, 0])], vec![e([0, 0, 0]), e([0, 1, 0])], vec![e([1, 0, 0]), e([1, 0, 0])]];
    let check = |inst: &Instance, expect: bool| -> Result<(), String> {
        let t = transpose_suite(&inst.algebra, &inst.involution, &inst.certificate, LEVEL).map_err(|e| e.to_string())?;
        let all = [t.split, t.alphas_square, t.s_squares_square, t.residue_trivial];
        ensure!(all.iter().all(|&x| x == expect), "{}: {t:?}", inst.label);
        Ok(())
    };
    for l in &trivial {
        check(&with_discs(&f, l), true)?;
    }
    let scr = corpus::scramble(&with_discs(&f, &[e([0, 0, 0]), e([2, 2, 0])]), 9, LEVEL).map_err(|e| e.to_string())?;
    check(&scr, true)?;
    for l in &nonsquare {
        check(&with_discs(&f, l), false)?;
    }
    let mut agree = 0;
    for rt in store.iter().filter(|rt| rt.inst.algebra.dim() <= 16) {
        let t = transpose_suite(&rt.inst.algebra, &rt.inst.involution, &rt.inst.certificate, LEVEL)
            .map_err(|e| format!("{}: {e}", rt.inst.label))?;
        let any_nonsquare = rt.report.alphas().iter().any(|a| !f.is_square(a));
        ensure!(t.split != any_nonsquare, "{}: {t:?}", rt.inst.label);
        agree += 1;
    }
    Ok(format!("{} trivial, {} non-square, {agree} corpus instances agree", trivial.len() + 1, nonsquare.len()))
}

fn criterion_9() -> Check {
    let f = f3();
    let mut r = corpus::rng(99);
    let random_exps = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<u32> { (0..3).map(|_| r.gen_range(0..4)).collect() };
    let square_factor = |r: &mut rand_chacha::ChaCha8Rng| -> FieldElem {
        let c = match r.gen_range(0..4) {
            0 => f.one(),
            1 => f.add(&f.var(r.gen_range(0..3)), &f.one()),
            2 => f.add(&f.var(0), &f.var(2)),
            _ => f.inv(&f.add(&f.var(1), &f.one())).expect("nonzero"),
        };
        f.square(&c)
    };
    let (mut sq, mut ind, mut span) = (0, 0, 0);
    for k in 0..FROBENIUS_CHECKS {
        match k % 3 {
            0 => {
                let ex = random_exps(&mut r);
                let x = f.mul(&monomial(&f, &ex), &square_factor(&mut r));
                ensure!(f.is_square(&x) == (parity(&ex) == 0), "squareness of t^{ex:?}");
                sq += 1;
            }
            1 => {
                let m = r.gen_range(1..5);
                let exps: Vec<Vec<u32>> = (0..m).map(|_| random_exps(&mut r)).collect();
                let elems: Vec<FieldElem> = exps.iter().map(|e| f.mul(&monomial(&f, e), &square_factor(&mut r))).collect();
                let parities: Vec<u8> = exps.iter().map(|e| parity(e)).collect();
                let oracle = gf2_basis(&parities).len();
                ensure!(two_independence_degree(&f, &elems) == oracle, "2-independence of {exps:?}");
                ind += 1;
            }
            _ => {
                let m = r.gen_range(0..4);
                let exps: Vec<Vec<u32>> = (0..m).map(|_| random_exps(&mut r)).collect();
                let gens: Vec<FieldElem> = exps.iter().map(|e| monomial(&f, e)).collect();
                let target = random_exps(&mut r);
                let x = f.mul(&monomial(&f, &target), &square_factor(&mut r));
                let parities: Vec<u8> = exps.iter().map(|e| parity(e)).collect();
                let oracle = gf2_contains(&gf2_basis(&parities), parity(&target));
                let got = in_fsquare_span(&f, &x, &gens);
                ensure!(got.is_some() == oracle, "span membership of t^{target:?} in {exps:?}");
                if let Some(c) = got {
                    let mut acc = f.zero();
                    for (mask, ci) in c.iter().enumerate() {
                        let prod = (0..gens.len()).filter(|i| mask >> i & 1 == 1).fold(f.one(), |a, i| f.mul(&a, &gens[i]));
                        acc = f.add(&acc, &f.mul(&f.square(ci), &prod));
                    }
                    ensure!(acc == x, "span coefficients do not reproduce the target");
                }
                span += 1;
            }
        }
    }
    Ok(format!("{sq} squareness, {ind} 2-independence, {span} span checks"))
}

fn main() -> ExitCode {
    let corpus = conic_corpus();
    let mut store: Vec<RoundTrip> = Vec::new();
    let mut deg8: Vec<RoundTrip> = Vec::new();
    let results = [
        run("1", "R_n family", LIMIT_RN, criterion_1),
        run("2", "rho-generation equivalences", LIMIT_RHO, || criterion_2(&corpus)),
        run("3", "Loewy bound and rank additivity", LIMIT_LOEWY, || criterion_3(&corpus)),
        run("4a", "decomposition round trip, deg 2 and 4", LIMIT_ROUND_TRIP_SMALL, || criterion_4_small(&mut store)),
        run("4b", "decomposition round trip, deg 8", LIMIT_ROUND_TRIP_DEG8, || criterion_4_deg8(&mut deg8)),
        run("5", "s-form Gram equals the Pfister form", LIMIT_GRAM, || criterion_5(store.iter().chain(&deg8))),
        run("6", "classification harness", LIMIT_CLASSIFY, criterion_6),
        run("7", "metabolic suite", LIMIT_METABOLIC, criterion_7),
        run("8", "transpose suite", LIMIT_TRANSPOSE, || criterion_8(&store)),
        run("9", "Frobenius-twisted checks", LIMIT_FROBENIUS, criterion_9),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
