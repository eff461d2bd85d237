//! Frobenius-twisted linear algebra: systems `sum_i c_i^2 g_i = x`.
//!
//! Over `GF(2^k)(t1..tm)` every element has unique coordinates over the
//! square-free monomials `t^eps` as an `F^2`-vector space; transporting them
//! to `F` through the square root turns the twisted system into an ordinary
//! linear one. An extension stage `F(s)`, `s^2 = g`, splits each unknown
//! `c = a + b s` and each equation into its two components over the parent.

use super::linalg;
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::{Field, FieldElem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearSolution {
    /// One solution, when the system is consistent.
    pub particular: Option<Vec<FieldElem>>,
    /// Basis of `{c : sum c_i^2 g_i = 0}`, an `F`-subspace.
    pub kernel: Vec<Vec<FieldElem>>,
}

/// Square-root coordinates of a base-field element: `x = sum_eps t^eps X_eps^2`.
pub fn sqrt_coords(f: &Field, x: &RatFunc) -> Vec<RatFunc> {
    let k = f.base();
    let den = x.den();
    let p = x.num().mul(k, &den);
    p.sqrt_components(k, f.nvars())
        .into_iter()
        .map(|c| {
            if c.is_zero() {
                RatFunc::zero()
            } else if den.is_one() {
                RatFunc::from_poly(c)
            } else {
                RatFunc::new(k, c, den.clone())
            }
        })
        .collect()
}

/// Inverse of [`sqrt_coords`].
pub fn from_sqrt_coords(f: &Field, coords: &[RatFunc]) -> RatFunc {
    let k = f.base();
    let mut acc = RatFunc::zero();
    for (eps, c) in coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let m = RatFunc::from_poly(Poly::monomial(super::poly::parity_mono(eps), 1));
        acc = acc.add(k, &c.square(k).mul(k, &m));
    }
    acc
}

/// Solve `sum_i c_i^2 gens[i][j] = target[j]` for every component `j`.
pub fn semilinear_solve(f: &Field, gens: &[Vec<FieldElem>], target: &[FieldElem]) -> SemilinearSolution {
    let comps = target.len();
    debug_assert!(gens.iter().all(|g| g.len() == comps));
    if f.depth() == 0 {
        return base_solve(f, gens, target);
    }
    let parent = f.parent().expect("depth > 0");
    let gamma = f.gamma(f.depth() - 1).clone();
    let n = gens.len();
    let split = |x: &FieldElem| -> [FieldElem; 2] {
        let p = x.parts().expect("element at extension depth");
        [p[0].clone(), p[1].clone()]
    };
    let mut low_gens: Vec<Vec<FieldElem>> = Vec::with_capacity(2 * n);
    for g in gens {
        low_gens.push(g.iter().flat_map(|x| split(x)).collect());
    }
    for g in gens {
        low_gens.push(
            g.iter()
                .flat_map(|x| split(x))
                .map(|y| parent.mul(&gamma, &y))
                .collect(),
        );
    }
    let low_target: Vec<FieldElem> = target.iter().flat_map(|x| split(x)).collect();
    let low = semilinear_solve(&parent, &low_gens, &low_target);
    let assemble = |v: &[FieldElem]| -> Vec<FieldElem> {
        (0..n)
            .map(|i| FieldElem::Ext(Box::new([v[i].clone(), v[n + i].clone()])))
            .collect()
    };
    let particular = low.particular.as_deref().map(assemble);
    let lifted: Vec<Vec<FieldElem>> = low.kernel.iter().map(|v| assemble(v)).collect();
    let kernel = if lifted.is_empty() {
        Vec::new()
    } else {
        // the parent-field basis spans the kernel; thin it to a basis over f
        let m = linalg::Matrix::from_rows(lifted);
        let (rows, _) = linalg::rref(f, &m, n);
        rows
    };
    SemilinearSolution { particular, kernel }
}

fn base_solve(f: &Field, gens: &[Vec<FieldElem>], target: &[FieldElem]) -> SemilinearSolution {
    let n = gens.len();
    let width = 1usize << f.nvars();
    let comps = target.len();
    let coords = |x: &FieldElem| sqrt_coords(f, x.as_base().expect("base element"));
    let gen_coords: Vec<Vec<Vec<RatFunc>>> =
        gens.iter().map(|g| g.iter().map(coords).collect()).collect();
    let tgt: Vec<Vec<RatFunc>> = target.iter().map(coords).collect();
    let mut rows = Vec::with_capacity(comps * width);
    let mut rhs = Vec::with_capacity(comps * width);
    for j in 0..comps {
        for eps in 0..width {
            let row: Vec<FieldElem> = (0..n)
                .map(|i| FieldElem::Base(gen_coords[i][j][eps].clone()))
                .collect();
            let b = FieldElem::Base(tgt[j][eps].clone());
            if row.iter().all(|x| x.is_zero()) && b.is_zero() {
                continue;
            }
            rows.push(row);
            rhs.push(b);
        }
    }
    if rows.is_empty() {
        let kernel = (0..n)
            .map(|i| (0..n).map(|j| f.from_bool(i == j)).collect())
            .collect();
        return SemilinearSolution { particular: Some(vec![f.zero(); n]), kernel };
    }
    let m = linalg::Matrix::from_rows_with_width(rows, n);
    match linalg::solve(f, &m, &rhs) {
        Some((x, kernel)) => SemilinearSolution { particular: Some(x), kernel },
        None => SemilinearSolution {
            particular: None,
            kernel: linalg::kernel(f, &m),
        },
    }
}

/// Products of every subset of `gens`, indexed by bitmask.
pub fn subset_products(f: &Field, gens: &[FieldElem]) -> Vec<FieldElem> {
    let mut out = vec![f.one()];
    for g in gens {
        let more: Vec<FieldElem> = out.iter().map(|p| f.mul(p, g)).collect();
        out.extend(more);
    }
    out
}

/// Decide `x` in the `F^2`-span of the subset products of `gens`; returns
/// coefficients `c_I` (bitmask order) with `x = sum c_I^2 prod_I gens`.
pub fn in_fsquare_span(f: &Field, x: &FieldElem, gens: &[FieldElem]) -> Option<Vec<FieldElem>> {
    let prods = subset_products(f, gens);
    let cols: Vec<Vec<FieldElem>> = prods.into_iter().map(|p| vec![p]).collect();
    semilinear_solve(f, &cols, std::slice::from_ref(x)).particular
}

/// Greedy 2-independent subset: each kept element lies outside the norm
/// field of the previously kept ones.
pub fn norm_field_basis(f: &Field, gens: &[FieldElem]) -> Vec<FieldElem> {
    let mut kept: Vec<FieldElem> = Vec::new();
    for g in gens {
        if g.is_zero() {
            continue;
        }
        if in_fsquare_span(f, g, &kept).is_none() {
            kept.push(g.clone());
        }
    }
    kept
}

/// `log2 [F^2(gens) : F^2]`.
pub fn two_independence_degree(f: &Field, gens: &[FieldElem]) -> usize {
    norm_field_basis(f, gens).len()
}
