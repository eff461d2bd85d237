//! Exact dense linear algebra over a [`Field`].

use super::{Field, FieldElem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Matrix {
    pub fn zeros(f: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![f.zero(); rows * cols] }
    }

    pub fn identity(f: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(f, n, n);
        for i in 0..n {
            m.set(i, i, f.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElem>>) -> Matrix {
        let width = rows.first().map_or(0, |r| r.len());
        Self::from_rows_with_width(rows, width)
    }

    pub fn from_rows_with_width(rows: Vec<Vec<FieldElem>>, width: usize) -> Matrix {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * width);
        for r in rows {
            assert_eq!(r.len(), width, "ragged matrix rows");
            data.extend(r);
        }
        Matrix { rows: n, cols: width, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(f: &Field, cols: &[Vec<FieldElem>], height: usize) -> Matrix {
        let mut m = Matrix::zeros(f, height, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), height);
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn diagonal(f: &Field, diag: &[FieldElem]) -> Matrix {
        let mut m = Matrix::zeros(f, diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_cols(&self) -> Vec<Vec<FieldElem>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j);
                    let v = f.add(cur, &f.mul(a, b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, f: &Field, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        let nz: Vec<usize> = (0..v.len()).filter(|&j| !v[j].is_zero()).collect();
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for &j in &nz {
                    let a = self.get(i, j);
                    if !a.is_zero() {
                        acc = f.add(&acc, &f.mul(a, &v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f.add(a, b)).collect(),
        }
    }

    pub fn kron(&self, f: &Field, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(f, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, f.mul(a, b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn map(&self, g: impl Fn(&FieldElem) -> FieldElem) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(g).collect() }
    }
}

/// Reduced row echelon form. Pivots are searched only in the first
/// `pivot_limit` columns (the remaining ones ride along, e.g. right-hand
/// sides). Returns the nonzero rows and their pivot columns.
pub fn rref(f: &Field, m: &Matrix, pivot_limit: usize) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
    rref_rows(f, m.to_rows(), m.cols(), pivot_limit)
}

pub fn rref_rows(
    f: &Field,
    mut rows: Vec<Vec<FieldElem>>,
    width: usize,
    pivot_limit: usize,
) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut cur = 0;
    for col in 0..pivot_limit.min(width) {
        if cur == rows.len() {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in rows.iter().enumerate().skip(cur) {
            let x = &row[col];
            if !x.is_zero() {
                let w = x.weight();
                if best.map_or(true, |(_, bw)| w < bw) {
                    best = Some((r, w));
                    if w <= 1 {
                        break;
                    }
                }
            }
        }
        let Some((pr, _)) = best else { continue };
        rows.swap(cur, pr);
        let p = rows[cur][col].clone();
        if !p.is_one() {
            let pi = f.inv(&p).expect("nonzero pivot");
            for x in rows[cur][col..].iter_mut() {
                if !x.is_zero() {
                    *x = f.mul(x, &pi);
                }
            }
        }
        let nz: Vec<usize> = (col..width).filter(|&j| !rows[cur][j].is_zero()).collect();
        let prow = rows[cur].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == cur || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for &j in &nz {
                let t = if factor.is_one() { prow[j].clone() } else { f.mul(&factor, &prow[j]) };
                row[j] = f.add(&row[j], &t);
            }
        }
        pivots.push(col);
        cur += 1;
    }
    rows.truncate(cur);
    (rows, pivots)
}

pub fn rank(f: &Field, m: &Matrix) -> usize {
    rref(f, m, m.cols()).1.len()
}

fn kernel_from_rref(f: &Field, rows: &[Vec<FieldElem>], pivots: &[usize], n: usize) -> Vec<Vec<FieldElem>> {
    let mut is_pivot = vec![false; n];
    for &p in pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..n).filter(|&j| !is_pivot[j]) {
        let mut v = vec![f.zero(); n];
        v[free] = f.one();
        for (r, &p) in pivots.iter().enumerate() {
            // characteristic 2: the negation is the entry itself
            v[p] = rows[r][free].clone();
        }
        out.push(v);
    }
    out
}

/// Basis of the null space `{x : M x = 0}`.
pub fn kernel(f: &Field, m: &Matrix) -> Vec<Vec<FieldElem>> {
    let (rows, pivots) = rref(f, m, m.cols());
    kernel_from_rref(f, &rows, &pivots, m.cols())
}

/// One solution of `M x = b` (free variables set to zero) plus a kernel
/// basis, or `None` when the system is inconsistent.
pub fn solve(f: &Field, m: &Matrix, b: &[FieldElem]) -> Option<(Vec<FieldElem>, Vec<Vec<FieldElem>>)> {
    assert_eq!(m.rows(), b.len(), "right-hand side length mismatch");
    let n = m.cols();
    let rows: Vec<Vec<FieldElem>> = (0..m.rows())
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    let (mut red, pivots) = rref_rows(f, rows, n + 1, n + 1);
    // a pivot in the right-hand column means 0 = 1
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![f.zero(); n];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = red[r][n].clone();
    }
    for r in red.iter_mut() {
        r.truncate(n);
    }
    let k = kernel_from_rref(f, &red, &pivots, n);
    Some((x, k))
}

pub fn det(f: &Field, m: &Matrix) -> FieldElem {
    assert!(m.is_square());
    let n = m.rows();
    let mut rows = m.to_rows();
    let mut acc = f.one();
    for col in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in rows.iter().enumerate().skip(col) {
            if !row[col].is_zero() {
                let w = row[col].weight();
                if best.map_or(true, |(_, bw)| w < bw) {
                    best = Some((r, w));
                }
            }
        }
        let Some((pr, _)) = best else { return f.zero() };
        // row swaps do not change the sign in characteristic 2
        rows.swap(col, pr);
        let p = rows[col][col].clone();
        acc = f.mul(&acc, &p);
        let pi = f.inv(&p).expect("nonzero pivot");
        let prow = rows[col].clone();
        for row in rows.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = f.mul(&row[col], &pi);
            for j in col..n {
                if !prow[j].is_zero() {
                    row[j] = f.add(&row[j], &f.mul(&factor, &prow[j]));
                }
            }
        }
    }
    acc
}

pub fn inverse(f: &Field, m: &Matrix) -> Option<Matrix> {
    assert!(m.is_square());
    let n = m.rows();
    let rows: Vec<Vec<FieldElem>> = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.extend((0..n).map(|j| f.from_bool(i == j)));
            r
        })
        .collect();
    let (red, pivots) = rref_rows(f, rows, 2 * n, n);
    if pivots.len() < n {
        return None;
    }
    Some(Matrix::from_rows(red.into_iter().map(|r| r[n..].to_vec()).collect()))
}

/// Indices of a maximal linearly independent subset of the columns.
pub fn independent_columns(f: &Field, m: &Matrix) -> Vec<usize> {
    rref(f, m, m.cols()).1
}

/// Coordinates with respect to a linearly independent family, through an
/// invertible square minor picked once.
#[derive(Clone, Debug)]
pub struct Coordinates {
    basis: Vec<Vec<FieldElem>>,
    rows: Vec<usize>,
    minor_inv: Matrix,
}

impl Coordinates {
    /// `None` when the vectors are linearly dependent.
    pub fn new(f: &Field, basis: Vec<Vec<FieldElem>>) -> Option<Coordinates> {
        let m = basis.len();
        if m == 0 {
            return Some(Coordinates { basis, rows: Vec::new(), minor_inv: Matrix::zeros(f, 0, 0) });
        }
        let d = basis[0].len();
        let bt = Matrix::from_rows_with_width(basis.clone(), d);
        let rows = independent_columns(f, &bt);
        if rows.len() < m {
            return None;
        }
        let minor = Matrix::from_rows(
            rows.iter().map(|&r| basis.iter().map(|b| b[r].clone()).collect()).collect(),
        );
        let minor_inv = inverse(f, &minor)?;
        Some(Coordinates { basis, rows, minor_inv })
    }

    pub fn basis(&self) -> &[Vec<FieldElem>] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Coordinates assuming `y` lies in the span (no membership check).
    pub fn coords_unchecked(&self, f: &Field, y: &[FieldElem]) -> Vec<FieldElem> {
        let sub: Vec<FieldElem> = self.rows.iter().map(|&r| y[r].clone()).collect();
        self.minor_inv.mul_vec(f, &sub)
    }

    /// Coordinates of `y`, or `None` when `y` is outside the span.
    pub fn coords(&self, f: &Field, y: &[FieldElem]) -> Option<Vec<FieldElem>> {
        let c = self.coords_unchecked(f, y);
        (self.combine(f, &c).as_slice() == y).then_some(c)
    }

    pub fn combine(&self, f: &Field, c: &[FieldElem]) -> Vec<FieldElem> {
        combine(f, &self.basis, c, self.basis.first().map_or(0, |b| b.len()))
    }
}

/// `sum_i c_i * vecs[i]`.
pub fn combine(f: &Field, vecs: &[Vec<FieldElem>], c: &[FieldElem], dim: usize) -> Vec<FieldElem> {
    let mut out = vec![f.zero(); dim];
    for (v, ci) in vecs.iter().zip(c) {
        if ci.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            if !x.is_zero() {
                *o = f.add(o, &f.mul(ci, x));
            }
        }
    }
    out
}

/// Is `y` in the span of `vecs`?
pub fn in_span(f: &Field, vecs: &[Vec<FieldElem>], y: &[FieldElem]) -> bool {
    if y.iter().all(|x| x.is_zero()) {
        return true;
    }
    if vecs.is_empty() {
        return false;
    }
    let m = Matrix::from_cols(f, vecs, y.len());
    solve(f, &m, y).is_some()
}

/// Basis of the span of `vecs` (a subset of them).
pub fn span_basis(f: &Field, vecs: &[Vec<FieldElem>], dim: usize) -> Vec<Vec<FieldElem>> {
    if vecs.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_cols(f, vecs, dim);
    independent_columns(f, &m).into_iter().map(|j| vecs[j].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_is_empty() {
        let f = Field::rational(1);
        assert!(kernel(&f, &Matrix::identity(&f, 3)).is_empty());
    }

    #[test]
    fn diagonal_determinant() {
        let f = Field::rational(2);
        let m = Matrix::diagonal(&f, &[f.var(0), f.var(1)]);
        assert_eq!(det(&f, &m), f.mul(&f.var(0), &f.var(1)));
    }

    #[test]
    fn back_substitution() {
        let f = Field::rational(1);
        let t = f.var(0);
        let m = Matrix::from_rows(vec![vec![f.one(), f.one()], vec![f.zero(), t.clone()]]);
        let (x, k) = solve(&f, &m, &[f.zero(), t]).unwrap();
        assert_eq!(x, vec![f.one(), f.one()]);
        assert!(k.is_empty());
    }

    #[test]
    fn inconsistent_system_is_flagged() {
        let f = Field::rational(1);
        let m = Matrix::from_rows(vec![vec![f.one(), f.one()], vec![f.one(), f.one()]]);
        assert!(solve(&f, &m, &[f.zero(), f.one()]).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let f = Field::rational(1);
        let t = f.var(0);
        let m = Matrix::from_rows(vec![vec![t.clone(), f.one()], vec![f.one(), f.zero()]]);
        let mi = inverse(&f, &m).unwrap();
        assert_eq!(m.mul(&f, &mi), Matrix::identity(&f, 2));
    }
}
