//! Dense matrices over ℚ(v₁,…,v_N).

use std::collections::BTreeMap;
use std::fmt;

use crate::field::{FieldSpec, RatFun};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<RatFun>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![RatFun::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = RatFun::one();
        }
        m
    }

    /// Panics when rows have unequal lengths.
    pub fn from_rows(rows: Vec<Vec<RatFun>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RatFun) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn column_vector(v: Vec<RatFun>) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v,
        }
    }

    pub fn scalar(x: RatFun) -> Self {
        Matrix {
            rows: 1,
            cols: 1,
            data: vec![x],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFun {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RatFun) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[RatFun] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[RatFun] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<RatFun> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<RatFun>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RatFun::is_zero)
    }

    pub fn map(&self, f: impl Fn(&RatFun) -> RatFun) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<E>(&self, f: impl Fn(&RatFun) -> Result<RatFun, E>) -> Result<Self, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sub");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(RatFun::neg)
    }

    pub fn scale(&self, c: &RatFun) -> Self {
        self.map(|x| x * c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
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
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[RatFun]) -> Vec<RatFun> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(RatFun::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Kronecker product; row index `(i, k)` maps to `i * other.rows + k`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            let (i, k) = (r / other.rows, r % other.rows);
            let (j, l) = (c / other.cols, c % other.cols);
            let a = self.get(i, j);
            if a.is_zero() {
                RatFun::zero()
            } else {
                a * other.get(k, l)
            }
        })
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn block_diag(blocks: &[&Matrix]) -> Self {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(r, c);
        let (mut i, mut j) = (0, 0);
        for b in blocks {
            out.set_block(i, j, b);
            i += b.rows;
            j += b.cols;
        }
        out
    }

    /// Reduced row echelon form with first-nonzero pivoting; returns the pivot
    /// columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            for j in c..self.cols {
                let v = self.get(r, j).mul(&inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let rv = self.get(r, j);
                    if rv.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j).sub(&f.mul(rv));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel `{v : self * v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<RatFun>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![RatFun::zero(); self.cols];
                v[f] = RatFun::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = m.get(r, f).neg();
                }
                v
            })
            .collect()
    }

    /// Kernel of the matrix with the given rows, as the rows of a reduced
    /// echelon matrix (so the basis is canonical).
    ///
    /// Meant for large sparse systems: Gauss-Jordan elimination always picks
    /// the nonzero entry of smallest size as the next pivot.
    pub fn sparse_nullspace(rows: Vec<Vec<RatFun>>, cols: usize) -> Vec<Vec<RatFun>> {
        let size = |x: &RatFun| {
            (
                x.numer().terms().len() + x.denom().terms().len(),
                x.numer().total_degree() + x.denom().total_degree(),
            )
        };
        let mut active: Vec<BTreeMap<usize, RatFun>> = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                r.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()
            })
            .collect();
        active.retain(|r| !r.is_empty());
        let mut done: Vec<(usize, BTreeMap<usize, RatFun>)> = Vec::new();
        loop {
            let best = active
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().map(move |(&c, x)| (size(x), i, c)))
                .min();
            let Some((_, i, c)) = best else { break };
            let mut row = active.swap_remove(i);
            let inv = row[&c].inv().expect("pivot is nonzero");
            for x in row.values_mut() {
                *x = x.mul(&inv);
            }
            let others = active.iter_mut().chain(done.iter_mut().map(|(_, r)| r));
            for other in others {
                let Some(f) = other.remove(&c) else { continue };
                for (&j, x) in row.iter().filter(|(&j, _)| j != c) {
                    let v = other.get(&j).cloned().unwrap_or_default().sub(&f.mul(x));
                    if v.is_zero() {
                        other.remove(&j);
                    } else {
                        other.insert(j, v);
                    }
                }
            }
            active.retain(|r| !r.is_empty());
            done.push((c, row));
        }
        let pivots: BTreeMap<usize, &BTreeMap<usize, RatFun>> = done.iter().map(|(c, r)| (*c, r)).collect();
        let basis: Vec<Vec<RatFun>> = (0..cols)
            .filter(|c| !pivots.contains_key(c))
            .map(|f| {
                let mut v = vec![RatFun::zero(); cols];
                v[f] = RatFun::one();
                for (&p, r) in &pivots {
                    if let Some(x) = r.get(&f) {
                        v[p] = x.neg();
                    }
                }
                v
            })
            .collect();
        if basis.is_empty() {
            return basis;
        }
        let mut m = Matrix::from_rows(basis);
        let rank = m.rref().len();
        m.row_vecs().into_iter().take(rank).collect()
    }

    /// Some solution of `self * x = b`, if consistent.
    pub fn solve(&self, b: &[RatFun]) -> Option<Vec<RatFun>> {
        assert_eq!(self.rows, b.len());
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        aug.set_block(0, 0, self);
        for (i, x) in b.iter().enumerate() {
            aug.set(i, self.cols, x.clone());
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![RatFun::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, &Self::identity(n));
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(aug.block(0, n, n, n))
    }

    pub fn render_rows(&self, field: &FieldSpec) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| field.render(x)).collect())
            .collect()
    }

    pub fn render(&self, field: &FieldSpec) -> String {
        let rows: Vec<String> = self
            .render_rows(field)
            .into_iter()
            .map(|r| format!("[{}]", r.join(", ")))
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> FieldSpec {
        FieldSpec::new(&["x", "t"]).unwrap()
    }

    fn m(rows: &[&[&str]]) -> Matrix {
        let f = field();
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| f.parse(s).unwrap()).collect())
                .collect(),
        )
    }

    #[test]
    fn inverse_of_unitriangular() {
        let a = m(&[&["1", "x*t"], &["0", "1"]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, m(&[&["1", "-x*t"], &["0", "1"]]));
        assert_eq!(a.mul(&inv), Matrix::identity(2));
    }

    #[test]
    fn singular_matrix_has_no_inverse_and_a_kernel() {
        let a = m(&[&["x", "t"], &["x^2", "x*t"]]);
        assert!(a.inverse().is_none());
        let ker = a.nullspace();
        assert_eq!(ker.len(), 1);
        let v = a.mul_vec(&ker[0]);
        assert!(v.iter().all(RatFun::is_zero));
    }

    #[test]
    fn kron_layout() {
        let a = m(&[&["1", "2"], &["3", "4"]]);
        let i = Matrix::identity(2);
        let k = a.kron(&i);
        assert_eq!(k.get(2, 0), &RatFun::from_int(3));
        assert_eq!(k.get(3, 1), &RatFun::from_int(3));
        assert!(k.get(2, 1).is_zero());
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = m(&[&["1", "0"], &["0", "0"]]);
        assert!(a.solve(&[RatFun::one(), RatFun::one()]).is_none());
        assert_eq!(
            a.solve(&[RatFun::var(0), RatFun::zero()]).unwrap()[0],
            RatFun::var(0)
        );
    }

    #[test]
    fn sparse_kernel_matches_dense_kernel() {
        let a = m(&[
            &["x", "t", "1", "0"],
            &["x^2+t", "x*t+t", "x+1", "0"],
            &["0", "0", "0", "0"],
            &["1/x", "t/x^2", "1/x^2", "1/x"],
        ]);
        let sparse = Matrix::sparse_nullspace(a.row_vecs(), 4);
        let dense = a.nullspace();
        assert_eq!(sparse.len(), dense.len());
        for v in &sparse {
            assert!(a.mul_vec(v).iter().all(RatFun::is_zero));
        }
        let mut both = Matrix::from_rows(sparse.iter().chain(&dense).cloned().collect());
        assert_eq!(both.rref().len(), dense.len());
        // canonical: already in reduced echelon form
        let mut s = Matrix::from_rows(sparse.clone());
        s.rref();
        assert_eq!(s.row_vecs(), sparse);
    }
}
