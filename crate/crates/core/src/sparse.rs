//! Sparse exact vectors and column-major sparse matrices.
//!
//! Graded operators on the model algebras are block matrices whose blocks are
//! sparse in the monomial quotient bases; the bracket-saturation and span
//! bookkeeping work on these types to keep large closures (d = 23) feasible
//! in exact arithmetic.

use num::{One, Zero};

use crate::exactlin::RationalMatrix;
use crate::rat::Rat;

/// Sparse vector: `(index, value)` pairs sorted by index, no explicit zeros.
pub type SparseVec = Vec<(u32, Rat)>;

/// `a + c * b`, merging sorted supports and dropping exact zeros.
pub fn sv_axpy(a: &SparseVec, c: &Rat, b: &SparseVec) -> SparseVec {
    if c.is_zero() || b.is_empty() {
        return a.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some((ia, va)), Some((ib, vb))) => {
                if ia < ib {
                    out.push((*ia, va.clone()));
                    i += 1;
                } else if ib < ia {
                    out.push((*ib, c * vb));
                    j += 1;
                } else {
                    let v = va + c * vb;
                    if !v.is_zero() {
                        out.push((*ia, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some((ia, va)), None) => {
                out.push((*ia, va.clone()));
                i += 1;
            }
            (None, Some((ib, vb))) => {
                out.push((*ib, c * vb));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub fn sv_scale(v: &SparseVec, c: &Rat) -> SparseVec {
    if c.is_zero() {
        return Vec::new();
    }
    v.iter().map(|(i, x)| (*i, x * c)).collect()
}

pub fn sv_neg(v: &SparseVec) -> SparseVec {
    v.iter().map(|(i, x)| (*i, -x.clone())).collect()
}

/// Collects an unsorted accumulation into canonical sparse form.
pub fn sv_from_map(map: std::collections::BTreeMap<u32, Rat>) -> SparseVec {
    map.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

pub fn sv_get<'a>(v: &'a SparseVec, idx: u32) -> Option<&'a Rat> {
    v.binary_search_by_key(&idx, |(i, _)| *i)
        .ok()
        .map(|p| &v[p].1)
}

pub fn sv_to_dense(v: &SparseVec, len: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); len];
    for (i, x) in v {
        out[*i as usize] = x.clone();
    }
    out
}

pub fn sv_from_dense(v: &[Rat]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i as u32, x.clone()))
        .collect()
}

/// Column-major sparse matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMat {
    rows: usize,
    cols: Vec<SparseVec>,
}

impl SparseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let cols = (0..n).map(|i| vec![(i as u32, Rat::one())]).collect();
        SparseMat { rows: n, cols }
    }

    pub fn scalar(n: usize, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zeros(n, n);
        }
        let cols = (0..n).map(|i| vec![(i as u32, c.clone())]).collect();
        SparseMat { rows: n, cols }
    }

    pub fn from_cols(rows: usize, cols: Vec<SparseVec>) -> Self {
        debug_assert!(cols
            .iter()
            .all(|c| c.windows(2).all(|w| w[0].0 < w[1].0)
                && c.iter().all(|(i, v)| (*i as usize) < rows && !v.is_zero())));
        SparseMat { rows, cols }
    }

    pub fn from_dense(m: &RationalMatrix) -> Self {
        let cols = (0..m.cols())
            .map(|c| {
                (0..m.rows())
                    .filter(|&r| !m.at(r, c).is_zero())
                    .map(|r| (r as u32, m.at(r, c).clone()))
                    .collect()
            })
            .collect();
        SparseMat { rows: m.rows(), cols }
    }

    pub fn to_dense(&self) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(self.rows, self.cols.len());
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                *out.at_mut(*r as usize, c) = v.clone();
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, c: usize) -> &SparseVec {
        &self.cols[c]
    }

    pub fn set_col(&mut self, c: usize, v: SparseVec) {
        self.cols[c] = v;
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    /// Image of a sparse vector: sum of scaled columns.
    pub fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut acc: std::collections::BTreeMap<u32, Rat> = Default::default();
        for (j, c) in v {
            for (r, x) in &self.cols[*j as usize] {
                let e = acc.entry(*r).or_insert_with(Rat::zero);
                *e += c * x;
            }
        }
        sv_from_map(acc)
    }

    pub fn apply_dense(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols.len());
        let mut out = vec![Rat::zero(); self.rows];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (r, x) in &self.cols[j] {
                out[*r as usize] += c * x;
            }
        }
        out
    }

    /// `self * rhs` (composition of column actions).
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols.len(), rhs.rows, "sparse product shape");
        let cols = rhs
            .cols
            .iter()
            .map(|c| self.apply_sparse(c))
            .collect();
        SparseMat { rows: self.rows, cols }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols.len(), rhs.cols.len());
        let one = Rat::one();
        let cols = self
            .cols
            .iter()
            .zip(&rhs.cols)
            .map(|(a, b)| sv_axpy(a, &one, b))
            .collect();
        SparseMat { rows: self.rows, cols }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols.len(), rhs.cols.len());
        let neg = -Rat::one();
        let cols = self
            .cols
            .iter()
            .zip(&rhs.cols)
            .map(|(a, b)| sv_axpy(a, &neg, b))
            .collect();
        SparseMat { rows: self.rows, cols }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let cols = self.cols.iter().map(|v| sv_scale(v, c)).collect();
        SparseMat { rows: self.rows, cols }
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<SparseVec> = vec![Vec::new(); self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                cols[*r as usize].push((c as u32, v.clone()));
            }
        }
        SparseMat {
            rows: self.cols.len(),
            cols,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_int;

    #[test]
    fn axpy_merges_and_cancels() {
        let a: SparseVec = vec![(0, rat_int(1)), (2, rat_int(3))];
        let b: SparseVec = vec![(1, rat_int(5)), (2, rat_int(-3))];
        let r = sv_axpy(&a, &Rat::one(), &b);
        assert_eq!(r, vec![(0, rat_int(1)), (1, rat_int(5))]);
    }

    #[test]
    fn sparse_dense_agreement() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 0, 2], &[0, -3, 0]]);
        let s = SparseMat::from_dense(&m);
        assert_eq!(s.to_dense(), m);
        let mt = m.transpose();
        let prod = SparseMat::from_dense(&mt).mul(&s);
        assert_eq!(prod.to_dense(), mt.mul(&m));
        assert_eq!(s.nnz(), 3);
    }
}
