//! Exact rational linear algebra kernel.
//!
//! Dense matrices over arbitrary-precision rationals with deterministic
//! reduced-echelon pivoting: within the leftmost eligible column the pivot is
//! the entry with maximal absolute numerator, ties broken by the smallest row
//! index. All outputs are reproducible across platforms.

use num::{BigInt, Integer, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{rat_int, Rat};

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl std::fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| crate::rat::format_rat(self.at(r, c)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn diagonal(entries: &[Rat]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            *m.at_mut(i, i) = e.clone();
        }
        m
    }

    /// Diagonal matrix from integer entries.
    pub fn diag_i64(entries: &[i64]) -> Self {
        let vals: Vec<Rat> = entries.iter().map(|&v| rat_int(v)).collect();
        Self::diagonal(&vals)
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    /// Matrix from integer row data (test and preset convenience).
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let grid: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| rat_int(v)).collect())
            .collect();
        Self::from_rows(grid).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col_vec(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                if self.at(r, c) != self.at(c, r) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.at(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    *out.at_mut(r, c) += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "matrix apply shape");
        (0..self.rows)
            .map(|r| {
                let mut acc = Rat::zero();
                for c in 0..self.cols {
                    let a = self.at(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc += a * &v[c];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// In-place reduction to reduced row echelon form. Returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut prow = 0usize;
        for col in 0..self.cols {
            if prow >= self.rows {
                break;
            }
            let mut best: Option<(usize, BigInt)> = None;
            for r in prow..self.rows {
                let e = self.at(r, col);
                if e.is_zero() {
                    continue;
                }
                let mag = e.numer().abs();
                match &best {
                    None => best = Some((r, mag)),
                    Some((_, bm)) if &mag > bm => best = Some((r, mag)),
                    _ => {}
                }
            }
            let Some((prow_src, _)) = best else {
                continue;
            };
            self.swap_rows(prow, prow_src);
            let inv = self.at(prow, col).recip();
            for c in col..self.cols {
                let v = self.at(prow, c).clone();
                *self.at_mut(prow, c) = v * &inv;
            }
            for r in 0..self.rows {
                if r == prow || self.at(r, col).is_zero() {
                    continue;
                }
                let factor = self.at(r, col).clone();
                for c in col..self.cols {
                    let sub = &factor * self.at(prow, c);
                    *self.at_mut(r, c) -= sub;
                }
            }
            pivots.push(col);
            prow += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                *aug.at_mut(r, c) = self.at(r, c).clone();
            }
            *aug.at_mut(r, n + r) = Rat::one();
        }
        let pivots = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Self::from_fn(n, n, |r, c| aug.at(r, n + c).clone()))
    }
}

/// Basis of the kernel `{v : Mv = 0}` in the reduced-echelon convention:
/// one vector per free column, with that free coordinate set to 1.
///
/// The vectors are linearly independent and their count is
/// `cols - rank(M)`; the basis is deterministic.
pub fn kernel(m: &RationalMatrix) -> Vec<Vec<Rat>> {
    let mut red = m.clone();
    let pivots = red.rref();
    let pivot_set: Vec<bool> = {
        let mut s = vec![false; m.cols()];
        for &p in &pivots {
            s[p] = true;
        }
        s
    };
    let mut basis = Vec::new();
    for free in 0..m.cols() {
        if pivot_set[free] {
            continue;
        }
        let mut v = vec![Rat::zero(); m.cols()];
        v[free] = Rat::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -red.at(row, free).clone();
        }
        basis.push(v);
    }
    basis
}

/// One solution of `Mx = b` (free variables set to 0), or `None` when
/// inconsistent. Errors when `b` has the wrong length.
pub fn solve_linear(m: &RationalMatrix, b: &[Rat]) -> Result<Option<Vec<Rat>>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} for {} rows",
            b.len(),
            m.rows()
        )));
    }
    let mut aug = RationalMatrix::zeros(m.rows(), m.cols() + 1);
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            *aug.at_mut(r, c) = m.at(r, c).clone();
        }
        *aug.at_mut(r, m.cols()) = b[r].clone();
    }
    let pivots = aug.rref();
    if pivots.last().is_some_and(|&p| p == m.cols()) {
        return Ok(None);
    }
    let mut x = vec![Rat::zero(); m.cols()];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug.at(row, m.cols()).clone();
    }
    Ok(Some(x))
}

/// Inertia `(n_plus, n_minus, n_zero)` of a symmetric matrix by exact
/// symmetric elimination (Sylvester's law of inertia).
///
/// A trailing block with all-zero diagonal is handled through 2x2 hyperbolic
/// blocks, each contributing `(1, 1)` to the signature.
pub fn ldl_signature(s: &RationalMatrix) -> Result<(usize, usize, usize)> {
    if !s.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = s.rows();
    let mut m = s.clone();
    let (mut np, mut nm, mut nz) = (0usize, 0usize, 0usize);
    let mut i = 0usize;

    let sym_swap = |m: &mut RationalMatrix, a: usize, b: usize| {
        if a == b {
            return;
        }
        m.swap_rows(a, b);
        for r in 0..m.rows() {
            let x = m.at(r, a).clone();
            let y = m.at(r, b).clone();
            *m.at_mut(r, a) = y;
            *m.at_mut(r, b) = x;
        }
    };

    while i < n {
        // Diagonal pivot: maximal absolute numerator, ties to the smallest index.
        let mut diag: Option<(usize, BigInt)> = None;
        for j in i..n {
            let e = m.at(j, j);
            if e.is_zero() {
                continue;
            }
            let mag = e.numer().abs();
            match &diag {
                None => diag = Some((j, mag)),
                Some((_, bm)) if &mag > bm => diag = Some((j, mag)),
                _ => {}
            }
        }
        if let Some((j, _)) = diag {
            sym_swap(&mut m, i, j);
            let piv = m.at(i, i).clone();
            if piv.is_positive() {
                np += 1;
            } else {
                nm += 1;
            }
            for r in (i + 1)..n {
                if m.at(r, i).is_zero() {
                    continue;
                }
                let f = m.at(r, i) / &piv;
                for c in (i + 1)..n {
                    let sub = &f * m.at(i, c);
                    *m.at_mut(r, c) -= sub;
                }
                *m.at_mut(r, i) = Rat::zero();
            }
            for c in (i + 1)..n {
                *m.at_mut(i, c) = Rat::zero();
            }
            i += 1;
            continue;
        }
        // All diagonals vanish; look for an off-diagonal coupling.
        let mut off: Option<(usize, usize, BigInt)> = None;
        for a in i..n {
            for b in (a + 1)..n {
                let e = m.at(a, b);
                if e.is_zero() {
                    continue;
                }
                let mag = e.numer().abs();
                match &off {
                    None => off = Some((a, b, mag)),
                    Some((_, _, bm)) if &mag > bm => off = Some((a, b, mag)),
                    _ => {}
                }
            }
        }
        let Some((a, b, _)) = off else {
            nz += n - i;
            break;
        };
        // Hyperbolic 2x2 block [[0, c], [c, 0]]: contributes (1, 1).
        sym_swap(&mut m, i, a);
        let b = if b == i { a } else { b };
        sym_swap(&mut m, i + 1, b);
        let c = m.at(i, i + 1).clone();
        np += 1;
        nm += 1;
        for r in (i + 2)..n {
            let ri = m.at(r, i).clone();
            let rj = m.at(r, i + 1).clone();
            if ri.is_zero() && rj.is_zero() {
                continue;
            }
            for s in (i + 2)..n {
                // [v_i v_j] B^{-1} [v_i v_j]^T with B = [[0, c], [c, 0]]
                let sub = (&ri * m.at(i + 1, s) + &rj * m.at(i, s)) / &c;
                *m.at_mut(r, s) -= sub;
            }
        }
        i += 2;
    }
    Ok((np, nm, nz))
}

/// Class of a nonzero rational in `Q^x / (Q^x)^2`, represented by the unique
/// squarefree integer: the sign together with the primes dividing
/// `numerator * denominator` an odd number of times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarefreeClass {
    rep: BigInt,
}

impl SquarefreeClass {
    pub fn one() -> Self {
        SquarefreeClass { rep: BigInt::one() }
    }

    pub fn representative(&self) -> &BigInt {
        &self.rep
    }

    pub fn is_trivial(&self) -> bool {
        self.rep.is_one()
    }

    /// Product in `Q^x / (Q^x)^2`. Exact on squarefree representatives: the
    /// shared part squares away, the coprime parts multiply.
    pub fn mul(&self, other: &Self) -> Self {
        let g = self.rep.gcd(&other.rep);
        SquarefreeClass {
            rep: (&self.rep / &g) * (&other.rep / &g),
        }
    }

    pub fn to_string_rep(&self) -> String {
        self.rep.to_string()
    }
}

/// Squarefree-class representative of a nonzero rational (trial division).
pub fn squarefree_class(r: &Rat) -> Result<SquarefreeClass> {
    if r.is_zero() {
        return Err(Error::ZeroSquarefreeClass);
    }
    let prod = r.numer() * r.denom();
    let negative = prod.is_negative();
    let mut m = prod.abs();
    let mut rep = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        if (&m % &p).is_zero() {
            let mut e = 0u64;
            while (&m % &p).is_zero() {
                m /= &p;
                e += 1;
            }
            if e % 2 == 1 {
                rep *= &p;
            }
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if m > BigInt::one() {
        rep *= &m;
    }
    if negative {
        rep = -rep;
    }
    Ok(SquarefreeClass { rep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn kernel_of_identity_is_empty() {
        let m = RationalMatrix::identity(3);
        assert!(kernel(&m).is_empty());
    }

    #[test]
    fn kernel_of_zero_is_standard_basis() {
        let m = RationalMatrix::zeros(2, 3);
        let k = kernel(&m);
        assert_eq!(k.len(), 3);
        for (i, v) in k.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert_eq!(*x, if i == j { Rat::one() } else { Rat::zero() });
            }
        }
    }

    #[test]
    fn kernel_hand_example() {
        // [[1,1,0],[0,0,1]]: kernel is the line through (1,-1,0).
        let m = RationalMatrix::from_i64_rows(&[&[1, 1, 0], &[0, 0, 1]]);
        let k = kernel(&m);
        assert_eq!(k.len(), 1);
        // Echelon convention sets the free coordinate to 1: (-1, 1, 0).
        assert_eq!(k[0], vec![rat_int(-1), rat_int(1), rat_int(0)]);
        // Same line as (1, -1, 0).
        let target = [rat_int(1), rat_int(-1), rat_int(0)];
        assert!(k[0].iter().zip(&target).all(|(a, b)| *a == -b.clone()));
        // Mv = 0 exactly.
        assert!(m.apply(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let m = RationalMatrix::identity(3);
        let b = vec![rat(1, 2), rat_int(-3), rat(7, 5)];
        assert_eq!(solve_linear(&m, &b).unwrap().unwrap(), b);
    }

    #[test]
    fn solve_pivot_convention() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 1]]);
        let x = solve_linear(&m, &[rat_int(2)]).unwrap().unwrap();
        assert_eq!(x, vec![rat_int(2), rat_int(0)]);
    }

    #[test]
    fn solve_inconsistent_is_none() {
        let m = RationalMatrix::from_i64_rows(&[&[0, 0]]);
        assert!(solve_linear(&m, &[rat_int(1)]).unwrap().is_none());
    }

    #[test]
    fn solve_rejects_bad_rhs_length() {
        let m = RationalMatrix::identity(2);
        assert!(solve_linear(&m, &[rat_int(1)]).is_err());
    }

    #[test]
    fn signature_examples() {
        let m = RationalMatrix::diag_i64(&[1, 1, 1, -1]);
        assert_eq!(ldl_signature(&m).unwrap(), (3, 1, 0));
        let h = RationalMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]);
        assert_eq!(ldl_signature(&h).unwrap(), (1, 1, 0));
        let m = RationalMatrix::diag_i64(&[2, 0, -3, -5]);
        assert_eq!(ldl_signature(&m).unwrap(), (1, 2, 1));
    }

    #[test]
    fn signature_rejects_nonsymmetric() {
        let m = RationalMatrix::from_i64_rows(&[&[0, 1], &[2, 0]]);
        assert!(matches!(ldl_signature(&m), Err(Error::NotSymmetric)));
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(
            squarefree_class(&rat_int(18)).unwrap().representative(),
            &BigInt::from(2)
        );
        assert!(squarefree_class(&rat(4, 9)).unwrap().is_trivial());
        // -50/3 = -(2*5^2)/3: odd primes 2 and 3, negative sign.
        assert_eq!(
            squarefree_class(&rat(-50, 3)).unwrap().representative(),
            &BigInt::from(-6)
        );
        assert!(squarefree_class(&Rat::zero()).is_err());
    }

    #[test]
    fn squarefree_class_multiplication() {
        let a = squarefree_class(&rat_int(6)).unwrap();
        let b = squarefree_class(&rat_int(10)).unwrap();
        // 6 * 10 = 60 = 4 * 15.
        assert_eq!(a.mul(&b).representative(), &BigInt::from(15));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = RationalMatrix::from_i64_rows(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RationalMatrix::identity(3));
        let sing = RationalMatrix::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert!(sing.inverse().is_none());
    }
}
