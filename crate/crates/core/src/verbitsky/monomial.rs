//! Monomial bases of the symmetric powers `S^m V` and sparse operations on
//! them.
//!
//! A degree-`m` monomial is a sorted multiset of variable indices; within a
//! degree the basis is ordered lexicographically on those index tuples, which
//! is graded-lex over the whole algebra. Sparse elements of `S^m V` use the
//! `SparseVec` encoding with indices into this basis.

use num::{BigInt, One, Zero};

use crate::exactlin::RationalMatrix;
use crate::rat::Rat;
use crate::sparse::{sv_from_map, SparseMat, SparseVec};
use std::collections::BTreeMap;

/// Monomial basis of one symmetric power.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub degree: usize,
    monos: Vec<Vec<u16>>,
}

impl MonomialBasis {
    fn generate(d: usize, degree: usize) -> Self {
        let mut monos = Vec::new();
        let mut cur: Vec<u16> = Vec::with_capacity(degree);
        fn rec(d: usize, degree: usize, start: u16, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if cur.len() == degree {
                out.push(cur.clone());
                return;
            }
            for i in start..d as u16 {
                cur.push(i);
                rec(d, degree, i, cur, out);
                cur.pop();
            }
        }
        rec(d, degree, 0, &mut cur, &mut monos);
        MonomialBasis { degree, monos }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn mono(&self, idx: u32) -> &[u16] {
        &self.monos[idx as usize]
    }

    pub fn index_of(&self, mono: &[u16]) -> u32 {
        self.monos
            .binary_search_by(|probe| probe.as_slice().cmp(mono))
            .expect("monomial in basis") as u32
    }

    /// Human-readable label, 1-based: `e1^2*e3`.
    pub fn label(&self, idx: u32) -> String {
        let mono = self.mono(idx);
        if mono.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < mono.len() {
            let v = mono[i];
            let mut e = 0;
            while i < mono.len() && mono[i] == v {
                e += 1;
                i += 1;
            }
            if e == 1 {
                parts.push(format!("e{}", v + 1));
            } else {
                parts.push(format!("e{}^{}", v + 1, e));
            }
        }
        parts.join("*")
    }
}

/// Monomial tables for all degrees `0..=max_degree` over `d` variables.
#[derive(Clone, Debug)]
pub struct SymTables {
    d: usize,
    bases: Vec<MonomialBasis>,
}

impl SymTables {
    pub fn new(d: usize, max_degree: usize) -> Self {
        let bases = (0..=max_degree)
            .map(|m| MonomialBasis::generate(d, m))
            .collect();
        SymTables { d, bases }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn basis(&self, m: usize) -> &MonomialBasis {
        &self.bases[m]
    }

    pub fn dim(&self, m: usize) -> usize {
        self.bases[m].len()
    }

    /// Product of basis monomials, as an index in degree `m1 + m2`.
    pub fn mul_mono(&self, m1: usize, idx1: u32, m2: usize, idx2: u32) -> u32 {
        let a = self.basis(m1).mono(idx1);
        let b = self.basis(m2).mono(idx2);
        let mut merged = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => {
                    if x <= y {
                        merged.push(*x);
                        i += 1;
                    } else {
                        merged.push(*y);
                        j += 1;
                    }
                }
                (Some(x), None) => {
                    merged.push(*x);
                    i += 1;
                }
                (None, Some(y)) => {
                    merged.push(*y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        self.basis(m1 + m2).index_of(&merged)
    }

    /// Product of sparse elements of `S^{m1}` and `S^{m2}`.
    pub fn mul(&self, m1: usize, a: &SparseVec, m2: usize, b: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
        for (ia, va) in a {
            for (ib, vb) in b {
                let idx = self.mul_mono(m1, *ia, m2, *ib);
                *acc.entry(idx).or_insert_with(Rat::zero) += va * vb;
            }
        }
        sv_from_map(acc)
    }

    /// Contraction laplacian on one monomial:
    /// `sum over position pairs (a < b)` of `2 b(x_a, x_b)` times the
    /// monomial with those two positions removed.
    pub fn laplacian_mono(&self, gram: &RationalMatrix, m: usize, idx: u32) -> SparseVec {
        debug_assert!(m >= 2);
        let mono = self.basis(m).mono(idx).to_vec();
        let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
        for a in 0..mono.len() {
            for b in (a + 1)..mono.len() {
                let g = gram.at(mono[a] as usize, mono[b] as usize);
                if g.is_zero() {
                    continue;
                }
                let mut rest = Vec::with_capacity(mono.len() - 2);
                for (p, v) in mono.iter().enumerate() {
                    if p != a && p != b {
                        rest.push(*v);
                    }
                }
                let ridx = self.basis(m - 2).index_of(&rest);
                *acc.entry(ridx).or_insert_with(Rat::zero) += g + g;
            }
        }
        sv_from_map(acc)
    }

    pub fn laplacian_apply(&self, gram: &RationalMatrix, m: usize, v: &SparseVec) -> SparseVec {
        let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
        for (idx, c) in v {
            for (ridx, x) in self.laplacian_mono(gram, m, *idx) {
                *acc.entry(ridx).or_insert_with(Rat::zero) += c * &x;
            }
        }
        sv_from_map(acc)
    }

    /// Matrix of the derivation extension of `x: V -> V` on `S^m V`.
    pub fn derivation_matrix(&self, x: &RationalMatrix, m: usize) -> SparseMat {
        let dim = self.dim(m);
        if m == 0 {
            return SparseMat::zeros(1, 1);
        }
        let cols = (0..dim as u32)
            .map(|idx| {
                let mono = self.basis(m).mono(idx).to_vec();
                let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
                for p in 0..mono.len() {
                    let src = mono[p] as usize;
                    for r in 0..self.d {
                        let coef = x.at(r, src);
                        if coef.is_zero() {
                            continue;
                        }
                        let mut image = mono.clone();
                        image[p] = r as u16;
                        image.sort_unstable();
                        let iidx = self.basis(m).index_of(&image);
                        *acc.entry(iidx).or_insert_with(Rat::zero) += coef;
                    }
                }
                sv_from_map(acc)
            })
            .collect();
        SparseMat::from_cols(dim, cols)
    }

    /// Matrix of the `m`-th symmetric power of `phi: V -> V` on `S^m V`.
    pub fn sym_power_matrix(&self, phi: &RationalMatrix, m: usize) -> SparseMat {
        let dim = self.dim(m);
        if m == 0 {
            return SparseMat::identity(1);
        }
        let cols = (0..dim as u32)
            .map(|idx| {
                let mono = self.basis(m).mono(idx);
                // Expand the product of the images phi(e_i), factor by factor.
                let mut acc: BTreeMap<Vec<u16>, Rat> = BTreeMap::new();
                acc.insert(Vec::new(), Rat::one());
                for &var in mono {
                    let mut next: BTreeMap<Vec<u16>, Rat> = BTreeMap::new();
                    for (partial, c) in &acc {
                        for r in 0..self.d {
                            let coef = phi.at(r, var as usize);
                            if coef.is_zero() {
                                continue;
                            }
                            let mut image = partial.clone();
                            let pos = image.partition_point(|&v| v <= r as u16);
                            image.insert(pos, r as u16);
                            *next.entry(image).or_insert_with(Rat::zero) += c * coef;
                        }
                    }
                    acc = next;
                }
                let mut out: BTreeMap<u32, Rat> = BTreeMap::new();
                for (image, c) in acc {
                    if !c.is_zero() {
                        out.insert(self.basis(m).index_of(&image), c);
                    }
                }
                sv_from_map(out)
            })
            .collect();
        SparseMat::from_cols(dim, cols)
    }
}

/// Multinomial coefficient `|mono|! / prod(multiplicities!)` of a monomial.
pub fn multinomial(mono: &[u16]) -> BigInt {
    let mut num = BigInt::one();
    for k in 1..=mono.len() {
        num *= BigInt::from(k);
    }
    let mut i = 0;
    while i < mono.len() {
        let mut run = 0usize;
        let v = mono[i];
        while i < mono.len() && mono[i] == v {
            run += 1;
            i += 1;
        }
        for k in 1..=run {
            num /= BigInt::from(k);
        }
    }
    num
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_int;

    #[test]
    fn monomial_counts() {
        let t = SymTables::new(3, 4);
        assert_eq!(t.dim(0), 1);
        assert_eq!(t.dim(1), 3);
        assert_eq!(t.dim(2), 6);
        assert_eq!(t.dim(3), 10);
        assert_eq!(t.dim(4), 15);
    }

    #[test]
    fn index_roundtrip_and_order() {
        let t = SymTables::new(2, 2);
        assert_eq!(t.basis(2).mono(0), &[0, 0]);
        assert_eq!(t.basis(2).mono(1), &[0, 1]);
        assert_eq!(t.basis(2).mono(2), &[1, 1]);
        for i in 0..t.dim(2) as u32 {
            assert_eq!(t.basis(2).index_of(t.basis(2).mono(i)), i);
        }
    }

    #[test]
    fn monomial_product() {
        let t = SymTables::new(3, 3);
        let a = t.basis(1).index_of(&[2]);
        let b = t.basis(2).index_of(&[0, 2]);
        let c = t.mul_mono(1, a, 2, b);
        assert_eq!(t.basis(3).mono(c), &[0, 2, 2]);
    }

    #[test]
    fn laplacian_on_squares_and_cubes() {
        // diag(1,1,1): laplacian of e1^2 is 2, of e1^3 is 6 e1, of e1 e2 e3 is 0.
        let g = RationalMatrix::diag_i64(&[1, 1, 1]);
        let t = SymTables::new(3, 3);
        let sq = t.basis(2).index_of(&[0, 0]);
        assert_eq!(t.laplacian_mono(&g, 2, sq), vec![(0, rat_int(2))]);
        let cube = t.basis(3).index_of(&[0, 0, 0]);
        let e1 = t.basis(1).index_of(&[0]);
        assert_eq!(t.laplacian_mono(&g, 3, cube), vec![(e1, rat_int(6))]);
        let mixed = t.basis(3).index_of(&[0, 1, 2]);
        assert!(t.laplacian_mono(&g, 3, mixed).is_empty());
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[0, 0, 0]), BigInt::from(1));
        assert_eq!(multinomial(&[0, 1, 2]), BigInt::from(6));
        assert_eq!(multinomial(&[0, 0, 1]), BigInt::from(3));
    }

    #[test]
    fn labels() {
        let t = SymTables::new(3, 3);
        let idx = t.basis(3).index_of(&[0, 0, 2]);
        assert_eq!(t.basis(3).label(idx), "e1^2*e3");
        assert_eq!(t.basis(0).label(0), "1");
    }
}
