//! Pointwise quaternionic linear algebra: the three Kahler forms on
//! `H^n = R^{4n}`, their Lefschetz operators and metric adjoints on the
//! exterior algebra, and the `so(4,1)` commutator identities.
//!
//! Everything is one fiber; no manifolds, metrics on manifolds, or harmonic
//! theory. The exterior algebra has dimension `2^{4n}`, so the operator
//! construction is capped at `n <= 2`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{ldl_signature, RationalMatrix};
use crate::operators::{bracket, lie_closure, GradedOperator, Grading};
use crate::rat::{rat_int, Rat};
use crate::sparse::{sv_from_map, SparseMat, SparseVec};

/// Which imaginary unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quat {
    I,
    J,
    K,
}

/// `H^n` as a left module over the quaternions: the three complex
/// structures as rational `4n x 4n` matrices, metric the identity Gram in
/// the standard basis `(1, i, j, k)` per factor.
#[derive(Clone, Debug)]
pub struct QuaternionModule {
    pub n: usize,
    pub i_mat: RationalMatrix,
    pub j_mat: RationalMatrix,
    pub k_mat: RationalMatrix,
}

/// Left multiplication blocks on one quaternion factor, basis `(1, i, j, k)`.
const I_BLOCK: [[i64; 4]; 4] = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]];
const J_BLOCK: [[i64; 4]; 4] = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]];
const K_BLOCK: [[i64; 4]; 4] = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]];

fn block_diagonal(n: usize, block: &[[i64; 4]; 4]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(4 * n, 4 * n);
    for f in 0..n {
        for r in 0..4 {
            for c in 0..4 {
                if block[r][c] != 0 {
                    *m.at_mut(4 * f + r, 4 * f + c) = rat_int(block[r][c]);
                }
            }
        }
    }
    m
}

/// Standard quaternionic module structure on `R^{4n}`.
pub fn build_quaternion_model(n: usize) -> QuaternionModule {
    assert!(n >= 1, "n >= 1");
    QuaternionModule {
        n,
        i_mat: block_diagonal(n, &I_BLOCK),
        j_mat: block_diagonal(n, &J_BLOCK),
        k_mat: block_diagonal(n, &K_BLOCK),
    }
}

impl QuaternionModule {
    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn mat(&self, a: Quat) -> &RationalMatrix {
        match a {
            Quat::I => &self.i_mat,
            Quat::J => &self.j_mat,
            Quat::K => &self.k_mat,
        }
    }
}

/// The two-form `omega_a(x, y) = g(a x, y)` as a skew matrix in the
/// convention `omega(x, y) = x^T Omega y`; with the identity metric this is
/// the transpose of the multiplication matrix.
pub fn two_form(module: &QuaternionModule, a: Quat) -> RationalMatrix {
    module.mat(a).transpose()
}

/// Two-form of an arbitrary endomorphism (used for span and linearity
/// checks).
pub fn two_form_of(mat: &RationalMatrix) -> RationalMatrix {
    mat.transpose()
}

/// Exterior-algebra basis bookkeeping: degree `p` forms are bitmasks with
/// `p` set bits, ordered by numeric value within a degree.
struct FormBasis {
    dim: usize,
    by_degree: Vec<Vec<u32>>,
}

impl FormBasis {
    fn new(dim: usize) -> Self {
        assert!(dim <= 16, "exterior basis capped well below u32 width");
        let mut by_degree: Vec<Vec<u32>> = vec![Vec::new(); dim + 1];
        for mask in 0u32..(1 << dim) {
            by_degree[mask.count_ones() as usize].push(mask);
        }
        FormBasis { dim, by_degree }
    }

    fn index(&self, degree: usize, mask: u32) -> u32 {
        self.by_degree[degree]
            .binary_search(&mask)
            .expect("mask in basis") as u32
    }

    fn dims(&self) -> Vec<usize> {
        self.by_degree.iter().map(|v| v.len()).collect()
    }
}

/// Sign of `e^A wedge e^B` relative to the sorted basis form, `None` when the
/// supports meet.
fn wedge_sign(mask_a: u32, mask_b: u32) -> Option<i64> {
    if mask_a & mask_b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut b = mask_b;
    while b != 0 {
        let bit = b.trailing_zeros();
        inversions += (mask_a >> (bit + 1)).count_ones();
        b &= b - 1;
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// Sign of replacing generator `t` by `s` inside the sorted form `mask`
/// (`t` set, `s` unset): parity of the generators strictly between them.
fn replace_sign(mask: u32, t: u32, s: u32) -> i64 {
    let (lo, hi) = if t < s { (t, s) } else { (s, t) };
    let mut count = 0;
    for b in (lo + 1)..hi {
        if mask & (1 << b) != 0 && b != t {
            count += 1;
        }
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Wedge, adjoint and derivation operators on the exterior algebra of the
/// dual module.
pub struct ExteriorOperators {
    pub n: usize,
    pub grading: Arc<Grading>,
    pub theta: GradedOperator,
    pub l: [GradedOperator; 3],
    pub lambda: [GradedOperator; 3],
    pub w: [GradedOperator; 3],
}

fn wedge_operator(
    basis: &FormBasis,
    grading: &Arc<Grading>,
    omega: &RationalMatrix,
) -> GradedOperator {
    let dim = basis.dim;
    let pairs: Vec<(u32, u32, Rat)> = {
        let mut v = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let c = omega.at(i, j);
                if !c.is_zero() {
                    v.push((i as u32, j as u32, c.clone()));
                }
            }
        }
        v
    };
    let mut blocks: Vec<Option<SparseMat>> = Vec::with_capacity(dim + 1);
    for p in 0..=dim {
        if p + 2 > dim {
            blocks.push(None);
            continue;
        }
        let src = &basis.by_degree[p];
        let rows = basis.by_degree[p + 2].len();
        let cols: Vec<SparseVec> = src
            .iter()
            .map(|&mask| {
                let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
                for (i, j, c) in &pairs {
                    let wedge_mask = (1u32 << i) | (1u32 << j);
                    if let Some(sign) = wedge_sign(wedge_mask, mask) {
                        let target = basis.index(p + 2, wedge_mask | mask);
                        *acc.entry(target).or_insert_with(Rat::zero) += c * rat_int(sign);
                    }
                }
                sv_from_map(acc)
            })
            .collect();
        blocks.push(Some(SparseMat::from_cols(rows, cols)));
    }
    GradedOperator::from_blocks(grading.clone(), 2, blocks)
}

fn derivation_operator(
    basis: &FormBasis,
    grading: &Arc<Grading>,
    a: &RationalMatrix,
) -> GradedOperator {
    let dim = basis.dim;
    let mut blocks: Vec<Option<SparseMat>> = Vec::with_capacity(dim + 1);
    for p in 0..=dim {
        let src = &basis.by_degree[p];
        let rows = src.len();
        let cols: Vec<SparseVec> = src
            .iter()
            .map(|&mask| {
                let mut acc: BTreeMap<u32, Rat> = BTreeMap::new();
                let mut m = mask;
                while m != 0 {
                    let t = m.trailing_zeros();
                    m &= m - 1;
                    // One-form action e^t -> sum_s a[t][s] e^s, extended as a
                    // derivation.
                    for s in 0..dim as u32 {
                        let coef = a.at(t as usize, s as usize);
                        if coef.is_zero() {
                            continue;
                        }
                        if s == t {
                            let idx = basis.index(p, mask);
                            *acc.entry(idx).or_insert_with(Rat::zero) += coef;
                        } else if mask & (1 << s) == 0 {
                            let new_mask = (mask & !(1 << t)) | (1 << s);
                            let sign = replace_sign(mask, t, s);
                            let idx = basis.index(p, new_mask);
                            *acc.entry(idx).or_insert_with(Rat::zero) += coef * rat_int(sign);
                        }
                    }
                }
                sv_from_map(acc)
            })
            .collect();
        blocks.push(Some(SparseMat::from_cols(rows, cols)));
    }
    GradedOperator::from_blocks(grading.clone(), 0, blocks)
}

fn adjoint_of_wedge(l: &GradedOperator, grading: &Arc<Grading>) -> GradedOperator {
    // The basis forms are orthonormal for the induced metric, so the adjoint
    // is the blockwise transpose.
    let slots = grading.slots();
    let mut blocks: Vec<Option<SparseMat>> = Vec::with_capacity(slots);
    for p in 0..slots {
        if p < 2 {
            blocks.push(None);
            continue;
        }
        blocks.push(Some(
            l.block(p - 2).expect("in-range wedge block").transpose(),
        ));
    }
    GradedOperator::from_blocks(grading.clone(), -2, blocks)
}

/// Builds all operators on the `2^{4n}`-dimensional form space. Errors above
/// the dimension cap `n <= 2`.
pub fn exterior_operators(module: &QuaternionModule) -> Result<ExteriorOperators> {
    if module.n > 2 {
        return Err(Error::ExteriorCap(module.n));
    }
    let dim = module.dim();
    let basis = FormBasis::new(dim);
    let grading = Arc::new(Grading {
        dims: basis.dims(),
        slot_weight: 1,
        half_weight: 2 * module.n as i64,
    });
    let theta = GradedOperator::weight_operator(grading.clone());
    let build = |a: Quat| {
        let omega = two_form(module, a);
        let l = wedge_operator(&basis, &grading, &omega);
        let lambda = adjoint_of_wedge(&l, &grading);
        let w = derivation_operator(&basis, &grading, module.mat(a));
        (l, lambda, w)
    };
    let (li, lami, wi) = build(Quat::I);
    let (lj, lamj, wj) = build(Quat::J);
    let (lk, lamk, wk) = build(Quat::K);
    Ok(ExteriorOperators {
        n: module.n,
        grading,
        theta,
        l: [li, lj, lk],
        lambda: [lami, lamj, lamk],
        w: [wi, wj, wk],
    })
}

#[derive(Debug, Serialize)]
pub struct So41Report {
    pub identities: BTreeMap<String, bool>,
    pub sl2_triples: bool,
    pub closure_dim: usize,
    #[serde(serialize_with = "crate::serialize::opt_pair_as_array")]
    pub killing: Option<(usize, usize)>,
    pub pass: bool,
}

/// Exact verification of the quaternionic commutator identities, the `sl2`
/// triples, the 10-dimensional closure of the Lefschetz operators and their
/// adjoints, and the Killing signature `(4, 6)`.
pub fn verify_so41(ops: &ExteriorOperators) -> So41Report {
    let mut identities = BTreeMap::new();
    let cross = [
        ("lambda_I_L_J_eq_W_K", 0usize, 1usize, 2usize),
        ("lambda_J_L_K_eq_W_I", 1, 2, 0),
        ("lambda_K_L_I_eq_W_J", 2, 0, 1),
    ];
    for (name, a, b, c) in cross {
        let got = bracket(&ops.lambda[a], &ops.l[b]);
        identities.insert(name.to_string(), got == ops.w[c]);
    }
    let pairs = [
        ("lambda_I_lambda_J_commute", 0usize, 1usize),
        ("lambda_J_lambda_K_commute", 1, 2),
        ("lambda_K_lambda_I_commute", 2, 0),
    ];
    for (name, a, b) in pairs {
        identities.insert(
            name.to_string(),
            bracket(&ops.lambda[a], &ops.lambda[b]).is_zero(),
        );
    }

    let mut sl2 = true;
    for a in 0..3 {
        sl2 &= bracket(&ops.l[a], &ops.lambda[a]) == ops.theta;
        sl2 &= bracket(&ops.theta, &ops.l[a]) == ops.l[a].scale(&rat_int(2));
        sl2 &= bracket(&ops.theta, &ops.lambda[a]) == ops.lambda[a].scale(&rat_int(-2));
    }

    let mut generators: Vec<GradedOperator> = Vec::new();
    generators.extend(ops.l.iter().cloned());
    generators.extend(ops.lambda.iter().cloned());
    let closure = lie_closure(&ops.grading, &generators);
    let killing = {
        let k = closure.killing_matrix();
        let (p, m, z) = ldl_signature(&k).expect("killing symmetric");
        Some((p, m + z))
    };

    let pass = identities.values().all(|&b| b)
        && sl2
        && closure.dim() == 10
        && killing == Some((4, 6));
    So41Report {
        identities,
        sl2_triples: sl2,
        closure_dim: closure.dim(),
        killing,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_relations() {
        let m = build_quaternion_model(1);
        let minus_id = RationalMatrix::identity(4).scale(&rat_int(-1));
        assert_eq!(m.i_mat.mul(&m.i_mat), minus_id);
        assert_eq!(m.j_mat.mul(&m.j_mat), minus_id);
        assert_eq!(m.k_mat.mul(&m.k_mat), minus_id);
        // K = IJ = -JI.
        assert_eq!(m.i_mat.mul(&m.j_mat), m.k_mat);
        assert_eq!(
            m.i_mat.mul(&m.j_mat).add(&m.j_mat.mul(&m.i_mat)),
            RationalMatrix::zeros(4, 4)
        );
        // Orthogonality with the identity metric.
        assert_eq!(m.i_mat.transpose().mul(&m.i_mat), RationalMatrix::identity(4));
        assert_eq!(m.j_mat.transpose().mul(&m.j_mat), RationalMatrix::identity(4));
        assert_eq!(m.k_mat.transpose().mul(&m.k_mat), RationalMatrix::identity(4));
    }

    #[test]
    fn two_forms_are_skew_and_nondegenerate() {
        for n in [1, 2] {
            let m = build_quaternion_model(n);
            for a in [Quat::I, Quat::J, Quat::K] {
                let omega = two_form(&m, a);
                assert_eq!(omega.transpose(), omega.scale(&rat_int(-1)));
                assert_eq!(omega.rank(), 4 * n);
                // omega_a(ax, ay) = omega_a(x, y): a^T Omega a = Omega.
                let conj = m.mat(a).transpose().mul(&omega).mul(m.mat(a));
                assert_eq!(conj, omega);
            }
        }
    }

    #[test]
    fn eta_is_linear_and_squares_scale() {
        let m = build_quaternion_model(1);
        let (al, be, ga) = (rat_int(2), crate::rat::rat(-1, 3), rat_int(5));
        let combo = m
            .i_mat
            .scale(&al)
            .add(&m.j_mat.scale(&be))
            .add(&m.k_mat.scale(&ga));
        let omega_combo = two_form_of(&combo);
        let expected = two_form(&m, Quat::I)
            .scale(&al)
            .add(&two_form(&m, Quat::J).scale(&be))
            .add(&two_form(&m, Quat::K).scale(&ga));
        assert_eq!(omega_combo, expected);
        // (al i + be j + ga k)^2 = -(al^2 + be^2 + ga^2).
        let norm = &al * &al + &be * &be + &ga * &ga;
        assert_eq!(
            combo.mul(&combo),
            RationalMatrix::identity(4).scale(&-norm)
        );
    }

    #[test]
    fn wedge_sign_basics() {
        assert_eq!(wedge_sign(0b0011, 0b0100), Some(1));
        assert_eq!(wedge_sign(0b0110, 0b0001), Some(1)); // e2^e3 ^ e1: two swaps
        assert_eq!(wedge_sign(0b0010, 0b0001), Some(-1)); // e2 ^ e1
        assert_eq!(wedge_sign(0b0011, 0b0001), None);
    }

    #[test]
    fn exterior_operator_shapes_and_unit_action() {
        let m = build_quaternion_model(1);
        let ops = exterior_operators(&m).unwrap();
        assert_eq!(ops.grading.total_dim(), 16);
        // L_I(1) = omega_I.
        let col = ops.l[0].block(0).unwrap().to_dense().col_vec(0);
        let omega = two_form(&m, Quat::I);
        let basis = FormBasis::new(4);
        for (idx, &mask) in basis.by_degree[2].iter().enumerate() {
            let i = mask.trailing_zeros() as usize;
            let j = (31 - mask.leading_zeros()) as usize;
            assert_eq!(col[idx], *omega.at(i, j), "mask {mask:#b}");
        }
    }

    #[test]
    fn w_kills_its_own_form_and_has_type_eigenvalues() {
        let m = build_quaternion_model(1);
        let ops = exterior_operators(&m).unwrap();
        // W_I(omega_I) = 0: omega_I is of type (1,1) for I.
        let omega_coords = ops.l[0].block(0).unwrap().col(0).clone();
        let image = ops.w[0].block(2).unwrap().apply_sparse(&omega_coords);
        assert!(image.is_empty());
        // W_I^2 on two-forms has eigenvalues {-4, 0}: x(x + 4) annihilates it
        // and both eigenspaces are nontrivial.
        let w2 = ops.w[0].block(2).unwrap().mul(ops.w[0].block(2).unwrap());
        let dim2 = w2.cols();
        let shifted = w2.add(&SparseMat::scalar(dim2, &rat_int(4)));
        assert!(w2.mul(&shifted).is_zero());
        assert!(!w2.is_zero());
        let rank_w2 = w2.to_dense().rank();
        assert!(rank_w2 > 0 && rank_w2 < dim2);
    }

    #[test]
    fn cap_rejects_large_n() {
        let m = build_quaternion_model(3);
        assert!(matches!(
            exterior_operators(&m),
            Err(Error::ExteriorCap(3))
        ));
    }

    #[test]
    fn so41_report_n1() {
        let m = build_quaternion_model(1);
        let ops = exterior_operators(&m).unwrap();
        let report = verify_so41(&ops);
        assert!(report.pass, "{report:?}");
        assert_eq!(report.closure_dim, 10);
        assert_eq!(report.killing, Some((4, 6)));
        assert!(report.identities.values().all(|&b| b));
    }
}
