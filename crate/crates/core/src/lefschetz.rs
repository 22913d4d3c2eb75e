//! Hard-Lefschetz `sl2`-triples and the total Lie algebra of the model.
//!
//! For a class `h` with the Lefschetz property the unique completion
//! `(Lambda_h, theta, L_h)` is constructed through the primitive
//! decomposition of the multiplication operator and certified by the exact
//! relation `[L_h, Lambda_h] = theta`. The total Lie algebra is the bracket
//! saturation of `{theta, L_h, Lambda_h}` over a spanning set of Lefschetz
//! classes, and its structural invariants (dimension, grading, abelian
//! extreme parts, derivation property of the degree-0 part, Killing
//! signature) are verified exactly.

use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{kernel, ldl_signature, RationalMatrix};
use crate::exec;
use crate::operators::{bracket, lie_closure, GradedOperator, LieBasis, SpanTracker};
use crate::rat::{rat_int, Rat};
use crate::sparse::{sv_from_dense, SparseMat, SparseVec};
use crate::verbitsky::VerbitskyModel;

/// The grading operator: `(2k - 2n) Id` on `A_k`.
pub fn grading_operator(model: &VerbitskyModel) -> GradedOperator {
    GradedOperator::weight_operator(model.grading().clone())
}

/// Cup product with the degree-2 class of `h in V`, as a degree `+2`
/// operator.
pub fn lefschetz_operator(model: &VerbitskyModel, h: &[Rat]) -> GradedOperator {
    assert_eq!(h.len(), model.space().dim());
    let two_n = model.top_degree();
    let grading = model.grading().clone();
    let mut blocks: Vec<Option<SparseMat>> = Vec::with_capacity(two_n + 1);
    for k in 0..=two_n {
        if k + 1 > two_n {
            blocks.push(None);
            continue;
        }
        let dim_k = model.dims()[k];
        let dim_t = model.dims()[k + 1];
        let cols: Vec<SparseVec> = (0..dim_k)
            .map(|b| {
                let mut acc: std::collections::BTreeMap<u32, Rat> = Default::default();
                for (i, hi) in h.iter().enumerate() {
                    if hi.is_zero() {
                        continue;
                    }
                    for (t, c) in model.mult_entry(1, k, i, b) {
                        *acc.entry(t).or_insert_with(Rat::zero) += hi * &c;
                    }
                }
                crate::sparse::sv_from_map(acc)
            })
            .collect();
        blocks.push(Some(SparseMat::from_cols(dim_t, cols)));
    }
    GradedOperator::from_blocks(grading, 1, blocks)
}

/// Block of `op^steps` starting at `from_slot`; zero when the chain leaves
/// the grading range.
fn power_block(op: &GradedOperator, from_slot: usize, steps: usize) -> SparseMat {
    let grading = op.grading();
    let src_dim = grading.dims[from_slot];
    let mut slot = from_slot as i64;
    let mut acc = SparseMat::identity(src_dim);
    for _ in 0..steps {
        let target = slot + op.step() as i64;
        if target < 0 || target >= grading.slots() as i64 {
            return SparseMat::zeros(0, src_dim);
        }
        match op.block(slot as usize) {
            Some(b) => acc = b.mul(&acc),
            None => return SparseMat::zeros(0, src_dim),
        }
        slot = target;
    }
    acc
}

/// Lefschetz property: `L_h^{2k} : A_{n-k} -> A_{n+k}` is an isomorphism for
/// `k = 0..n` (exact rank check).
pub fn has_lefschetz(model: &VerbitskyModel, h: &[Rat]) -> bool {
    let n = model.n();
    let l = lefschetz_operator(model, h);
    for k in 1..=n {
        let block = power_block(&l, n - k, 2 * k);
        if block.rows() != model.dims()[n + k] {
            return false;
        }
        debug_assert_eq!(model.dims()[n - k], model.dims()[n + k]);
        if block.to_dense().rank() != model.dims()[n + k] {
            return false;
        }
    }
    true
}

/// A spanning set of `d` Lefschetz classes: coordinate vectors `e_i` when
/// they qualify, augmented with `e_i + e_j` and `e_i - e_j` combinations in a
/// deterministic scan. Exists for every nondegenerate form.
pub fn lefschetz_spanning_set(model: &VerbitskyModel) -> Result<Vec<Vec<Rat>>> {
    let d = model.space().dim();
    let mut tracker = SpanTracker::default();
    let mut out: Vec<Vec<Rat>> = Vec::new();
    let mut candidates: Vec<Vec<Rat>> = Vec::new();
    for i in 0..d {
        let mut v = vec![Rat::zero(); d];
        v[i] = Rat::one();
        candidates.push(v);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            for sign in [1i64, -1] {
                let mut v = vec![Rat::zero(); d];
                v[i] = Rat::one();
                v[j] = rat_int(sign);
                candidates.push(v);
            }
        }
    }
    for cand in candidates {
        if out.len() == d {
            break;
        }
        if !tracker.contains(&sv_from_dense(&cand)) && has_lefschetz(model, &cand) {
            tracker.insert(sv_from_dense(&cand), out.len() as u32);
            out.push(cand);
        }
    }
    if out.len() == d {
        Ok(out)
    } else {
        Err(Error::NoLefschetzSet)
    }
}

/// The unique degree `-2` operator with `[L_h, Lambda_h] = theta`,
/// constructed through the primitive decomposition and certified by that
/// exact relation. Errors when `h` lacks the Lefschetz property.
pub fn dual_lefschetz(model: &VerbitskyModel, h: &[Rat]) -> Result<GradedOperator> {
    if !has_lefschetz(model, h) {
        return Err(Error::NoSl2Completion);
    }
    let n = model.n();
    let two_n = 2 * n;
    let dims = model.dims();
    let l = lefschetz_operator(model, h);

    // Primitive strings: P_s = ker(L^{2(n-s)+1} on A_s), then L^r P_s.
    // strings[s][r] holds the dense images of the P_s basis under L^r.
    let mut strings: Vec<Vec<Vec<Vec<Rat>>>> = Vec::with_capacity(n + 1);
    for s in 0..=n {
        let steps = 2 * (n - s) + 1;
        let primitive: Vec<Vec<Rat>> = if s + steps > two_n {
            (0..dims[s])
                .map(|i| {
                    let mut v = vec![Rat::zero(); dims[s]];
                    v[i] = Rat::one();
                    v
                })
                .collect()
        } else {
            kernel(&power_block(&l, s, steps).to_dense())
        };
        let expected = if s == 0 {
            dims[0]
        } else {
            dims[s] - dims[s - 1]
        };
        if primitive.len() != expected {
            return Err(Error::ModelInvariant(format!(
                "primitive space at level {s} has dimension {}, expected {expected}",
                primitive.len()
            )));
        }
        let mut levels = vec![primitive];
        for r in 1..=(two_n - 2 * s) {
            let slot = s + r - 1;
            let block = l.block(slot).expect("in-range lefschetz block");
            let next: Vec<Vec<Rat>> = levels[r - 1]
                .iter()
                .map(|v| block.apply_dense(v))
                .collect();
            levels.push(next);
        }
        strings.push(levels);
    }

    // Per slot: change of basis from the string basis, and the lowering
    // action Lambda(L^r p) = r (2n - 2s - r + 1) L^{r-1} p.
    let grading = model.grading().clone();
    let mut blocks: Vec<Option<SparseMat>> = vec![None; two_n + 1];
    for k in 0..=two_n {
        if k == 0 {
            continue;
        }
        let dim_k = dims[k];
        let dim_prev = dims[k - 1];
        let mut basis_cols: Vec<Vec<Rat>> = Vec::with_capacity(dim_k);
        let mut image_cols: Vec<Vec<Rat>> = Vec::with_capacity(dim_k);
        for s in 0..=n.min(k) {
            let r = k - s;
            if r > two_n - 2 * s {
                continue;
            }
            for (p_idx, vec) in strings[s][r].iter().enumerate() {
                basis_cols.push(vec.clone());
                let coef = rat_int((r * (2 * n - 2 * s - r + 1)) as i64);
                let image = if r == 0 || coef.is_zero() {
                    vec![Rat::zero(); dim_prev]
                } else {
                    strings[s][r - 1][p_idx]
                        .iter()
                        .map(|x| x * &coef)
                        .collect()
                };
                image_cols.push(image);
            }
        }
        if basis_cols.len() != dim_k {
            return Err(Error::ModelInvariant(format!(
                "string basis at degree {k} has {} vectors, expected {dim_k}",
                basis_cols.len()
            )));
        }
        let b_mat =
            RationalMatrix::from_fn(dim_k, dim_k, |r, c| basis_cols[c][r].clone());
        let w_mat =
            RationalMatrix::from_fn(dim_prev, dim_k, |r, c| image_cols[c][r].clone());
        let b_inv = b_mat.inverse().ok_or_else(|| {
            Error::ModelInvariant(format!("string basis at degree {k} is singular"))
        })?;
        blocks[k] = Some(SparseMat::from_dense(&w_mat.mul(&b_inv)));
    }

    let lambda = GradedOperator::from_blocks(grading, -1, blocks);
    let theta = grading_operator(model);
    if bracket(&l, &lambda) != theta {
        return Err(Error::ModelInvariant(
            "constructed dual operator fails [L, Lambda] = theta".into(),
        ));
    }
    Ok(lambda)
}

/// Dimension of the solution space of the homogeneous system
/// `[L_h, X] = 0` over graded degree `-2` operators `X`. Zero certifies the
/// uniqueness of the `sl2` completion. Builds the dense linear system;
/// intended for small models.
pub fn sl2_uniqueness_kernel_dim(model: &VerbitskyModel, h: &[Rat]) -> usize {
    let two_n = model.top_degree();
    let dims = model.dims();
    let l = lefschetz_operator(model, h);
    let ldense: Vec<Option<RationalMatrix>> = (0..=two_n)
        .map(|k| l.block(k).map(|b| b.to_dense()))
        .collect();

    // Unknowns: entries of X_k : A_k -> A_{k-1}, k = 1..=2n.
    let mut offsets = vec![0usize; two_n + 2];
    for k in 1..=two_n {
        offsets[k + 1] = offsets[k] + dims[k] * dims[k - 1];
    }
    let total_vars = offsets[two_n + 1];
    let var = |k: usize, r: usize, c: usize| offsets[k] + r * dims[k] + c;

    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for k in 0..=two_n {
        // Block equation on A_k: L_{k-1} X_k - X_{k+1} L_k = 0.
        for r in 0..dims[k] {
            for c in 0..dims[k] {
                let mut row = vec![Rat::zero(); total_vars];
                let mut nontrivial = false;
                if k >= 1 {
                    if let Some(lb) = &ldense[k - 1] {
                        for m in 0..dims[k - 1] {
                            let coef = lb.at(r, m).clone();
                            if !coef.is_zero() {
                                row[var(k, m, c)] += coef;
                                nontrivial = true;
                            }
                        }
                    }
                }
                if k + 1 <= two_n {
                    if let Some(lb) = &ldense[k] {
                        for m in 0..dims[k + 1] {
                            let coef = lb.at(m, c).clone();
                            if !coef.is_zero() {
                                row[var(k + 1, r, m)] -= coef;
                                nontrivial = true;
                            }
                        }
                    }
                }
                if nontrivial {
                    rows.push(row);
                }
            }
        }
    }
    if rows.is_empty() {
        return total_vars;
    }
    let mat = RationalMatrix::from_rows(rows).expect("rectangular system");
    kernel(&mat).len()
}

/// Basis of `so(V, q)`: for `i < j` the maps `x_{ij} = e_i (G e_j)^T - e_j (G e_i)^T`.
pub fn so_basis(space: &crate::quadspace::QuadraticSpace) -> Vec<RationalMatrix> {
    let d = space.dim();
    let g = space.gram();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut x = RationalMatrix::zeros(d, d);
            for c in 0..d {
                *x.at_mut(i, c) = g.at(j, c).clone();
                *x.at_mut(j, c) = -g.at(i, c).clone();
            }
            out.push(x);
        }
    }
    out
}

/// `true` iff `x^T G + G x = 0`.
pub fn is_so_element(space: &crate::quadspace::QuadraticSpace, x: &RationalMatrix) -> bool {
    x.rows() == space.dim()
        && x.cols() == space.dim()
        && x.transpose()
            .mul(space.gram())
            .add(&space.gram().mul(x))
            .is_zero()
}

/// The unique degree-0 derivation of the model extending `x in so(V, q)` on
/// `A_1` and vanishing on the unit. Errors when `x` is not skew.
pub fn so_derivation(
    model: &VerbitskyModel,
    x: &RationalMatrix,
) -> Result<GradedOperator> {
    if !is_so_element(model.space(), x) {
        return Err(Error::NotSkew);
    }
    let tables = model.tables();
    // The dual class is invariant, so the derivation acts on the quotient
    // coordinates of every degree through the plain symmetric extension.
    let der2 = tables.derivation_matrix(x, 2);
    if !der2.apply_sparse(model.qbar()).is_empty() {
        return Err(Error::ModelInvariant(
            "skew derivation does not annihilate the dual class".into(),
        ));
    }
    let two_n = model.top_degree();
    let blocks = (0..=two_n)
        .map(|k| Some(tables.derivation_matrix(x, model.coord_degree(k))))
        .collect();
    Ok(GradedOperator::from_blocks(model.grading().clone(), 0, blocks))
}

/// Generators of the total Lie algebra over a spanning Lefschetz set.
pub struct GtotSetup {
    pub spanning: Vec<Vec<Rat>>,
    pub theta: GradedOperator,
    pub l_ops: Vec<GradedOperator>,
    pub lambda_ops: Vec<GradedOperator>,
}

pub fn gtot_setup(model: &VerbitskyModel) -> Result<GtotSetup> {
    let spanning = lefschetz_spanning_set(model)?;
    let theta = grading_operator(model);
    let l_ops: Vec<GradedOperator> =
        exec::map_slice(&spanning, |h| lefschetz_operator(model, h));
    let lambda_ops: Vec<GradedOperator> = spanning
        .iter()
        .map(|h| dual_lefschetz(model, h))
        .collect::<Result<_>>()?;
    Ok(GtotSetup {
        spanning,
        theta,
        l_ops,
        lambda_ops,
    })
}

/// Bracket saturation of `{theta, L_h, Lambda_h}` over the spanning set.
pub fn gtot_closure(setup: &GtotSetup) -> LieBasis {
    let mut generators = vec![setup.theta.clone()];
    generators.extend(setup.l_ops.iter().cloned());
    generators.extend(setup.lambda_ops.iter().cloned());
    lie_closure(setup.theta.grading(), &generators)
}

#[derive(Debug, Serialize)]
pub struct GtotReport {
    pub dim: usize,
    pub expected_dim: usize,
    /// Basis counts in degrees `(-2, 0, +2)`.
    pub grading_dims: Vec<usize>,
    pub expected_grading_dims: Vec<usize>,
    pub theta_eigenvalues: bool,
    pub commuting_duals: bool,
    pub plus_part_abelian: bool,
    pub minus_part_abelian: bool,
    pub derivation_check: bool,
    #[serde(serialize_with = "crate::serialize::opt_pair_as_array")]
    pub killing_signature: Option<(usize, usize)>,
    #[serde(serialize_with = "crate::serialize::opt_pair_as_array")]
    pub expected_killing: Option<(usize, usize)>,
    pub pass: bool,
}

/// Verifies the structural invariants of the closure against the orthogonal
/// Lie algebra of the hyperbolic extension `(V + U, q)`:
/// dimension `(d+2)(d+1)/2`, grading `(d, d(d-1)/2 + 1, d)`, exact
/// `ad_theta` eigenvalues, pairwise-commuting dual operators, abelian
/// extreme parts, the degree-0 span containing every `so(V, q)` derivation,
/// and (optionally) the Killing signature of the noncompact real form.
pub fn verify_gtot_structure(
    model: &VerbitskyModel,
    setup: &GtotSetup,
    basis: &LieBasis,
    compute_killing: bool,
) -> GtotReport {
    let d = model.space().dim();
    let expected_dim = (d + 2) * (d + 1) / 2;
    let by_degree = basis.dims_by_degree();
    let grading_dims = vec![
        by_degree.get(&-2).copied().unwrap_or(0),
        by_degree.get(&0).copied().unwrap_or(0),
        by_degree.get(&2).copied().unwrap_or(0),
    ];
    let expected_grading_dims = vec![d, d * (d - 1) / 2 + 1, d];
    let no_stray_degrees = by_degree
        .keys()
        .all(|deg| matches!(deg, -2 | 0 | 2));

    let theta_checks: Vec<bool> = exec::map_slice(&basis.ops, |op| {
        bracket(&setup.theta, op) == op.scale(&rat_int(op.degree()))
    });
    let theta_eigenvalues = theta_checks.iter().all(|&b| b);

    let dual_pairs: Vec<(usize, usize)> = (0..setup.lambda_ops.len())
        .flat_map(|i| ((i + 1)..setup.lambda_ops.len()).map(move |j| (i, j)))
        .collect();
    let commuting_duals = exec::map_slice(&dual_pairs, |&(i, j)| {
        bracket(&setup.lambda_ops[i], &setup.lambda_ops[j]).is_zero()
    })
    .into_iter()
    .all(|b| b);

    // Extreme parts are abelian: read off the recorded bracket table.
    let part_abelian = |degree: i64| {
        let idx: Vec<u32> = basis
            .ops
            .iter()
            .enumerate()
            .filter(|(_, op)| op.degree() == degree)
            .map(|(i, _)| i as u32)
            .collect();
        idx.iter().all(|&i| {
            idx.iter()
                .all(|&j| i >= j || basis.bracket_coords(i, j).is_empty())
        })
    };
    let plus_part_abelian = part_abelian(2);
    let minus_part_abelian = part_abelian(-2);

    let so_mats = so_basis(model.space());
    let derivation_check = exec::map_slice(&so_mats, |x| {
        so_derivation(model, x).map(|op| basis.contains(&op)).unwrap_or(false)
    })
    .into_iter()
    .all(|b| b);

    let (killing_signature, expected_killing) = if compute_killing {
        let k = basis.killing_matrix();
        let (p, m, z) = ldl_signature(&k).expect("killing form is symmetric");
        let (sp, sm, _) = model.space().signature();
        let noncompact = (sp + 1) * (sm + 1);
        (
            Some((p, m + z)),
            Some((noncompact, expected_dim - noncompact)),
        )
    } else {
        (None, None)
    };

    let mut pass = basis.dim() == expected_dim
        && grading_dims == expected_grading_dims
        && no_stray_degrees
        && theta_eigenvalues
        && commuting_duals
        && plus_part_abelian
        && minus_part_abelian
        && derivation_check;
    if let (Some(sig), Some(exp)) = (killing_signature, expected_killing) {
        pass = pass && sig == exp;
    }

    GtotReport {
        dim: basis.dim(),
        expected_dim,
        grading_dims,
        expected_grading_dims,
        theta_eigenvalues,
        commuting_duals,
        plus_part_abelian,
        minus_part_abelian,
        derivation_check,
        killing_signature,
        expected_killing,
        pass,
    }
}
