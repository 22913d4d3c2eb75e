//! Degree-homogeneous operators on graded spaces, exact span tracking, and
//! Lie closure by bracket saturation.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use num::{One, Zero};

use crate::exactlin::RationalMatrix;
use crate::exec;
use crate::rat::{rat_int, Rat};
use crate::sparse::{sv_axpy, sv_scale, SparseMat, SparseVec};

/// A graded vector space: slot `k` has dimension `dims[k]` and sits in
/// cohomological degree `k * slot_weight`; the weight operator acts on slot
/// `k` by `k * slot_weight - half_weight`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    pub dims: Vec<usize>,
    pub slot_weight: i64,
    pub half_weight: i64,
}

impl Grading {
    pub fn slots(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn weight(&self, slot: usize) -> i64 {
        slot as i64 * self.slot_weight - self.half_weight
    }
}

/// Degree-homogeneous operator: per-slot blocks `slot k -> slot k + step`.
/// Out-of-range images are zero, encoded as absent blocks.
#[derive(Clone, Debug)]
pub struct GradedOperator {
    grading: Arc<Grading>,
    step: i32,
    blocks: Vec<Option<SparseMat>>,
}

impl PartialEq for GradedOperator {
    fn eq(&self, other: &Self) -> bool {
        self.step == other.step && self.blocks == other.blocks
    }
}

impl GradedOperator {
    fn target(&self, k: usize) -> Option<usize> {
        let t = k as i64 + self.step as i64;
        if t < 0 || t >= self.grading.slots() as i64 {
            None
        } else {
            Some(t as usize)
        }
    }

    pub fn from_blocks(grading: Arc<Grading>, step: i32, blocks: Vec<Option<SparseMat>>) -> Self {
        assert_eq!(blocks.len(), grading.slots());
        let op = GradedOperator {
            grading,
            step,
            blocks,
        };
        for k in 0..op.grading.slots() {
            match (op.target(k), &op.blocks[k]) {
                (Some(t), Some(b)) => {
                    assert_eq!(b.rows(), op.grading.dims[t], "block rows at slot {k}");
                    assert_eq!(b.cols(), op.grading.dims[k], "block cols at slot {k}");
                }
                (None, None) => {}
                (Some(_), None) => panic!("missing in-range block at slot {k}"),
                (None, Some(_)) => panic!("unexpected out-of-range block at slot {k}"),
            }
        }
        op
    }

    pub fn zero(grading: Arc<Grading>, step: i32) -> Self {
        let slots = grading.slots();
        let mut blocks = Vec::with_capacity(slots);
        for k in 0..slots {
            let t = k as i64 + step as i64;
            if t < 0 || t >= slots as i64 {
                blocks.push(None);
            } else {
                blocks.push(Some(SparseMat::zeros(grading.dims[t as usize], grading.dims[k])));
            }
        }
        GradedOperator {
            grading,
            step,
            blocks,
        }
    }

    /// Diagonal operator acting on slot `k` by the grading weight.
    pub fn weight_operator(grading: Arc<Grading>) -> Self {
        let slots = grading.slots();
        let blocks = (0..slots)
            .map(|k| {
                Some(SparseMat::scalar(
                    grading.dims[k],
                    &rat_int(grading.weight(k)),
                ))
            })
            .collect();
        GradedOperator {
            grading,
            step: 0,
            blocks,
        }
    }

    pub fn identity(grading: Arc<Grading>) -> Self {
        let slots = grading.slots();
        let blocks = (0..slots)
            .map(|k| Some(SparseMat::identity(grading.dims[k])))
            .collect();
        GradedOperator {
            grading,
            step: 0,
            blocks,
        }
    }

    pub fn grading(&self) -> &Arc<Grading> {
        &self.grading
    }

    pub fn step(&self) -> i32 {
        self.step
    }

    /// Shift in cohomological degree.
    pub fn degree(&self) -> i64 {
        self.step as i64 * self.grading.slot_weight
    }

    pub fn block(&self, k: usize) -> Option<&SparseMat> {
        self.blocks.get(k).and_then(|b| b.as_ref())
    }

    /// `self . rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &GradedOperator) -> GradedOperator {
        assert_eq!(self.grading, rhs.grading, "operators on one grading");
        let step = self.step + rhs.step;
        let slots = self.grading.slots();
        let mut blocks = Vec::with_capacity(slots);
        for k in 0..slots {
            let t = k as i64 + step as i64;
            if t < 0 || t >= slots as i64 {
                blocks.push(None);
                continue;
            }
            let t = t as usize;
            let block = match (rhs.blocks[k].as_ref(), rhs.target(k)) {
                (Some(first), Some(mid)) => match self.blocks[mid].as_ref() {
                    Some(second) => second.mul(first),
                    None => SparseMat::zeros(self.grading.dims[t], self.grading.dims[k]),
                },
                _ => SparseMat::zeros(self.grading.dims[t], self.grading.dims[k]),
            };
            blocks.push(Some(block));
        }
        GradedOperator {
            grading: self.grading.clone(),
            step,
            blocks,
        }
    }

    pub fn add(&self, rhs: &GradedOperator) -> GradedOperator {
        self.zip(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &GradedOperator) -> GradedOperator {
        self.zip(rhs, |a, b| a.sub(b))
    }

    fn zip(
        &self,
        rhs: &GradedOperator,
        f: impl Fn(&SparseMat, &SparseMat) -> SparseMat,
    ) -> GradedOperator {
        assert_eq!(self.step, rhs.step, "same degree");
        assert_eq!(self.grading, rhs.grading);
        let blocks = self
            .blocks
            .iter()
            .zip(&rhs.blocks)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(f(a, b)),
                (None, None) => None,
                _ => unreachable!("block layout fixed by step"),
            })
            .collect();
        GradedOperator {
            grading: self.grading.clone(),
            step: self.step,
            blocks,
        }
    }

    pub fn scale(&self, c: &Rat) -> GradedOperator {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.as_ref().map(|m| m.scale(c)))
            .collect();
        GradedOperator {
            grading: self.grading.clone(),
            step: self.step,
            blocks,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.as_ref().map_or(true, |m| m.is_zero()))
    }

    /// Applies the operator to per-slot coordinates.
    pub fn apply(&self, comps: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
        let slots = self.grading.slots();
        assert_eq!(comps.len(), slots);
        let mut out: Vec<Vec<Rat>> = (0..slots)
            .map(|k| vec![Rat::zero(); self.grading.dims[k]])
            .collect();
        for k in 0..slots {
            if let (Some(block), Some(t)) = (self.blocks[k].as_ref(), self.target(k)) {
                let img = block.apply_dense(&comps[k]);
                for (o, v) in out[t].iter_mut().zip(img) {
                    *o += v;
                }
            }
        }
        out
    }

    /// Flattens the blocks into one sparse coordinate vector. The layout is a
    /// function of `(grading, step)` only, so operators of equal degree are
    /// comparable coordinate-wise.
    pub fn flatten(&self) -> SparseVec {
        let mut out: SparseVec = Vec::new();
        let mut offset: u64 = 0;
        for k in 0..self.grading.slots() {
            if let Some(t) = self.target(k) {
                let rows = self.grading.dims[t] as u64;
                if let Some(block) = self.blocks[k].as_ref() {
                    for c in 0..block.cols() {
                        for (r, v) in block.col(c) {
                            let idx = offset + c as u64 * rows + *r as u64;
                            out.push((u32::try_from(idx).expect("flatten index fits u32"), v.clone()));
                        }
                    }
                }
                offset += rows * self.grading.dims[k] as u64;
            }
        }
        out
    }
}

/// `[a, b] = a b - b a`.
pub fn bracket(a: &GradedOperator, b: &GradedOperator) -> GradedOperator {
    a.compose(b).sub(&b.compose(a))
}

/// Incremental echelon span over sparse coordinate vectors, with each row's
/// expression over the inserted items tracked for coefficient extraction.
#[derive(Debug, Default, Clone)]
pub struct SpanTracker {
    rows: Vec<SparseVec>,
    exprs: Vec<SparseVec>,
    pivot_lookup: BTreeMap<u32, usize>,
}

pub enum InsertOutcome {
    /// Vector was independent and is now part of the span.
    Added,
    /// Vector already lay in the span; expression over inserted items.
    InSpan(SparseVec),
}

impl SpanTracker {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the span. Returns the remainder and the
    /// combination (over inserted item indices) that was subtracted.
    pub fn reduce(&self, mut v: SparseVec) -> (SparseVec, SparseVec) {
        let mut combo: SparseVec = Vec::new();
        while let Some((lead, coef)) = v.first().cloned() {
            let Some(&row) = self.pivot_lookup.get(&lead) else {
                break;
            };
            // Rows are normalized with leading coefficient 1.
            let neg = -coef.clone();
            v = sv_axpy(&v, &neg, &self.rows[row]);
            combo = sv_axpy(&combo, &coef, &self.exprs[row]);
        }
        (v, combo)
    }

    /// True iff `v` lies in the current span.
    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).0.is_empty()
    }

    pub fn insert(&mut self, v: SparseVec, item_index: u32) -> InsertOutcome {
        let (rem, combo) = self.reduce(v);
        if rem.is_empty() {
            return InsertOutcome::InSpan(combo);
        }
        let lead_coef = rem[0].1.clone();
        let inv = lead_coef.recip();
        let row = sv_scale(&rem, &inv);
        // rem = item - combo  =>  row = (item - combo) / lead
        let mut expr: SparseVec = vec![(item_index, Rat::one())];
        let neg_one = -Rat::one();
        expr = sv_axpy(&expr, &neg_one, &combo);
        let expr = sv_scale(&expr, &inv);
        self.pivot_lookup.insert(row[0].0, self.rows.len());
        self.rows.push(row);
        self.exprs.push(expr);
        InsertOutcome::Added
    }
}

/// A bracket-closed family of graded operators: linearly independent as
/// flattened matrices, with the full bracket table over the basis.
#[derive(Debug)]
pub struct LieBasis {
    pub grading: Arc<Grading>,
    pub ops: Vec<GradedOperator>,
    trackers: BTreeMap<i32, SpanTracker>,
    /// `(i, j)` with `i < j` maps to the coordinates of `[ops[i], ops[j]]`
    /// over `ops`. Missing pairs bracket to zero.
    pub table: BTreeMap<(u32, u32), SparseVec>,
    /// Basis index where each generator landed; `None` for generators already
    /// in the span of earlier ones.
    pub generator_indices: Vec<Option<u32>>,
}

impl LieBasis {
    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    /// Basis size per cohomological degree.
    pub fn dims_by_degree(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for op in &self.ops {
            *out.entry(op.degree()).or_insert(0) += 1;
        }
        out
    }

    /// Structure constants of `[ops[i], ops[j]]` over the basis (any order).
    pub fn bracket_coords(&self, i: u32, j: u32) -> SparseVec {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => Vec::new(),
            Ordering::Less => self.table.get(&(i, j)).cloned().unwrap_or_default(),
            Ordering::Greater => self
                .table
                .get(&(j, i))
                .map(|v| v.iter().map(|(k, c)| (*k, -c.clone())).collect())
                .unwrap_or_default(),
        }
    }

    /// Exact span membership of an operator (degree-aware).
    pub fn contains(&self, op: &GradedOperator) -> bool {
        if op.is_zero() {
            return true;
        }
        match self.trackers.get(&op.step()) {
            Some(t) => t.contains(&op.flatten()),
            None => false,
        }
    }

    /// Killing form `K(x, y) = tr(ad_x ad_y)` over the basis.
    pub fn killing_matrix(&self) -> RationalMatrix {
        let n = self.ops.len();
        let ads: Vec<SparseMat> = exec::map_range(n, |i| {
            let cols = (0..n)
                .map(|j| self.bracket_coords(i as u32, j as u32))
                .collect();
            SparseMat::from_cols(n, cols)
        });
        let mut k = RationalMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                // tr(ad_i ad_j) = sum over (a, b) of ad_i[a][b] * ad_j[b][a]
                let mut acc = Rat::zero();
                for b in 0..n {
                    for (a, v) in ads[i].col(b) {
                        if let Some(w) = crate::sparse::sv_get(ads[j].col(*a as usize), b as u32) {
                            acc += v * w;
                        }
                    }
                }
                *k.at_mut(i, j) = acc.clone();
                *k.at_mut(j, i) = acc;
            }
        }
        k
    }
}

/// Minimal Lie algebra containing the generators, by bracket saturation:
/// maintain an independent spanning set per degree, repeatedly bracket all
/// pairs and add whatever falls outside the span until nothing new appears.
///
/// Every unordered basis pair is bracketed exactly once and recorded in the
/// table, so the result is verified closed, not assumed. Brackets within a
/// round are evaluated in parallel; insertion order is deterministic.
pub fn lie_closure(grading: &Arc<Grading>, generators: &[GradedOperator]) -> LieBasis {
    let mut basis = LieBasis {
        grading: grading.clone(),
        ops: Vec::new(),
        trackers: BTreeMap::new(),
        table: BTreeMap::new(),
        generator_indices: Vec::new(),
    };
    let mut queue: VecDeque<(u32, u32)> = VecDeque::new();

    fn try_insert(
        basis: &mut LieBasis,
        queue: &mut VecDeque<(u32, u32)>,
        op: GradedOperator,
    ) -> (Option<u32>, SparseVec) {
        if op.is_zero() {
            return (None, Vec::new());
        }
        let idx = basis.ops.len() as u32;
        let tracker = basis.trackers.entry(op.step()).or_default();
        match tracker.insert(op.flatten(), idx) {
            InsertOutcome::InSpan(expr) => (None, expr),
            InsertOutcome::Added => {
                for i in 0..idx {
                    queue.push_back((i, idx));
                }
                basis.ops.push(op);
                (Some(idx), vec![(idx, Rat::one())])
            }
        }
    }

    for g in generators {
        let (added, _) = try_insert(&mut basis, &mut queue, g.clone());
        basis.generator_indices.push(added);
    }

    while !queue.is_empty() {
        let batch: Vec<(u32, u32)> = queue.drain(..).collect();
        let computed: Vec<GradedOperator> = exec::map_slice(&batch, |&(i, j)| {
            bracket(&basis.ops[i as usize], &basis.ops[j as usize])
        });
        for ((i, j), z) in batch.into_iter().zip(computed) {
            if z.is_zero() {
                continue;
            }
            let (added, expr) = try_insert(&mut basis, &mut queue, z);
            let coords = match added {
                Some(m) => vec![(m, Rat::one())],
                None => expr,
            };
            if !coords.is_empty() {
                basis.table.insert((i, j), coords);
            }
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::sv_from_dense;

    fn grading(dims: Vec<usize>) -> Arc<Grading> {
        Arc::new(Grading {
            dims,
            slot_weight: 2,
            half_weight: 2,
        })
    }

    #[test]
    fn weight_operator_diagonal() {
        let g = grading(vec![1, 3, 1]);
        let theta = GradedOperator::weight_operator(g);
        assert_eq!(theta.block(0).unwrap().to_dense(), RationalMatrix::diag_i64(&[-2]));
        assert_eq!(
            theta.block(1).unwrap().to_dense(),
            RationalMatrix::zeros(3, 3)
        );
        assert_eq!(theta.block(2).unwrap().to_dense(), RationalMatrix::diag_i64(&[2]));
    }

    #[test]
    fn closure_of_weight_operator_is_one_dimensional() {
        let g = grading(vec![1, 3, 1]);
        let theta = GradedOperator::weight_operator(g.clone());
        let basis = lie_closure(&g, &[theta.clone(), theta.scale(&rat_int(5))]);
        assert_eq!(basis.dim(), 1);
        assert_eq!(basis.generator_indices, vec![Some(0), None]);
        assert!(basis.table.is_empty());
    }

    #[test]
    fn closure_of_sl2_matrices() {
        // One slot of dimension 2 so operators are plain 2x2 matrices.
        let g = Arc::new(Grading {
            dims: vec![2],
            slot_weight: 2,
            half_weight: 0,
        });
        let from_dense = |m: &RationalMatrix| {
            GradedOperator::from_blocks(g.clone(), 0, vec![Some(SparseMat::from_dense(m))])
        };
        let e = from_dense(&RationalMatrix::from_i64_rows(&[&[0, 1], &[0, 0]]));
        let f = from_dense(&RationalMatrix::from_i64_rows(&[&[0, 0], &[1, 0]]));
        let basis = lie_closure(&g, &[e, f]);
        assert_eq!(basis.dim(), 3);
        // Killing form of sl2 has signature (2, 1).
        let k = basis.killing_matrix();
        assert_eq!(crate::exactlin::ldl_signature(&k).unwrap(), (2, 1, 0));
    }

    #[test]
    fn span_tracker_expressions() {
        let mut t = SpanTracker::default();
        let v1 = sv_from_dense(&[rat_int(1), rat_int(1), rat_int(0)]);
        let v2 = sv_from_dense(&[rat_int(0), rat_int(2), rat_int(0)]);
        assert!(matches!(t.insert(v1, 0), InsertOutcome::Added));
        assert!(matches!(t.insert(v2, 1), InsertOutcome::Added));
        let combo = sv_from_dense(&[rat_int(2), rat_int(5), rat_int(0)]);
        match t.insert(combo, 2) {
            InsertOutcome::InSpan(expr) => {
                // 2*v1 + (3/2)*v2
                assert_eq!(expr, vec![(0, rat_int(2)), (1, crate::rat::rat(3, 2))]);
            }
            InsertOutcome::Added => panic!("dependent vector judged independent"),
        }
    }
}
