//! The model cohomology algebra of a rational quadratic space.
//!
//! For `(V, q)` of dimension `d >= 2` and `n >= 1` this builds the graded
//! commutative algebra `A = S^. V / I` with `A_k` modeling `H^{2k}` of a
//! manifold of real dimension `4n`. The ideal `I` is generated by the
//! harmonic space `H_{n+1} = ker(Laplacian) in S^{n+1} V`; over the complex
//! numbers this space is spanned by the powers `a^{n+1}` of isotropic
//! classes, but harmonicity is a rational linear condition and works for
//! anisotropic forms too. Whenever rational isotropic vectors exist, the
//! containment of their powers in `I` is cross-checked in the test suite.
//!
//! Internally the quotient is realized through the exact harmonic
//! decomposition `S^m = H_m + qbar * S^{m-2}` (`qbar` the dual class of the
//! form), which gives `A_{n+j}` the concrete coordinate space `S^{n-j} V`
//! (the class of `qbar^j * u` has coordinates `u`). Reduction is a recursion
//! on the contraction laplacian with explicit rational constants; no large
//! eliminations appear anywhere. At build time the section property and the
//! vanishing of every ideal generator are asserted exactly.
//!
//! The top-degree integral is normalized by `integral[qbar^n] = 1`. The
//! model has no fundamental class, so the resulting constants are not the
//! intersection-theoretic ones of any particular manifold; all verified
//! relations are scale-covariant and share this normalization.

pub mod fujiki;
pub mod monomial;

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{kernel, RationalMatrix};
use crate::exec;
use crate::operators::Grading;
use crate::quadspace::QuadraticSpace;
use crate::rat::{format_rat, parse_rat, rat_int, Rat};
use crate::sparse::{sv_axpy, sv_from_dense, sv_scale, sv_to_dense, SparseVec};
use monomial::SymTables;

pub use fujiki::{fujiki_verify, todd_fujiki_verify, CheckOutcome, FujikiReport, ToddCheck, ToddFujikiReport};

/// Matrix of the contraction laplacian `S^m V -> S^{m-2} V` in the monomial
/// bases. Errors for `m < 2`.
pub fn laplacian_matrix(space: &QuadraticSpace, m: usize) -> Result<RationalMatrix> {
    if m < 2 {
        return Err(Error::DegreeTooLow(m));
    }
    let tables = SymTables::new(space.dim(), m);
    let rows = tables.dim(m - 2);
    let cols = tables.dim(m);
    let mut out = RationalMatrix::zeros(rows, cols);
    for c in 0..cols as u32 {
        for (r, v) in tables.laplacian_mono(space.gram(), m, c) {
            *out.at_mut(r as usize, c as usize) = v;
        }
    }
    Ok(out)
}

/// Basis of the harmonic space `H_m = ker(Laplacian) in S^m V` (dense
/// monomial coordinates). For `m <= 1` the laplacian is undefined below
/// degree 2 and the kernel is everything.
pub fn harmonic_space(space: &QuadraticSpace, m: usize) -> Vec<Vec<Rat>> {
    let tables = SymTables::new(space.dim(), m);
    if m < 2 {
        let dim = tables.dim(m);
        return (0..dim)
            .map(|i| {
                let mut v = vec![Rat::zero(); dim];
                v[i] = Rat::one();
                v
            })
            .collect();
    }
    let mat = laplacian_matrix(space, m).expect("m >= 2");
    kernel(&mat)
}

/// Graded element of the model algebra: one coordinate vector per degree in
/// the chosen quotient bases.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub comps: Vec<Vec<Rat>>,
}

impl AlgebraElement {
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_zero()))
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        AlgebraElement { comps }
    }

    pub fn scale(&self, c: &Rat) -> AlgebraElement {
        let comps = self
            .comps
            .iter()
            .map(|a| a.iter().map(|x| x * c).collect())
            .collect();
        AlgebraElement { comps }
    }

    pub fn component(&self, k: usize) -> &[Rat] {
        &self.comps[k]
    }
}

/// Element JSON: `{"components": {"k": ["p/q", ...]}}` with degrees as keys.
#[derive(Serialize, Deserialize)]
pub struct ElementJson {
    pub components: BTreeMap<String, Vec<String>>,
}

/// The model algebra.
#[derive(Debug)]
pub struct VerbitskyModel {
    space: QuadraticSpace,
    n: usize,
    tables: SymTables,
    qbar: SparseVec,
    qbar_pows: Vec<SparseVec>,
    dims: Vec<usize>,
    grading: Arc<Grading>,
    mult: BTreeMap<(usize, usize), Vec<SparseVec>>,
}

fn decompose_rec(
    tables: &SymTables,
    gram: &RationalMatrix,
    qbar_pows: &[SparseVec],
    m: usize,
    u: &SparseVec,
) -> Vec<SparseVec> {
    if m <= 1 {
        return vec![u.clone()];
    }
    let d = tables.d();
    let w = tables.laplacian_apply(gram, m, u);
    let ws = decompose_rec(tables, gram, qbar_pows, m - 2, &w);
    let tmax = m / 2;
    let mut comps = vec![SparseVec::new(); tmax + 1];
    for t in 1..=tmax {
        let Some(wt) = ws.get(t - 1) else { continue };
        if wt.is_empty() {
            continue;
        }
        let r = m - 2 * t;
        // Laplacian of qbar^t h for harmonic h of degree r:
        // 2t (d + 2r + 2t - 2) * qbar^{t-1} h.
        let a = 2 * t * (d + 2 * r + 2 * t - 2);
        comps[t] = sv_scale(wt, &(Rat::one() / rat_int(a as i64)));
    }
    let mut u0 = u.clone();
    let neg_one = -Rat::one();
    for t in 1..=tmax {
        if comps[t].is_empty() {
            continue;
        }
        let lifted = tables.mul(2 * t, &qbar_pows[t], m - 2 * t, &comps[t]);
        u0 = sv_axpy(&u0, &neg_one, &lifted);
    }
    comps[0] = u0;
    comps
}

impl VerbitskyModel {
    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn top_degree(&self) -> usize {
        2 * self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn grading(&self) -> &Arc<Grading> {
        &self.grading
    }

    pub fn tables(&self) -> &SymTables {
        &self.tables
    }

    /// Degree of the symmetric power whose monomials coordinatize `A_k`.
    pub fn coord_degree(&self, k: usize) -> usize {
        k.min(2 * self.n - k)
    }

    /// The dual class of the form, as a sparse element of `S^2 V`.
    pub fn qbar(&self) -> &SparseVec {
        &self.qbar
    }

    /// Harmonic decomposition `u = sum_t qbar^t u_t` of `u in S^m V`.
    pub fn decompose(&self, m: usize, u: &SparseVec) -> Vec<SparseVec> {
        decompose_rec(&self.tables, self.space.gram(), &self.qbar_pows, m, u)
    }

    /// Class of `u in S^k V` in `A_k`, as sparse quotient coordinates.
    pub fn reduce_sparse(&self, k: usize, u: &SparseVec) -> SparseVec {
        debug_assert!(k <= 2 * self.n);
        if k <= self.n {
            return u.clone();
        }
        let j = k - self.n;
        let comps = self.decompose(k, u);
        let mut acc: SparseVec = Vec::new();
        let one = Rat::one();
        for (t, ut) in comps.iter().enumerate().skip(j) {
            if ut.is_empty() {
                continue;
            }
            let term = if t == j {
                ut.clone()
            } else {
                self.tables
                    .mul(2 * (t - j), &self.qbar_pows[t - j], k - 2 * t, ut)
            };
            acc = sv_axpy(&acc, &one, &term);
        }
        acc
    }

    pub fn reduce(&self, k: usize, u: &SparseVec) -> Vec<Rat> {
        sv_to_dense(&self.reduce_sparse(k, u), self.dims[k])
    }

    /// Section of the quotient: coordinates of `A_k` lifted to `S^k V`.
    pub fn lift(&self, k: usize, coords: &SparseVec) -> SparseVec {
        if k <= self.n {
            return coords.clone();
        }
        let j = k - self.n;
        self.tables
            .mul(2 * j, &self.qbar_pows[j], 2 * self.n - k, coords)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            comps: self.dims.iter().map(|&d| vec![Rat::zero(); d]).collect(),
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        let mut e = self.zero();
        e.comps[0][0] = Rat::one();
        e
    }

    pub fn class_of(&self, k: usize, u: &SparseVec) -> AlgebraElement {
        let mut e = self.zero();
        e.comps[k] = self.reduce(k, u);
        e
    }

    pub fn basis_element(&self, k: usize, idx: usize) -> AlgebraElement {
        let mut e = self.zero();
        e.comps[k][idx] = Rat::one();
        e
    }

    /// Degree-1 class of a vector `h` of `V`.
    pub fn degree_one(&self, h: &[Rat]) -> AlgebraElement {
        assert_eq!(h.len(), self.space.dim());
        let mut e = self.zero();
        e.comps[1] = h.to_vec();
        e
    }

    /// The class of the dual form `[qbar]` in `A_2`.
    pub fn qbar_class(&self) -> AlgebraElement {
        self.class_of(2.min(2 * self.n), &self.qbar.clone())
    }

    pub fn check_element(&self, e: &AlgebraElement) -> Result<()> {
        if e.comps.len() != self.dims.len()
            || e.comps.iter().zip(&self.dims).any(|(c, &d)| c.len() != d)
        {
            return Err(Error::DimensionMismatch(
                "element components do not match model dims".into(),
            ));
        }
        Ok(())
    }

    /// Structure constants of `A_j x A_k -> A_{j+k}` at basis indices.
    pub fn mult_entry(&self, j: usize, k: usize, a: usize, b: usize) -> SparseVec {
        if j + k > 2 * self.n {
            return Vec::new();
        }
        if j == 0 || k == 0 {
            // Scalar factor: the other coordinate passes through.
            let idx = if j == 0 { b } else { a };
            return vec![(idx as u32, Rat::one())];
        }
        let (j2, k2, a2, b2) = if j <= k { (j, k, a, b) } else { (k, j, b, a) };
        let dimk = self.dims[k2];
        self.mult[&(j2, k2)][a2 * dimk + b2].clone()
    }

    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut out = self.zero();
        for (j, xc) in x.comps.iter().enumerate() {
            for (k, yc) in y.comps.iter().enumerate() {
                if j + k > 2 * self.n {
                    continue;
                }
                for (a, xa) in xc.iter().enumerate() {
                    if xa.is_zero() {
                        continue;
                    }
                    for (b, yb) in yc.iter().enumerate() {
                        if yb.is_zero() {
                            continue;
                        }
                        let factor = xa * yb;
                        for (t, c) in self.mult_entry(j, k, a, b) {
                            out.comps[j + k][t as usize] += &factor * &c;
                        }
                    }
                }
            }
        }
        out
    }

    /// Evaluation of the top-degree component; linear, normalized by
    /// `integrate(qbar^n) = 1`.
    pub fn integrate(&self, x: &AlgebraElement) -> Rat {
        x.comps[2 * self.n][0].clone()
    }

    /// `integrate` of the class of a single top-degree monomial.
    pub fn integrate_monomial(&self, idx: u32) -> Rat {
        let coords = self.reduce(2 * self.n, &vec![(idx, Rat::one())]);
        coords[0].clone()
    }

    /// Content hash over the Gram matrix, n and the graded dimensions.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let gram = crate::rat::format_grid(&self.space.gram().to_rows());
        let payload = serde_json::json!({
            "gram": gram,
            "n": self.n,
            "dims": self.dims,
        });
        let mut hasher = Sha256::new();
        hasher.update(payload.to_string().as_bytes());
        format!("sha256:{:x}", hasher.finalize())
    }

    pub fn element_to_json(&self, e: &AlgebraElement) -> ElementJson {
        let mut components = BTreeMap::new();
        for (k, c) in e.comps.iter().enumerate() {
            if c.iter().any(|x| !x.is_zero()) {
                components.insert(k.to_string(), c.iter().map(format_rat).collect());
            }
        }
        ElementJson { components }
    }

    pub fn element_from_json(&self, json: &ElementJson) -> Result<AlgebraElement> {
        let mut e = self.zero();
        for (key, vals) in &json.components {
            let k: usize = key
                .parse()
                .map_err(|_| Error::Invalid(format!("bad degree key {key:?}")))?;
            if k > 2 * self.n {
                return Err(Error::Invalid(format!("degree {k} above the top degree")));
            }
            if vals.len() != self.dims[k] {
                return Err(Error::DimensionMismatch(format!(
                    "component {k} has {} coordinates, expected {}",
                    vals.len(),
                    self.dims[k]
                )));
            }
            for (i, s) in vals.iter().enumerate() {
                e.comps[k][i] = parse_rat(s)?;
            }
        }
        Ok(e)
    }
}

/// Builds the model algebra. Asserts exactly, at build time:
/// the quotient section is a right inverse of reduction in every degree,
/// every ideal generator (products of monomials with harmonic elements of
/// degree `n + 1`) reduces to zero, and the class of `qbar^n` spans the top
/// degree with `integrate(qbar^n) = 1`.
pub fn build_model(space: &QuadraticSpace, n: usize) -> Result<VerbitskyModel> {
    let d = space.dim();
    if d < 2 || n < 1 {
        return Err(Error::BadModelParams { d, n });
    }
    let two_n = 2 * n;
    let tables = SymTables::new(d, two_n);
    let ginv = space.gram().inverse().ok_or(Error::DegenerateForm)?;

    let mut qbar: SparseVec = Vec::new();
    for i in 0..d {
        for j in i..d {
            let g = ginv.at(i, j);
            if g.is_zero() {
                continue;
            }
            let coef = if i == j { g.clone() } else { g + g };
            let idx = tables.basis(2).index_of(&[i as u16, j as u16]);
            qbar.push((idx, coef));
        }
    }
    qbar.sort_by_key(|(i, _)| *i);

    let mut qbar_pows: Vec<SparseVec> = vec![vec![(0, Rat::one())]];
    for t in 1..=n {
        let prev = &qbar_pows[t - 1];
        qbar_pows.push(tables.mul(2 * (t - 1), prev, 2, &qbar));
    }

    let dims: Vec<usize> = (0..=two_n)
        .map(|k| tables.dim(k.min(two_n - k)))
        .collect();
    let grading = Arc::new(Grading {
        dims: dims.clone(),
        slot_weight: 2,
        half_weight: two_n as i64,
    });

    let model = VerbitskyModel {
        space: space.clone(),
        n,
        tables,
        qbar,
        qbar_pows,
        dims,
        grading,
        mult: BTreeMap::new(),
    };

    // Section property: reducing the lift of every quotient basis monomial
    // returns that monomial. In particular [qbar^n] is the top-degree unit.
    for k in (n + 1)..=two_n {
        let cd = model.coord_degree(k);
        for idx in 0..model.tables.dim(cd) as u32 {
            let lifted = model.lift(k, &vec![(idx, Rat::one())]);
            let back = model.reduce_sparse(k, &lifted);
            if back != vec![(idx, Rat::one())] {
                return Err(Error::ModelInvariant(format!(
                    "section failed in degree {k} at monomial {idx}"
                )));
            }
        }
    }

    // Ideal containment: every generator product reduces to zero.
    let lap = laplacian_matrix(space, n + 1)?;
    let lap_rank = lap.rank();
    if lap_rank != model.tables.dim(n - 1) {
        return Err(Error::ModelInvariant(
            "contraction laplacian is not surjective".into(),
        ));
    }
    let harmonics: Vec<SparseVec> = kernel(&lap).iter().map(|v| sv_from_dense(v)).collect();
    for j in 1..=n {
        let sdim = model.tables.dim(j - 1);
        let pairs: Vec<(u32, usize)> = (0..sdim as u32)
            .flat_map(|s| (0..harmonics.len()).map(move |h| (s, h)))
            .collect();
        let reduced: Vec<bool> = exec::map_slice(&pairs, |&(s, h)| {
            let prod = model
                .tables
                .mul(j - 1, &vec![(s, Rat::one())], n + 1, &harmonics[h]);
            model.reduce_sparse(n + j, &prod).is_empty()
        });
        if let Some(pos) = reduced.iter().position(|ok| !ok) {
            return Err(Error::ModelInvariant(format!(
                "ideal generator {pos} does not reduce to zero in degree {}",
                n + j
            )));
        }
    }

    // Structure constants for all nonscalar degree pairs.
    let mut mult = BTreeMap::new();
    for j in 1..=(two_n - 1) {
        for k in j..=(two_n - j) {
            let cdj = model.coord_degree(j);
            let cdk = model.coord_degree(k);
            let pow = (j - cdj) / 2 + (k - cdk) / 2;
            let dimj = model.dims[j];
            let dimk = model.dims[k];
            let entries: Vec<SparseVec> = exec::map_range(dimj * dimk, |ab| {
                let (a, b) = (ab / dimk, ab % dimk);
                let mono = model.tables.mul_mono(cdj, a as u32, cdk, b as u32);
                let lifted = if pow == 0 {
                    vec![(mono, Rat::one())]
                } else {
                    model.tables.mul(
                        2 * pow,
                        &model.qbar_pows[pow],
                        cdj + cdk,
                        &vec![(mono, Rat::one())],
                    )
                };
                model.reduce_sparse(j + k, &lifted)
            });
            mult.insert((j, k), entries);
        }
    }

    Ok(VerbitskyModel { mult, ..model })
}
