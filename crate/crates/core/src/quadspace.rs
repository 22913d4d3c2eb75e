//! Rational quadratic spaces, isometries and spinor norms.
//!
//! An isometry decomposes into at most `2d` reflections (Cartan-Dieudonne);
//! the spinor norm of the decomposition is the class of the product of the
//! reflected vectors' values in `Q^x / (Q^x)^2`. Convention: `SN(tau_v)` is
//! the class of `q(v)` (neither `-q(v)` nor `q(v)/2`); any fixed convention
//! has the same kernel on the special orthogonal group, which is all that is
//! used downstream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{kernel, ldl_signature, squarefree_class, RationalMatrix, SquarefreeClass};
use crate::rat::{format_grid, format_rat, parse_grid, rat_int, Rat};
use num::{One, Signed, Zero};

/// Rational vector space with a nondegenerate symmetric bilinear form.
#[derive(Clone, Debug)]
pub struct QuadraticSpace {
    gram: RationalMatrix,
}

impl QuadraticSpace {
    /// Validates symmetry and nondegeneracy of the Gram matrix.
    pub fn new(gram: RationalMatrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if gram.rank() != gram.rows() {
            return Err(Error::DegenerateForm);
        }
        Ok(QuadraticSpace { gram })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        Self::new(RationalMatrix::diag_i64(entries)).expect("nonzero diagonal entries")
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    /// Polarization `b(a, b) = a^T G b`; errors on a length mismatch.
    pub fn bilinear(&self, a: &[Rat], b: &[Rat]) -> Result<Rat> {
        if a.len() != self.dim() || b.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vectors of length {} and {} in dimension {}",
                a.len(),
                b.len(),
                self.dim()
            )));
        }
        Ok(self.bl(a, b))
    }

    pub(crate) fn bl(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let g = self.gram.at(i, j);
                if !g.is_zero() {
                    acc += ai * g * bj;
                }
            }
        }
        acc
    }

    /// `q(a) = b(a, a)`.
    pub fn quad(&self, a: &[Rat]) -> Result<Rat> {
        self.bilinear(a, a)
    }

    pub(crate) fn q(&self, a: &[Rat]) -> Rat {
        self.bl(a, a)
    }

    pub fn signature(&self) -> (usize, usize, usize) {
        ldl_signature(&self.gram).expect("gram is symmetric")
    }
}

/// `true` iff `phi^T G phi = G` exactly.
pub fn is_isometry(space: &QuadraticSpace, phi: &RationalMatrix) -> bool {
    if phi.rows() != space.dim() || phi.cols() != space.dim() {
        return false;
    }
    phi.transpose().mul(space.gram()).mul(phi) == *space.gram()
}

/// Reflection `tau_v(x) = x - 2 b(x,v)/q(v) * v`. Errors on isotropic `v`.
pub fn reflection(space: &QuadraticSpace, v: &[Rat]) -> Result<RationalMatrix> {
    if v.len() != space.dim() {
        return Err(Error::DimensionMismatch("reflection vector length".into()));
    }
    let qv = space.q(v);
    if qv.is_zero() {
        return Err(Error::IsotropicReflection);
    }
    let gv = space.gram().apply(v);
    let scale = rat_int(2) / qv;
    let mut m = RationalMatrix::identity(space.dim());
    for r in 0..space.dim() {
        if v[r].is_zero() {
            continue;
        }
        for c in 0..space.dim() {
            if gv[c].is_zero() {
                continue;
            }
            let sub = &scale * &v[r] * &gv[c];
            *m.at_mut(r, c) -= sub;
        }
    }
    Ok(m)
}

/// An isometry together with an exact reflection factorization, determinant
/// and spinor norm.
#[derive(Clone, Debug)]
pub struct IsometryWitness {
    pub phi: RationalMatrix,
    pub reflections: Vec<Vec<Rat>>,
    pub det: i8,
    pub spinor_norm: SquarefreeClass,
}

#[derive(Serialize, Deserialize)]
pub struct WitnessJson {
    pub phi: Vec<Vec<String>>,
    pub reflections: Vec<Vec<String>>,
    pub det: i8,
    pub spinor_norm: String,
}

impl IsometryWitness {
    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            phi: format_grid(&self.phi.to_rows()),
            reflections: self
                .reflections
                .iter()
                .map(|v| v.iter().map(format_rat).collect())
                .collect(),
            det: self.det,
            spinor_norm: self.spinor_norm.to_string_rep(),
        }
    }
}

/// Scales a rational vector to a primitive integer vector with positive
/// leading coefficient. The reflection and the spinor-norm class are
/// unchanged (the value of `q` moves by a square).
fn primitive_vector(v: &[Rat]) -> Vec<Rat> {
    use num::BigInt;
    use num::Integer;
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let scaled: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut gcd = BigInt::zero();
    for x in &scaled {
        gcd = gcd.gcd(x);
    }
    if gcd.is_zero() {
        return v.to_vec();
    }
    let lead_negative = scaled
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative());
    let sign = if lead_negative { -1 } else { 1 };
    scaled
        .into_iter()
        .map(|x| Rat::from_integer(x * sign / &gcd))
        .collect()
}

fn find_anisotropic(space: &QuadraticSpace, basis: &[Vec<Rat>]) -> Option<Vec<Rat>> {
    for v in basis {
        if !space.q(v).is_zero() {
            return Some(v.clone());
        }
    }
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let sum: Vec<Rat> = basis[i]
                .iter()
                .zip(&basis[j])
                .map(|(a, b)| a + b)
                .collect();
            if !space.q(&sum).is_zero() {
                return Some(sum);
            }
        }
    }
    None
}

/// Cartan-Dieudonne factorization of an isometry into at most `2d`
/// reflections, with determinant and spinor norm.
///
/// The identity decomposes as the empty product with trivial spinor norm.
/// The working vector is `phi(w) - w` when anisotropic; otherwise the pair
/// `phi(w) + w`, `w` is used. If the current subspace basis vector is
/// isotropic, an anisotropic vector of the (nondegenerate) subspace is found
/// first by scanning basis vectors and pairwise sums.
pub fn decompose_isometry(space: &QuadraticSpace, phi: &RationalMatrix) -> Result<IsometryWitness> {
    if !is_isometry(space, phi) {
        return Err(Error::NotIsometry);
    }
    let d = space.dim();
    let mut cur = phi.clone();
    let mut vectors: Vec<Vec<Rat>> = Vec::new();
    let mut rem: Vec<Vec<Rat>> = (0..d)
        .map(|i| {
            let mut v = vec![Rat::zero(); d];
            v[i] = Rat::one();
            v
        })
        .collect();

    while !rem.is_empty() {
        let w = find_anisotropic(space, &rem).ok_or_else(|| {
            Error::ModelInvariant("restricted form degenerate during decomposition".into())
        })?;
        let img = cur.apply(&w);
        if img != w {
            let u: Vec<Rat> = img.iter().zip(&w).map(|(a, b)| a - b).collect();
            if !space.q(&u).is_zero() {
                cur = reflection(space, &u)?.mul(&cur);
                vectors.push(u);
            } else {
                // q(img + w) = 4 q(w) != 0 here; tau_s sends img to -w.
                let s: Vec<Rat> = img.iter().zip(&w).map(|(a, b)| a + b).collect();
                cur = reflection(space, &s)?.mul(&cur);
                cur = reflection(space, &w)?.mul(&cur);
                vectors.push(s);
                vectors.push(w.clone());
            }
        }
        // Orthogonal complement of w inside the current subspace.
        let row: Vec<Rat> = rem.iter().map(|r| space.bl(&w, r)).collect();
        let constraint = RationalMatrix::from_rows(vec![row])?;
        rem = kernel(&constraint)
            .into_iter()
            .map(|coeffs| {
                let mut v = vec![Rat::zero(); d];
                for (c, r) in coeffs.iter().zip(&rem) {
                    if c.is_zero() {
                        continue;
                    }
                    for (vi, ri) in v.iter_mut().zip(r) {
                        *vi += c * ri;
                    }
                }
                v
            })
            .collect();
    }
    if cur != RationalMatrix::identity(d) {
        return Err(Error::ModelInvariant(
            "reflection product failed to reach the identity".into(),
        ));
    }

    let reflections: Vec<Vec<Rat>> = vectors.iter().map(|v| primitive_vector(v)).collect();
    // tau_k ... tau_1 phi = Id, so phi = tau_1 ... tau_k; verify exactly.
    let mut product = RationalMatrix::identity(d);
    let mut sn = SquarefreeClass::one();
    for v in &reflections {
        product = product.mul(&reflection(space, v)?);
        sn = sn.mul(&squarefree_class(&space.q(v))?);
    }
    if product != *phi {
        return Err(Error::ModelInvariant(
            "reflection product does not reproduce phi".into(),
        ));
    }
    let det = if reflections.len() % 2 == 0 { 1 } else { -1 };
    Ok(IsometryWitness {
        phi: phi.clone(),
        reflections,
        det,
        spinor_norm: sn,
    })
}

/// Extends `(V, q)` by a hyperbolic plane: basis order `(e0, e4, V)` with
/// `q(e0) = q(e4) = 0`, `q(e0, e4) = 1` and the plane orthogonal to `V`.
pub fn mukai_extend(space: &QuadraticSpace) -> QuadraticSpace {
    let d = space.dim();
    let mut g = RationalMatrix::zeros(d + 2, d + 2);
    *g.at_mut(0, 1) = Rat::one();
    *g.at_mut(1, 0) = Rat::one();
    for r in 0..d {
        for c in 0..d {
            *g.at_mut(r + 2, c + 2) = space.gram().at(r, c).clone();
        }
    }
    QuadraticSpace::new(g).expect("hyperbolic extension stays nondegenerate")
}

/// All nonzero integer vectors in the box `[-bound, bound]^d` with `q = 0`.
///
/// A bounded search only: an empty result means "none found in the box",
/// never "the form is anisotropic".
pub fn isotropic_vectors_in_box(space: &QuadraticSpace, bound: i64) -> Vec<Vec<Rat>> {
    let d = space.dim();
    let mut out = Vec::new();
    let width = (2 * bound + 1) as usize;
    let total = width.pow(d as u32);
    for code in 0..total {
        let mut rest = code;
        let mut v = Vec::with_capacity(d);
        for _ in 0..d {
            let digit = (rest % width) as i64 - bound;
            rest /= width;
            v.push(rat_int(digit));
        }
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        if space.q(&v).is_zero() {
            out.push(v);
        }
    }
    out
}

/// Random integer vector with entries in `[-3, 3]`, resampled until
/// anisotropic.
pub fn random_anisotropic_vector<R: Rng>(space: &QuadraticSpace, rng: &mut R) -> Vec<Rat> {
    loop {
        let v: Vec<Rat> = (0..space.dim())
            .map(|_| rat_int(rng.gen_range(-3..=3)))
            .collect();
        if !space.q(&v).is_zero() {
            return v;
        }
    }
}

/// Product of `k` random reflections (an isometry; determinant `(-1)^k`).
pub fn random_isometry<R: Rng>(space: &QuadraticSpace, rng: &mut R, k: usize) -> RationalMatrix {
    let mut m = RationalMatrix::identity(space.dim());
    for _ in 0..k {
        let v = random_anisotropic_vector(space, rng);
        m = m.mul(&reflection(space, &v).expect("anisotropic vector"));
    }
    m
}

/// Spinor-norm battery: multiplicativity `SN(f g) = SN(f) SN(g)` on seeded
/// witness pairs and `SN(tau_v) = class(q(v))` on seeded reflections.
#[derive(Debug, Serialize)]
pub struct SpinorReport {
    pub pairs_checked: usize,
    pub multiplicativity: bool,
    pub reflection_classes: bool,
    pub failures: Vec<String>,
    pub pass: bool,
}

pub fn spinor_battery(space: &QuadraticSpace, seed: u64, pairs: usize) -> Result<SpinorReport> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut mult_ok = true;
    for case in 0..pairs {
        let k1 = rng.gen_range(1..=2 * space.dim());
        let k2 = rng.gen_range(1..=2 * space.dim());
        let phi1 = random_isometry(space, &mut rng, k1);
        let phi2 = random_isometry(space, &mut rng, k2);
        let w1 = decompose_isometry(space, &phi1)?;
        let w2 = decompose_isometry(space, &phi2)?;
        let w12 = decompose_isometry(space, &phi1.mul(&phi2))?;
        if w12.spinor_norm != w1.spinor_norm.mul(&w2.spinor_norm) {
            mult_ok = false;
            failures.push(format!("multiplicativity failed at case {case}"));
        }
        if w12.det != w1.det * w2.det {
            mult_ok = false;
            failures.push(format!("determinant multiplicativity failed at case {case}"));
        }
    }
    let mut refl_ok = true;
    for case in 0..pairs {
        let v = random_anisotropic_vector(space, &mut rng);
        let tau = reflection(space, &v)?;
        let w = decompose_isometry(space, &tau)?;
        if w.spinor_norm != squarefree_class(&space.q(&v))? || w.det != -1 {
            refl_ok = false;
            failures.push(format!("reflection class failed at case {case}"));
        }
    }
    Ok(SpinorReport {
        pairs_checked: pairs,
        multiplicativity: mult_ok,
        reflection_classes: refl_ok,
        pass: mult_ok && refl_ok,
        failures,
    })
}

/// Quadratic space JSON: `{"gram": [[..strings..]]}`.
#[derive(Serialize, Deserialize)]
pub struct SpaceJson {
    pub gram: Vec<Vec<String>>,
}

pub fn space_to_json(space: &QuadraticSpace) -> SpaceJson {
    SpaceJson {
        gram: format_grid(&space.gram().to_rows()),
    }
}

pub fn space_from_json(json: &SpaceJson) -> Result<QuadraticSpace> {
    let rows = parse_grid(&json.gram)?;
    QuadraticSpace::new(RationalMatrix::from_rows(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use rand::SeedableRng;

    fn e(d: usize, i: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); d];
        v[i] = Rat::one();
        v
    }

    #[test]
    fn bilinear_examples() {
        let s = QuadraticSpace::diagonal(&[1, 1]);
        assert_eq!(s.bilinear(&e(2, 0), &e(2, 1)).unwrap(), Rat::zero());

        let hyp = QuadraticSpace::new(RationalMatrix::from_i64_rows(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(hyp.bilinear(&e(2, 0), &e(2, 1)).unwrap(), Rat::one());

        let s = QuadraticSpace::diagonal(&[2, -3]);
        let ones = vec![Rat::one(), Rat::one()];
        assert_eq!(s.bilinear(&ones, &ones).unwrap(), rat_int(-1));

        assert!(s.bilinear(&ones, &[Rat::one()]).is_err());
    }

    #[test]
    fn isometry_checks() {
        let s = QuadraticSpace::diagonal(&[1, 1]);
        assert!(is_isometry(&s, &RationalMatrix::identity(2)));
        assert!(is_isometry(&s, &RationalMatrix::identity(2).scale(&rat_int(-1))));
        assert!(!is_isometry(&s, &RationalMatrix::diag_i64(&[2, 1])));
    }

    #[test]
    fn reflection_examples() {
        let s = QuadraticSpace::diagonal(&[1, 1]);
        let tau = reflection(&s, &e(2, 0)).unwrap();
        assert_eq!(tau, RationalMatrix::diag_i64(&[-1, 1]));

        // v = (1,1) on diag(1,1): e1 -> -e2, e2 -> -e1.
        let v = vec![Rat::one(), Rat::one()];
        let tau = reflection(&s, &v).unwrap();
        assert_eq!(
            tau,
            RationalMatrix::from_i64_rows(&[&[0, -1], &[-1, 0]])
        );

        // Involution on an indefinite form.
        let s = QuadraticSpace::diagonal(&[1, -3]);
        let v = vec![rat_int(1), rat_int(2)];
        assert_eq!(s.q(&v), rat_int(-11));
        let tau = reflection(&s, &v).unwrap();
        assert_eq!(tau.mul(&tau), RationalMatrix::identity(2));
        // tau_v(v) = -v and tau_v fixes the orthogonal complement.
        let img = tau.apply(&v);
        assert!(img.iter().zip(&v).all(|(a, b)| *a == -b.clone()));

        assert!(matches!(
            reflection(&QuadraticSpace::diagonal(&[1, -1]), &vec![Rat::one(), Rat::one()]),
            Err(Error::IsotropicReflection)
        ));
    }

    #[test]
    fn decompose_identity() {
        let s = QuadraticSpace::diagonal(&[2, 3]);
        let w = decompose_isometry(&s, &RationalMatrix::identity(2)).unwrap();
        assert!(w.reflections.is_empty());
        assert_eq!(w.det, 1);
        assert!(w.spinor_norm.is_trivial());
    }

    #[test]
    fn decompose_single_reflection() {
        let s = QuadraticSpace::diagonal(&[2, 3]);
        let tau = reflection(&s, &e(2, 0)).unwrap();
        let w = decompose_isometry(&s, &tau).unwrap();
        assert_eq!(w.det, -1);
        assert_eq!(
            w.spinor_norm,
            squarefree_class(&rat_int(2)).unwrap()
        );
    }

    #[test]
    fn decompose_minus_identity() {
        let s = QuadraticSpace::diagonal(&[1, 1]);
        let m = RationalMatrix::identity(2).scale(&rat_int(-1));
        let w = decompose_isometry(&s, &m).unwrap();
        assert_eq!(w.reflections.len(), 2);
        assert_eq!(w.det, 1);
        assert!(w.spinor_norm.is_trivial());
    }

    #[test]
    fn decompose_rejects_non_isometry() {
        let s = QuadraticSpace::diagonal(&[1, 1]);
        let m = RationalMatrix::diag_i64(&[2, 1]);
        assert!(matches!(
            decompose_isometry(&s, &m),
            Err(Error::NotIsometry)
        ));
    }

    #[test]
    fn decompose_on_hyperbolic_plane() {
        // Isotropic basis vectors force the anisotropic-vector scan.
        let s = QuadraticSpace::new(RationalMatrix::from_i64_rows(&[&[0, 1], &[1, 0]])).unwrap();
        let swap = RationalMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]);
        let w = decompose_isometry(&s, &swap).unwrap();
        assert_eq!(w.det, -1);
        assert!(w.reflections.len() <= 4);
    }

    #[test]
    fn mukai_extension() {
        let s = QuadraticSpace::new(RationalMatrix::from_i64_rows(&[&[2]])).unwrap();
        let ext = mukai_extend(&s);
        assert_eq!(
            *ext.gram(),
            RationalMatrix::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 2]])
        );

        let s = QuadraticSpace::diagonal(&[1, 1, 1]);
        assert_eq!(mukai_extend(&s).signature(), (4, 1, 0));
    }

    #[test]
    fn mukai_signature_shift_property() {
        for entries in [&[1, -1, 7][..], &[2, 3, -5][..], &[1, 1][..]] {
            let s = QuadraticSpace::diagonal(entries);
            let (p, m, z) = s.signature();
            assert_eq!(mukai_extend(&s).signature(), (p + 1, m + 1, z));
        }
    }

    #[test]
    fn signature_congruence_invariance_seeded() {
        let s = QuadraticSpace::diagonal(&[1, 1, -2]);
        let sig = s.signature();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            // Random invertible P: random integer matrix, resampled until invertible.
            let p = loop {
                let cand = RationalMatrix::from_fn(3, 3, |_, _| rat_int(rng.gen_range(-3..=3)));
                if cand.rank() == 3 {
                    break cand;
                }
            };
            let congruent = p.transpose().mul(s.gram()).mul(&p);
            assert_eq!(ldl_signature(&congruent).unwrap(), sig);
        }
    }

    #[test]
    fn spinor_norm_of_reflection_matches_class_seeded() {
        let s = QuadraticSpace::diagonal(&[2, -3, 5]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = random_anisotropic_vector(&s, &mut rng);
            let w = decompose_isometry(&s, &reflection(&s, &v).unwrap()).unwrap();
            assert_eq!(w.spinor_norm, squarefree_class(&s.q(&v)).unwrap());
        }
    }

    #[test]
    fn witness_reproduces_phi_seeded() {
        let s = QuadraticSpace::new(RationalMatrix::from_i64_rows(&[
            &[0, 1, 0],
            &[1, 0, 0],
            &[0, 0, -2],
        ]))
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for k in 1..=6 {
            let phi = random_isometry(&s, &mut rng, k);
            let w = decompose_isometry(&s, &phi).unwrap();
            assert!(w.reflections.len() <= 2 * s.dim());
            let mut prod = RationalMatrix::identity(3);
            for v in &w.reflections {
                prod = prod.mul(&reflection(&s, v).unwrap());
            }
            assert_eq!(prod, phi);
        }
    }

    #[test]
    fn isotropic_box_search() {
        let s = QuadraticSpace::diagonal(&[1, -1, 1]);
        let found = isotropic_vectors_in_box(&s, 1);
        assert!(!found.is_empty());
        for v in &found {
            assert!(s.q(v).is_zero());
        }
        // Definite form: nothing in any box.
        let s = QuadraticSpace::diagonal(&[1, 1]);
        assert!(isotropic_vectors_in_box(&s, 3).is_empty());
    }

    #[test]
    fn space_json_roundtrip() {
        let s = QuadraticSpace::new(RationalMatrix::from_i64_rows(&[&[0, 1], &[1, 0]])).unwrap();
        let js = space_to_json(&s);
        let back = space_from_json(&js).unwrap();
        assert_eq!(back.gram(), s.gram());
        let js = serde_json::to_string(&js).unwrap();
        assert_eq!(js, r#"{"gram":[["0","1"],["1","0"]]}"#);
    }

    #[test]
    fn rational_entries_are_handled() {
        let g = RationalMatrix::from_rows(vec![
            vec![rat(1, 2), Rat::zero()],
            vec![Rat::zero(), rat(-3, 4)],
        ])
        .unwrap();
        let s = QuadraticSpace::new(g).unwrap();
        let v = vec![rat(2, 3), rat(1, 5)];
        let tau = reflection(&s, &v).unwrap();
        assert!(is_isometry(&s, &tau));
        let w = decompose_isometry(&s, &tau).unwrap();
        assert_eq!(w.det, -1);
    }
}
