//! Rational CM-type weight-2 Hodge structures, Weil derivations, extension
//! of isometries to the model algebra, and transport verification.
//!
//! A Hodge structure is encoded by an ordered rational plane `(x, y)` with
//! `q(x) = q(y) > 0` and `b(x, y) = 0`; the order fixes the orientation.
//! Orientation convention: the Weil operator sends `x` to `-2y` and `y` to
//! `2x` and kills the orthogonal complement. Restricting to rational planes
//! keeps every check exact; generic periods are transcendental and out of
//! reach of exact arithmetic.

use num::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{kernel, RationalMatrix};
use crate::lefschetz::{is_so_element, so_derivation};
use crate::operators::GradedOperator;
use crate::quadspace::{
    decompose_isometry, is_isometry, random_isometry, QuadraticSpace,
};
use crate::rat::{format_vec, parse_vec, rat_int, Rat};
use crate::sparse::SparseMat;
use crate::verbitsky::VerbitskyModel;

/// Ordered rational plane encoding a CM-type weight-2 Hodge structure.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgePlane {
    pub x: Vec<Rat>,
    pub y: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
pub struct PlaneJson {
    pub x: Vec<String>,
    pub y: Vec<String>,
}

impl HodgePlane {
    pub fn new(space: &QuadraticSpace, x: Vec<Rat>, y: Vec<Rat>) -> Result<Self> {
        let plane = HodgePlane { x, y };
        plane.validate(space)?;
        Ok(plane)
    }

    pub fn validate(&self, space: &QuadraticSpace) -> Result<()> {
        let qx = space.quad(&self.x)?;
        let qy = space.quad(&self.y)?;
        if qx != qy {
            return Err(Error::DegeneratePlane("q(x) != q(y)".into()));
        }
        if !qx.is_positive() {
            return Err(Error::DegeneratePlane("q(x) <= 0".into()));
        }
        if !space.bilinear(&self.x, &self.y)?.is_zero() {
            return Err(Error::DegeneratePlane("b(x, y) != 0".into()));
        }
        Ok(())
    }

    /// Orientation-reversed plane.
    pub fn swapped(&self) -> HodgePlane {
        HodgePlane {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// Image plane under an isometry.
    pub fn map(&self, phi: &RationalMatrix) -> HodgePlane {
        HodgePlane {
            x: phi.apply(&self.x),
            y: phi.apply(&self.y),
        }
    }

    pub fn to_json(&self) -> PlaneJson {
        PlaneJson {
            x: format_vec(&self.x),
            y: format_vec(&self.y),
        }
    }

    pub fn from_json(space: &QuadraticSpace, json: &PlaneJson) -> Result<Self> {
        Self::new(space, parse_vec(&json.x)?, parse_vec(&json.y)?)
    }
}

/// The Weil operator of a plane as an element of `so(V, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeilDerivation {
    pub mat: RationalMatrix,
}

/// `w(x) = -2y`, `w(y) = 2x`, zero on the orthogonal complement of the
/// plane. Satisfies `w in so(V, q)` and `w^3 = -4w` with rank 2.
pub fn weil_derivation(space: &QuadraticSpace, plane: &HodgePlane) -> Result<WeilDerivation> {
    plane.validate(space)?;
    let d = space.dim();
    // Basis adapted to the plane: x, y, then the orthogonal complement.
    let gx = space.gram().apply(&plane.x);
    let gy = space.gram().apply(&plane.y);
    let constraints = RationalMatrix::from_rows(vec![gx, gy])?;
    let complement = kernel(&constraints);
    if complement.len() != d - 2 {
        return Err(Error::DegeneratePlane(
            "orthogonal complement has wrong dimension".into(),
        ));
    }
    let mut basis_cols: Vec<Vec<Rat>> = vec![plane.x.clone(), plane.y.clone()];
    basis_cols.extend(complement);
    let b = RationalMatrix::from_fn(d, d, |r, c| basis_cols[c][r].clone());
    let b_inv = b
        .inverse()
        .ok_or_else(|| Error::DegeneratePlane("plane basis is singular".into()))?;
    let mut images = RationalMatrix::zeros(d, d);
    for r in 0..d {
        *images.at_mut(r, 0) = -(&plane.y[r] + &plane.y[r]);
        *images.at_mut(r, 1) = &plane.x[r] + &plane.x[r];
    }
    let w = images.mul(&b_inv);
    // Invariants forced by the construction; failure is an internal error.
    if !is_so_element(space, &w) {
        return Err(Error::ModelInvariant("weil operator not skew".into()));
    }
    let w3 = w.mul(&w).mul(&w);
    if w3 != w.scale(&rat_int(-4)) {
        return Err(Error::ModelInvariant("weil operator cube identity".into()));
    }
    Ok(WeilDerivation { mat: w })
}

/// `true` iff `phi` conjugates the Weil operator of the first plane into the
/// second: `phi w_1 = w_2 phi` exactly. Errors when `phi` is not an
/// isometry or a plane is invalid.
pub fn is_hodge_isometry(
    space: &QuadraticSpace,
    phi: &RationalMatrix,
    p1: &HodgePlane,
    p2: &HodgePlane,
) -> Result<bool> {
    if !is_isometry(space, phi) {
        return Err(Error::NotIsometry);
    }
    let w1 = weil_derivation(space, p1)?;
    let w2 = weil_derivation(space, p2)?;
    Ok(phi.mul(&w1.mat) == w2.mat.mul(phi))
}

/// Extends an isometry of `(V, q)` to a graded algebra automorphism of the
/// model: the symmetric power of `phi` acts on the quotient coordinates in
/// every degree (the dual class is invariant).
pub fn extend_isometry(model: &VerbitskyModel, phi: &RationalMatrix) -> Result<GradedOperator> {
    if !is_isometry(model.space(), phi) {
        return Err(Error::NotIsometry);
    }
    let tables = model.tables();
    let sym2 = tables.sym_power_matrix(phi, 2);
    if sym2.apply_sparse(model.qbar()) != *model.qbar() {
        return Err(Error::ModelInvariant(
            "isometry does not fix the dual class".into(),
        ));
    }
    let two_n = model.top_degree();
    let blocks: Vec<Option<SparseMat>> = (0..=two_n)
        .map(|k| Some(tables.sym_power_matrix(phi, model.coord_degree(k))))
        .collect();
    Ok(GradedOperator::from_blocks(model.grading().clone(), 0, blocks))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "J_certified")]
    JCertified,
    #[serde(rename = "Jplus_certified")]
    JplusCertified,
    #[serde(rename = "unknown")]
    Unknown,
}

/// Certification of membership in the Hodge-isometry subgroups, by
/// determinant and spinor norm of a reflection decomposition. Orientation-
/// reversing isometries get no certificate.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub det: i8,
    pub spinor_norm: String,
}

pub fn certify_membership(
    space: &QuadraticSpace,
    phi: &RationalMatrix,
) -> Result<MembershipVerdict> {
    let witness = decompose_isometry(space, phi)?;
    let verdict = if witness.det == 1 {
        if witness.spinor_norm.is_trivial() {
            Verdict::JCertified
        } else {
            Verdict::JplusCertified
        }
    } else {
        Verdict::Unknown
    };
    Ok(MembershipVerdict {
        verdict,
        det: witness.det,
        spinor_norm: witness.spinor_norm.to_string_rep(),
    })
}

#[derive(Debug, Serialize)]
pub struct TransportReport {
    pub hodge_isometry: bool,
    pub verdict: MembershipVerdict,
    pub transport: String,
    pub degrees_checked: Vec<usize>,
}

/// The constructive transport check: extend `phi` to the algebra
/// automorphism `psi`, push both Weil operators to degree-0 derivations of
/// the model, and assert `psi w1 = w2 psi` exactly in every degree. Errors
/// when `phi` is not a Hodge isometry for the planes.
pub fn transport_verify(
    model: &VerbitskyModel,
    phi: &RationalMatrix,
    p1: &HodgePlane,
    p2: &HodgePlane,
) -> Result<TransportReport> {
    let space = model.space();
    if !is_hodge_isometry(space, phi, p1, p2)? {
        return Err(Error::NotHodgeIsometry);
    }
    let psi = extend_isometry(model, phi)?;
    let w1 = so_derivation(model, &weil_derivation(space, p1)?.mat)?;
    let w2 = so_derivation(model, &weil_derivation(space, p2)?.mat)?;
    let pass = psi.compose(&w1) == w2.compose(&psi);
    Ok(TransportReport {
        hodge_isometry: true,
        verdict: certify_membership(space, phi)?,
        transport: if pass { "pass".into() } else { "fail".into() },
        degrees_checked: (0..=model.top_degree()).collect(),
    })
}

/// Deterministic scan for a valid plane among the coordinate vectors and
/// their pairwise sums and differences.
pub fn find_cm_plane(space: &QuadraticSpace) -> Option<HodgePlane> {
    let d = space.dim();
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
    let positive: Vec<&Vec<Rat>> = candidates
        .iter()
        .filter(|v| space.q(v).is_positive())
        .collect();
    for (a, x) in positive.iter().enumerate() {
        for y in positive.iter().skip(a + 1) {
            if space.q(x) == space.q(y) && space.bl(x, y).is_zero() {
                return Some(HodgePlane {
                    x: (*x).clone(),
                    y: (*y).clone(),
                });
            }
        }
    }
    None
}

#[derive(Debug, Serialize)]
pub struct TransportBatteryReport {
    pub cases: usize,
    pub passes: usize,
    pub identity_pass: bool,
    pub orientation_swap_rejected: bool,
    pub verdicts: std::collections::BTreeMap<String, usize>,
    pub pass: bool,
}

/// Seeded transport battery: identity transport, `cases` random pairs
/// `(phi, P1)` with `P2 = phi(P1)`, and rejection of the orientation-swapped
/// image plane.
pub fn transport_battery(
    model: &VerbitskyModel,
    seed: u64,
    cases: usize,
) -> Result<TransportBatteryReport> {
    use rand::SeedableRng;
    let space = model.space();
    let base = find_cm_plane(space).ok_or_else(|| {
        Error::Invalid("no CM plane found in the deterministic scan; supply one".into())
    })?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let identity = RationalMatrix::identity(space.dim());
    let id_report = transport_verify(model, &identity, &base, &base)?;
    let identity_pass = id_report.transport == "pass";

    let mut passes = 0usize;
    let mut verdicts: std::collections::BTreeMap<String, usize> = Default::default();
    let mut swap_rejected = true;
    for _ in 0..cases {
        let k_sigma = rng.gen_range(0..=2);
        let sigma = random_isometry(space, &mut rng, k_sigma);
        let p1 = base.map(&sigma);
        let k_phi = rng.gen_range(1..=2 * space.dim());
        let phi = random_isometry(space, &mut rng, k_phi);
        let p2 = p1.map(&phi);
        let report = transport_verify(model, &phi, &p1, &p2)?;
        if report.transport == "pass" {
            passes += 1;
        }
        let key = serde_json::to_value(report.verdict.verdict)
            .expect("verdict serializes")
            .as_str()
            .expect("verdict is a string")
            .to_string();
        *verdicts.entry(key).or_insert(0) += 1;
        // Orientation-swapped target plane must be rejected.
        match is_hodge_isometry(space, &phi, &p1, &p2.swapped()) {
            Ok(false) => {}
            _ => swap_rejected = false,
        }
    }
    Ok(TransportBatteryReport {
        cases,
        passes,
        identity_pass,
        orientation_swap_rejected: swap_rejected,
        pass: identity_pass && passes == cases && swap_rejected,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadspace::reflection;
    use crate::verbitsky::build_model;
    use rand::SeedableRng;

    fn e(d: usize, i: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); d];
        v[i] = Rat::one();
        v
    }

    fn plane12(d: usize) -> HodgePlane {
        HodgePlane {
            x: e(d, 0),
            y: e(d, 1),
        }
    }

    #[test]
    fn weil_matrix_example() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1, -1]);
        let w = weil_derivation(&s, &plane12(4)).unwrap();
        let expected = RationalMatrix::from_i64_rows(&[
            &[0, 2, 0, 0],
            &[-2, 0, 0, 0],
            &[0, 0, 0, 0],
            &[0, 0, 0, 0],
        ]);
        assert_eq!(w.mat, expected);
        // Orientation reversal negates the operator.
        let w_swapped = weil_derivation(&s, &plane12(4).swapped()).unwrap();
        assert_eq!(w_swapped.mat, w.mat.scale(&rat_int(-1)));
        // Vanishes on the orthogonal complement; rank 2.
        assert!(w.mat.apply(&e(4, 2)).iter().all(|v| v.is_zero()));
        assert_eq!(w.mat.rank(), 2);
    }

    #[test]
    fn weil_rejects_degenerate_planes() {
        let s = QuadraticSpace::diagonal(&[1, 2, 1]);
        // q(x) != q(y).
        assert!(weil_derivation(
            &s,
            &HodgePlane {
                x: e(3, 0),
                y: e(3, 1)
            }
        )
        .is_err());
        // Negative square.
        let sneg = QuadraticSpace::diagonal(&[-1, -1, 1]);
        assert!(weil_derivation(&sneg, &plane12(3)).is_err());
        // Not orthogonal.
        let s = QuadraticSpace::diagonal(&[1, 1, 1]);
        assert!(weil_derivation(
            &s,
            &HodgePlane {
                x: e(3, 0),
                y: e(3, 0)
            }
        )
        .is_err());
    }

    #[test]
    fn hodge_isometry_examples() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1, -1]);
        let p = plane12(4);
        let id = RationalMatrix::identity(4);
        assert!(is_hodge_isometry(&s, &id, &p, &p).unwrap());
        // Reflection in a vector orthogonal to the plane preserves it.
        let tau = reflection(&s, &e(4, 2)).unwrap();
        assert!(is_hodge_isometry(&s, &tau, &p, &p).unwrap());
        // Identity against the orientation-swapped plane fails.
        assert!(!is_hodge_isometry(&s, &id, &p, &p.swapped()).unwrap());
        // Non-isometries are errors.
        assert!(is_hodge_isometry(&s, &RationalMatrix::diag_i64(&[2, 1, 1, 1]), &p, &p).is_err());
    }

    #[test]
    fn extend_isometry_examples() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1]);
        let m = build_model(&s, 1).unwrap();
        let id = RationalMatrix::identity(3);
        let psi = extend_isometry(&m, &id).unwrap();
        assert_eq!(psi, GradedOperator::identity(m.grading().clone()));

        // -Id acts by parity of the symmetric power: (+1, -Id, +1).
        let minus = id.scale(&rat_int(-1));
        let psi = extend_isometry(&m, &minus).unwrap();
        assert_eq!(psi.block(0).unwrap().to_dense(), RationalMatrix::identity(1));
        assert_eq!(
            psi.block(1).unwrap().to_dense(),
            RationalMatrix::identity(3).scale(&rat_int(-1))
        );
        assert_eq!(psi.block(2).unwrap().to_dense(), RationalMatrix::identity(1));

        assert!(extend_isometry(&m, &RationalMatrix::diag_i64(&[2, 1, 1])).is_err());
    }

    #[test]
    fn extend_isometry_is_multiplicative_seeded() {
        let s = QuadraticSpace::diagonal(&[1, 1, -1]);
        let m = build_model(&s, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let phi = random_isometry(&s, &mut rng, 3);
            let psi = extend_isometry(&m, &phi).unwrap();
            // psi fixes [qbar] and the unit.
            let q = m.qbar_class();
            assert_eq!(psi.apply(&q.comps), q.comps);
            let unit = m.unit();
            assert_eq!(psi.apply(&unit.comps), unit.comps);
            // Multiplicative on a sample of basis pairs.
            for (j, a) in [(1usize, 0usize), (1, 2), (2, 1)] {
                for (k, b) in [(1usize, 1usize), (2, 0)] {
                    let ea = m.basis_element(j, a);
                    let eb = m.basis_element(k, b);
                    let lhs = psi.apply(&m.mul(&ea, &eb).comps);
                    let rhs = m.mul(
                        &crate::verbitsky::AlgebraElement {
                            comps: psi.apply(&ea.comps),
                        },
                        &crate::verbitsky::AlgebraElement {
                            comps: psi.apply(&eb.comps),
                        },
                    );
                    assert_eq!(lhs, rhs.comps);
                }
            }
            // Naturality over products of isometries.
            let phi2 = random_isometry(&s, &mut rng, 2);
            let psi2 = extend_isometry(&m, &phi2).unwrap();
            let together = extend_isometry(&m, &phi.mul(&phi2)).unwrap();
            assert_eq!(together, psi.compose(&psi2));
        }
    }

    #[test]
    fn so_derivation_naturality_seeded() {
        // so_derivation(phi x phi^{-1}) = psi so_derivation(x) psi^{-1}:
        // the degree-two component determines the adjoint action.
        let s = QuadraticSpace::diagonal(&[1, 1, -1]);
        let m = build_model(&s, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let so = crate::lefschetz::so_basis(&s);
        for _ in 0..3 {
            let phi = random_isometry(&s, &mut rng, 2);
            let phi_inv = phi.inverse().unwrap();
            let psi = extend_isometry(&m, &phi).unwrap();
            for x in &so {
                let conj = phi.mul(x).mul(&phi_inv);
                let lhs = so_derivation(&m, &conj).unwrap();
                let rhs_lhs = psi.compose(&so_derivation(&m, x).unwrap());
                // lhs . psi == psi . D_x
                assert_eq!(lhs.compose(&psi), rhs_lhs);
            }
        }
    }

    #[test]
    fn certify_examples() {
        let s = QuadraticSpace::diagonal(&[1, 1]);
        let id = RationalMatrix::identity(2);
        let v = certify_membership(&s, &id).unwrap();
        assert_eq!(v.verdict, Verdict::JCertified);

        // -Id on diag(1,1): two reflections with q = 1 each.
        let minus = id.scale(&rat_int(-1));
        let v = certify_membership(&s, &minus).unwrap();
        assert_eq!(v.verdict, Verdict::JCertified);
        assert_eq!(v.det, 1);

        // Product of reflections with q(v1) = 2, q(v2) = 8: classes cancel.
        let s = QuadraticSpace::diagonal(&[2, 1]);
        let v1 = vec![Rat::one(), Rat::zero()];
        let v2 = vec![rat_int(2), Rat::zero()];
        assert_eq!(s.quad(&v2).unwrap(), rat_int(8));
        let tau1 = reflection(&s, &v1).unwrap();
        let tau2 = reflection(&s, &v2).unwrap();
        let v = certify_membership(&s, &tau1.mul(&tau2)).unwrap();
        assert_eq!(v.verdict, Verdict::JCertified);

        // A single reflection is orientation-reversing: unknown.
        let v = certify_membership(&s, &tau1).unwrap();
        assert_eq!(v.verdict, Verdict::Unknown);
        assert_eq!(v.det, -1);
    }

    #[test]
    fn transport_identity_and_reflection() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1, -1]);
        let m = build_model(&s, 1).unwrap();
        let p = plane12(4);
        let id = RationalMatrix::identity(4);
        let r = transport_verify(&m, &id, &p, &p).unwrap();
        assert_eq!(r.transport, "pass");
        assert_eq!(r.verdict.verdict, Verdict::JCertified);
        assert_eq!(r.degrees_checked, vec![0, 1, 2]);

        // Reflection orthogonal to the plane: passes with verdict unknown.
        let tau = reflection(&s, &e(4, 2)).unwrap();
        let r = transport_verify(&m, &tau, &p, &p).unwrap();
        assert_eq!(r.transport, "pass");
        assert_eq!(r.verdict.verdict, Verdict::Unknown);

        // Orientation-swapped target plane: precondition fails.
        assert!(matches!(
            transport_verify(&m, &id, &p, &p.swapped()),
            Err(Error::NotHodgeIsometry)
        ));
    }

    #[test]
    fn orientation_flip_of_both_planes_preserves_verdicts() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1, -1]);
        let m = build_model(&s, 1).unwrap();
        let p1 = plane12(4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let phi = random_isometry(&s, &mut rng, 2);
        let p2 = p1.map(&phi);
        let r = transport_verify(&m, &phi, &p1, &p2).unwrap();
        let r_flip = transport_verify(&m, &phi, &p1.swapped(), &p2.swapped()).unwrap();
        assert_eq!(r.transport, r_flip.transport);
        assert_eq!(r.verdict.verdict, r_flip.verdict.verdict);
    }

    #[test]
    fn battery_small() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1, -1]);
        let m = build_model(&s, 1).unwrap();
        let r = transport_battery(&m, 7, 5).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.passes, 5);
    }

    #[test]
    fn find_plane_on_hyperbolic_blocks() {
        // U + U: e1 + e2 and e3 + e4 both have q = 2 and are orthogonal.
        let u2 = RationalMatrix::from_i64_rows(&[
            &[0, 1, 0, 0],
            &[1, 0, 0, 0],
            &[0, 0, 0, 1],
            &[0, 0, 1, 0],
        ]);
        let s = QuadraticSpace::new(u2).unwrap();
        let p = find_cm_plane(&s).unwrap();
        p.validate(&s).unwrap();
    }

    #[test]
    fn plane_json_roundtrip() {
        let s = QuadraticSpace::diagonal(&[1, 1, 1]);
        let p = plane12(3);
        let js = p.to_json();
        let back = HodgePlane::from_json(&s, &js).unwrap();
        assert_eq!(back, p);
    }
}
