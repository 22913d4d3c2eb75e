//! Exact-arithmetic construction and verification of hyperkahler-type model
//! cohomology algebras.
//!
//! From a rational quadratic space `(V, q)` the crate builds the graded
//! algebra `SH(V, n) = S^. V / I` modeling the even cohomology generated by
//! degree two, and constructively verifies its structure theory:
//!
//! * the top-power intersection relations and their polarized consequences,
//!   with exact rational constants ([`verbitsky`]);
//! * hard-Lefschetz `sl2`-triples and the total Lie algebra generated by
//!   them, with its grading, commutation and Killing invariants
//!   ([`lefschetz`]);
//! * the quaternionic `so(4,1)` commutator identities on the exterior
//!   algebra of `H^n` ([`quatmodel`]);
//! * reflection factorizations, spinor norms and membership certification
//!   for rational isometries ([`quadspace`]);
//! * transport of rational CM-type weight-2 Hodge structures to the whole
//!   algebra through extended automorphisms ([`hodge`]).
//!
//! All arithmetic is exact; every verification is an identity check, never a
//! numerical approximation. Heavy sweeps are data-parallel under the
//! `parallel` feature (enabled by default) and sequential without it, with
//! bit-identical results either way.

pub mod error;
pub mod exactlin;
pub mod exec;
pub mod hodge;
pub mod lefschetz;
pub mod operators;
pub mod quadspace;
pub mod quatmodel;
pub mod rat;
pub mod serialize;
pub mod sparse;
pub mod verbitsky;

pub use error::{Error, Result};
pub use rat::Rat;
