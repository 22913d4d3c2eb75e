//! Serde helpers for report types.

use serde::Serializer;

use crate::rat::{format_rat, Rat};

pub fn rat_as_string<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rat(x))
}

pub fn opt_pair_as_array<S: Serializer>(
    x: &Option<(usize, usize)>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match x {
        Some((p, q)) => s.serialize_some(&[p, q]),
        None => s.serialize_none(),
    }
}
