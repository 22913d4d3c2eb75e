//! Exact rational scalars and their canonical string form.
//!
//! Every scalar in this crate is an arbitrary-precision rational; there is no
//! floating point anywhere. In all file formats rationals appear as strings
//! `"p/q"` in lowest terms with positive denominator, shortened to `"p"` when
//! the denominator is 1.

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Rational `num/den`. Panics on a zero denominator (internal use only).
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical string form: lowest terms, positive denominator, `p` when integral.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"p"` or `"p/q"`; rejects zero denominators.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let (num_s, den_s) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num_s
        .parse()
        .map_err(|_| Error::BadRational(s.to_string()))?;
    let den: BigInt = den_s
        .parse()
        .map_err(|_| Error::BadRational(s.to_string()))?;
    if den.is_zero() {
        return Err(Error::BadRational(s.to_string()));
    }
    Ok(Rat::new(num, den))
}

pub fn format_vec(v: &[Rat]) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

pub fn parse_vec(v: &[String]) -> Result<Vec<Rat>> {
    v.iter().map(|s| parse_rat(s)).collect()
}

pub fn format_grid(rows: &[Vec<Rat>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| format_vec(r)).collect()
}

pub fn parse_grid(rows: &[Vec<String>]) -> Result<Vec<Vec<Rat>>> {
    rows.iter().map(|r| parse_vec(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_reduces_and_normalizes_sign() {
        let x = parse_rat("-4/-6").unwrap();
        assert_eq!(format_rat(&x), "2/3");
        let y = parse_rat("4/-6").unwrap();
        assert_eq!(format_rat(&y), "-2/3");
        assert_eq!(format_rat(&rat_int(7)), "7");
        assert_eq!(format_rat(&rat(6, 3)), "2");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1/").is_err());
    }

    #[test]
    fn roundtrip() {
        for s in ["0", "-17", "5/8", "-123456789123456789/2"] {
            let x = parse_rat(s).unwrap();
            assert_eq!(format_rat(&x), s);
        }
    }
}
