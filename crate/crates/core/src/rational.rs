//! Exact rational scalars and their textual encoding.
//!
//! Every payoff, price and holding in this crate is a [`Rational`]. The
//! textual form is `p/q` or a bare integer, which is also what `Display`
//! produces, so printing and re-parsing is lossless.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` is not a rational literal (expected `p/q` or an integer)")]
    Malformed(String),
}

/// Parses `p/q` or an integer literal. Surrounding whitespace is ignored;
/// decimals and exponents are rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let parse_int = |s: &str| -> Result<BigInt, ParseRationalError> {
        let s = s.trim();
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Malformed(text.to_string()));
        }
        s.parse::<BigInt>()
            .map_err(|_| ParseRationalError::Malformed(text.to_string()))
    };
    match text.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(text)?)),
        Some((numer, denom)) => {
            let numer = parse_int(numer)?;
            let denom = parse_int(denom)?;
            if denom.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(text.to_string()));
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Sign pattern of a vector compared against zero, in the componentwise
/// order used throughout: `>= 0` everywhere, and whether any entry is `> 0`.
pub(crate) fn is_semipositive(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative()) && v.iter().any(|x| x.is_positive())
}

pub(crate) fn is_nonnegative(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

/// Formats a slice as `(a, b, c)`.
pub struct Tuple<'a>(pub &'a [Rational]);

impl fmt::Display for Tuple<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// Serde adapters that encode rationals as `"p/q"` strings.
pub mod serde_str {
    use super::{parse_rational, Rational};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&v.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod option_vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            values: &Option<Vec<Rational>>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            match values {
                Some(v) => {
                    let strings: Vec<String> = v.iter().map(ToString::to_string).collect();
                    s.serialize_some(&strings)
                }
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<Vec<Rational>>, D::Error> {
            Option::<Vec<String>>::deserialize(d)?
                .map(|v| {
                    v.iter()
                        .map(|t| parse_rational(t).map_err(D::Error::custom))
                        .collect()
                })
                .transpose()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let strings: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.iter().map(ToString::to_string).collect())
                .collect();
            serde::Serialize::serialize(&strings, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|t| parse_rational(t).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
