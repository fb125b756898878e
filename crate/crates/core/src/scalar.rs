//! Scalar kinds a [`Matrix`](crate::Matrix) can hold.
//!
//! A matrix is either entirely exact ([`Rational`]) or entirely
//! floating-point (`f64`). Generic code is written against [`Scalar`]; the
//! kind is fixed per matrix type, so the two never mix inside one matrix.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Exact arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Rational,
    Float,
}

impl ScalarKind {
    pub fn is_exact(self) -> bool {
        self == ScalarKind::Rational
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarKind::Rational => "rational",
            ScalarKind::Float => "float",
        })
    }
}

impl FromStr for ScalarKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(ScalarKind::Rational),
            "float" => Ok(ScalarKind::Float),
            other => Err(format!("unknown scalar kind `{other}`")),
        }
    }
}

pub trait Scalar: Clone + PartialOrd + Signed + fmt::Debug + fmt::Display + Send + Sync + 'static {
    const KIND: ScalarKind;

    /// Default stopping tolerance: zero for exact scalars.
    fn default_tolerance() -> Self;

    fn to_f64(&self) -> f64;

    /// Text form used by the matrix file format and JSON reports.
    fn to_text(&self) -> String;

    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn default_tolerance() -> Self {
        Rational::zero()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float;

    fn default_tolerance() -> Self {
        1e-12
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_text(&self) -> String {
        // `{:?}` is the shortest representation that round-trips.
        format!("{self:?}")
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

/// Shorthand for `numer/denom` from machine integers.
///
/// # Panics
/// If `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses an integer or `p/q` literal into lowest terms.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    let numer: BigInt = numer.parse().ok()?;
    let denom: BigInt = denom.parse().ok()?;
    if denom.is_zero() {
        return None;
    }
    Some(Rational::new(numer, denom))
}

/// Largest absolute value, or zero for an empty iterator.
pub(crate) fn max_abs<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| {
        let a = v.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}
