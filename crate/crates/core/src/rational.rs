//! Exact rationals, their `p/q` text form, and the small [`Scalar`] trait
//! that lets the norm engines run over either exact rationals or `f64`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^-k`.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

/// Parses `p/q` or `p` (optionally signed). Decimal points, zero
/// denominators and signed denominators are rejected.
pub fn parse_rational(field: &str, text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = |msg: &str| LabError::parse(field, format!("{msg} in {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let parse_int = |s: &str| -> Result<BigInt> {
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("expected an integer"));
        }
        s.parse::<BigInt>().map_err(|_| bad("expected an integer"))
    };
    let numerator = parse_int(num)?;
    let denominator = match den {
        None => BigInt::one(),
        Some(d) => {
            if d.starts_with(['-', '+']) {
                return Err(bad("signed denominator"));
            }
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            d
        }
    };
    Ok(Rational::new(numerator, denominator))
}

pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float.
pub fn from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

/// Fixed ten-digit decimal rendering used in CSV output.
pub fn decimal(value: &Rational) -> String {
    format!("{:.10}", to_f64(value))
}

pub mod serde_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational("value", &text).map_err(serde::de::Error::custom)
    }
}

/// The arithmetic the norm engines need: absolute value, halving,
/// addition and an order.
pub trait Scalar: Clone + PartialOrd + fmt::Debug + Send + Sync {
    fn zero_value() -> Self;
    fn abs_value(&self) -> Self;
    fn half(&self) -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn is_negative_value(&self) -> bool;
}

impl Scalar for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
    fn half(&self) -> Self {
        self / int(2)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn is_negative_value(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
    fn half(&self) -> Self {
        self * 0.5
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn is_negative_value(&self) -> bool {
        *self < 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("v", "1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("v", "-3").unwrap(), int(-3));
        assert_eq!(parse_rational("v", "4/6").unwrap(), ratio(2, 3));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["1/0", "0.5", "", "1/", "/2", "a/b", "1/-2", "1e3"] {
            assert!(parse_rational("v", bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn format_round_trips() {
        for r in [ratio(-7, 8), int(0), int(5), ratio(1, 1024)] {
            assert_eq!(parse_rational("v", &format_rational(&r)).unwrap(), r);
        }
    }
}
