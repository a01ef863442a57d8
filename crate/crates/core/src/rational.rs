//! Parsing and printing of exact rationals.
//!
//! The instance format writes rationals as `"n"`, `"-n"` or `"n/d"` with a
//! positive denominator. Lowest terms are accepted but not required on
//! input; output is always in lowest terms.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

/// Parses `"n"`, `"-n"` or `"n/d"` with `d > 0`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::MalformedRational(text.to_string());
    let (numer_text, denom_text) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let numer: BigInt = numer_text.parse().map_err(|_| bad())?;
    let denom = match denom_text {
        None => BigInt::one(),
        Some(d) => {
            let denom: BigInt = d.parse().map_err(|_| bad())?;
            if denom.sign() != Sign::Plus {
                return Err(bad());
            }
            denom
        }
    };
    Ok(Rational::new(numer, denom))
}

/// Renders in lowest terms, omitting the denominator when it is 1.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering to six places, rounding half away from zero.
pub fn approx_decimal(value: &Rational) -> String {
    let scaled = value * Rational::from_integer(BigInt::from(1_000_000));
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let magnitude = rounded.abs();
    let digits = magnitude.to_string();
    let (whole, frac) = if digits.len() > 6 {
        let split = digits.len() - 6;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{digits:0>6}"))
    };
    let sign = if negative { "-" } else { "" };
    format!("{sign}{whole}.{frac}")
}

pub fn rational_from_i64(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Best-effort f64 view, for statistical reporting only.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn is_zero(value: &Rational) -> bool {
    value.is_zero()
}
