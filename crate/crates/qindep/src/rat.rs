//! Exact rational scalars and the few conversions the rest of the crate
//! needs. Arbitrary precision so that no input, however hostile, can
//! overflow structural arithmetic.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

/// Exact rational number used for torus angles, weights and matrix blocks.
pub type Rat = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Build `n/d` from machine integers. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse `"p/q"` or `"p"` with optional sign. Whitespace is not accepted.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    match s.split_once('/') {
        None => {
            let n = BigInt::from_str(s).map_err(|_| RatParseError::Malformed(s.to_string()))?;
            Ok(Rat::from_integer(n))
        }
        Some((p, q)) => {
            let n = BigInt::from_str(p).map_err(|_| RatParseError::Malformed(s.to_string()))?;
            let d = BigInt::from_str(q).map_err(|_| RatParseError::Malformed(s.to_string()))?;
            if d.is_zero() {
                return Err(RatParseError::ZeroDenominator(s.to_string()));
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Canonical `p/q` form (plain integer when the denominator is 1).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Reduce into the fundamental domain `[0, 1)`.
pub fn fract_mod1(r: &Rat) -> Rat {
    let f = r - r.floor();
    if f.is_negative() {
        f + Rat::one()
    } else {
        f
    }
}

/// True when `r` is an integer.
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}
