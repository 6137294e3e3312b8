//! Exact rational scalar used throughout the solver.
//!
//! All sizes, LP coefficients and prototype weights are `BigRational`s; nothing
//! in the pipeline rounds. Parsing accepts `"p/q"`, plain integers and decimal
//! strings (decimals become exact fractions, e.g. `"0.25"` -> 1/4).

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Rational from a small numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_usize(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole
                .parse()
                .map_err(|_| ParseRationalError::Invalid(s.to_string()))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Invalid(s.to_string()));
        }
        let f: BigInt = frac
            .parse()
            .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = Rational::from_integer(w.abs()) + Rational::new(f, scale);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
    Ok(Rational::from_integer(n))
}

/// Compact `"p/q"` (or `"p"` for integers) form, inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `base^exp` for possibly negative exponents; `base` must be nonzero when `exp < 0`.
pub fn pow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow::pow(base.clone(), (-exp) as usize)
            .recip()
    }
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Natural log of a positive rational, robust to values far outside `f64` range.
pub fn ln_f64(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == Sign::Plus);
    if let Some(v) = n.to_f64() {
        if v.is_finite() {
            return v.ln();
        }
    }
    // take the top 64 bits and account for the shifted-away rest
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}
