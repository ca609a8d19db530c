//! Exact rational scalars and their text form.
//!
//! Every quantity in this crate is a `BigRational`; nothing is ever rounded.
//! The wire format is `"a/b"` (or a bare integer), both in scenario files and
//! in JSON reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`. Panics on `d == 0`; intended for literals.
pub fn frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational `{input}`: expected `a` or `a/b` with nonzero b")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parse `"a"` or `"a/b"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let bad = || ParseRationalError {
        input: s.to_string(),
    };
    let s = s.trim();
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| bad())?;
            let d: BigInt = den.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
    }
}

/// Render a rational as `a/b`, or `a` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "-3", "4/5", "-7/3", "10/4"] {
            let q = parse_rational(s).unwrap();
            let back = parse_rational(&format_rational(&q)).unwrap();
            assert_eq!(q, back);
        }
        // normalization: 10/4 prints reduced
        assert_eq!(format_rational(&parse_rational("10/4").unwrap()), "5/2");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.5").is_err());
    }
}
