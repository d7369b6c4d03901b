//! Exact rationals and their canonical text form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatParseError {
    #[error("malformed rational `{0}`")]
    Syntax(String),
    #[error("rational `{0}` is not in lowest terms with a positive denominator")]
    NonCanonical(String),
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // no superfluous leading zeros in canonical form
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    if s.starts_with('-') && digits == "0" {
        return None;
    }
    s.parse().ok()
}

/// Parses `n` or `n/d`, accepting only the canonical spelling produced by
/// [`format_rat`].
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    match s.split_once('/') {
        None => parse_integer(s)
            .map(Rat::from_integer)
            .ok_or_else(|| RatParseError::Syntax(s.to_string())),
        Some((n, d)) => {
            let num = parse_integer(n).ok_or_else(|| RatParseError::Syntax(s.to_string()))?;
            if d.starts_with('-') {
                return Err(RatParseError::Syntax(s.to_string()));
            }
            let den = parse_integer(d).ok_or_else(|| RatParseError::Syntax(s.to_string()))?;
            if !den.is_positive() || den.is_one() || !num.gcd(&den).is_one() {
                return Err(RatParseError::NonCanonical(s.to_string()));
            }
            Ok(Rat::new_raw(num, den))
        }
    }
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms_parse() {
        assert_eq!(parse_rat("3").unwrap(), int(3));
        assert_eq!(parse_rat("-7/2").unwrap(), frac(-7, 2));
        assert_eq!(parse_rat("0").unwrap(), zero());
    }

    #[test]
    fn non_canonical_forms_rejected() {
        assert!(matches!(parse_rat("2/4"), Err(RatParseError::NonCanonical(_))));
        assert!(matches!(parse_rat("3/1"), Err(RatParseError::NonCanonical(_))));
        assert!(matches!(parse_rat("1/-2"), Err(RatParseError::Syntax(_))));
        assert!(matches!(parse_rat("1/0"), Err(RatParseError::Syntax(_)) | Err(RatParseError::NonCanonical(_))));
        assert!(parse_rat("007").is_err());
        assert!(parse_rat("-0").is_err());
        assert!(parse_rat("+1").is_err());
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn format_round_trips() {
        for r in [int(0), int(-4), frac(3, 9), frac(-5, 10), frac(22, 7)] {
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
        assert_eq!(format_rat(&frac(2, 4)), "1/2");
    }
}
