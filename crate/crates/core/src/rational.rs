//! Exact rational helpers shared by the exact-value, polynomial and file-format code.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Canonical `n/d` rendering: gcd-reduced, `d > 0`, sign on the numerator.
/// Integers keep the `/1` suffix so every value has the same shape.
pub fn render(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `n/d`, `n` or `-n/d`.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerators or denominators: fall back to a scaled division.
        let n = q.numer().to_f64().unwrap_or(f64::MAX);
        let d = q.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

pub fn is_nonnegative(q: &Rational) -> bool {
    !q.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_canonical() {
        assert_eq!(render(&ratio(2, 4)), "1/2");
        assert_eq!(render(&ratio(3, -9)), "-1/3");
        assert_eq!(render(&int(1)), "1/1");
        assert_eq!(render(&zero()), "0/1");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!(parse("10/16"), Some(ratio(5, 8)));
        assert_eq!(parse(" -3 "), Some(int(-3)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("x/2"), None);
    }
}
