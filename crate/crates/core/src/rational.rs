//! Exact rational helpers shared by every ring in the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn inverse_factorial(n: usize) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// `p` or `p/q`, lowest terms.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// `base^exp` for a possibly negative rational base.
pub fn rational_pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(6), BigInt::from(720));
        assert_eq!(binomial(7, 3), BigInt::from(35));
        assert_eq!(binomial(3, 7), BigInt::zero());
        assert_eq!(binomial(20, 10), BigInt::from(184_756));
    }

    #[test]
    fn rational_text() {
        assert_eq!(format_rational(&ratio(-2, 6)), "-1/3");
        assert_eq!(format_rational(&int(4)), "4");
        assert_eq!(parse_rational("-1/3"), Some(ratio(-1, 3)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
