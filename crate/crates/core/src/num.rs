//! Exact scalar abstraction shared by the GNN runtime and the simplex.
//!
//! Every weight, state component and LP entry is an exact rational. The
//! runtime and the LP solver are written against [`Scalar`] so they can run
//! over arbitrary-precision rationals ([`num_rational::BigRational`]) or
//! over the cheaper machine-word rationals ([`num_rational::Rational64`])
//! when the inputs are known to be small.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// An ordered field with exact arithmetic.
pub trait Scalar:
    Clone + Debug + Display + Ord + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Exact conversion from an arbitrary-precision integer, `None` if the
    /// value does not fit the representation.
    fn from_bigint(n: &BigInt) -> Option<Self>;

    /// Exact conversion from an arbitrary-precision rational.
    fn from_big_rational(q: &BigRational) -> Option<Self>;

    fn to_big_rational(&self) -> BigRational;

    /// Largest integer not above `self`.
    fn floor_int(&self) -> BigInt;

    fn is_integral(&self) -> bool;

    /// Parse `"n"` or `"n/d"`.
    fn parse_rational(s: &str) -> Option<Self> {
        let q = parse_big_rational(s)?;
        Self::from_big_rational(&q)
    }

    /// Truncated ReLU: `min(max(0, x), 1)`.
    fn clamp_unit(self) -> Self {
        if self.is_negative() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

pub(crate) fn parse_big_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(BigInt::from_str(s).ok()?)),
    }
}

impl Scalar for BigRational {
    fn from_bigint(n: &BigInt) -> Option<Self> {
        Some(BigRational::from_integer(n.clone()))
    }

    fn from_big_rational(q: &BigRational) -> Option<Self> {
        Some(q.clone())
    }

    fn to_big_rational(&self) -> BigRational {
        self.clone()
    }

    fn floor_int(&self) -> BigInt {
        self.floor().to_integer()
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

impl Scalar for Rational64 {
    fn from_bigint(n: &BigInt) -> Option<Self> {
        n.to_i64().map(Rational64::from_integer)
    }

    fn from_big_rational(q: &BigRational) -> Option<Self> {
        let n = q.numer().to_i64()?;
        let d = q.denom().to_i64()?;
        Some(Ratio::new(n, d))
    }

    fn to_big_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn floor_int(&self) -> BigInt {
        BigInt::from(self.floor().to_integer())
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

/// Render a rational the way the JSON formats store it: `"n"` or `"n/d"`.
pub fn format_rational<T: Scalar>(x: &T) -> String {
    let q = x.to_big_rational();
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_is_truncated_relu() {
        let q = |n: i64, d: i64| Rational64::new(n, d);
        assert_eq!(q(-3, 2).clamp_unit(), q(0, 1));
        assert_eq!(q(1, 2).clamp_unit(), q(1, 2));
        assert_eq!(q(7, 3).clamp_unit(), q(1, 1));
    }

    #[test]
    fn parse_and_format() {
        let x = BigRational::parse_rational("-6/4").unwrap();
        assert_eq!(format_rational(&x), "-3/2");
        assert_eq!(format_rational(&Rational64::parse_rational(" 5 ").unwrap()), "5");
        assert!(BigRational::parse_rational("1/0").is_none());
        assert!(BigRational::parse_rational("x").is_none());
    }

    #[test]
    fn floor_of_negative_fraction() {
        let x = BigRational::parse_rational("-1/3").unwrap();
        assert_eq!(x.floor_int(), BigInt::from(-1));
        let y = Rational64::new(7, 2);
        assert_eq!(y.floor_int(), BigInt::from(3));
        assert!(!y.is_integral());
    }

    #[test]
    fn small_rational_rejects_huge_values() {
        let big = BigInt::from(1u8) << 80;
        assert!(Rational64::from_bigint(&big).is_none());
        assert!(BigRational::from_bigint(&big).is_some());
    }
}
