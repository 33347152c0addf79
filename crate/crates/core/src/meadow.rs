//! Exact arithmetic for points in time, periods and coordinates.
//!
//! Values are reduced rationals. The totalized operations of a signed meadow
//! with square root are provided on top: `0⁻¹ = 0`, a signum, and a square
//! root that is defined exactly when the absolute value of the radicand is
//! the square of a rational. The order predicates and `min`/`max` are
//! computed through the signum, the way the meadow defines them.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An exact rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`; panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Scalar(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Totalized multiplicative inverse: `0⁻¹ = 0`.
    pub fn inv(&self) -> Self {
        if self.0.is_zero() {
            Scalar::zero()
        } else {
            Scalar(self.0.recip())
        }
    }

    pub fn signum(&self) -> Self {
        Scalar(self.0.signum())
    }

    /// `self / other`, i.e. `self · other⁻¹` (so division by zero yields zero).
    pub fn div(&self, other: &Scalar) -> Self {
        self * &other.inv()
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    /// Totalized square root: `√u = −√(−u)` for negative `u`.
    pub fn sqrt_total(&self) -> Result<Self> {
        if self.0.is_negative() {
            return Ok(-(-self).sqrt_total()?);
        }
        let n = self.0.numer();
        let d = self.0.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Ok(Scalar::from_big(rn, rd))
        } else {
            Err(Error::NotRepresentable(format!("square root of {self}")))
        }
    }

    /// `u < v ⟺ sign(u − v) = −1`.
    pub fn lt(&self, other: &Scalar) -> bool {
        (self - other).signum() == -Scalar::one()
    }

    /// `u ≤ v ⟺ sign(sign(u − v) − 1) = −1`.
    pub fn le(&self, other: &Scalar) -> bool {
        (&(self - other).signum() - &Scalar::one()).signum() == -Scalar::one()
    }

    /// `min(u, v) = s/s · (u − v) + v` with `s = sign(sign(u − v) − 1)`.
    pub fn min2(&self, other: &Scalar) -> Scalar {
        let diff = self - other;
        let s = (&diff.signum() - &Scalar::one()).signum();
        &(&s.div(&s) * &diff) + other
    }

    /// `max(u, v) = s/s · (u − v) + v` with `s = sign(sign(u − v) + 1)`.
    pub fn max2(&self, other: &Scalar) -> Scalar {
        let diff = self - other;
        let s = (&diff.signum() + &Scalar::one()).signum();
        &(&s.div(&s) * &diff) + other
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Syntax { pos: 0, msg: format!("invalid scalar `{s}`") };
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Scalar::from_big(n, d))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Scalar(BigRational::from_integer(n)))
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar($trait::$method(self.0, rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

/// A point in time extended with `∞`.
///
/// Ordering: every finite value is below `∞`, `∞ ≮ ∞` and `∞ ≤ ∞`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtScalar {
    Finite(Scalar),
    Infinity,
}

impl ExtScalar {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtScalar::Finite(s) => Some(s),
            ExtScalar::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtScalar::Infinity)
    }

    pub fn lt(&self, other: &ExtScalar) -> bool {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.lt(b),
            (ExtScalar::Finite(_), ExtScalar::Infinity) => true,
            (ExtScalar::Infinity, _) => false,
        }
    }

    pub fn le(&self, other: &ExtScalar) -> bool {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.le(b),
            (_, ExtScalar::Infinity) => true,
            (ExtScalar::Infinity, ExtScalar::Finite(_)) => false,
        }
    }

    /// `t + self`, with `t + ∞ = ∞`.
    pub fn shift(&self, t: &Scalar) -> ExtScalar {
        match self {
            ExtScalar::Finite(s) => ExtScalar::Finite(t + s),
            ExtScalar::Infinity => ExtScalar::Infinity,
        }
    }

    pub fn min(a: &ExtScalar, b: &ExtScalar) -> ExtScalar {
        if a.le(b) {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &ExtScalar, b: &ExtScalar) -> ExtScalar {
        if a.le(b) {
            b.clone()
        } else {
            a.clone()
        }
    }
}

impl From<Scalar> for ExtScalar {
    fn from(s: Scalar) -> Self {
        ExtScalar::Finite(s)
    }
}

impl PartialEq<Scalar> for ExtScalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.finite() == Some(other)
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::Finite(s) => write!(f, "{s}"),
            ExtScalar::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "inf" {
            Ok(ExtScalar::Infinity)
        } else {
            Ok(ExtScalar::Finite(s.parse()?))
        }
    }
}

/// Compare a finite value against an extended one.
pub fn cmp_ext(a: &Scalar, b: &ExtScalar) -> Ordering {
    match b {
        ExtScalar::Finite(b) => a.cmp(b),
        ExtScalar::Infinity => Ordering::Less,
    }
}

/// A point in three-dimensional space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub u: Scalar,
    pub v: Scalar,
    pub w: Scalar,
}

impl Point {
    pub fn new(u: Scalar, v: Scalar, w: Scalar) -> Self {
        Point { u, v, w }
    }

    pub fn ints(u: i64, v: i64, w: i64) -> Self {
        Point::new(u.into(), v.into(), w.into())
    }

    pub fn origin() -> Self {
        Point::ints(0, 0, 0)
    }

    pub fn dist_squared(&self, other: &Point) -> Scalar {
        (&other.u - &self.u).square() + (&other.v - &self.v).square() + (&other.w - &self.w).square()
    }

    /// Euclidean distance; fails when it is irrational.
    pub fn dist(&self, other: &Point) -> Result<Scalar> {
        self.dist_squared(other)
            .sqrt_total()
            .map_err(|_| Error::NotRepresentable(format!("distance between {self} and {other}")))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.u, self.v, self.w)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub mod laws;

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::frac(n, d)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Scalar::zero().inv(), Scalar::zero());
        assert_eq!(Scalar::one().inv(), Scalar::one());
        let x = Scalar::int(-4);
        assert_eq!(x.inv(), s(-1, 4));
        assert_eq!(&x * &(&x * &x.inv()), x);
    }

    #[test]
    fn signum_examples() {
        assert_eq!(Scalar::int(-1).signum(), Scalar::int(-1));
        assert_eq!(Scalar::zero().signum(), Scalar::zero());
        assert_eq!(s(7, 2).signum(), Scalar::one());
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(Scalar::int(4).sqrt_total().unwrap(), Scalar::int(2));
        assert_eq!(Scalar::zero().sqrt_total().unwrap(), Scalar::zero());
        assert_eq!(Scalar::int(-9).sqrt_total().unwrap(), Scalar::int(-3));
        assert_eq!(s(9, 4).sqrt_total().unwrap(), s(3, 2));
        assert!(matches!(Scalar::int(2).sqrt_total(), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn order_examples() {
        assert!(Scalar::int(1).lt(&Scalar::int(2)));
        assert!(!Scalar::int(2).lt(&Scalar::int(1)));
        assert!(Scalar::int(3).le(&Scalar::int(3)));
        assert!(!Scalar::int(3).lt(&Scalar::int(3)));
        assert_eq!(Scalar::int(5).min2(&Scalar::int(2)), Scalar::int(2));
        assert_eq!(Scalar::int(5).max2(&Scalar::int(2)), Scalar::int(5));
        assert_eq!(Scalar::int(2).min2(&Scalar::int(2)), Scalar::int(2));
    }

    #[test]
    fn ext_order_table() {
        let t = ExtScalar::Finite(Scalar::int(7));
        let inf = ExtScalar::Infinity;
        assert!(t.lt(&inf));
        assert!(!inf.lt(&t));
        assert!(t.le(&inf));
        assert!(!inf.le(&t));
        assert!(!inf.lt(&inf));
        assert!(inf.le(&inf));
        assert!(t < inf);
    }

    #[test]
    fn distance_examples() {
        let o = Point::origin();
        assert_eq!(o.dist(&o).unwrap(), Scalar::zero());
        assert_eq!(o.dist(&Point::ints(3, 4, 0)).unwrap(), Scalar::int(5));
        assert!(matches!(o.dist(&Point::ints(1, 1, 0)), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("-3/6".parse::<Scalar>().unwrap(), s(-1, 2));
        assert_eq!(s(-1, 2).to_string(), "-1/2");
        assert_eq!("inf".parse::<ExtScalar>().unwrap(), ExtScalar::Infinity);
        assert!("1/0".parse::<Scalar>().is_err());
    }
}
