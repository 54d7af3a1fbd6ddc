//! Exact rational and dyadic arithmetic.
//!
//! Every probability produced by a sign enumeration is a dyadic rational
//! `k / 2^e`, so [`DyadicProbability`] keeps that shape explicitly. General
//! coordinates, radii and certified constants are [`Rational`]s. Nothing in
//! this module touches floating point except the non-normative
//! [`Rational::to_f64`] rendering helper.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer<T: Into<BigInt>>(n: T) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `numer / denom`, failing on a zero denominator.
    pub fn new<N: Into<BigInt>, D: Into<BigInt>>(numer: N, denom: D) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_big(value: BigRational) -> Self {
        Rational(value)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(Pow::pow(&self.0, exp))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Non-normative decimal rendering.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // Accept the unicode minus that hand-written scenario files tend to carry.
        let cleaned = s.trim().replace('\u{2212}', "-");
        let parse = |part: &str| {
            BigInt::from_str(part.trim())
                .map_err(|_| Error::InvalidInput(format!("malformed rational {s:?}")))
        };
        match cleaned.split_once('/') {
            Some((n, d)) => Rational::new(parse(n)?, parse(d)?),
            None => Ok(Rational::from_integer(parse(&cleaned)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Rational::from_str(&raw).map_err(D::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// Exact probability `mantissa / 2^exponent` in canonical form.
///
/// Canonical means the mantissa is odd, or the value is zero with exponent 0.
/// Values above 1 are representable (sums of influences need them); only the
/// probability-valued call sites assert `<= 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicProbability {
    mantissa: BigUint,
    exponent: u32,
}

impl DyadicProbability {
    pub fn new<M: Into<BigUint>>(mantissa: M, exponent: u32) -> Self {
        let mut mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let shift = mantissa.trailing_zeros().unwrap_or(0).min(exponent as u64) as u32;
        mantissa >>= shift;
        let exponent = exponent - shift;
        DyadicProbability { mantissa, exponent }
    }

    pub fn zero() -> Self {
        DyadicProbability {
            mantissa: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        DyadicProbability {
            mantissa: BigUint::one(),
            exponent: 0,
        }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        DyadicProbability {
            mantissa: BigUint::one(),
            exponent: k,
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_probability(&self) -> bool {
        self <= &Self::one()
    }

    /// Numerator of this value over the denominator `2^exponent`; `None` if
    /// the value is not representable there.
    pub fn numerator_at(&self, exponent: u32) -> Option<BigUint> {
        if exponent < self.exponent {
            return None;
        }
        Some(&self.mantissa << (exponent - self.exponent) as usize)
    }

    pub fn to_rational(&self) -> Rational {
        let den = BigInt::one() << self.exponent as usize;
        Rational(BigRational::new(
            BigInt::from_biguint(Sign::Plus, self.mantissa.clone()),
            den,
        ))
    }

    /// Exact conversion from a rational with power-of-two denominator.
    pub fn from_rational(r: &Rational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::InvalidInput(format!("negative probability {r}")));
        }
        let den = r.denom().magnitude();
        let bits = den.bits();
        if den != &(BigUint::one() << (bits - 1) as usize) {
            return Err(Error::InvalidInput(format!("{r} is not dyadic")));
        }
        Ok(Self::new(r.numer().magnitude().clone(), (bits - 1) as u32))
    }

    pub fn half(&self) -> Self {
        Self::new(self.mantissa.clone(), self.exponent + 1)
    }

    /// Exact difference; `None` when it would be negative.
    pub fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        let e = self.exponent.max(rhs.exponent);
        let a = self.numerator_at(e)?;
        let b = rhs.numerator_at(e)?;
        if a < b {
            None
        } else {
            Some(Self::new(a - b, e))
        }
    }

    pub fn scale_int(&self, k: u64) -> Self {
        Self::new(&self.mantissa * BigUint::from(k), self.exponent)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64()
    }
}

impl Default for DyadicProbability {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for DyadicProbability {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.mantissa << (e - self.exponent) as usize;
        let b = &other.mantissa << (e - other.exponent) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicProbability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&DyadicProbability> for &DyadicProbability {
    type Output = DyadicProbability;
    fn add(self, rhs: &DyadicProbability) -> DyadicProbability {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.mantissa << (e - self.exponent) as usize;
        let b = &rhs.mantissa << (e - rhs.exponent) as usize;
        DyadicProbability::new(a + b, e)
    }
}

impl Add for DyadicProbability {
    type Output = DyadicProbability;
    fn add(self, rhs: DyadicProbability) -> DyadicProbability {
        &self + &rhs
    }
}

impl Mul<&DyadicProbability> for &DyadicProbability {
    type Output = DyadicProbability;
    fn mul(self, rhs: &DyadicProbability) -> DyadicProbability {
        // Product of odd mantissas stays odd, so no renormalization is needed
        // unless one factor is zero.
        if self.is_zero() || rhs.is_zero() {
            return DyadicProbability::zero();
        }
        DyadicProbability {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Mul for DyadicProbability {
    type Output = DyadicProbability;
    fn mul(self, rhs: DyadicProbability) -> DyadicProbability {
        &self * &rhs
    }
}

impl Sum for DyadicProbability {
    fn sum<I: Iterator<Item = DyadicProbability>>(iter: I) -> Self {
        iter.fold(DyadicProbability::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> Sum<&'a DyadicProbability> for DyadicProbability {
    fn sum<I: Iterator<Item = &'a DyadicProbability>>(iter: I) -> Self {
        iter.fold(DyadicProbability::zero(), |acc, x| &acc + x)
    }
}

impl fmt::Display for DyadicProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_rational(), f)
    }
}

impl fmt::Debug for DyadicProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.mantissa, self.exponent)
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicWire {
    mantissa: String,
    exponent: u32,
}

impl Serialize for DyadicProbability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DyadicWire {
            mantissa: self.mantissa.to_string(),
            exponent: self.exponent,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DyadicProbability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = DyadicWire::deserialize(deserializer)?;
        let mantissa = BigUint::from_str(&wire.mantissa).map_err(D::Error::custom)?;
        let value = DyadicProbability::new(mantissa, wire.exponent);
        // Non-canonical input would not round-trip bit-exactly.
        if value.exponent != wire.exponent {
            return Err(D::Error::custom(format!(
                "dyadic {}/2^{} is not in canonical form",
                wire.mantissa, wire.exponent
            )));
        }
        Ok(value)
    }
}

/// A point of `Q^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    coords: Vec<Rational>,
}

impl Point {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("points need dimension >= 1".into()));
        }
        Ok(Point { coords })
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        assert!(!coords.is_empty(), "points need dimension >= 1");
        Point {
            coords: coords.iter().map(|&c| Rational::from_integer(c)).collect(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1, "points need dimension >= 1");
        Point {
            coords: vec![Rational::zero(); dim],
        }
    }

    /// The `i`-th standard basis vector of `Q^dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut p = Self::origin(dim);
        p.coords[i] = Rational::one();
        p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Rational::is_zero)
    }

    pub fn dot(&self, other: &Point) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm2(&self) -> Rational {
        self.dot(self)
    }

    pub fn scale(&self, k: &Rational) -> Point {
        Point {
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Add<&Point> for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Point {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Point> for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Point {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<Rational>::deserialize(deserializer)?;
        Point::new(coords).map_err(D::Error::custom)
    }
}

/// Decides `lhs <= q^(1/t)` exactly, i.e. `lhs^t <= q` for `lhs, q >= 0`.
pub fn root_power_compare(lhs: &Rational, q: &Rational, t: u32) -> bool {
    assert!(t >= 1, "root index must be positive");
    assert!(!lhs.is_negative() && !q.is_negative(), "operands must be >= 0");
    &lhs.pow(t) <= q
}

/// Default precision of certified square roots, `2^-20`.
pub fn default_sqrt_precision() -> Rational {
    Rational::new(1, 1u64 << 20).expect("nonzero")
}

/// Smallest multiple `k * precision` with `(k * precision)^2 >= x`, or the
/// exact root when `x` is the square of a rational.
///
/// The result `r` satisfies `r >= sqrt(x)` and `r - sqrt(x) <= precision`.
pub fn rational_sqrt_upper(x: &Rational, precision: &Rational) -> Rational {
    assert!(!x.is_negative(), "square root of a negative rational");
    assert!(precision.is_positive(), "precision must be positive");
    if let Some(root) = exact_sqrt(x) {
        return root;
    }
    let scaled = x / &precision.pow(2);
    let k = ceil_sqrt(&scaled.ceil_int().to_biguint().expect("nonnegative"));
    Rational::from_integer(BigInt::from(k)) * precision
}

fn exact_sqrt(x: &Rational) -> Option<Rational> {
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::from_big(BigRational::new(
            BigInt::from(rn),
            BigInt::from(rd),
        )))
    } else {
        None
    }
}

/// Smallest `k` with `k^2 >= n`.
pub(crate) fn ceil_sqrt(n: &BigUint) -> BigUint {
    let r = n.sqrt();
    if &(&r * &r) == n {
        r
    } else {
        r + 1u32
    }
}

/// `binom(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub(crate) fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn root_power_compare_examples() {
        assert!(root_power_compare(&q("1/2"), &q("1/4"), 2));
        assert!(!root_power_compare(&q("3/4"), &q("1/4"), 2));
        assert!(root_power_compare(&q("1/3"), &q("1/27"), 3));
    }

    #[test]
    fn sqrt_upper_examples() {
        let p = default_sqrt_precision();
        assert_eq!(rational_sqrt_upper(&q("1"), &p), q("1"));
        assert_eq!(rational_sqrt_upper(&q("4"), &q("1/3")), q("2"));
        assert_eq!(rational_sqrt_upper(&q("3"), &q("1/4")), q("7/4"));
        assert_eq!(rational_sqrt_upper(&q("0"), &p), q("0"));
        assert_eq!(rational_sqrt_upper(&q("9/4"), &p), q("3/2"));
    }

    #[test]
    fn dyadic_canonical_form() {
        let d = DyadicProbability::new(12u32, 5);
        assert_eq!(d.mantissa(), &BigUint::from(3u32));
        assert_eq!(d.exponent(), 3);
        let z = DyadicProbability::new(0u32, 9);
        assert_eq!(z.exponent(), 0);
        // Integers above one keep exponent zero.
        assert_eq!(DyadicProbability::new(8u32, 2).exponent(), 0);
        assert_eq!(DyadicProbability::new(8u32, 2).to_rational(), q("2"));
    }

    #[test]
    fn dyadic_arithmetic() {
        let a = DyadicProbability::new(1u32, 2);
        let b = DyadicProbability::new(1u32, 2);
        assert_eq!(&a + &b, DyadicProbability::new(1u32, 1));
        assert_eq!(&a * &b, DyadicProbability::new(1u32, 4));
        assert_eq!(
            DyadicProbability::one().checked_sub(&a),
            Some(DyadicProbability::new(3u32, 2))
        );
        assert_eq!(a.checked_sub(&DyadicProbability::one()), None);
        assert!(DyadicProbability::new(3u32, 3) < DyadicProbability::new(1u32, 1));
    }

    #[test]
    fn dyadic_from_rational() {
        assert_eq!(
            DyadicProbability::from_rational(&q("3/8")).unwrap(),
            DyadicProbability::new(3u32, 3)
        );
        assert!(DyadicProbability::from_rational(&q("1/3")).is_err());
        assert!(DyadicProbability::from_rational(&q("-1/2")).is_err());
    }

    #[test]
    fn serialization_formats() {
        assert_eq!(serde_json::to_string(&q("-3/4")).unwrap(), "\"-3/4\"");
        assert_eq!(serde_json::to_string(&q("5")).unwrap(), "\"5\"");
        let d = DyadicProbability::new(3u32, 3);
        assert_eq!(
            serde_json::to_string(&d).unwrap(),
            r#"{"mantissa":"3","exponent":3}"#
        );
        let back: DyadicProbability =
            serde_json::from_str(r#"{"mantissa":"3","exponent":3}"#).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<DyadicProbability>(r#"{"mantissa":"6","exponent":4}"#)
            .is_err());
        assert_eq!(q("\u{2212}1/2"), q("-1/2"));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(16, 8), BigUint::from(12870u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }
}
