//! Scalar arithmetic: exact rationals with a multi-precision float fallback.
//!
//! A [`Real`] is either an exact GMP rational or an MPFR float. Mixed
//! operations promote to float at the float operand's precision, so exactness
//! is lost only where an irrational operation (a non-integer power) forces it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_DIGITS: u32 = 50;

/// Environment variable selecting the default float precision in decimal digits.
pub const DIGITS_ENV: &str = "REVLP_DIGITS";

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: u32 = 8;

/// Working precision for float mode, in decimal digits (at least 50).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_DIGITS: u32 = DEFAULT_DIGITS;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidArgument(format!(
                "float precision must be at least {} decimal digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        Ok(Precision(digits))
    }

    /// Reads [`DIGITS_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(DIGITS_ENV) {
            Ok(v) => {
                let d = v
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidArgument(format!("{DIGITS_ENV}={v:?} is not a digit count")))?;
                Precision::new(d)
            }
            Err(_) => Ok(Precision::default()),
        }
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    pub fn bits(self) -> u32 {
        (self.0 as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    fn digits_for_bits(bits: u32) -> u32 {
        (((bits.saturating_sub(GUARD_BITS)) as f64) / LOG2_10).floor().max(1.0) as u32
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_DIGITS)
    }
}

#[derive(Clone, Debug)]
pub enum Real {
    Exact(Rational),
    Float(Float),
}

impl Real {
    pub fn zero() -> Real {
        Real::Exact(Rational::new())
    }

    pub fn one() -> Real {
        Real::int(1)
    }

    pub fn int(v: i64) -> Real {
        Real::Exact(Rational::from(v))
    }

    /// `num/den` as an exact rational. Panics when `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Real {
        assert!(den != 0, "zero denominator");
        Real::Exact(Rational::from((num, den)))
    }

    /// Exact binary expansion of a finite `f64`.
    pub fn from_f64_exact(x: f64) -> Option<Real> {
        Rational::from_f64(x).map(Real::Exact)
    }

    pub fn float(x: Float) -> Real {
        Real::Float(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(q) => q.cmp0() == Ordering::Equal,
            Real::Float(f) => f.is_zero(),
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            Real::Exact(q) => q.cmp0(),
            Real::Float(f) => f.cmp0().unwrap_or(Ordering::Equal),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(q) => q.to_f64(),
            Real::Float(f) => f.to_f64(),
        }
    }

    /// Value as a float of at least `prec`.
    pub fn to_float(&self, prec: Precision) -> Float {
        match self {
            Real::Exact(q) => Float::with_val(prec.bits(), q),
            Real::Float(f) => Float::with_val(prec.bits().max(f.prec()), f),
        }
    }

    /// The exact integer value, if this is an exact integer fitting in `i64`.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Real::Exact(q) if *q.denom() == 1 => q.numer().to_i64(),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.as_i64().is_some()
    }

    pub fn abs(&self) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(q.clone().abs()),
            Real::Float(f) => Real::Float(f.clone().abs()),
        }
    }

    pub fn powi(&self, k: i32) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(q.clone().pow(k)),
            Real::Float(f) => Real::Float(f.clone().pow(k)),
        }
    }

    /// `self^e` for a non-negative base.
    ///
    /// Integer exponents on exact bases stay exact; everything else goes
    /// through the MPFR power at `prec` (or the base's own precision if higher).
    pub fn pow(&self, e: &Real, prec: Precision) -> Real {
        if let Some(k) = e.as_i64() {
            if let Ok(k) = i32::try_from(k) {
                if k < 0 && self.is_zero() {
                    // Only reachable through 0^(-k); report as +inf float.
                    return Real::Float(Float::with_val(prec.bits(), rug::float::Special::Infinity));
                }
                return self.powi(k);
            }
        }
        let base = self.to_float(prec);
        let exp = e.to_float(prec);
        Real::Float(base.pow(&exp))
    }

    pub fn recip(&self) -> Result<Real> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("reciprocal of zero".into()));
        }
        Ok(match self {
            Real::Exact(q) => Real::Exact(q.clone().recip()),
            Real::Float(f) => Real::Float(f.clone().recip()),
        })
    }

    pub fn checked_div(&self, rhs: &Real) -> Result<Real> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero(format!("{self} / 0")));
        }
        Ok(self / rhs)
    }

    pub fn min_of(a: &Real, b: &Real) -> Real {
        if b < a {
            b.clone()
        } else {
            a.clone()
        }
    }

    pub fn max_of(a: &Real, b: &Real) -> Real {
        if b > a {
            b.clone()
        } else {
            a.clone()
        }
    }

    /// Relative difference `|a - b| / max(|a|, |b|)`, evaluated in f64.
    pub fn rel_diff(a: &Real, b: &Real) -> f64 {
        let (x, y) = (a.to_f64(), b.to_f64());
        let scale = x.abs().max(y.abs());
        if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        }
    }

    /// Parses a float-mode literal at the given precision.
    pub fn parse_float(s: &str, prec: Precision) -> Result<Real> {
        let s = s.trim();
        if s.contains('/') {
            let q = parse_exact(s)?;
            return Ok(Real::Float(Float::with_val(prec.bits(), &q)));
        }
        let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(Real::Float(Float::with_val(prec.bits(), parsed)))
    }

    /// Decimal rendering with `digits` significant digits; exact integers print
    /// without a fractional part.
    pub fn to_decimal(&self, digits: u32) -> String {
        match self {
            Real::Exact(q) if *q.denom() == 1 => q.numer().to_string(),
            Real::Exact(q) => {
                let bits = Precision(digits).bits();
                Float::with_val(bits, q).to_string_radix(10, Some(digits as usize))
            }
            Real::Float(f) => f.to_string_radix(10, Some(digits as usize)),
        }
    }
}

/// Parses `"p/q"`, integers, and finite decimal/scientific literals exactly.
fn parse_exact(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("{s:?} is not a number"));
    if s.is_empty() {
        return Err(bad());
    }
    if s.contains('/') {
        let q = Rational::from_str(s).map_err(|_| bad())?;
        return Ok(q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from(10);
    value *= ten.pow(scale);
    if neg {
        value = -value;
    }
    Ok(value)
}

impl FromStr for Real {
    type Err = Error;

    /// Every finite literal is rational, so parsing is always exact.
    fn from_str(s: &str) -> Result<Self> {
        parse_exact(s).map(Real::Exact)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(q) => write!(f, "{q}"),
            Real::Float(x) => {
                let digits = Precision::digits_for_bits(x.prec());
                f.write_str(&x.to_string_radix(10, Some(digits as usize)))
            }
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Some(a.cmp(b)),
            (Real::Float(a), Real::Float(b)) => a.partial_cmp(b),
            (Real::Exact(a), Real::Float(b)) => b.partial_cmp(a).map(Ordering::reverse),
            (Real::Float(a), Real::Exact(b)) => a.partial_cmp(b),
        }
    }
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real::int(v)
    }
}

impl From<Rational> for Real {
    fn from(q: Rational) -> Self {
        Real::Exact(q)
    }
}

impl From<Float> for Real {
    fn from(f: Float) -> Self {
        Real::Float(f)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                match (self, rhs) {
                    (Real::Exact(a), Real::Exact(b)) => Real::Exact(Rational::from(a.$method(b))),
                    (Real::Float(a), Real::Float(b)) => {
                        let prec = a.prec().max(b.prec());
                        Real::Float(Float::with_val(prec, a.$method(b)))
                    }
                    (Real::Exact(a), Real::Float(b)) => {
                        let a = Float::with_val(b.prec(), a);
                        Real::Float(a.$method(b))
                    }
                    (Real::Float(a), Real::Exact(b)) => Real::Float(a.clone().$method(b)),
                }
            }
        }

        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        match (&mut *self, rhs) {
            (Real::Exact(a), Real::Exact(b)) => *a += b,
            (Real::Float(a), Real::Exact(b)) => *a += b,
            (Real::Float(a), Real::Float(b)) => *a += b,
            _ => *self = &*self + rhs,
        }
    }
}

impl MulAssign<&Real> for Real {
    fn mul_assign(&mut self, rhs: &Real) {
        match (&mut *self, rhs) {
            (Real::Exact(a), Real::Exact(b)) => *a *= b,
            (Real::Float(a), Real::Exact(b)) => *a *= b,
            (Real::Float(a), Real::Float(b)) => *a *= b,
            _ => *self = &*self * rhs,
        }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(-q),
            Real::Float(f) => Real::Float(-f),
        }
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Real {
    /// `"p/q"` and integer literals deserialize exactly; anything else is read
    /// as a default-precision float.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let looks_exact = s.trim().chars().all(|c| c.is_ascii_digit() || "+-/".contains(c));
        if looks_exact {
            s.parse::<Real>().map_err(serde::de::Error::custom)
        } else {
            Real::parse_float(&s, Precision::default()).map_err(serde::de::Error::custom)
        }
    }
}

/// Arithmetic needed by the summation kernels, implemented for [`Real`] and
/// for `f64` (the screening path used by randomized validation and search).
pub trait Scalar: Clone + PartialOrd {
    fn zero() -> Self;
    fn from_index(i: usize) -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn pow_real(&self, e: &Real, prec: Precision) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for Real {
    fn zero() -> Self {
        Real::zero()
    }
    fn from_index(i: usize) -> Self {
        Real::int(i as i64)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn pow_real(&self, e: &Real, prec: Precision) -> Self {
        self.pow(e, prec)
    }
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_index(i: usize) -> Self {
        i as f64
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn pow_real(&self, e: &Real, _prec: Precision) -> Self {
        match e.as_i64() {
            Some(1) => *self,
            Some(k) if k.abs() < 64 => self.powi(k as i32),
            _ => self.powf(e.to_f64()),
        }
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}
