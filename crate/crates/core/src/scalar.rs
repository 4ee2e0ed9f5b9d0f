//! Exact rational scalars.
//!
//! Every norm, bound and matrix entry in the crate is a [`Scalar`]: an
//! arbitrary-precision rational. Serialization goes through canonical
//! strings (`"3"`, `"-7/4"`), and parsing additionally accepts decimals
//! (`"0.125"`, `"-1.5e-3"`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(value: BigRational) -> Self {
        Scalar(value)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Exact conversion of a finite float; `None` for NaN and infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Scalar)
    }

    /// Float shadow of the exact value (round-to-nearest up to the last bit
    /// or two of the mantissa).
    pub fn to_f64(&self) -> f64 {
        if let Some(x) = self.0.to_f64() {
            if x.is_finite() {
                return x;
            }
        }
        // Huge numerator/denominator pairs: scale down both before dividing.
        let n = self.0.numer();
        let d = self.0.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = (n >> shift).to_f64().unwrap_or(0.0);
        let d = (d >> shift).to_f64().unwrap_or(1.0);
        n / d
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        match self.0.cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Scalar(self.0.recip())
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i32) -> Self {
        let base = BigRational::from_integer(BigInt::one() << k.unsigned_abs() as usize);
        if k >= 0 {
            Scalar(base)
        } else {
            Scalar(base.recip())
        }
    }

    /// Largest rational with denominator `2^bits` not exceeding `sqrt(self)`.
    /// Exact when `self` is the square of a rational.
    pub fn sqrt_floor(&self, bits: u32) -> Self {
        assert!(!self.is_negative(), "sqrt of a negative scalar");
        let n = self.0.numer();
        let d = self.0.denom();
        let (rn, en) = isqrt_exact(n);
        let (rd, ed) = isqrt_exact(d);
        if en && ed {
            return Scalar(BigRational::new(rn, rd));
        }
        // floor(sqrt(n/d) * 2^bits) = floor(sqrt(n * 4^bits / d))
        let scaled = (n << (2 * bits as usize)) / d;
        let root = scaled.sqrt();
        Scalar(BigRational::new(root, BigInt::one() << bits as usize))
    }

    /// Canonical decimal rendering when the denominator is a product of 2s and
    /// 5s, otherwise `None`.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut d = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0u32;
        let mut fives = 0u32;
        while d.is_even() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return None;
        }
        let digits = twos.max(fives);
        let scaled = self.0.numer() * num_traits::pow(BigInt::from(10), digits as usize)
            / self.0.denom();
        let neg = scaled.sign() == Sign::Minus;
        let mut s = scaled.abs().to_string();
        if digits == 0 {
            return Some(if neg { format!("-{s}") } else { s });
        }
        while s.len() <= digits as usize {
            s.insert(0, '0');
        }
        s.insert(s.len() - digits as usize, '.');
        Some(if neg { format!("-{s}") } else { s })
    }
}

fn isqrt_exact(n: &BigInt) -> (BigInt, bool) {
    let r = n.sqrt();
    let exact = &r * &r == *n;
    (r, exact)
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
        write!(f, "{self}")
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || Error::Parse(format!("invalid rational scalar {s:?}"));
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Scalar(BigRational::new(n, d)));
        }
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let n: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let shift = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let mut value = BigRational::from_integer(n);
        if shift >= 0 {
            value *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
        } else {
            value /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
        }
        Ok(Scalar(if neg { -value } else { value }))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                Scalar(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Scalar> for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        self.0 *= &rhs.0;
    }
}

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

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for building exact scalars in tests and examples.
/// `q(3)` is 3, `qr(1, 2)` is 1/2.
pub fn q(n: i64) -> Scalar {
    Scalar::from_int(n)
}

pub fn qr(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!("3".parse::<Scalar>().unwrap(), q(3));
        assert_eq!("-7/4".parse::<Scalar>().unwrap(), qr(-7, 4));
        assert_eq!("0.125".parse::<Scalar>().unwrap(), qr(1, 8));
        assert_eq!("-1.5e-3".parse::<Scalar>().unwrap(), qr(-3, 2000));
        assert_eq!("2e2".parse::<Scalar>().unwrap(), q(200));
        assert_eq!(".5".parse::<Scalar>().unwrap(), qr(1, 2));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(qr(6, 4).to_string(), "3/2");
        assert_eq!(qr(-8, 4).to_string(), "-2");
        assert_eq!(qr(3, 8).to_decimal_string().unwrap(), "0.375");
        assert_eq!(qr(-1, 20).to_decimal_string().unwrap(), "-0.05");
        assert!(qr(1, 3).to_decimal_string().is_none());
    }

    #[test]
    fn float_round_trip_is_exact() {
        for x in [0.1, -3.75, 1e-300, 123456.789] {
            let s = Scalar::from_f64(x).unwrap();
            assert_eq!(s.to_f64(), x);
        }
        assert!(Scalar::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn float_shadow_is_close() {
        let s = qr(1, 3);
        let rel = ((s.to_f64() - 1.0 / 3.0) / (1.0 / 3.0)).abs();
        assert!(rel < 2f64.powi(-40));
    }

    #[test]
    fn sqrt_floor_exact_on_squares() {
        assert_eq!(qr(9, 4).sqrt_floor(64), qr(3, 2));
        let two = q(2).sqrt_floor(64);
        assert!(&two * &two <= q(2));
        let next = &two + Scalar::pow2(-64);
        assert!(&next * &next > q(2));
    }

    #[test]
    fn serde_uses_strings() {
        let json = serde_json::to_string(&qr(-1, 3)).unwrap();
        assert_eq!(json, "\"-1/3\"");
        let back: Scalar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, qr(-1, 3));
    }
}
