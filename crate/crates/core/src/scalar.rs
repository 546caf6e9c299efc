//! Numeric tower shared by every module: exact rationals with a binary64
//! fallback.
//!
//! Arithmetic between two exact values stays exact; as soon as one operand
//! is a float the result is a float. Comparisons are always exact (a finite
//! `f64` is itself a dyadic rational).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

/// Builds `num/den` as a rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"-12"` or a plain decimal such as `"6.2775"` into an
/// exact rational. Scientific notation is rejected here.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match t.as_bytes()[0] {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let mantissa: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let scale = num_traits::pow(BigInt::from(10u32), frac.len());
    let r = Rational::new(mantissa, scale);
    Ok(if neg { -r } else { r })
}

/// Exact value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: scale down before converting.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Renders a float with 17 significant digits in positional notation.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (16 - mag).clamp(0, 60) as usize;
    format!("{x:.decimals$}")
}

/// Canonical string for a rational: `"p"` or `"p/q"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::one())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(ratio(num, den))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_positive(),
            Scalar::Float(f) => *f > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(f) => *f < 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(f) => *f,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Exact rational value; floats convert without rounding.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(r) => Some(r.clone()),
            Scalar::Float(f) => rational_from_f64(*f),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    /// Rational string for exact values, 17-digit decimal for floats.
    pub fn render(&self) -> String {
        match self {
            Scalar::Exact(r) => format_rational(r),
            Scalar::Float(f) => format_f64(*f),
        }
    }

    pub fn render_decimal(&self) -> String {
        format_f64(self.to_f64())
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<f64> for Scalar {
    fn from(f: f64) -> Self {
        Scalar::Float(f)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Exact(int(n))
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Rational and plain decimal literals parse exactly; anything else that
    /// `f64` accepts (exponents, `inf`) becomes a float.
    fn from_str(s: &str) -> Result<Self, Error> {
        if let Ok(r) = parse_rational(s) {
            return Ok(Scalar::Exact(r));
        }
        s.trim()
            .parse::<f64>()
            .map(Scalar::Float)
            .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b),
            (Scalar::Exact(a), Scalar::Float(b)) => rational_from_f64(*b).map(|b| a.cmp(&b)),
            (Scalar::Float(a), Scalar::Exact(b)) => rational_from_f64(*a).map(|a| a.cmp(b)),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    _ => Scalar::Float(self.to_f64().$method(rhs.to_f64())),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("6.2775").unwrap(), ratio(62775, 10000));
        assert_eq!(parse_rational("-0.475").unwrap(), ratio(-19, 40));
        assert_eq!(parse_rational("9/8").unwrap(), ratio(9, 8));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("3/0").is_err());
    }

    #[test]
    fn exponent_literals_fall_back_to_float() {
        let s: Scalar = "1e-3".parse().unwrap();
        assert!(!s.is_exact());
        let e: Scalar = "0.001".parse().unwrap();
        assert!(e.is_exact());
    }

    #[test]
    fn mixed_arithmetic_demotes() {
        let a = Scalar::from_ratio(1, 3);
        let b = Scalar::Float(0.5);
        assert!((&a + &a).is_exact());
        assert!(!(&a + &b).is_exact());
    }

    #[test]
    fn comparison_is_exact_across_kinds() {
        let third = Scalar::from_ratio(1, 3);
        let f = Scalar::Float(1.0 / 3.0);
        assert!(third != f);
        assert_eq!(Scalar::Float(0.5), Scalar::from_ratio(1, 2));
    }

    #[test]
    fn renders_seventeen_digits() {
        assert_eq!(format_f64(0.4811046511627907), "0.48110465116279072");
        assert_eq!(format_rational(&ratio(4, 2)), "2");
    }
}
