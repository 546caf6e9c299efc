//! Exact arithmetic in the field `Q(sqrt 2)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::scalar::{format_rational, int, rational_to_f64, Rational};

/// `rational + surd * sqrt(2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sqrt2Number {
    pub rational: Rational,
    pub surd: Rational,
}

impl Sqrt2Number {
    pub fn new(rational: Rational, surd: Rational) -> Self {
        Sqrt2Number { rational, surd }
    }

    pub fn from_rational(r: Rational) -> Self {
        Sqrt2Number { rational: r, surd: Rational::zero() }
    }

    pub fn sqrt2() -> Self {
        Sqrt2Number { rational: Rational::zero(), surd: int(1) }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    /// `a - b sqrt 2`.
    pub fn conjugate(&self) -> Self {
        Sqrt2Number { rational: self.rational.clone(), surd: -self.surd.clone() }
    }

    /// `a^2 - 2 b^2`, the product with the conjugate.
    pub fn norm(&self) -> Rational {
        &self.rational * &self.rational - int(2) * &self.surd * &self.surd
    }

    pub fn signum(&self) -> Ordering {
        let a = self.rational.cmp(&Rational::zero());
        let b = self.surd.cmp(&Rational::zero());
        match (a, b) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            // Opposite signs: the larger square wins.
            (Ordering::Greater, Ordering::Less) => self.norm().cmp(&Rational::zero()),
            (Ordering::Less, Ordering::Greater) => Rational::zero().cmp(&self.norm()),
        }
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        (self.clone() - Sqrt2Number::from_rational(r.clone())).signum()
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.rational) + rational_to_f64(&self.surd) * std::f64::consts::SQRT_2
    }

    pub fn recip(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(Sqrt2Number { rational: &self.rational / &n, surd: -(&self.surd / &n) })
    }
}

impl PartialOrd for Sqrt2Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum())
    }
}

impl Add for Sqrt2Number {
    type Output = Sqrt2Number;
    fn add(self, o: Sqrt2Number) -> Sqrt2Number {
        Sqrt2Number { rational: self.rational + o.rational, surd: self.surd + o.surd }
    }
}

impl Sub for Sqrt2Number {
    type Output = Sqrt2Number;
    fn sub(self, o: Sqrt2Number) -> Sqrt2Number {
        Sqrt2Number { rational: self.rational - o.rational, surd: self.surd - o.surd }
    }
}

impl Mul for Sqrt2Number {
    type Output = Sqrt2Number;
    fn mul(self, o: Sqrt2Number) -> Sqrt2Number {
        Sqrt2Number {
            rational: &self.rational * &o.rational + int(2) * &self.surd * &o.surd,
            surd: &self.rational * &o.surd + &self.surd * &o.rational,
        }
    }
}

impl Div for Sqrt2Number {
    type Output = Sqrt2Number;
    /// Panics on division by zero, like the rational type.
    fn div(self, o: Sqrt2Number) -> Sqrt2Number {
        self * o.recip().expect("division by zero in Q(sqrt 2)")
    }
}

impl Neg for Sqrt2Number {
    type Output = Sqrt2Number;
    fn neg(self) -> Sqrt2Number {
        Sqrt2Number { rational: -self.rational, surd: -self.surd }
    }
}

impl fmt::Display for Sqrt2Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.surd.is_zero()) {
            (_, true) => f.write_str(&format_rational(&self.rational)),
            (true, false) => write!(f, "{}*sqrt(2)", format_rational(&self.surd)),
            (false, false) => {
                let sign = if self.rational.is_negative() { "-" } else { "+" };
                write!(f, "{}*sqrt(2) {} {}", format_rational(&self.surd), sign, format_rational(&self.rational.abs()))
            }
        }
    }
}
