//! Selection functions: piecewise-linear sigmoids, antisymmetric
//! piecewise-constant functions, and the discretization between them.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, ratio, Rational, Scalar};

/// A map from bias in `[-1, +1]` to the probability of assigning 1.
pub trait SelectionFunction: Sync {
    fn eval(&self, x: &Scalar) -> Result<Scalar>;
}

fn check_domain(x: &Scalar) -> Result<()> {
    let one = Scalar::one();
    if x.abs() > one {
        return Err(Error::Domain(x.render()));
    }
    Ok(())
}

/// Zero below `-b`, one above `+b`, linear in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlSigmoid {
    b: Rational,
}

impl PlSigmoid {
    pub fn new(b: Rational) -> Result<Self> {
        if !b.is_positive() || b > Rational::one() {
            return Err(Error::Parameter(format!("sigmoid intercept {b} must lie in (0, 1]")));
        }
        Ok(PlSigmoid { b })
    }

    pub fn intercept(&self) -> &Rational {
        &self.b
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, x: &Rational) -> Rational {
        if *x <= -self.b.clone() {
            Rational::zero()
        } else if *x >= self.b {
            Rational::one()
        } else {
            ratio(1, 2) + x / (int(2) * &self.b)
        }
    }
}

impl SelectionFunction for PlSigmoid {
    fn eval(&self, x: &Scalar) -> Result<Scalar> {
        check_domain(x)?;
        match x {
            Scalar::Exact(r) => Ok(Scalar::Exact(self.eval_rational(r))),
            Scalar::Float(f) => {
                let b = Scalar::Exact(self.b.clone());
                if *x <= -b.clone() {
                    Ok(Scalar::zero())
                } else if *x >= b {
                    Ok(Scalar::one())
                } else {
                    Ok(Scalar::Float(0.5 + f / (2.0 * b.to_f64())))
                }
            }
        }
    }
}

/// Antisymmetric step function with `ell` positive classes.
///
/// Thresholds `t_0 <= t_1 <= ... <= t_ell = 1` define the classes
/// `I_{+i} = (t_{i-1}, t_i]`, `I_{-i} = [-t_i, -t_{i-1})` and
/// `I_0 = [-t_0, t_0]`, which map to `p_i`, `1 - p_i` and `1/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntisymPiecewise {
    thresholds: Vec<Rational>,
    values: Vec<Rational>,
}

/// Closure `[lo, hi]` of a class interval plus which ends are included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl ClassInterval {
    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

impl AntisymPiecewise {
    /// `thresholds` holds `t_0..=t_ell`, `values` holds `p_1..=p_ell`.
    pub fn new(thresholds: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if thresholds.len() != values.len() + 1 {
            return Err(Error::Parameter(format!(
                "{} thresholds need {} values, got {}",
                thresholds.len(),
                thresholds.len().saturating_sub(1),
                values.len()
            )));
        }
        if thresholds[0].is_negative() {
            return Err(Error::Parameter("t_0 must be nonnegative".into()));
        }
        if thresholds.last() != Some(&Rational::one()) {
            return Err(Error::Parameter("last threshold must equal 1".into()));
        }
        if thresholds.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter("thresholds must be nondecreasing".into()));
        }
        if values.iter().any(|p| p.is_negative() || *p > Rational::one()) {
            return Err(Error::Parameter("values must lie in [0, 1]".into()));
        }
        Ok(AntisymPiecewise { thresholds, values })
    }

    /// The constant-1/2 function: a single class `[-1, +1]`.
    pub fn constant_half() -> Self {
        AntisymPiecewise { thresholds: vec![Rational::one()], values: vec![] }
    }

    pub fn ell(&self) -> usize {
        self.values.len()
    }

    pub fn thresholds(&self) -> &[Rational] {
        &self.thresholds
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Assignment probability of class `i` in `[-ell, +ell]`.
    pub fn class_value(&self, i: i64) -> Rational {
        match i {
            0 => ratio(1, 2),
            i if i > 0 => self.values[i as usize - 1].clone(),
            i => Rational::one() - &self.values[(-i) as usize - 1],
        }
    }

    pub fn class_interval(&self, i: i64) -> ClassInterval {
        let t = &self.thresholds;
        let k = i.unsigned_abs() as usize;
        match i {
            0 => ClassInterval { lo: -t[0].clone(), hi: t[0].clone(), lo_closed: true, hi_closed: true },
            i if i > 0 => ClassInterval { lo: t[k - 1].clone(), hi: t[k].clone(), lo_closed: false, hi_closed: true },
            _ => ClassInterval { lo: -t[k].clone(), hi: -t[k - 1].clone(), lo_closed: true, hi_closed: false },
        }
    }

    /// Class index of a bias value, resolving half-open ends exactly.
    pub fn class_of(&self, x: &Scalar) -> Result<i64> {
        check_domain(x)?;
        let r = x.to_rational().ok_or_else(|| Error::Domain(x.render()))?;
        let a = r.abs();
        if a <= self.thresholds[0] {
            return Ok(0);
        }
        // Smallest i with |x| <= t_i; positive side is (t_{i-1}, t_i].
        let i = self.thresholds.partition_point(|t| *t < a) as i64;
        Ok(if r.is_positive() { i } else { -i })
    }
}

impl SelectionFunction for AntisymPiecewise {
    fn eval(&self, x: &Scalar) -> Result<Scalar> {
        Ok(Scalar::Exact(self.class_value(self.class_of(x)?)))
    }
}

/// Either kind of selection function, as loaded from files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    PlSigmoid(PlSigmoid),
    AntisymPiecewise(AntisymPiecewise),
}

impl SelectionFunction for Selection {
    fn eval(&self, x: &Scalar) -> Result<Scalar> {
        match self {
            Selection::PlSigmoid(s) => s.eval(x),
            Selection::AntisymPiecewise(s) => s.eval(x),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::PlSigmoid(s) => write!(f, "PLSigmoid_{}", s.b),
            Selection::AntisymPiecewise(s) => write!(f, "antisymmetric step function with {} classes", s.ell()),
        }
    }
}

/// Uniform discretization of `PLSigmoid_b` into `ell` positive classes.
///
/// `t_i = i b / (ell - 1)` for `i < ell` and `t_ell = 1`; each of the first
/// `ell - 1` classes takes the average of the sigmoid at its two endpoints
/// and the saturated class `(b, 1]` takes 1.
pub fn discretize_plsigmoid(b: &Rational, ell: usize) -> Result<AntisymPiecewise> {
    if ell < 2 {
        return Err(Error::Parameter(format!("discretization needs ell >= 2, got {ell}")));
    }
    let sigmoid = PlSigmoid::new(b.clone())?;
    let steps = int(ell as i64 - 1);
    let mut thresholds: Vec<Rational> = (0..ell).map(|i| int(i as i64) * b / &steps).collect();
    thresholds.push(Rational::one());
    let mut values: Vec<Rational> = (1..ell)
        .map(|i| (sigmoid.eval_rational(&thresholds[i - 1]) + sigmoid.eval_rational(&thresholds[i])) / int(2))
        .collect();
    values.push(Rational::one());
    AntisymPiecewise::new(thresholds, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn sigmoid_branches() {
        let s = PlSigmoid::new(ratio(1, 2)).unwrap();
        assert_eq!(s.eval(&ex(3, 10)).unwrap(), ex(4, 5));
        for b in [ratio(1, 2), ratio(149, 309), ratio(1, 1)] {
            let s = PlSigmoid::new(b.clone()).unwrap();
            assert_eq!(s.eval(&Scalar::Exact(-b.clone())).unwrap(), Scalar::zero());
            assert_eq!(s.eval(&Scalar::zero()).unwrap(), ex(1, 2));
        }
        assert!(matches!(s.eval(&ex(3, 2)), Err(Error::Domain(_))));
        assert!(PlSigmoid::new(Rational::zero()).is_err());
    }

    #[test]
    fn half_open_classes() {
        let s = discretize_plsigmoid(&ratio(1, 2), 3).unwrap();
        // t = (0, 1/4, 1/2, 1)
        assert_eq!(s.class_of(&ex(1, 4)).unwrap(), 1);
        assert_eq!(s.class_of(&ex(-1, 4)).unwrap(), -1);
        assert_eq!(s.class_of(&ex(1, 2)).unwrap(), 2);
        assert_eq!(s.class_of(&ex(3, 5)).unwrap(), 3);
        assert_eq!(s.class_of(&Scalar::zero()).unwrap(), 0);
        assert_eq!(s.class_of(&ex(-1, 1)).unwrap(), -3);
        assert!(s.class_interval(2).contains(&ratio(1, 2)));
        assert!(!s.class_interval(2).contains(&ratio(1, 4)));
    }

    #[test]
    fn discretization_small_case() {
        let s = discretize_plsigmoid(&ratio(1, 2), 2).unwrap();
        assert_eq!(s.thresholds(), &[ratio(0, 1), ratio(1, 2), ratio(1, 1)]);
        assert_eq!(s.values(), &[ratio(3, 4), ratio(1, 1)]);
    }

    #[test]
    fn discretization_tail() {
        let b = ratio(149, 309);
        let s = discretize_plsigmoid(&b, 251).unwrap();
        assert_eq!(s.thresholds()[250], b);
        assert_eq!(s.thresholds()[251], ratio(1, 1));
        assert_eq!(s.values()[250], ratio(1, 1));
        assert!(s.values().windows(2).all(|w| w[0] <= w[1]));
        assert!(s.values().iter().all(|p| *p >= ratio(1, 2) && *p <= ratio(1, 1)));
    }

    #[test]
    fn parameter_errors() {
        assert!(discretize_plsigmoid(&ratio(1, 2), 1).is_err());
        assert!(discretize_plsigmoid(&ratio(3, 2), 5).is_err());
        assert!(AntisymPiecewise::new(vec![ratio(1, 2)], vec![]).is_err());
        assert!(AntisymPiecewise::new(vec![ratio(1, 2), ratio(1, 4), ratio(1, 1)], vec![ratio(1, 2), ratio(1, 2)]).is_err());
    }
}
