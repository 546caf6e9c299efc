//! Quadratic polynomials over a handful of probabilities and their exact
//! maximum over the unit box.
//!
//! The maximum of a continuous function on `[0,1]^n` is attained in the
//! relative interior of some face, where the restricted gradient vanishes.
//! [`maximize_over_box`] therefore walks all `3^n` faces (each coordinate
//! free, pinned to 0 or pinned to 1) and solves the stationarity system of
//! each restriction in rational arithmetic.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, rational_to_f64, Rational};

pub const MAX_BOX_DIM: usize = 6;

/// `x -> sum_j coeffs[j] x_j + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl Affine {
    pub fn constant(n: usize, c: Rational) -> Self {
        Affine { coeffs: vec![Rational::zero(); n], constant: c }
    }

    /// The coordinate function `x_i`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut a = Affine::constant(n, Rational::zero());
        a.coeffs[i] = Rational::one();
        a
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Affine {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
            constant: Rational::one() - &self.constant,
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<Rational>() + &self.constant
    }
}

/// `q(x) = x^T A x + b^T x + c` with `A` symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    pub quad: Vec<Vec<Rational>>,
    pub lin: Vec<Rational>,
    pub constant: Rational,
}

impl QuadraticForm {
    pub fn zero(n: usize) -> Self {
        QuadraticForm {
            quad: vec![vec![Rational::zero(); n]; n],
            lin: vec![Rational::zero(); n],
            constant: Rational::zero(),
        }
    }

    /// Builds a form from monomial coefficients; `quad` need not be
    /// symmetric on input (it is symmetrized).
    pub fn new(quad: Vec<Vec<Rational>>, lin: Vec<Rational>, constant: Rational) -> Result<Self> {
        let n = lin.len();
        if quad.len() != n || quad.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("quadratic form dimensions disagree".into()));
        }
        let half = Rational::new(1.into(), 2.into());
        let sym = (0..n)
            .map(|i| (0..n).map(|j| (&quad[i][j] + &quad[j][i]) * &half).collect())
            .collect();
        Ok(QuadraticForm { quad: sym, lin, constant })
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    /// Adds `coef * x_i * x_j` (with `i == j` meaning `x_i^2`).
    pub fn add_monomial(&mut self, i: usize, j: usize, coef: &Rational) {
        if i == j {
            self.quad[i][i] += coef;
        } else {
            let half = coef / int(2);
            self.quad[i][j] += &half;
            self.quad[j][i] += &half;
        }
    }

    /// Adds `weight * f * g` for two affine functions.
    pub fn add_product(&mut self, weight: &Rational, f: &Affine, g: &Affine) {
        let n = self.dim();
        for i in 0..n {
            if f.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !g.coeffs[j].is_zero() {
                    self.add_monomial(i, j, &(weight * &f.coeffs[i] * &g.coeffs[j]));
                }
            }
        }
        for i in 0..n {
            self.lin[i] += weight * (&f.coeffs[i] * &g.constant + &g.coeffs[i] * &f.constant);
        }
        self.constant += weight * &f.constant * &g.constant;
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let n = self.dim();
        let mut v = self.constant.clone();
        for i in 0..n {
            v += &self.lin[i] * &x[i];
            for j in 0..n {
                if !self.quad[i][j].is_zero() {
                    v += &self.quad[i][j] * &x[i] * &x[j];
                }
            }
        }
        v
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut v = rational_to_f64(&self.constant);
        for i in 0..n {
            v += rational_to_f64(&self.lin[i]) * x[i];
            for j in 0..n {
                v += rational_to_f64(&self.quad[i][j]) * x[i] * x[j];
            }
        }
        v
    }

    /// `2 A x + b`.
    pub fn gradient(&self, x: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let s: Rational = (0..n).map(|j| &self.quad[i][j] * &x[j]).sum();
                int(2) * s + &self.lin[i]
            })
            .collect()
    }

    /// `u -> q(map(u))` where `map[i]` gives `x_i` as an affine function of
    /// the new variables.
    pub fn compose(&self, map: &[Affine]) -> Result<QuadraticForm> {
        if map.len() != self.dim() {
            return Err(Error::Parameter("substitution has the wrong length".into()));
        }
        let m = map.first().map_or(0, |a| a.coeffs.len());
        let mut out = QuadraticForm::zero(m);
        out.constant = self.constant.clone();
        for (i, ai) in map.iter().enumerate() {
            let scaled = Affine {
                coeffs: ai.coeffs.iter().map(|c| c * &self.lin[i]).collect(),
                constant: &ai.constant * &self.lin[i],
            };
            out.add_product(&Rational::one(), &scaled, &Affine::constant(m, Rational::one()));
            for (j, aj) in map.iter().enumerate() {
                if !self.quad[i][j].is_zero() {
                    out.add_product(&self.quad[i][j], ai, aj);
                }
            }
        }
        Ok(out)
    }

    /// Coefficient of the monomial `x_i x_j` (`x_i^2` when `i == j`).
    pub fn monomial(&self, i: usize, j: usize) -> Rational {
        if i == j {
            self.quad[i][i].clone()
        } else {
            &self.quad[i][j] + &self.quad[j][i]
        }
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        let mut terms = vec![format_rational(&self.constant)];
        for i in 0..n {
            for j in i..n {
                let c = self.monomial(i, j);
                if !c.is_zero() {
                    terms.push(format!("{}*x{}*x{}", format_rational(&c), i, j));
                }
            }
            if !self.lin[i].is_zero() {
                terms.push(format!("{}*x{}", format_rational(&self.lin[i]), i));
            }
        }
        f.write_str(&terms.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxMax {
    pub value: Rational,
    pub argmax: Vec<Rational>,
    /// The maximum is attained on a face whose stationarity system is
    /// singular, i.e. along a stationary line or plane.
    pub degenerate: bool,
    /// A singular face of dimension >= 3 was met; only its minimum-norm
    /// stationary point was examined.
    pub unexplored_singular_face: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pin {
    Free,
    Zero,
    One,
}

pub fn maximize_over_box(q: &QuadraticForm) -> Result<BoxMax> {
    let n = q.dim();
    if n > MAX_BOX_DIM {
        return Err(Error::Dimension(n));
    }
    let mut best: Option<(Rational, Vec<Rational>, bool)> = None;
    let mut unexplored = false;
    let offer = |x: Vec<Rational>, singular: bool, best: &mut Option<(Rational, Vec<Rational>, bool)>| {
        let v = q.eval(&x);
        match best {
            Some((bv, _, deg)) if v == *bv => *deg |= singular,
            Some((bv, _, _)) if v < *bv => {}
            _ => *best = Some((v, x, singular)),
        }
    };
    let faces = 3usize.pow(n as u32);
    for code in 0..faces {
        let pins: Vec<Pin> = (0..n)
            .map(|i| match code / 3usize.pow(i as u32) % 3 {
                0 => Pin::Zero,
                1 => Pin::One,
                _ => Pin::Free,
            })
            .collect();
        let free: Vec<usize> = (0..n).filter(|&i| pins[i] == Pin::Free).collect();
        let mut base: Vec<Rational> = pins
            .iter()
            .map(|p| if *p == Pin::One { Rational::one() } else { Rational::zero() })
            .collect();
        if free.is_empty() {
            offer(base, false, &mut best);
            continue;
        }
        // Stationarity of the restriction: 2 A_FF y = -(b_F + 2 A_FP x_P).
        let k = free.len();
        let mut system: Vec<Vec<Rational>> = Vec::with_capacity(k);
        for &i in &free {
            let mut row: Vec<Rational> = free.iter().map(|&j| int(2) * &q.quad[i][j]).collect();
            let mut rhs = -q.lin[i].clone();
            for j in 0..n {
                if pins[j] == Pin::One {
                    rhs -= int(2) * &q.quad[i][j];
                }
            }
            row.push(rhs);
            system.push(row);
        }
        let Some(sol) = solve_affine(system, k) else { continue };
        let in_unit = |y: &[Rational]| y.iter().all(|v| !v.is_negative() && *v <= Rational::one());
        let place = |base: &mut Vec<Rational>, y: &[Rational]| {
            for (idx, &i) in free.iter().enumerate() {
                base[i] = y[idx].clone();
            }
        };
        if sol.null.is_empty() {
            if in_unit(&sol.particular) {
                place(&mut base, &sol.particular);
                offer(base, false, &mut best);
            }
            continue;
        }
        let y = min_norm(&sol.particular, &sol.null);
        if in_unit(&y) {
            let mut x = base.clone();
            place(&mut x, &y);
            offer(x, true, &mut best);
        }
        match (k, sol.null.len()) {
            (2, 1) => {
                if let Some((s0, s1)) = clip_line(&sol.particular, &sol.null[0]) {
                    for s in [s0, s1] {
                        let y: Vec<Rational> = sol.particular.iter().zip(&sol.null[0]).map(|(p, d)| p + &s * d).collect();
                        let mut x = base.clone();
                        place(&mut x, &y);
                        offer(x, true, &mut best);
                    }
                }
            }
            // Whole face stationary: q is constant there and the corners
            // (visited as their own faces) carry the value.
            (k, d) if k == d => {}
            (k, _) if k >= 3 => unexplored = true,
            _ => {}
        }
    }
    let (value, argmax, degenerate) = best.expect("corners are always candidates");
    Ok(BoxMax { value, argmax, degenerate, unexplored_singular_face: unexplored })
}

struct AffineSolution {
    particular: Vec<Rational>,
    null: Vec<Vec<Rational>>,
}

/// Solves `M y = r` given the augmented rows `[M | r]` with `k` unknowns.
fn solve_affine(mut rows: Vec<Vec<Rational>>, k: usize) -> Option<AffineSolution> {
    let m = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..=k {
                    let delta = &f * &rows[r][j];
                    rows[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut particular = vec![Rational::zero(); k];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = rows[i][k].clone();
    }
    let null = (0..k)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![Rational::zero(); k];
            v[f] = Rational::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -rows[i][f].clone();
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, null })
}

/// Point of `p + span(null)` closest to the origin.
fn min_norm(p: &[Rational], null: &[Vec<Rational>]) -> Vec<Rational> {
    let d = null.len();
    let dot = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Rational>();
    // Gram system G c = -N^T p.
    let mut rows: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            let mut row: Vec<Rational> = (0..d).map(|j| dot(&null[i], &null[j])).collect();
            row.push(-dot(&null[i], p));
            row
        })
        .collect();
    let sol = solve_affine(std::mem::take(&mut rows), d).expect("Gram matrix of a basis is invertible");
    let mut y = p.to_vec();
    for (c, v) in sol.particular.iter().zip(null) {
        for (yi, vi) in y.iter_mut().zip(v) {
            *yi += c * vi;
        }
    }
    y
}

/// Parameter range `[s0, s1]` with `p + s d` inside the unit box.
fn clip_line(p: &[Rational], d: &[Rational]) -> Option<(Rational, Rational)> {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for (pi, di) in p.iter().zip(d) {
        if di.is_zero() {
            if pi.is_negative() || *pi > Rational::one() {
                return None;
            }
            continue;
        }
        let a = -pi / di;
        let b = (Rational::one() - pi) / di;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        lo = Some(lo.map_or(a.clone(), |l| if a > l { a.clone() } else { l }));
        hi = Some(hi.map_or(b.clone(), |h| if b < h { b.clone() } else { h }));
    }
    match (lo, hi) {
        (Some(l), Some(h)) if l <= h => Some((l, h)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_rational, ratio};

    fn dec(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    /// 53.6175 - 36 p^2 + p (70.02 - 36 q) + 35.01 q - 9 q^2
    fn antisym_form() -> QuadraticForm {
        let mut q = QuadraticForm::zero(2);
        q.constant = dec("53.6175");
        q.add_monomial(0, 0, &int(-36));
        q.add_monomial(0, 1, &int(-36));
        q.add_monomial(1, 1, &int(-9));
        q.lin = vec![dec("70.02"), dec("35.01")];
        q
    }

    #[test]
    fn degenerate_stationary_line() {
        let q = antisym_form();
        let m = maximize_over_box(&q).unwrap();
        assert_eq!(m.value, dec("87.664725"));
        assert!(m.degenerate);
        assert_eq!(q.eval(&[dec("0.6"), dec("0.745")]), dec("87.664725"));
        // Every argmax lies on 2p + q = 1.945.
        assert_eq!(int(2) * &m.argmax[0] + &m.argmax[1], dec("1.945"));
    }

    #[test]
    fn separable_concave() {
        let mut q = QuadraticForm::zero(2);
        q.add_monomial(0, 0, &int(-1));
        q.add_monomial(1, 1, &int(-1));
        q.lin = vec![int(1), int(1)];
        let m = maximize_over_box(&q).unwrap();
        assert_eq!(m.value, ratio(1, 2));
        assert_eq!(m.argmax, vec![ratio(1, 2), ratio(1, 2)]);
        assert!(!m.degenerate);
    }

    #[test]
    fn convex_form_peaks_at_a_corner() {
        let mut q = QuadraticForm::zero(1);
        q.add_monomial(0, 0, &int(4));
        q.lin = vec![int(-3)];
        let m = maximize_over_box(&q).unwrap();
        assert_eq!(m.value, int(1));
        assert_eq!(m.argmax, vec![int(1)]);
    }

    #[test]
    fn rejects_large_dimension() {
        assert_eq!(maximize_over_box(&QuadraticForm::zero(7)), Err(Error::Dimension(7)));
    }

    #[test]
    fn compose_matches_direct_evaluation() {
        let q = antisym_form();
        // p = 1/2 + u/4, q = 1 - u
        let map = vec![
            Affine { coeffs: vec![ratio(1, 4)], constant: ratio(1, 2) },
            Affine { coeffs: vec![int(-1)], constant: int(1) },
        ];
        let c = q.compose(&map).unwrap();
        for u in [ratio(0, 1), ratio(1, 3), ratio(7, 5)] {
            let p = map[0].eval(&[u.clone()]);
            let qq = map[1].eval(&[u.clone()]);
            assert_eq!(c.eval(&[u]), q.eval(&[p, qq]));
        }
    }
}
