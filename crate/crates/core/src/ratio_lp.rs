//! The approximation-ratio linear program of an antisymmetric step
//! function, and extraction of a worst-case graph from an optimal solution.
//!
//! Rename the optimal assignment of a graph to all-ones by complementing the
//! vertices it sets to 0. Every edge endpoint then becomes a literal: a slot
//! `(sign, class)` where `sign = +1` means the endpoint literal is positive
//! and `class` is the bias class of the literal (a complemented vertex of
//! class `-i` is a negative literal of class `i`). An edge becomes a pair
//! type, an unordered pair of slots; `C+` (both slots positive) are the edges
//! the optimal cut satisfies. The LP puts weight on pair types, normalizes
//! the optimal cut to 1, and asks each class's aggregated out/in weight to
//! give a bias inside the class interval.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::digraph::{Assignment, WeightedDigraph};
use crate::error::{Error, Result};
use crate::scalar::{int, rational_from_f64, Rational, Scalar};
use crate::selection::AntisymPiecewise;
use crate::simplex::{
    solve_lp, Bound, FloatReport, LpNum, LpProblem, LpStatus, Relation, SolveMode,
};

/// Largest `ell` accepted in exact mode.
pub const EXACT_ELL_LIMIT: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LiteralSlot {
    /// `+1` or `-1`.
    pub sign: i8,
    /// Class index in `-ell..=ell`.
    pub class: i64,
}

impl LiteralSlot {
    pub fn new(sign: i8, class: i64, ell: usize) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Parameter(format!("slot sign must be +1 or -1, got {sign}")));
        }
        if class.unsigned_abs() as usize > ell {
            return Err(Error::Parameter(format!("slot class {class} outside [-{ell}, {ell}]")));
        }
        Ok(LiteralSlot { sign, class })
    }

    /// Position in `0..2(2 ell + 1)`: positive slots first, classes ascending.
    pub fn index(&self, ell: usize) -> usize {
        let width = 2 * ell + 1;
        let c = (self.class + ell as i64) as usize;
        if self.sign > 0 {
            c
        } else {
            width + c
        }
    }

    pub fn from_index(k: usize, ell: usize) -> Self {
        let width = 2 * ell + 1;
        let (sign, c) = if k < width { (1, k) } else { (-1, k - width) };
        LiteralSlot { sign, class: c as i64 - ell as i64 }
    }

    /// Probability that the literal is true: `S(class)` for a positive
    /// literal, `1 - S(class)` for a negative one.
    pub fn probability(&self, s: &AntisymPiecewise) -> Rational {
        let v = s.class_value(self.class);
        if self.sign > 0 {
            v
        } else {
            Rational::one() - v
        }
    }
}

impl fmt::Display for LiteralSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}1,{:+})", if self.sign > 0 { "+" } else { "-" }, self.class)
    }
}

/// Two slots, stored with the smaller index first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairType {
    slots: [LiteralSlot; 2],
}

impl PairType {
    pub fn new(a: LiteralSlot, b: LiteralSlot, ell: usize) -> Self {
        if a.index(ell) <= b.index(ell) {
            PairType { slots: [a, b] }
        } else {
            PairType { slots: [b, a] }
        }
    }

    pub fn slots(&self) -> &[LiteralSlot; 2] {
        &self.slots
    }

    /// Multiplicity `c(sign, class)` of a slot.
    pub fn count(&self, sign: i8, class: i64) -> u8 {
        self.slots.iter().filter(|s| s.sign == sign && s.class == class).count() as u8
    }

    /// Both endpoint literals positive, i.e. satisfied by the optimal cut.
    pub fn in_c_plus(&self) -> bool {
        self.slots.iter().all(|s| s.sign > 0)
    }

    /// `p(c)`: probability that the edge is satisfied.
    pub fn probability(&self, s: &AntisymPiecewise) -> Rational {
        self.slots[0].probability(s) * self.slots[1].probability(s)
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.slots[0], self.slots[1])
    }
}

/// All pair types for `ell`, in column order.
pub fn pair_types(ell: usize) -> Vec<PairType> {
    let m = 2 * (2 * ell + 1);
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for a in 0..m {
        for b in a..m {
            out.push(PairType { slots: [LiteralSlot::from_index(a, ell), LiteralSlot::from_index(b, ell)] });
        }
    }
    out
}

/// Rows of the ratio LP belonging to one class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRows {
    pub class: i64,
    /// `W+ - W- >= inf(I) (W+ + W-)`.
    pub lower: usize,
    /// `W+ - W- <= sup(I) (W+ + W-)`.
    pub upper: usize,
}

/// A ratio LP with its index maps: column `k` is `pairs[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioLp<T> {
    pub problem: LpProblem<T>,
    pub pairs: Vec<PairType>,
    pub ell: usize,
    pub normalization_row: usize,
    pub class_rows: Vec<ClassRows>,
}

/// Closure endpoints of every class interval, keyed by class.
fn class_bounds(s: &AntisymPiecewise) -> Vec<(i64, Rational, Rational)> {
    let ell = s.ell() as i64;
    (-ell..=ell)
        .map(|i| {
            let iv = s.class_interval(i);
            (i, iv.lo, iv.hi)
        })
        .collect()
}

fn build<T: LpNum>(s: &AntisymPiecewise) -> RatioLp<T> {
    let ell = s.ell();
    let pairs = pair_types(ell);
    let n = pairs.len();
    let mut problem = LpProblem::<T>::new(n);
    let slot_p: Vec<T> =
        (0..2 * (2 * ell + 1)).map(|k| T::from_rational(&LiteralSlot::from_index(k, ell).probability(s))).collect();
    for (k, c) in pairs.iter().enumerate() {
        problem.objective[k] = slot_p[c.slots[0].index(ell)].times(&slot_p[c.slots[1].index(ell)]);
    }
    let norm: Vec<(usize, T)> =
        pairs.iter().enumerate().filter(|(_, c)| c.in_c_plus()).map(|(k, _)| (k, T::one())).collect();
    let normalization_row = problem.add_constraint(norm, Relation::Eq, T::one());

    let bounds = class_bounds(s);
    let width = 2 * ell + 1;
    let mut lower_rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); width];
    let mut upper_rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); width];
    // (1 - b) W+ - (1 + b) W- >= 0 and (a - 1) W+ + (a + 1) W- >= 0.
    let coef: Vec<[T; 4]> = bounds
        .iter()
        .map(|(_, a_inf, a_sup)| {
            let one = Rational::one();
            [
                T::from_rational(&(&one - a_inf)),
                T::from_rational(&-(&one + a_inf)),
                T::from_rational(&(a_sup - &one)),
                T::from_rational(&(a_sup + &one)),
            ]
        })
        .collect();
    for (k, c) in pairs.iter().enumerate() {
        let mut classes: Vec<i64> = c.slots.iter().map(|s| s.class).collect();
        classes.dedup();
        for class in classes {
            let ci = (class + ell as i64) as usize;
            let plus = T::from_rational(&int(c.count(1, class) as i64));
            let minus = T::from_rational(&int(c.count(-1, class) as i64));
            let [l_p, l_m, u_p, u_m] = &coef[ci];
            let lo = l_p.times(&plus).plus(&l_m.times(&minus));
            let hi = u_p.times(&plus).plus(&u_m.times(&minus));
            if !lo.is_zero() {
                lower_rows[ci].push((k, lo));
            }
            if !hi.is_zero() {
                upper_rows[ci].push((k, hi));
            }
        }
    }
    let mut class_rows = Vec::with_capacity(width);
    for (ci, (lo, hi)) in lower_rows.into_iter().zip(upper_rows).enumerate() {
        let lower = problem.add_constraint(lo, Relation::Ge, T::zero());
        let upper = problem.add_constraint(hi, Relation::Ge, T::zero());
        class_rows.push(ClassRows { class: ci as i64 - ell as i64, lower, upper });
    }
    RatioLp { problem, pairs, ell, normalization_row, class_rows }
}

/// The ratio LP with exact rational coefficients.
pub fn build_ratio_lp(s: &AntisymPiecewise) -> RatioLp<Rational> {
    build(s)
}

/// The same LP with binary64 coefficients, built directly (no rational
/// intermediate matrix) so that large discretizations stay cheap.
pub fn build_ratio_lp_f64(s: &AntisymPiecewise) -> RatioLp<f64> {
    build(s)
}

/// Explicit dual of the ratio LP: `max y` over a free `y` (variable 0) and
/// nonnegative multipliers of the class rows (variables `1..`), one row per
/// pair type: `y [c in C+] + sum_k z_k G_k(c) <= p(c)`. Written as a
/// minimization of `-y`.
pub fn build_ratio_dual(s: &AntisymPiecewise) -> LpProblem<Rational> {
    let primal = build_ratio_lp(s);
    let rows = primal.problem.constraints.len();
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); primal.pairs.len()];
    for (r, con) in primal.problem.constraints.iter().enumerate() {
        for (k, a) in &con.coeffs {
            cols[*k].push((r, a.clone()));
        }
    }
    let mut dual = LpProblem::<Rational>::new(rows);
    dual.objective[primal.normalization_row] = -Rational::one();
    dual.bounds[primal.normalization_row] = Bound::Free;
    for (k, col) in cols.into_iter().enumerate() {
        dual.add_constraint(col, Relation::Le, primal.problem.objective[k].clone());
    }
    dual
}

/// An optimal ratio-LP solution: the value and the positive pair weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSolution {
    pub value: Scalar,
    pub ell: usize,
    pub weights: Vec<(PairType, Scalar)>,
    pub report: Option<FloatReport>,
    pub iterations: usize,
}

pub fn solve_ratio_lp(s: &AntisymPiecewise, mode: SolveMode) -> Result<RatioSolution> {
    match mode {
        SolveMode::Exact => {
            if s.ell() > EXACT_ELL_LIMIT {
                return Err(Error::Parameter(format!(
                    "exact mode supports ell <= {EXACT_ELL_LIMIT}, got {}",
                    s.ell()
                )));
            }
            let lp = build_ratio_lp(s);
            let sol = solve_lp(&lp.problem)?;
            finish(&lp, sol.status, sol.objective, &sol.primal, None, sol.iterations, Scalar::Exact)
        }
        SolveMode::Float => {
            let lp = build_ratio_lp_f64(s);
            let sol = solve_lp(&lp.problem)?;
            finish(&lp, sol.status, sol.objective, &sol.primal, sol.report, sol.iterations, Scalar::Float)
        }
    }
}

fn finish<T: LpNum>(
    lp: &RatioLp<T>,
    status: LpStatus,
    objective: T,
    primal: &[T],
    report: Option<FloatReport>,
    iterations: usize,
    wrap: impl Fn(T) -> Scalar,
) -> Result<RatioSolution> {
    if status != LpStatus::Optimal {
        return Err(Error::LpStatus(format!("ratio LP reported {status:?}")));
    }
    let weights = lp
        .pairs
        .iter()
        .zip(primal)
        .filter(|(_, w)| **w > T::zero())
        .map(|(c, w)| (*c, wrap(w.clone())))
        .collect();
    Ok(RatioSolution { value: wrap(objective), ell: lp.ell, weights, report, iterations })
}

/// Approximation ratio of the oblivious algorithm using `s`.
pub fn compute_ratio(s: &AntisymPiecewise, mode: SolveMode) -> Result<Scalar> {
    Ok(solve_ratio_lp(s, mode)?.value)
}

/// A graph realising an LP solution plus the cut playing the optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub graph: WeightedDigraph,
    pub reference: Assignment,
}

/// Relative inward offset used when a vertex lands on an excluded endpoint.
const NUDGE: (i64, i64) = (1, 1_000_000_000);

fn vertex_name(bit: bool, class: i64, copy: char) -> String {
    format!("{}:{:+}{}", u8::from(bit), class, copy)
}

/// Endpoint role of a slot: `(bit, class)` of the vertex it lands on.
fn decode(slot: &LiteralSlot, as_tail: bool) -> (bool, i64) {
    match (slot.sign > 0, as_tail) {
        (true, true) => (true, slot.class),
        (true, false) => (false, -slot.class),
        (false, true) => (false, -slot.class),
        (false, false) => (true, slot.class),
    }
}

/// Builds a graph whose ratio (against the reference cut) equals the LP
/// value up to the small corrections described below.
///
/// Each weighted pair type becomes two edges of half weight, one per choice
/// of tail slot, so vertex `(1, i)` collects exactly the `W+`/`W-` of class
/// `i` and `(0, -i)` the mirrored amounts. The graph is then doubled
/// bipartitely (copies `a`, `b`, each edge `u -> v` becoming `u_a -> v_b`
/// and `u_b -> v_a`) so that pair types decoding to loops become ordinary
/// edges. Where a bias falls on an excluded interval endpoint, or outside its
/// class through rounding, an edge to a sink or from a source vertex moves it
/// just inside the class.
pub fn extract_witness_graph(sol: &RatioSolution, s: &AntisymPiecewise) -> Result<Witness> {
    if sol.ell != s.ell() {
        return Err(Error::Parameter(format!("solution has ell = {} but selection has {}", sol.ell, s.ell())));
    }
    let mut edges: BTreeMap<(String, String), Rational> = BTreeMap::new();
    let mut push = |t: String, h: String, w: &Rational| {
        *edges.entry((t, h)).or_insert_with(Rational::zero) += w;
    };
    let half = Rational::new(1.into(), 2.into());
    let quarter = &half * &half;
    for (c, w) in &sol.weights {
        let w = w.to_rational().ok_or_else(|| Error::Reconstruction("non-finite LP weight".into()))?;
        let [x, y] = c.slots;
        for (tail, head) in [(x, y), (y, x)] {
            let (tb, tc) = decode(&tail, true);
            let (hb, hc) = decode(&head, false);
            let q = &w * &quarter;
            push(vertex_name(tb, tc, 'a'), vertex_name(hb, hc, 'b'), &q);
            push(vertex_name(tb, tc, 'b'), vertex_name(hb, hc, 'a'), &q);
        }
    }
    // Degree sums and class targets.
    let mut out_w: BTreeMap<String, Rational> = BTreeMap::new();
    let mut in_w: BTreeMap<String, Rational> = BTreeMap::new();
    for ((t, h), w) in &edges {
        *out_w.entry(t.clone()).or_insert_with(Rational::zero) += w;
        *in_w.entry(h.clone()).or_insert_with(Rational::zero) += w;
    }
    let names: Vec<String> = out_w.keys().chain(in_w.keys()).cloned().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let sink = "sink".to_string();
    let source = "source".to_string();
    let mut extra: Vec<(String, String, Rational)> = Vec::new();
    let nudge = Rational::new(NUDGE.0.into(), NUDGE.1.into());
    for v in &names {
        let (bit, class) = parse_name(v)?;
        let _ = bit;
        let o = out_w.get(v).cloned().unwrap_or_else(Rational::zero);
        let i = in_w.get(v).cloned().unwrap_or_else(Rational::zero);
        let beta = (&o - &i) / (&o + &i);
        let iv = s.class_interval(class);
        if iv.contains(&beta) {
            continue;
        }
        let target = if iv.lo == iv.hi {
            iv.lo.clone()
        } else if beta < iv.lo || (beta == iv.lo && !iv.lo_closed) {
            if iv.lo_closed {
                iv.lo.clone()
            } else {
                &iv.lo + (&iv.hi - &iv.lo) * &nudge
            }
        } else if iv.hi_closed {
            iv.hi.clone()
        } else {
            &iv.hi - (&iv.hi - &iv.lo) * &nudge
        };
        let one = Rational::one();
        if target > beta {
            let x = (&target * (&o + &i) - (&o - &i)) / (&one - &target);
            extra.push((v.clone(), sink.clone(), x));
        } else {
            let y = ((&o - &i) - &target * (&o + &i)) / (&one + &target);
            extra.push((source.clone(), v.clone(), y));
        }
    }
    let mut b = WeightedDigraph::builder();
    for ((t, h), w) in edges {
        b.edge(&t, &h, Scalar::Exact(w))?;
    }
    for (t, h, w) in extra {
        b.edge(&t, &h, Scalar::Exact(w))?;
    }
    let graph = b.build();
    let mut reference = Assignment::new();
    for v in graph.vertices() {
        let bit = if v == &sink {
            false
        } else if v == &source {
            true
        } else {
            parse_name(v)?.0
        };
        reference.set(v, bit);
    }
    // Every vertex must now sit in its intended class.
    for (k, v) in graph.vertices().iter().enumerate() {
        if v == &sink || v == &source {
            continue;
        }
        let (_, class) = parse_name(v)?;
        if s.class_of(&graph.bias(k)?)? != class {
            return Err(Error::DecodeInconsistency(format!("vertex {v} left its class")));
        }
    }
    Ok(Witness { graph, reference })
}

fn parse_name(v: &str) -> Result<(bool, i64)> {
    let bad = || Error::DecodeInconsistency(format!("unexpected witness vertex {v:?}"));
    let (bit, rest) = v.split_once(':').ok_or_else(bad)?;
    let class = rest.trim_end_matches(['a', 'b']).parse::<i64>().map_err(|_| bad())?;
    Ok((bit == "1", class))
}

/// Converts a float LP weight vector to exact values.
pub fn exact_weights(sol: &RatioSolution) -> Result<Vec<(PairType, Rational)>> {
    sol.weights
        .iter()
        .map(|(c, w)| {
            let r = match w {
                Scalar::Exact(r) => Some(r.clone()),
                Scalar::Float(f) => rational_from_f64(*f),
            };
            r.map(|r| (*c, r)).ok_or_else(|| Error::Reconstruction("non-finite LP weight".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oblivious::{ratio_on_graph, Denominator};
    use crate::scalar::ratio;
    use crate::selection::discretize_plsigmoid;
    use crate::simplex::SolveMode;

    fn one_class(p1: Rational) -> AntisymPiecewise {
        AntisymPiecewise::new(vec![int(0), int(1)], vec![p1]).unwrap()
    }

    #[test]
    fn column_count() {
        for ell in 0..5usize {
            let m = 2 * (2 * ell + 1);
            assert_eq!(pair_types(ell).len(), m * (m + 1) / 2);
        }
        let lp = build_ratio_lp(&discretize_plsigmoid(&ratio(1, 2), 3).unwrap());
        assert_eq!(lp.problem.constraints.len(), 1 + 2 * 7);
    }

    #[test]
    fn constant_half_lp() {
        let s = AntisymPiecewise::constant_half();
        let lp = build_ratio_lp(&s);
        assert!(lp.problem.objective.iter().all(|p| *p == ratio(1, 4)));
        assert_eq!(compute_ratio(&s, SolveMode::Exact).unwrap(), Scalar::from_ratio(1, 4));
    }

    #[test]
    fn slot_probabilities() {
        let s = one_class(int(1));
        let c = PairType::new(LiteralSlot::new(1, 1, 1).unwrap(), LiteralSlot::new(-1, 1, 1).unwrap(), 1);
        assert_eq!(c.probability(&s), int(0));
        let s = one_class(ratio(3, 4));
        let c = PairType::new(LiteralSlot::new(1, 1, 1).unwrap(), LiteralSlot::new(-1, -1, 1).unwrap(), 1);
        assert_eq!(c.probability(&s), ratio(9, 16));
        assert!(LiteralSlot::new(1, 2, 1).is_err());
    }

    #[test]
    fn dual_matches_primal() {
        let s = discretize_plsigmoid(&ratio(1, 2), 3).unwrap();
        let primal = compute_ratio(&s, SolveMode::Exact).unwrap();
        let dual = solve_lp(&build_ratio_dual(&s)).unwrap();
        assert_eq!(Scalar::Exact(-dual.objective), primal);
    }

    #[test]
    fn exact_and_float_agree() {
        let s = discretize_plsigmoid(&ratio(1, 2), 4).unwrap();
        let e = compute_ratio(&s, SolveMode::Exact).unwrap().to_f64();
        let f = compute_ratio(&s, SolveMode::Float).unwrap().to_f64();
        assert!((e - f).abs() < 1e-9, "{e} vs {f}");
    }

    #[test]
    fn witness_round_trip() {
        for ell in [0usize, 2, 3] {
            let s = if ell == 0 { AntisymPiecewise::constant_half() } else { discretize_plsigmoid(&ratio(1, 2), ell).unwrap() };
            for mode in [SolveMode::Exact, SolveMode::Float] {
                let sol = solve_ratio_lp(&s, mode).unwrap();
                let w = extract_witness_graph(&sol, &s).unwrap();
                let r = ratio_on_graph(&w.graph, &s, &Denominator::ReferenceCut(w.reference.clone())).unwrap();
                assert!((r.ratio.to_f64() - sol.value.to_f64()).abs() < 1e-6, "ell {ell}: {} vs {}", r.ratio, sol.value);
            }
        }
    }
}
