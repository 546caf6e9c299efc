//! Linear programs in general form and a self-contained revised simplex
//! solver with exact-rational and binary64 backends.
//!
//! Both backends share one implementation: a two-phase revised simplex that
//! keeps an explicit dense basis inverse. The exact backend uses Dantzig
//! pricing and falls back to Bland's rule during runs of degenerate pivots,
//! which guarantees termination. The float backend prices columns in chunks
//! (partial pricing), relaxes inequality right-hand sides by tiny amounts to
//! break degeneracy, then restores them and repairs primal feasibility with
//! dual simplex pivots.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_f64, format_rational, rational_to_f64, Rational};

/// Tolerances of the float backend.
pub mod tol {
    /// Primal feasibility, relative to `1 + |rhs|`.
    pub const FEASIBILITY: f64 = 1e-9;
    /// A reduced cost below `-REDUCED_COST` makes a column eligible.
    pub const REDUCED_COST: f64 = 1e-10;
    /// Smallest acceptable pivot element.
    pub const PIVOT: f64 = 1e-9;
    /// Relative size of the right-hand-side relaxation.
    pub const PERTURBATION: f64 = 1e-7;
}

/// Arithmetic the solver needs from a coefficient type.
pub trait LpNum: Clone + fmt::Debug + PartialOrd + Zero + One + Send + Sync {
    const EXACT: bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    /// `self -= a * b`.
    fn sub_mul(&mut self, a: &Self, b: &Self);
    fn abs(&self) -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn render(&self) -> String;
}

impl LpNum for f64 {
    const EXACT: bool = false;
    #[inline]
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    #[inline]
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    #[inline]
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    #[inline]
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    #[inline]
    fn negate(&self) -> Self {
        -self
    }
    #[inline]
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format_f64(*self)
    }
}

impl LpNum for Rational {
    const EXACT: bool = true;
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite")
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

/// Which backend to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Bound<T> {
    /// `x >= lo`; the default is `x >= 0`.
    Lower(T),
    Boxed(T, T),
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    /// Sparse row: `(variable, coefficient)` with distinct variables.
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

/// `minimize c.x` subject to sparse linear rows and per-variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<Bound<T>>,
}

impl<T: LpNum> LpProblem<T> {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            objective: vec![T::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![Bound::Lower(T::zero()); num_vars],
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, T)>, relation: Relation, rhs: T) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars || self.bounds.len() != self.num_vars {
            return Err(Error::Parameter("objective/bounds length differs from num_vars".into()));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            let mut seen = vec![false; self.num_vars];
            for (j, _) in &c.coeffs {
                if *j >= self.num_vars || seen[*j] {
                    return Err(Error::Parameter(format!("constraint {k} has a bad or repeated variable {j}")));
                }
                seen[*j] = true;
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let Bound::Boxed(lo, hi) = b {
                if lo > hi {
                    return Err(Error::Parameter(format!("variable {j} has empty bounds")));
                }
            }
        }
        Ok(())
    }

    /// Evaluates `c.x`.
    pub fn objective_at(&self, x: &[T]) -> T {
        self.objective.iter().zip(x).fold(T::zero(), |acc, (c, v)| acc.plus(&c.times(v)))
    }

    /// Largest violation of any row or bound at `x`, relative to `1 + |rhs|`.
    pub fn max_violation(&self, x: &[T]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs = c.coeffs.iter().fold(T::zero(), |acc, (j, a)| acc.plus(&a.times(&x[*j])));
            let diff = lhs.minus(&c.rhs).to_f64();
            let scale = 1.0 + c.rhs.to_f64().abs();
            let v = match c.relation {
                Relation::Le => diff.max(0.0),
                Relation::Ge => (-diff).max(0.0),
                Relation::Eq => diff.abs(),
            };
            worst = worst.max(v / scale);
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let v = x[j].to_f64();
            let viol = match b {
                Bound::Lower(lo) => (lo.to_f64() - v).max(0.0),
                Bound::Boxed(lo, hi) => (lo.to_f64() - v).max(v - hi.to_f64()).max(0.0),
                Bound::Free => 0.0,
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Plain-text listing, one row per line.
    pub fn to_listing(&self) -> String {
        self.to_string()
    }
}

impl LpProblem<Rational> {
    pub fn to_f64(&self) -> LpProblem<f64> {
        let cv = rational_to_f64;
        LpProblem {
            num_vars: self.num_vars,
            objective: self.objective.iter().map(cv).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c.coeffs.iter().map(|(j, a)| (*j, cv(a))).collect(),
                    relation: c.relation,
                    rhs: cv(&c.rhs),
                })
                .collect(),
            bounds: self
                .bounds
                .iter()
                .map(|b| match b {
                    Bound::Lower(lo) => Bound::Lower(cv(lo)),
                    Bound::Boxed(lo, hi) => Bound::Boxed(cv(lo), cv(hi)),
                    Bound::Free => Bound::Free,
                })
                .collect(),
        }
    }
}

impl<T: LpNum> fmt::Display for LpProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |j: &usize, a: &T| format!("{} x{}", a.render(), j);
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| term(&j, c))
            .collect();
        writeln!(f, "minimize {}", if obj.is_empty() { "0".into() } else { obj.join(" + ") })?;
        for (k, c) in self.constraints.iter().enumerate() {
            let row: Vec<String> = c.coeffs.iter().map(|(j, a)| term(j, a)).collect();
            writeln!(f, "c{k}: {} {} {}", row.join(" + "), c.relation, c.rhs.render())?;
        }
        for (j, b) in self.bounds.iter().enumerate() {
            match b {
                Bound::Lower(lo) if lo.is_zero() => {}
                Bound::Lower(lo) => writeln!(f, "x{j} >= {}", lo.render())?,
                Bound::Boxed(lo, hi) => writeln!(f, "{} <= x{j} <= {}", lo.render(), hi.render())?,
                Bound::Free => writeln!(f, "x{j} free")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Float-mode quality report of an optimal solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatReport {
    /// Largest relative row/bound violation of the primal point.
    pub primal_residual: f64,
    /// Largest negative reduced cost at the final basis.
    pub dual_infeasibility: f64,
    /// `|primal objective - dual objective|`.
    pub duality_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub objective: T,
    /// Values of the original variables (empty unless optimal).
    pub primal: Vec<T>,
    /// One multiplier per original constraint, sign convention
    /// `c - A^T y >= 0` on nonnegative columns.
    pub dual: Vec<T>,
    pub iterations: usize,
    pub report: Option<FloatReport>,
}

impl<T: LpNum> LpSolution<T> {
    fn without_point(status: LpStatus, iterations: usize) -> Self {
        LpSolution { status, objective: T::zero(), primal: Vec::new(), dual: Vec::new(), iterations, report: None }
    }
}

/// Solver options; the defaults suit both backends.
#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Number of pricing chunks for partial pricing (1 = full pricing).
    pub pricing_chunks: usize,
    /// Refactorize the basis inverse every this many pivots (float only).
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_streak: usize,
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { pricing_chunks: 8, refactor_every: 100, degenerate_streak: 50, max_iterations: None }
    }
}

pub fn solve_lp<T: LpNum>(p: &LpProblem<T>) -> Result<LpSolution<T>> {
    solve_lp_with(p, &SimplexOptions::default())
}

pub fn solve_lp_with<T: LpNum>(p: &LpProblem<T>, opts: &SimplexOptions) -> Result<LpSolution<T>> {
    p.validate()?;
    let std = StandardForm::build(p, !T::EXACT);
    let mut s = Simplex::new(&std, opts);
    let status = s.run()?;
    if status != LpStatus::Optimal {
        return Ok(LpSolution::without_point(status, s.iterations));
    }
    let x_std = s.primal_std();
    let primal = std.recover(&x_std);
    let objective = p.objective_at(&primal);
    let y_std = s.duals();
    let dual: Vec<T> = std.row_sign[..std.orig_rows].iter().zip(&y_std).map(|(sg, y)| if *sg { y.negate() } else { y.clone() }).collect();
    let report = if T::EXACT {
        None
    } else {
        let dual_obj = std.b.iter().zip(&y_std).fold(T::zero(), |acc, (b, y)| acc.plus(&b.times(y))).plus(&std.obj_offset);
        let primal_residual = p.max_violation(&primal);
        let dual_infeasibility = s.dual_infeasibility();
        let duality_gap = objective.minus(&dual_obj).to_f64().abs();
        if primal_residual > tol::FEASIBILITY * 10.0 {
            return Err(Error::NumericDegeneracy(format!("primal residual {primal_residual:e} after cleanup")));
        }
        Some(FloatReport { primal_residual, dual_infeasibility, duality_gap })
    };
    Ok(LpSolution { status, objective, primal, dual, iterations: s.iterations, report })
}

/// `min c.x, A x = b, x >= 0, b >= 0` with column-major `A`.
struct StandardForm<T> {
    m: usize,
    orig_rows: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<T>,
    cost: Vec<T>,
    b: Vec<T>,
    /// `b` with inequality rows slightly relaxed (float backend only).
    b_relaxed: Vec<T>,
    /// Row was multiplied by -1 to make its rhs nonnegative.
    row_sign: Vec<bool>,
    /// Per column: slack of a row (Some(row)) gets a +1 entry in that row.
    slack_of: Vec<Option<usize>>,
    obj_offset: T,
    /// How to rebuild each original variable from standard columns.
    var_map: Vec<VarMap<T>>,
}

enum VarMap<T> {
    Shift { col: usize, lo: T },
    Split { pos: usize, neg: usize },
}

impl<T: LpNum> StandardForm<T> {
    fn build(p: &LpProblem<T>, relax: bool) -> Self {
        let n = p.num_vars;
        // Structural columns after bound handling.
        let mut var_map = Vec::with_capacity(n);
        let mut ncols = 0usize;
        let mut extra_rows: Vec<(usize, T)> = Vec::new();
        for b in &p.bounds {
            match b {
                Bound::Lower(lo) => {
                    var_map.push(VarMap::Shift { col: ncols, lo: lo.clone() });
                    ncols += 1;
                }
                Bound::Boxed(lo, hi) => {
                    var_map.push(VarMap::Shift { col: ncols, lo: lo.clone() });
                    extra_rows.push((ncols, hi.minus(lo)));
                    ncols += 1;
                }
                Bound::Free => {
                    var_map.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                    ncols += 2;
                }
            }
        }
        // Rows in terms of structural columns.
        let mut rows: Vec<(Vec<(usize, T)>, Relation, T)> = Vec::new();
        let mut obj_offset = T::zero();
        for c in &p.constraints {
            let mut coeffs = Vec::with_capacity(c.coeffs.len());
            let mut rhs = c.rhs.clone();
            for (j, a) in &c.coeffs {
                match &var_map[*j] {
                    VarMap::Shift { col, lo } => {
                        rhs.sub_mul(a, lo);
                        coeffs.push((*col, a.clone()));
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs.push((*pos, a.clone()));
                        coeffs.push((*neg, a.negate()));
                    }
                }
            }
            rows.push((coeffs, c.relation, rhs));
        }
        let orig_rows = rows.len();
        for (col, width) in extra_rows {
            rows.push((vec![(col, T::one())], Relation::Le, width));
        }
        let mut cost = vec![T::zero(); ncols];
        for (j, c) in p.objective.iter().enumerate() {
            match &var_map[j] {
                VarMap::Shift { col, lo } => {
                    cost[*col] = c.clone();
                    obj_offset = obj_offset.plus(&c.times(lo));
                }
                VarMap::Split { pos, neg } => {
                    cost[*pos] = c.clone();
                    cost[*neg] = c.negate();
                }
            }
        }
        let m = rows.len();
        let mut row_sign = vec![false; m];
        let mut b = vec![T::zero(); m];
        let mut b_relaxed = vec![T::zero(); m];
        // Deterministic pseudo-random relaxation so runs are reproducible.
        let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); ncols];
        let mut slack_of = vec![None; ncols];
        let mut slack_cols: Vec<(usize, T)> = Vec::new();
        for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            let mut loose = rhs.clone();
            if relax && rel != Relation::Eq {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                let delta = T::from_f64(tol::PERTURBATION * (1.0 + u) * (1.0 + rhs.to_f64().abs()));
                loose = if rel == Relation::Le { loose.plus(&delta) } else { loose.minus(&delta) };
            }
            let flip = loose < T::zero();
            row_sign[i] = flip;
            b[i] = if flip { rhs.negate() } else { rhs };
            b_relaxed[i] = if flip { loose.negate() } else { loose };
            for (j, a) in coeffs {
                cols[j].push((i, if flip { a.negate() } else { a }));
            }
            let slack = match rel {
                Relation::Le => Some(T::one()),
                Relation::Ge => Some(T::one().negate()),
                Relation::Eq => None,
            };
            if let Some(sv) = slack {
                let sv = if flip { sv.negate() } else { sv };
                slack_cols.push((i, sv));
            }
        }
        for (i, sv) in slack_cols {
            cols.push(vec![(i, sv.clone())]);
            cost.push(T::zero());
            slack_of.push(if sv > T::zero() { Some(i) } else { None });
        }
        let mut col_start = Vec::with_capacity(cols.len() + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_start.push(0);
        for c in cols {
            for (i, v) in c {
                row_idx.push(i);
                vals.push(v);
            }
            col_start.push(row_idx.len());
        }
        StandardForm {
            m,
            orig_rows,
            col_start,
            row_idx,
            vals,
            cost,
            b,
            b_relaxed,
            row_sign,
            slack_of,
            obj_offset,
            var_map,
        }
    }

    fn ncols(&self) -> usize {
        self.col_start.len() - 1
    }

    fn recover(&self, x: &[T]) -> Vec<T> {
        self.var_map
            .iter()
            .map(|vm| match vm {
                VarMap::Shift { col, lo } => x[*col].plus(lo),
                VarMap::Split { pos, neg } => x[*pos].minus(&x[*neg]),
            })
            .collect()
    }
}

struct Simplex<'a, T> {
    sf: &'a StandardForm<T>,
    opts: &'a SimplexOptions,
    m: usize,
    /// Columns `0..ncols` are real; `ncols + i` is the artificial of row `i`.
    ncols: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<T>,
    x_b: Vec<T>,
    b: Vec<T>,
    phase_one: bool,
    iterations: usize,
    since_refactor: usize,
    price_cursor: usize,
}

impl<'a, T: LpNum> Simplex<'a, T> {
    fn new(sf: &'a StandardForm<T>, opts: &'a SimplexOptions) -> Self {
        let m = sf.m;
        let ncols = sf.ncols();
        let mut basis = vec![usize::MAX; m];
        for j in 0..ncols {
            if let Some(i) = sf.slack_of[j] {
                if basis[i] == usize::MAX {
                    basis[i] = j;
                }
            }
        }
        for (i, bj) in basis.iter_mut().enumerate() {
            if *bj == usize::MAX {
                *bj = ncols + i;
            }
        }
        let mut is_basic = vec![false; ncols + m];
        for &j in &basis {
            is_basic[j] = true;
        }
        let mut binv = vec![T::zero(); m * m];
        for i in 0..m {
            binv[i * m + i] = T::one();
        }
        let b = sf.b_relaxed.clone();
        let x_b = b.clone();
        Simplex {
            sf,
            opts,
            m,
            ncols,
            basis,
            is_basic,
            binv,
            x_b,
            b,
            phase_one: true,
            iterations: 0,
            since_refactor: 0,
            price_cursor: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.ncols
    }

    fn cost(&self, j: usize) -> T {
        if self.phase_one {
            if self.is_artificial(j) {
                T::one()
            } else {
                T::zero()
            }
        } else if self.is_artificial(j) {
            T::zero()
        } else {
            self.sf.cost[j].clone()
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, T)> {
        if self.is_artificial(j) {
            return vec![(j - self.ncols, T::one())];
        }
        let (s, e) = (self.sf.col_start[j], self.sf.col_start[j + 1]);
        (s..e).map(|k| (self.sf.row_idx[k], self.sf.vals[k].clone())).collect()
    }

    fn tol_cost(&self) -> T {
        if T::EXACT {
            T::zero()
        } else {
            T::from_f64(tol::REDUCED_COST)
        }
    }

    fn tol_pivot(&self) -> T {
        if T::EXACT {
            T::zero()
        } else {
            T::from_f64(tol::PIVOT)
        }
    }

    fn tol_feas(&self) -> T {
        if T::EXACT {
            T::zero()
        } else {
            T::from_f64(tol::FEASIBILITY)
        }
    }

    fn iteration_cap(&self) -> usize {
        self.opts.max_iterations.unwrap_or(200 * (self.m + 10) + 20 * self.ncols)
    }

    /// `y^T = c_B^T B^{-1}`.
    fn simplex_multipliers(&self) -> Vec<T> {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for i in 0..m {
            let c = self.cost(self.basis[i]);
            if c.is_zero() {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for (yk, bk) in y.iter_mut().zip(row) {
                if !bk.is_zero() {
                    *yk = yk.plus(&c.times(bk));
                }
            }
        }
        y
    }

    #[inline]
    fn reduced_cost(&self, j: usize, y: &[T]) -> T {
        let mut d = self.cost(j);
        if self.is_artificial(j) {
            d.sub_mul(&y[j - self.ncols], &T::one());
            return d;
        }
        for k in self.sf.col_start[j]..self.sf.col_start[j + 1] {
            d.sub_mul(&y[self.sf.row_idx[k]], &self.sf.vals[k]);
        }
        d
    }

    fn eligible(&self, j: usize) -> bool {
        !self.is_basic[j] && (self.phase_one || !self.is_artificial(j))
    }

    /// Entering column, or `None` at optimality.
    fn price(&mut self, y: &[T], bland: bool) -> Option<usize> {
        let total = if self.phase_one { self.ncols + self.m } else { self.ncols };
        let neg_tol = self.tol_cost().negate();
        if bland {
            return (0..total).find(|&j| self.eligible(j) && self.reduced_cost(j, y) < neg_tol);
        }
        let chunks = self.opts.pricing_chunks.max(1).min(total.max(1));
        let size = total.div_ceil(chunks);
        let mut best: Option<(usize, T)> = None;
        for step in 0..chunks {
            let c = (self.price_cursor + step) % chunks;
            let (s, e) = (c * size, ((c + 1) * size).min(total));
            for j in s..e {
                if !self.eligible(j) {
                    continue;
                }
                let d = self.reduced_cost(j, y);
                if d < neg_tol && best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                    best = Some((j, d));
                }
            }
            if best.is_some() {
                self.price_cursor = (c + 1) % chunks;
                break;
            }
        }
        best.map(|(j, _)| j)
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m;
        let col = self.column(j);
        let mut d = vec![T::zero(); m];
        for (i, di) in d.iter_mut().enumerate() {
            let row = &self.binv[i * m..(i + 1) * m];
            for (k, a) in &col {
                let bik = &row[*k];
                if !bik.is_zero() {
                    *di = di.plus(&bik.times(a));
                }
            }
        }
        d
    }

    /// Leaving row for entering direction `d` (Harris two-pass in float,
    /// smallest basic index among ties under Bland).
    fn ratio_test(&self, d: &[T], bland: bool) -> Option<usize> {
        let piv = self.tol_pivot();
        if T::EXACT {
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.m {
                if d[i] > piv {
                    let r = self.x_b[i].over(&d[i]);
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => r < *br || (r == *br && self.tie_break(i, *bi, d, bland)),
                    };
                    if better {
                        best = Some((i, r));
                    }
                }
            }
            return best.map(|(i, _)| i);
        }
        let feas = self.tol_feas();
        let mut theta_max: Option<T> = None;
        for i in 0..self.m {
            if d[i] > piv {
                let xb = if self.x_b[i] < T::zero() { T::zero() } else { self.x_b[i].clone() };
                let r = xb.plus(&feas).over(&d[i]);
                if theta_max.as_ref().is_none_or(|t| r < *t) {
                    theta_max = Some(r);
                }
            }
        }
        let theta_max = theta_max?;
        let mut best: Option<usize> = None;
        for i in 0..self.m {
            if d[i] > piv {
                let xb = if self.x_b[i] < T::zero() { T::zero() } else { self.x_b[i].clone() };
                let r = xb.over(&d[i]);
                if r <= theta_max {
                    let better = match best {
                        None => true,
                        Some(bi) => {
                            if bland {
                                self.basis[i] < self.basis[bi]
                            } else {
                                d[i] > d[bi]
                            }
                        }
                    };
                    if better {
                        best = Some(i);
                    }
                }
            }
        }
        best
    }

    fn tie_break(&self, i: usize, incumbent: usize, d: &[T], bland: bool) -> bool {
        if bland {
            self.basis[i] < self.basis[incumbent]
        } else {
            // Prefer pushing artificials out, then larger pivots.
            let ai = self.is_artificial(self.basis[i]);
            let ab = self.is_artificial(self.basis[incumbent]);
            if ai != ab {
                ai
            } else {
                d[i] > d[incumbent]
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, d: &[T]) {
        let m = self.m;
        let pr = d[r].clone();
        let theta = self.x_b[r].over(&pr);
        for i in 0..m {
            if i != r && !d[i].is_zero() {
                let xi = &mut self.x_b[i];
                xi.sub_mul(&theta, &d[i]);
            }
        }
        self.x_b[r] = theta;
        let inv = T::one().over(&pr);
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            if !v.is_zero() {
                *v = v.times(&inv);
            }
        }
        let nz: Vec<usize> = (0..m).filter(|&k| !row_r[k].is_zero()).collect();
        for (i, di) in d.iter().enumerate() {
            if i == r || di.is_zero() {
                continue;
            }
            let row = if i < r { &mut before[i * m..(i + 1) * m] } else { &mut after[(i - r - 1) * m..(i - r) * m] };
            for &k in &nz {
                row[k].sub_mul(di, &row_r[k]);
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = q;
        self.is_basic[q] = true;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Rebuilds `B^{-1}` and `x_B` from scratch (float backend).
    fn refactor(&mut self) -> Result<()> {
        if T::EXACT {
            return Ok(());
        }
        let m = self.m;
        let mut a = vec![T::zero(); m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j) {
                a[i * m + k] = v;
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().partial_cmp(&a[y * m + c].abs()).unwrap_or(std::cmp::Ordering::Equal))
                .expect("nonempty");
            if a[p * m + c].abs().to_f64() < 1e-13 {
                return Err(Error::NumericDegeneracy("basis matrix became singular".into()));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let pinv = T::one().over(&a[c * m + c]);
            for k in 0..m {
                a[c * m + k] = a[c * m + k].times(&pinv);
                inv[c * m + k] = inv[c * m + k].times(&pinv);
            }
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = a[i * m + c].clone();
                if f.is_zero() {
                    continue;
                }
                for k in 0..m {
                    let (ack, ick) = (a[c * m + k].clone(), inv[c * m + k].clone());
                    a[i * m + k].sub_mul(&f, &ack);
                    inv[i * m + k].sub_mul(&f, &ick);
                }
            }
        }
        // inv now maps row-space of B; B^{-1} = inv with columns indexed by
        // original rows, rows indexed by basis position.
        self.binv = inv;
        self.recompute_xb();
        self.since_refactor = 0;
        Ok(())
    }

    fn recompute_xb(&mut self) {
        let m = self.m;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x_b[i] = row.iter().zip(&self.b).fold(T::zero(), |acc, (a, b)| acc.plus(&a.times(b)));
        }
    }

    /// Primal simplex on the current phase objective.
    fn primal_loop(&mut self) -> Result<LpStatus> {
        let mut streak = 0usize;
        loop {
            if self.iterations > self.iteration_cap() {
                return Err(Error::NumericDegeneracy(format!("iteration limit {} reached", self.iteration_cap())));
            }
            if !T::EXACT && self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let bland = streak >= self.opts.degenerate_streak;
            let y = self.simplex_multipliers();
            let Some(q) = self.price(&y, bland) else {
                if !T::EXACT && self.since_refactor > 0 {
                    // Confirm optimality on a fresh factorization.
                    self.refactor()?;
                    let y = self.simplex_multipliers();
                    if self.price(&y, true).is_some() {
                        continue;
                    }
                }
                return Ok(LpStatus::Optimal);
            };
            let d = self.ftran(q);
            let Some(r) = self.ratio_test(&d, bland) else {
                return Ok(LpStatus::Unbounded);
            };
            let degenerate = self.x_b[r] <= self.tol_feas();
            self.pivot(r, q, &d);
            streak = if degenerate { streak + 1 } else { 0 };
        }
    }

    fn run(&mut self) -> Result<LpStatus> {
        let has_artificial = self.basis.iter().any(|&j| self.is_artificial(j));
        if has_artificial {
            self.phase_one = true;
            let st = self.primal_loop()?;
            debug_assert_eq!(st, LpStatus::Optimal);
            let infeas = (0..self.m)
                .filter(|&i| self.is_artificial(self.basis[i]))
                .fold(T::zero(), |acc, i| acc.plus(&self.x_b[i]));
            let limit = if T::EXACT { T::zero() } else { T::from_f64(1e-7) };
            if infeas > limit {
                return Ok(LpStatus::Infeasible);
            }
            self.drive_out_artificials();
        }
        self.phase_one = false;
        let st = self.primal_loop()?;
        if st != LpStatus::Optimal {
            return Ok(st);
        }
        if !T::EXACT {
            self.b = self.sf.b.clone();
            self.refactor()?;
            self.restore_feasibility()?;
        }
        Ok(LpStatus::Optimal)
    }

    /// Pivots zero-level artificials out of the basis where possible; rows
    /// where no real column has a nonzero entry are redundant.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let rho: Vec<T> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, T)> = None;
            for j in 0..self.ncols {
                if self.is_basic[j] {
                    continue;
                }
                let mut a = T::zero();
                for k in self.sf.col_start[j]..self.sf.col_start[j + 1] {
                    a = a.plus(&rho[self.sf.row_idx[k]].times(&self.sf.vals[k]));
                }
                let mag = a.abs();
                if mag > self.tol_pivot() && best.as_ref().is_none_or(|(_, bm)| mag > *bm) {
                    best = Some((j, mag));
                    if T::EXACT {
                        break;
                    }
                }
            }
            if let Some((q, _)) = best {
                let d = self.ftran(q);
                self.pivot(r, q, &d);
            }
        }
    }

    /// Dual simplex pivots after the relaxation is removed: the basis stays
    /// dual feasible while negative basic values are driven out.
    fn restore_feasibility(&mut self) -> Result<()> {
        let m = self.m;
        loop {
            if self.iterations > self.iteration_cap() {
                return Err(Error::NumericDegeneracy("iteration limit in feasibility repair".into()));
            }
            let neg_tol = -tol::FEASIBILITY;
            let r = (0..m)
                .filter(|&i| self.x_b[i].to_f64() / (1.0 + self.b_scale()) < neg_tol)
                .min_by(|&a, &b| self.x_b[a].partial_cmp(&self.x_b[b]).unwrap_or(std::cmp::Ordering::Equal));
            let Some(r) = r else { return Ok(()) };
            let y = self.simplex_multipliers();
            let rho: Vec<T> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.ncols {
                if self.is_basic[j] {
                    continue;
                }
                let mut alpha = T::zero();
                for k in self.sf.col_start[j]..self.sf.col_start[j + 1] {
                    alpha = alpha.plus(&rho[self.sf.row_idx[k]].times(&self.sf.vals[k]));
                }
                let a = alpha.to_f64();
                if a < -tol::PIVOT {
                    let dj = self.reduced_cost(j, &y).to_f64().max(0.0);
                    let ratio = dj / -a;
                    if best.is_none_or(|(_, br)| ratio < br) {
                        best = Some((j, ratio));
                    }
                }
            }
            let Some((q, _)) = best else {
                return Err(Error::NumericDegeneracy("dual simplex found no entering column".into()));
            };
            let d = self.ftran(q);
            self.pivot(r, q, &d);
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
        }
    }

    fn b_scale(&self) -> f64 {
        self.b.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    fn primal_std(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.ncols];
        for (i, &j) in self.basis.iter().enumerate() {
            if !self.is_artificial(j) {
                x[j] = if !T::EXACT && self.x_b[i] < T::zero() { T::zero() } else { self.x_b[i].clone() };
            }
        }
        x
    }

    fn duals(&self) -> Vec<T> {
        self.simplex_multipliers()
    }

    fn dual_infeasibility(&self) -> f64 {
        let y = self.simplex_multipliers();
        (0..self.ncols)
            .filter(|&j| !self.is_basic[j])
            .map(|j| -self.reduced_cost(j, &y).to_f64())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn one_variable_lp() {
        let mut p = LpProblem::<Rational>::new(1);
        p.objective[0] = int(-1);
        p.add_constraint(vec![(0, int(1))], Relation::Le, int(1));
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, int(-1));
        assert_eq!(s.primal, vec![int(1)]);
        let f = solve_lp(&p.to_f64()).unwrap();
        assert_eq!(f.status, LpStatus::Optimal);
        assert!((f.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_lp() {
        let mut p = LpProblem::<Rational>::new(1);
        p.add_constraint(vec![(0, int(1))], Relation::Ge, int(2));
        p.add_constraint(vec![(0, int(1))], Relation::Le, int(1));
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
        assert_eq!(solve_lp(&p.to_f64()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_lp() {
        let mut p = LpProblem::<Rational>::new(2);
        p.objective = vec![int(-1), int(0)];
        p.add_constraint(vec![(0, int(1)), (1, int(-1))], Relation::Le, int(1));
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
        assert_eq!(solve_lp(&p.to_f64()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_boxed_variables() {
        // min x - y, x free with x >= -3 via row, y in [1, 2]
        let mut p = LpProblem::<Rational>::new(2);
        p.objective = vec![int(1), int(-1)];
        p.bounds = vec![Bound::Free, Bound::Boxed(int(1), int(2))];
        p.add_constraint(vec![(0, int(1))], Relation::Ge, int(-3));
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.objective, int(-5));
        assert_eq!(s.primal, vec![int(-3), int(2)]);
    }

    #[test]
    fn equality_with_redundant_row() {
        let mut p = LpProblem::<Rational>::new(2);
        p.objective = vec![int(1), int(2)];
        p.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        p.add_constraint(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(2));
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.objective, int(1));
        let f = solve_lp(&p.to_f64()).unwrap();
        assert!((f.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duals_certify_the_optimum() {
        // min -x - 2y s.t. x + y <= 4, x + 3y <= 6
        let mut p = LpProblem::<Rational>::new(2);
        p.objective = vec![int(-1), int(-2)];
        p.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Le, int(4));
        p.add_constraint(vec![(0, int(1)), (1, int(3))], Relation::Le, int(6));
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.objective, int(-5));
        let dual_obj: Rational = s.dual.iter().zip([int(4), int(6)]).map(|(y, b)| y * b).sum();
        assert_eq!(dual_obj, int(-5));
        assert_eq!(s.dual, vec![ratio(-1, 2), ratio(-1, 2)]);
    }

    #[test]
    fn listing_has_one_line_per_row() {
        let mut p = LpProblem::<Rational>::new(2);
        p.objective = vec![int(1), int(0)];
        p.add_constraint(vec![(0, int(1)), (1, ratio(1, 2))], Relation::Ge, int(1));
        let s = p.to_listing();
        assert_eq!(s.lines().count(), 2);
        assert!(s.contains("c0: 1 x0 + 1/2 x1 >= 1"));
    }
}
