//! Sweeps over the discretization fineness and a bracket search over the
//! sigmoid intercept.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ratio_lp::solve_ratio_lp;
use crate::scalar::{int, Rational, Scalar};
use crate::selection::discretize_plsigmoid;
use crate::simplex::{FloatReport, SolveMode};

/// Environment variable capping the number of sweep workers.
pub const WORKERS_ENV: &str = "OBLIVIOUS_WORKERS";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Positive bias classes of the discretization.
    pub ell: usize,
    /// Horizontal coordinate in the fineness plot; equal to `ell`.
    pub x: usize,
    pub b: Rational,
    pub ratio: Result<Scalar>,
    pub report: Option<FloatReport>,
}

fn evaluate(b: &Rational, ell: usize, mode: SolveMode) -> (Result<Scalar>, Option<FloatReport>) {
    let solved = discretize_plsigmoid(b, ell).and_then(|s| solve_ratio_lp(&s, mode));
    match solved {
        Ok(sol) => (Ok(sol.value), sol.report),
        Err(e) => (Err(e), None),
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn configured_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Ratio of the `ell`-class discretization of `PLSigmoid_b` for each `ell`,
/// sorted by `ell`. A failing row carries its error; the others still run.
pub fn sweep_discretization(b: &Rational, ells: &[usize], mode: SolveMode) -> Result<Vec<SweepRow>> {
    let mut ells = ells.to_vec();
    ells.sort_unstable();
    ells.dedup();
    let run = || -> Vec<SweepRow> {
        ells.par_iter()
            .map(|&ell| {
                let (ratio, report) = evaluate(b, ell, mode);
                SweepRow { ell, x: ell, b: b.clone(), ratio, report }
            })
            .collect()
    };
    match configured_workers() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchPoint {
    pub b: Rational,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_b: Rational,
    pub best_ratio: f64,
    /// Final bracket.
    pub lo: Rational,
    pub hi: Rational,
    /// Every evaluation in the order performed.
    pub trace: Vec<SearchPoint>,
}

/// Ternary search for the intercept maximizing the discretized ratio.
///
/// Each iteration evaluates the two inner third-points of the bracket and
/// keeps the two thirds around the better one. Nothing assumes the
/// objective is unimodal; the best point of the whole trace is returned.
pub fn search_intercept(ell: usize, lo: &Rational, hi: &Rational, iters: usize) -> Result<SearchResult> {
    if *lo <= int(0) || hi > &int(1) || lo > hi {
        return Err(Error::Parameter(format!("search bracket [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1")));
    }
    let mut trace: Vec<SearchPoint> = Vec::new();
    let eval = |b: &Rational, trace: &mut Vec<SearchPoint>| -> Result<f64> {
        if let Some(p) = trace.iter().find(|p| p.b == *b) {
            return Ok(p.ratio);
        }
        let (r, _) = evaluate(b, ell, SolveMode::Float);
        let r = r?.to_f64();
        trace.push(SearchPoint { b: b.clone(), ratio: r });
        Ok(r)
    };
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    eval(&lo, &mut trace)?;
    if lo != hi {
        eval(&hi, &mut trace)?;
        for _ in 0..iters {
            let third = (&hi - &lo) / int(3);
            let m1 = &lo + &third;
            let m2 = &hi - &third;
            let f1 = eval(&m1, &mut trace)?;
            let f2 = eval(&m2, &mut trace)?;
            if f1 < f2 {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        eval(&lo, &mut trace)?;
        eval(&hi, &mut trace)?;
    }
    let best = trace
        .iter()
        .fold(None::<&SearchPoint>, |acc, p| match acc {
            Some(a) if a.ratio >= p.ratio => Some(a),
            _ => Some(p),
        })
        .cloned()
        .expect("at least one evaluation");
    Ok(SearchResult { best_b: best.b, best_ratio: best.ratio, lo, hi, trace })
}
