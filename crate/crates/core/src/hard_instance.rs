//! Min-max linear program producing a graph on which every algorithm in a
//! finite family of oblivious algorithms (over fixed bias classes) does
//! badly.
//!
//! The graph lives on `{0,1} x [L]`: vertex `(b, i)` has bias `t_i` and `b`
//! is its bit in a reference cut whose weight is normalized to 1.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::digraph::{Assignment, WeightedDigraph};
use crate::error::{Error, Result};
use crate::scalar::{int, Rational, Scalar};
use crate::simplex::{solve_lp, LpProblem, LpStatus, Relation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardInstanceSpec {
    biases: Vec<Rational>,
    family: Vec<Vec<Rational>>,
}

impl HardInstanceSpec {
    pub fn new(biases: Vec<Rational>, family: Vec<Vec<Rational>>) -> Result<Self> {
        if biases.is_empty() {
            return Err(Error::Parameter("at least one bias class is required".into()));
        }
        if biases.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("biases must be strictly increasing".into()));
        }
        if biases.iter().any(|t| t.abs() > Rational::one()) {
            return Err(Error::Parameter("biases must lie in [-1, 1]".into()));
        }
        if family.is_empty() {
            return Err(Error::Parameter("the family of algorithms is empty".into()));
        }
        for (k, p) in family.iter().enumerate() {
            if p.len() != biases.len() {
                return Err(Error::Parameter(format!(
                    "family vector {k} has length {} but there are {} classes",
                    p.len(),
                    biases.len()
                )));
            }
            if p.iter().any(|x| x.is_negative() || *x > Rational::one()) {
                return Err(Error::Parameter(format!("family vector {k} has entries outside [0, 1]")));
            }
        }
        Ok(HardInstanceSpec { biases, family })
    }

    pub fn biases(&self) -> &[Rational] {
        &self.biases
    }

    pub fn family(&self) -> &[Vec<Rational>] {
        &self.family
    }

    pub fn num_classes(&self) -> usize {
        self.biases.len()
    }
}

/// Vertex `(bit, class)`; classes are 0-based here and 1-based in names.
pub type HardVertex = (bool, usize);

/// The min-max LP with its variable map: variable `k < edges.len()` is the
/// weight of `edges[k]`, the last variable is the epigraph variable `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxLp {
    pub problem: LpProblem<Rational>,
    pub edges: Vec<(HardVertex, HardVertex)>,
    pub z: usize,
    /// Index into the family for each epigraph row, in row order.
    pub family_rows: Vec<usize>,
}

fn vertices(l: usize) -> Vec<HardVertex> {
    (0..l).flat_map(|i| [(false, i), (true, i)]).collect()
}

fn ordered_pairs(l: usize) -> Vec<(HardVertex, HardVertex)> {
    let vs = vertices(l);
    let mut out = Vec::with_capacity(vs.len() * (vs.len() - 1));
    for &u in &vs {
        for &v in &vs {
            if u != v {
                out.push((u, v));
            }
        }
    }
    out
}

/// `p(i1) (1 - p(i2))` per edge variable.
fn value_row(edges: &[(HardVertex, HardVertex)], p: &[Rational]) -> Vec<Rational> {
    edges.iter().map(|((_, i1), (_, i2))| &p[*i1] * (Rational::one() - &p[*i2])).collect()
}

fn base_lp(spec: &HardInstanceSpec) -> MinMaxLp {
    let l = spec.num_classes();
    let edges = ordered_pairs(l);
    let z = edges.len();
    let mut problem = LpProblem::<Rational>::new(z + 1);
    problem.objective[z] = Rational::one();
    let cut: Vec<(usize, Rational)> = edges
        .iter()
        .enumerate()
        .filter(|(_, ((b1, _), (b2, _)))| *b1 && !*b2)
        .map(|(k, _)| (k, Rational::one()))
        .collect();
    problem.add_constraint(cut, Relation::Eq, Rational::one());
    // t (W+ + W-) - (W+ - W-) = 0, i.e. (t - 1) W+ + (t + 1) W- = 0.
    for v in vertices(l) {
        let t = &spec.biases[v.1];
        let mut row = Vec::new();
        for (k, (a, b)) in edges.iter().enumerate() {
            if *a == v {
                row.push((k, t - int(1)));
            } else if *b == v {
                row.push((k, t + int(1)));
            }
        }
        row.retain(|(_, c)| !c.is_zero());
        problem.add_constraint(row, Relation::Eq, Rational::zero());
    }
    MinMaxLp { problem, edges, z, family_rows: Vec::new() }
}

fn add_family_row(lp: &mut MinMaxLp, spec: &HardInstanceSpec, k: usize) {
    let mut row: Vec<(usize, Rational)> = value_row(&lp.edges, &spec.family[k])
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j, -c))
        .collect();
    row.push((lp.z, Rational::one()));
    lp.problem.add_constraint(row, Relation::Ge, Rational::zero());
    lp.family_rows.push(k);
}

/// The full LP: one epigraph row per family member.
pub fn build_minmax_lp(spec: &HardInstanceSpec) -> MinMaxLp {
    let mut lp = base_lp(spec);
    for k in 0..spec.family.len() {
        add_family_row(&mut lp, spec, k);
    }
    lp
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardInstance {
    pub graph: WeightedDigraph,
    /// Bit-1 vertices to 1; its cut weight is exactly 1.
    pub reference: Assignment,
    /// Optimal value `z*` of the min-max LP.
    pub value: Rational,
    /// Satisfied weight of each family member on the graph, in family order.
    pub per_algorithm: Vec<Rational>,
    /// Family members that ended up as explicit LP rows.
    pub active_rows: usize,
}

pub fn vertex_name(v: HardVertex) -> String {
    format!("{}.{}", u8::from(v.0), v.1 + 1)
}

/// Solves the min-max LP exactly.
///
/// Rows for family members are generated lazily: the LP is solved over a
/// subset of the family, the member doing best on the resulting weights is
/// added if it beats `z`, and the loop stops once no member does. The final
/// answer is optimal for the whole family.
pub fn find_hard_graph(spec: &HardInstanceSpec) -> Result<HardInstance> {
    let mut lp = base_lp(spec);
    let rows: Vec<Vec<Rational>> = spec.family.iter().map(|p| value_row(&lp.edges, p)).collect();
    let mut active = BTreeSet::new();
    active.insert(0usize);
    add_family_row(&mut lp, spec, 0);
    loop {
        let sol = solve_lp(&lp.problem)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                let names: Vec<String> = spec.biases.iter().map(|t| t.to_string()).collect();
                return Err(Error::LpStatus(format!(
                    "min-max LP infeasible: no graph realizes bias classes [{}] with a unit reference cut",
                    names.join(", ")
                )));
            }
            LpStatus::Unbounded => return Err(Error::LpStatus("min-max LP unbounded".into())),
        }
        let w = &sol.primal[..lp.edges.len()];
        let z = sol.primal[lp.z].clone();
        let per: Vec<Rational> =
            rows.iter().map(|r| r.iter().zip(w).fold(Rational::zero(), |acc, (a, x)| acc + a * x)).collect();
        let (best_k, best) = per
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1))
            .map(|(k, v)| (k, v.clone()))
            .expect("nonempty family");
        if best > z && !active.contains(&best_k) {
            active.insert(best_k);
            add_family_row(&mut lp, spec, best_k);
            continue;
        }
        let mut b = WeightedDigraph::builder();
        let mut reference = Assignment::new();
        for ((u, v), x) in lp.edges.iter().zip(w) {
            if x.is_positive() {
                b.edge(&vertex_name(*u), &vertex_name(*v), Scalar::Exact(x.clone()))?;
                reference.set(&vertex_name(*u), u.0);
                reference.set(&vertex_name(*v), v.0);
            }
        }
        return Ok(HardInstance { graph: b.build(), reference, value: z, per_algorithm: per, active_rows: active.len() });
    }
}

/// Probability vectors of antisymmetric functions on `biases`, with each
/// free value on the grid `lo, lo + step, ..., hi`.
///
/// Bias 0 is pinned to 1/2; biases `t` and `-t` share one free value `x`,
/// used as `x` on the positive side and `1 - x` on the negative side.
pub fn antisymmetric_grid(biases: &[Rational], step: &Rational, lo: &Rational, hi: &Rational) -> Result<Vec<Vec<Rational>>> {
    if !step.is_positive() || lo > hi || lo.is_negative() || *hi > Rational::one() {
        return Err(Error::Parameter("grid needs step > 0 and 0 <= lo <= hi <= 1".into()));
    }
    let mut free: Vec<Rational> = biases.iter().filter(|t| !t.is_zero()).map(|t| t.abs()).collect();
    free.sort();
    free.dedup();
    let mut points = Vec::new();
    let mut x = lo.clone();
    while x <= *hi {
        points.push(x.clone());
        x += step;
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; free.len()];
    loop {
        let vec: Vec<Rational> = biases
            .iter()
            .map(|t| {
                if t.is_zero() {
                    Rational::new(1.into(), 2.into())
                } else {
                    let k = free.binary_search(&t.abs()).expect("present");
                    let v = points[idx[k]].clone();
                    if t.is_positive() {
                        v
                    } else {
                        Rational::one() - v
                    }
                }
            })
            .collect();
        out.push(vec);
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < points.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::cut_value;
    use crate::scalar::ratio;

    #[test]
    fn two_classes_single_algorithm() {
        // Biases -b, +b with S = (1 - p, p): the two-vertex graph of
        // parameter c = (1 + b)/(1 - b) is feasible, so z* is at most its
        // satisfied weight p^2 + (1-p)^2 / c per unit of cut.
        let b = ratio(1, 17);
        let p = ratio(5, 8);
        let spec = HardInstanceSpec::new(vec![-b.clone(), b.clone()], vec![vec![int(1) - &p, p.clone()]]).unwrap();
        let h = find_hard_graph(&spec).unwrap();
        let c = (int(1) + &b) / (int(1) - &b);
        let bound = &p * &p + (int(1) - &p) * (int(1) - &p) / &c;
        assert!(h.value <= bound);
        assert_eq!(cut_value(&h.graph, &h.reference).unwrap().satisfied, Scalar::one());
        for i in 0..h.graph.num_vertices() {
            let name = h.graph.vertex_id(i);
            let class: usize = name.split('.').nth(1).unwrap().parse().unwrap();
            assert_eq!(h.graph.bias(i).unwrap(), Scalar::Exact(spec.biases()[class - 1].clone()));
        }
    }

    #[test]
    fn row_generation_matches_full_lp() {
        let biases = vec![ratio(-1, 5), int(0), ratio(1, 5)];
        let family = antisymmetric_grid(&biases, &ratio(1, 10), &ratio(1, 2), &int(1)).unwrap();
        assert_eq!(family.len(), 6);
        let spec = HardInstanceSpec::new(biases, family).unwrap();
        let h = find_hard_graph(&spec).unwrap();
        let full = solve_lp(&build_minmax_lp(&spec).problem).unwrap();
        assert_eq!(full.objective, h.value);
        assert_eq!(h.per_algorithm.iter().max().unwrap(), &h.value);
    }

    #[test]
    fn spec_validation() {
        assert!(HardInstanceSpec::new(vec![int(0), int(0)], vec![vec![int(0), int(0)]]).is_err());
        assert!(HardInstanceSpec::new(vec![int(0)], vec![]).is_err());
        assert!(HardInstanceSpec::new(vec![int(0)], vec![vec![int(2)]]).is_err());
    }
}
