//! Expected cut value of an oblivious assignment, its ratio against the
//! optimum (or a reference cut), and the reduction of a graph to a
//! quadratic form in per-bias-class probabilities.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::digraph::{cut_value, opt_value, Assignment, OptMethod, WeightedDigraph};
use crate::error::{Error, Result};
use crate::quadopt::{Affine, QuadraticForm};
use crate::scalar::{ratio, Rational, Scalar};
use crate::selection::SelectionFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedValue {
    /// `sum w(u,v) S(bias u) (1 - S(bias v))`.
    pub weight: Scalar,
    /// `weight / m_G`.
    pub normalized: Scalar,
}

pub fn expected_value(g: &WeightedDigraph, s: &dyn SelectionFunction) -> Result<ExpectedValue> {
    let m = g.total_weight();
    if !m.is_positive() {
        return Err(Error::InvalidGraph("graph has zero total weight".into()));
    }
    let probs = vertex_probabilities(g, s)?;
    let weight: Scalar = g
        .edges()
        .iter()
        .map(|e| {
            let pt = probs[e.tail].as_ref().expect("tail has positive degree");
            let ph = probs[e.head].as_ref().expect("head has positive degree");
            &e.weight * pt * (Scalar::one() - ph)
        })
        .sum();
    let normalized = &weight / &m;
    Ok(ExpectedValue { weight, normalized })
}

/// `S(bias(v))` for every non-isolated vertex.
pub fn vertex_probabilities(g: &WeightedDigraph, s: &dyn SelectionFunction) -> Result<Vec<Option<Scalar>>> {
    (0..g.num_vertices())
        .map(|i| if g.is_isolated(i) { Ok(None) } else { s.eval(&g.bias(i)?).map(Some) })
        .collect()
}

/// What the expected value is divided by.
#[derive(Clone, Debug, PartialEq)]
pub enum Denominator {
    /// The exact Max-DiCut optimum.
    Optimum(OptMethod),
    /// The weight of a known cut; the quotient is then an upper bound on the
    /// true ratio because that weight cannot exceed the optimum.
    ReferenceCut(Assignment),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphRatio {
    pub ratio: Scalar,
    pub expected: ExpectedValue,
    /// Satisfied weight of the denominator cut (unnormalized).
    pub denominator_weight: Scalar,
    /// True when the denominator is a reference cut rather than the optimum.
    pub upper_bound: bool,
}

pub fn ratio_on_graph(g: &WeightedDigraph, s: &dyn SelectionFunction, denom: &Denominator) -> Result<GraphRatio> {
    let expected = expected_value(g, s)?;
    let (denominator_weight, upper_bound) = match denom {
        Denominator::Optimum(method) => (opt_value(g, method)?.satisfied, false),
        Denominator::ReferenceCut(x) => (cut_value(g, x)?.satisfied, true),
    };
    if !denominator_weight.is_positive() {
        return Err(Error::ZeroOptimum);
    }
    let ratio = &expected.weight / &denominator_weight;
    Ok(GraphRatio { ratio, expected, denominator_weight, upper_bound })
}

/// Groups the vertices of a graph by exact bias.
///
/// Without ties every class has its own free probability. With
/// antisymmetric ties, class `-b` uses `1 - x_b`, class 0 is pinned to 1/2
/// and only positive classes carry free variables; the class list is then
/// closed under negation (missing negatives are added without vertices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMap {
    classes: Vec<Rational>,
    vertex_class: BTreeMap<String, usize>,
    antisym: bool,
}

impl ClassMap {
    pub fn from_graph(g: &WeightedDigraph, antisym: bool) -> Result<Self> {
        let mut biases = BTreeMap::new();
        for i in 0..g.num_vertices() {
            if g.is_isolated(i) {
                continue;
            }
            let b = g
                .bias(i)?
                .to_rational()
                .ok_or_else(|| Error::InconsistentClassMap("non-finite bias".into()))?;
            biases.insert(g.vertex_id(i).to_string(), b);
        }
        let mut classes: Vec<Rational> = biases.values().cloned().collect();
        if antisym {
            let negs: Vec<Rational> = classes.iter().map(|b| -b.clone()).collect();
            classes.extend(negs);
        }
        classes.sort();
        classes.dedup();
        let vertex_class = biases
            .into_iter()
            .map(|(v, b)| {
                let k = classes.binary_search(&b).expect("class present");
                (v, k)
            })
            .collect();
        Ok(ClassMap { classes, vertex_class, antisym })
    }

    /// Explicit construction; consistency with a graph is checked when the
    /// map is used.
    pub fn new(classes: Vec<Rational>, vertex_class: BTreeMap<String, usize>, antisym: bool) -> Result<Self> {
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InconsistentClassMap("classes must be strictly increasing".into()));
        }
        if let Some((v, _)) = vertex_class.iter().find(|(_, &k)| k >= classes.len()) {
            return Err(Error::InconsistentClassMap(format!("vertex {v:?} maps to a missing class")));
        }
        if antisym && classes.iter().any(|c| classes.binary_search(&-c.clone()).is_err()) {
            return Err(Error::InconsistentClassMap("antisymmetric classes must be closed under negation".into()));
        }
        Ok(ClassMap { classes, vertex_class, antisym })
    }

    pub fn classes(&self) -> &[Rational] {
        &self.classes
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.antisym
    }

    pub fn class_of(&self, vertex: &str) -> Option<usize> {
        self.vertex_class.get(vertex).copied()
    }

    /// Bias values owning a free variable, in variable order.
    pub fn free_classes(&self) -> Vec<Rational> {
        if self.antisym {
            self.classes.iter().filter(|c| c.is_positive()).cloned().collect()
        } else {
            self.classes.clone()
        }
    }

    pub fn num_free(&self) -> usize {
        self.free_classes().len()
    }

    /// Probability of class `k` as an affine function of the free variables.
    pub fn class_affine(&self, k: usize) -> Affine {
        let n = self.num_free();
        let b = &self.classes[k];
        if !self.antisym {
            return Affine::var(n, k);
        }
        if b.is_zero() {
            return Affine::constant(n, ratio(1, 2));
        }
        let free = self.free_classes();
        let idx = free.binary_search(&b.abs()).expect("closed under negation");
        let x = Affine::var(n, idx);
        if b.is_positive() {
            x
        } else {
            x.complement()
        }
    }

    /// Free-variable vector realising a selection function on these classes.
    pub fn point_for(&self, s: &dyn SelectionFunction) -> Result<Vec<Rational>> {
        self.free_classes()
            .iter()
            .map(|b| {
                s.eval(&Scalar::Exact(b.clone()))?
                    .to_rational()
                    .ok_or_else(|| Error::Parameter("selection value is not finite".into()))
            })
            .collect()
    }
}

/// `sum w(u,v) x_{class u} (1 - x_{class v})` over the free class variables.
pub fn class_quadratic(g: &WeightedDigraph, cm: &ClassMap) -> Result<QuadraticForm> {
    let mut class_idx = vec![usize::MAX; g.num_vertices()];
    for i in 0..g.num_vertices() {
        if g.is_isolated(i) {
            continue;
        }
        let v = g.vertex_id(i);
        let k = cm
            .class_of(v)
            .ok_or_else(|| Error::InconsistentClassMap(format!("vertex {v:?} has no class")))?;
        let b = g.bias(i)?.to_rational().ok_or_else(|| Error::InconsistentClassMap("non-finite bias".into()))?;
        if b != cm.classes[k] {
            return Err(Error::InconsistentClassMap(format!(
                "vertex {v:?} has bias {b} but its class is {}",
                cm.classes[k]
            )));
        }
        class_idx[i] = k;
    }
    let n = cm.num_free();
    let mut q = QuadraticForm::zero(n);
    let affines: Vec<Affine> = (0..cm.classes.len()).map(|k| cm.class_affine(k)).collect();
    for e in g.edges() {
        let w = e.weight.to_rational().ok_or_else(|| Error::InvalidGraph("non-finite weight".into()))?;
        let tail = &affines[class_idx[e.tail]];
        let head = affines[class_idx[e.head]].complement();
        q.add_product(&w, tail, &head);
    }
    Ok(q)
}

/// Ratio of a free-variable point's value to `denominator`, both exact.
pub fn quadratic_ratio(q: &QuadraticForm, x: &[Rational], denominator: &Rational) -> Rational {
    q.eval(x) / denominator
}
