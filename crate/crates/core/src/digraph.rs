//! Weighted directed graphs, vertex bias, cut values and exact Max-DiCut
//! optima (brute force and a frontier dynamic program).

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Largest vertex count accepted by [`OptMethod::BruteForce`].
pub const BRUTE_FORCE_LIMIT: usize = 24;
/// Largest frontier accepted by [`OptMethod::FrontierDp`].
pub const FRONTIER_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: Scalar,
}

/// A finite vertex set with strictly positive weights on ordered pairs of
/// distinct vertices.
#[derive(Clone, Debug)]
pub struct WeightedDigraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    // Sorted by (tail, head), no duplicates, no self-loops, weights > 0.
    edges: Vec<Edge>,
    out_w: Vec<Scalar>,
    in_w: Vec<Scalar>,
}

impl PartialEq for WeightedDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

#[derive(Default)]
pub struct DigraphBuilder {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    weights: BTreeMap<(usize, usize), Scalar>,
}

impl DigraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a vertex (no-op if it already exists) and returns its index.
    pub fn vertex(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    /// Adds `weight` to the pair `(tail, head)`. Parallel edges are summed
    /// and zero weights are accepted but leave no edge behind.
    pub fn edge(&mut self, tail: &str, head: &str, weight: impl Into<Scalar>) -> Result<&mut Self> {
        let weight = weight.into();
        if tail == head {
            return Err(Error::InvalidGraph(format!("self-loop on {tail:?}")));
        }
        if weight.is_negative() {
            return Err(Error::InvalidGraph(format!("negative weight {weight} on {tail:?} -> {head:?}")));
        }
        if let Scalar::Float(f) = weight {
            if !f.is_finite() {
                return Err(Error::InvalidGraph(format!("non-finite weight on {tail:?} -> {head:?}")));
            }
        }
        let t = self.vertex(tail);
        let h = self.vertex(head);
        let slot = self.weights.entry((t, h)).or_insert_with(Scalar::zero);
        *slot = &*slot + &weight;
        Ok(self)
    }

    pub fn build(self) -> WeightedDigraph {
        let n = self.vertices.len();
        let edges: Vec<Edge> = self
            .weights
            .into_iter()
            .filter(|(_, w)| w.is_positive())
            .map(|((tail, head), weight)| Edge { tail, head, weight })
            .collect();
        let mut out_w = vec![Scalar::zero(); n];
        let mut in_w = vec![Scalar::zero(); n];
        for e in &edges {
            out_w[e.tail] = &out_w[e.tail] + &e.weight;
            in_w[e.head] = &in_w[e.head] + &e.weight;
        }
        WeightedDigraph { vertices: self.vertices, index: self.index, edges, out_w, in_w }
    }
}

impl WeightedDigraph {
    pub fn builder() -> DigraphBuilder {
        DigraphBuilder::new()
    }

    /// Convenience constructor from `(tail, head, weight)` triples.
    pub fn from_edges<W: Into<Scalar>>(edges: impl IntoIterator<Item = (String, String, W)>) -> Result<Self> {
        let mut b = DigraphBuilder::new();
        for (t, h, w) in edges {
            b.edge(&t, &h, w)?;
        }
        Ok(b.build())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weight(&self, tail: &str, head: &str) -> Option<&Scalar> {
        let t = *self.index.get(tail)?;
        let h = *self.index.get(head)?;
        self.edges
            .binary_search_by(|e| (e.tail, e.head).cmp(&(t, h)))
            .ok()
            .map(|k| &self.edges[k].weight)
    }

    pub fn out_degree(&self, i: usize) -> &Scalar {
        &self.out_w[i]
    }

    pub fn in_degree(&self, i: usize) -> &Scalar {
        &self.in_w[i]
    }

    pub fn degree(&self, i: usize) -> Scalar {
        &self.out_w[i] + &self.in_w[i]
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.out_w[i].is_zero() && self.in_w[i].is_zero()
    }

    /// `m_G`, the sum of all edge weights.
    pub fn total_weight(&self) -> Scalar {
        self.edges.iter().map(|e| e.weight.clone()).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_exact())
    }

    /// `(outdeg - indeg) / (outdeg + indeg)` of vertex index `i`.
    pub fn bias(&self, i: usize) -> Result<Scalar> {
        if self.is_isolated(i) {
            return Err(Error::IsolatedVertex(self.vertices[i].clone()));
        }
        let diff = &self.out_w[i] - &self.in_w[i];
        Ok(diff / self.degree(i))
    }

    pub fn bias_of(&self, id: &str) -> Result<Scalar> {
        self.bias(self.index_of(id)?)
    }

    /// Reverses every edge.
    pub fn transpose(&self) -> WeightedDigraph {
        let mut b = DigraphBuilder::new();
        for v in &self.vertices {
            b.vertex(v);
        }
        for e in &self.edges {
            b.edge(&self.vertices[e.head], &self.vertices[e.tail], e.weight.clone()).expect("valid edge");
        }
        b.build()
    }

    /// Multiplies every weight by `lambda > 0`.
    pub fn scaled(&self, lambda: &Scalar) -> Result<WeightedDigraph> {
        if !lambda.is_positive() {
            return Err(Error::Parameter(format!("scale factor {lambda} must be positive")));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight = &e.weight * lambda;
        }
        for w in g.out_w.iter_mut().chain(g.in_w.iter_mut()) {
            *w = &*w * lambda;
        }
        Ok(g)
    }

    /// Weighted disjoint union; vertex ids are prefixed with each part's tag.
    pub fn disjoint_union(parts: &[(&str, &WeightedDigraph, Scalar)]) -> Result<WeightedDigraph> {
        let mut b = DigraphBuilder::new();
        for (tag, g, lambda) in parts {
            if !lambda.is_positive() {
                continue;
            }
            for v in &g.vertices {
                b.vertex(&format!("{tag}{v}"));
            }
            for e in &g.edges {
                let w = &e.weight * lambda;
                b.edge(&format!("{tag}{}", g.vertices[e.tail]), &format!("{tag}{}", g.vertices[e.head]), w)?;
            }
        }
        Ok(b.build())
    }

    /// Subgraph induced by the listed vertices, in the listed order.
    pub fn induced_subgraph(&self, ids: &[&str]) -> Result<WeightedDigraph> {
        let mut keep = vec![false; self.num_vertices()];
        let mut b = DigraphBuilder::new();
        for id in ids {
            keep[self.index_of(id)?] = true;
            b.vertex(id);
        }
        for e in &self.edges {
            if keep[e.tail] && keep[e.head] {
                b.edge(&self.vertices[e.tail], &self.vertices[e.head], e.weight.clone())?;
            }
        }
        Ok(b.build())
    }
}

/// A 0/1 value per vertex identifier.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    bits: BTreeMap<String, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        Assignment { bits: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }

    /// Every listed vertex gets 1, every other vertex of `g` gets 0.
    pub fn ones_on(g: &WeightedDigraph, ones: &[&str]) -> Self {
        let mut a = Assignment::new();
        for v in g.vertices() {
            a.set(v, ones.contains(&v.as_str()));
        }
        a
    }

    pub fn set(&mut self, v: &str, bit: bool) {
        self.bits.insert(v.to_string(), bit);
    }

    pub fn get(&self, v: &str) -> Option<bool> {
        self.bits.get(v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.bits.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Satisfied weight of a cut, raw and divided by `m_G`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutValue {
    pub satisfied: Scalar,
    pub normalized: Scalar,
}

pub fn cut_value(g: &WeightedDigraph, x: &Assignment) -> Result<CutValue> {
    let mut bits = vec![false; g.num_vertices()];
    for i in 0..g.num_vertices() {
        match x.get(g.vertex_id(i)) {
            Some(b) => bits[i] = b,
            None if g.is_isolated(i) => {}
            None => return Err(Error::MissingVertex(g.vertex_id(i).to_string())),
        }
    }
    let satisfied: Scalar = g
        .edges()
        .iter()
        .filter(|e| bits[e.tail] && !bits[e.head])
        .map(|e| e.weight.clone())
        .sum();
    let m = g.total_weight();
    if m.is_zero() {
        return Err(Error::InvalidGraph("graph has zero total weight".into()));
    }
    let normalized = &satisfied / &m;
    Ok(CutValue { satisfied, normalized })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptMethod {
    BruteForce,
    /// Dynamic program over the given vertex ordering. Isolated vertices may
    /// be omitted from the ordering.
    FrontierDp { ordering: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub value: Scalar,
    pub satisfied: Scalar,
    pub assignment: Assignment,
}

pub fn opt_value(g: &WeightedDigraph, method: &OptMethod) -> Result<OptResult> {
    let m = g.total_weight();
    if m.is_zero() {
        return Err(Error::InvalidGraph("graph has zero total weight".into()));
    }
    let n = g.num_vertices();
    let (satisfied, bits) = match method {
        OptMethod::BruteForce => {
            if n > BRUTE_FORCE_LIMIT {
                return Err(Error::SizeLimit { vertices: n, limit: BRUTE_FORCE_LIMIT });
            }
            with_weights(g, Engine::Brute)
        }
        OptMethod::FrontierDp { ordering } => {
            let order = resolve_ordering(g, ordering)?;
            let width = frontier_width(g, &order);
            if width > FRONTIER_LIMIT {
                return Err(Error::FrontierWidth { width, limit: FRONTIER_LIMIT });
            }
            with_weights(g, Engine::Frontier(&order))
        }
    };
    let mut assignment = Assignment::new();
    for (i, v) in g.vertices().iter().enumerate() {
        assignment.set(v, bits[i]);
    }
    let value = &satisfied / &m;
    Ok(OptResult { value, satisfied, assignment })
}

/// Width of `ordering`: the largest number of already-placed vertices that
/// still have an edge to an unplaced vertex.
pub fn ordering_width(g: &WeightedDigraph, ordering: &[String]) -> Result<usize> {
    let order = resolve_ordering(g, ordering)?;
    Ok(frontier_width(g, &order))
}

fn resolve_ordering(g: &WeightedDigraph, ordering: &[String]) -> Result<Vec<usize>> {
    let mut seen = vec![false; g.num_vertices()];
    let mut order = Vec::with_capacity(ordering.len());
    for id in ordering {
        let i = g.index_of(id)?;
        if seen[i] {
            return Err(Error::InvalidOrdering(format!("vertex {id:?} listed twice")));
        }
        seen[i] = true;
        order.push(i);
    }
    if let Some(i) = (0..g.num_vertices()).find(|&i| !seen[i] && !g.is_isolated(i)) {
        return Err(Error::InvalidOrdering(format!("vertex {:?} missing", g.vertex_id(i))));
    }
    Ok(order)
}

fn last_neighbor_positions(g: &WeightedDigraph, order: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut pos = vec![usize::MAX; g.num_vertices()];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut last: Vec<usize> = pos.clone();
    for e in g.edges() {
        let (a, b) = (pos[e.tail], pos[e.head]);
        last[e.tail] = last[e.tail].max(b);
        last[e.head] = last[e.head].max(a);
    }
    (pos, last)
}

fn frontier_width(g: &WeightedDigraph, order: &[usize]) -> usize {
    let (_, last) = last_neighbor_positions(g, order);
    (0..order.len())
        .map(|k| order[..=k].iter().filter(|&&u| last[u] > k).count())
        .max()
        .unwrap_or(0)
}

/// Arithmetic needed by the exact optimizers.
trait CutWeight: Clone + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> {}
impl<T: Clone + PartialOrd + Zero + Add<Output = T> + Sub<Output = T>> CutWeight for T {}

enum Engine<'a> {
    Brute,
    Frontier(&'a [usize]),
}

impl Engine<'_> {
    fn run<T: CutWeight>(&self, n: usize, edges: &[(usize, usize, T)]) -> (T, Vec<bool>) {
        match self {
            Engine::Brute => brute_force(n, edges),
            Engine::Frontier(order) => frontier_dp(n, edges, order),
        }
    }
}

/// Runs `engine` on the cheapest exact representation of the weights:
/// scaled to a common denominator as `i128` (or `BigInt` if that could
/// overflow), or `f64` when any weight is a float.
fn with_weights(g: &WeightedDigraph, engine: Engine<'_>) -> (Scalar, Vec<bool>) {
    let n = g.num_vertices();
    if !g.is_exact() {
        let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.tail, e.head, e.weight.to_f64())).collect();
        let (v, bits) = engine.run(n, &edges);
        return (Scalar::Float(v), bits);
    }
    let rats: Vec<&Rational> = g.edges().iter().map(|e| e.weight.as_rational().expect("exact")).collect();
    let lcm = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = rats.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let total: BigInt = ints.iter().sum();
    if total.abs().bits() < 120 {
        let edges: Vec<(usize, usize, i128)> = g
            .edges()
            .iter()
            .zip(&ints)
            .map(|(e, w)| (e.tail, e.head, w.to_i128().expect("fits")))
            .collect();
        let (v, bits) = engine.run(n, &edges);
        (Scalar::Exact(Rational::new(BigInt::from(v), lcm)), bits)
    } else {
        let edges: Vec<(usize, usize, BigInt)> = g.edges().iter().zip(ints).map(|(e, w)| (e.tail, e.head, w)).collect();
        let (v, bits) = engine.run(n, &edges);
        (Scalar::Exact(Rational::new(v, lcm)), bits)
    }
}

fn brute_force<T: CutWeight>(n: usize, edges: &[(usize, usize, T)]) -> (T, Vec<bool>) {
    let mut out_adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut in_adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for (t, h, w) in edges {
        out_adj[*t].push((*h, w.clone()));
        in_adj[*h].push((*t, w.clone()));
    }
    // Only non-isolated vertices matter; isolated ones stay at 0.
    let active: Vec<usize> = (0..n).filter(|&v| !out_adj[v].is_empty() || !in_adj[v].is_empty()).collect();
    let mut bits = vec![false; n];
    let mut value = T::zero();
    let mut best = T::zero();
    let mut best_bits = bits.clone();
    let count: u64 = 1u64 << active.len();
    for step in 1..count {
        // Gray code: flip the vertex at the lowest set bit of `step`.
        let v = active[step.trailing_zeros() as usize];
        let mut gain_out = T::zero();
        for (u, w) in &out_adj[v] {
            if !bits[*u] {
                gain_out = gain_out + w.clone();
            }
        }
        let mut gain_in = T::zero();
        for (u, w) in &in_adj[v] {
            if bits[*u] {
                gain_in = gain_in + w.clone();
            }
        }
        if bits[v] {
            value = value - gain_out + gain_in;
        } else {
            value = value + gain_out - gain_in;
        }
        bits[v] = !bits[v];
        if value > best {
            best = value.clone();
            best_bits.clone_from(&bits);
        }
    }
    (best, best_bits)
}

fn frontier_dp<T: CutWeight>(n: usize, edges: &[(usize, usize, T)], order: &[usize]) -> (T, Vec<bool>) {
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut last = pos.clone();
    // Edges grouped by their later endpoint: (earlier vertex, weight, later is tail).
    let mut back: Vec<Vec<(usize, T, bool)>> = vec![Vec::new(); n];
    for (t, h, w) in edges {
        let (pt, ph) = (pos[*t], pos[*h]);
        last[*t] = last[*t].max(ph);
        last[*h] = last[*h].max(pt);
        if pt > ph {
            back[*t].push((*h, w.clone(), true));
        } else {
            back[*h].push((*t, w.clone(), false));
        }
    }
    let words = n.div_ceil(64).max(1);
    let mut frontier: Vec<usize> = Vec::new();
    let mut states: BTreeMap<u64, (T, Vec<u64>)> = BTreeMap::new();
    states.insert(0, (T::zero(), vec![0u64; words]));
    for (k, &v) in order.iter().enumerate() {
        let mut slot = vec![usize::MAX; n];
        for (j, &u) in frontier.iter().enumerate() {
            slot[u] = j;
        }
        let mut next_frontier: Vec<usize> = frontier.iter().copied().chain(std::iter::once(v)).collect();
        next_frontier.retain(|&u| last[u] > k);
        let remap: Vec<(usize, usize)> = next_frontier
            .iter()
            .enumerate()
            .map(|(j, &u)| (j, if u == v { usize::MAX } else { slot[u] }))
            .collect();
        let mut next: BTreeMap<u64, (T, Vec<u64>)> = BTreeMap::new();
        for (key, (val, assign)) in &states {
            for bit in [false, true] {
                let mut gain = T::zero();
                for (u, w, v_is_tail) in &back[v] {
                    let xu = key >> slot[*u] & 1 == 1;
                    let satisfied = if *v_is_tail { bit && !xu } else { xu && !bit };
                    if satisfied {
                        gain = gain + w.clone();
                    }
                }
                let mut nkey = 0u64;
                for &(j, from) in &remap {
                    let b = if from == usize::MAX { bit } else { key >> from & 1 == 1 };
                    if b {
                        nkey |= 1 << j;
                    }
                }
                let nval = val.clone() + gain;
                let better = match next.get(&nkey) {
                    Some((cur, _)) => nval > *cur,
                    None => true,
                };
                if better {
                    let mut a = assign.clone();
                    if bit {
                        a[v / 64] |= 1 << (v % 64);
                    }
                    next.insert(nkey, (nval, a));
                }
            }
        }
        states = next;
        frontier = next_frontier;
    }
    let (best, assign) = states
        .into_values()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one state");
    let bits = (0..n).map(|v| assign[v / 64] >> (v % 64) & 1 == 1).collect();
    (best, bits)
}
