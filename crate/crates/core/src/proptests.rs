use proptest::prelude::*;

use crate::digraph::{opt_value, Assignment, OptMethod, WeightedDigraph};
use crate::oblivious::{class_quadratic, expected_value, ratio_on_graph, ClassMap, Denominator};
use crate::ratio_lp::{compute_ratio, extract_witness_graph, solve_ratio_lp};
use crate::scalar::{int, ratio, Rational, Scalar};
use crate::selection::{AntisymPiecewise, SelectionFunction};
use crate::simplex::{solve_lp, LpProblem, LpStatus, Relation, SolveMode};
use crate::surd::Sqrt2Number;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedDigraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 1i64..=12, 1i64..=4), 1..=(2 * n)).prop_map(move |edges| {
            let mut b = WeightedDigraph::builder();
            for i in 0..n {
                b.vertex(&format!("v{i}"));
            }
            for (u, v, p, q) in edges {
                if u != v {
                    b.edge(&format!("v{u}"), &format!("v{v}"), Scalar::from_ratio(p, q)).unwrap();
                }
            }
            b.build()
        })
    })
    .prop_filter("needs an edge", |g| !g.edges().is_empty())
}

fn step_strategy() -> impl Strategy<Value = AntisymPiecewise> {
    (1usize..=4).prop_flat_map(|ell| {
        (
            0i64..=3,
            prop::collection::btree_set(1i64..20, ell - 1),
            prop::collection::vec(0i64..=20, ell),
        )
            .prop_map(move |(t0, inner, vals)| {
                let mut t = vec![ratio(t0, 20)];
                t.extend(inner.into_iter().filter(|&x| x > t0).map(|x| ratio(x, 20)));
                while t.len() < ell {
                    let last = t.last().unwrap().clone();
                    t.push((last + int(1)) / int(2));
                }
                t.push(int(1));
                let v = vals.into_iter().map(|x| ratio(x, 20)).collect();
                AntisymPiecewise::new(t, v).unwrap()
            })
    })
}

fn without_isolated(g: &WeightedDigraph) -> WeightedDigraph {
    let ids: Vec<&str> = (0..g.num_vertices()).filter(|&i| !g.is_isolated(i)).map(|i| g.vertex_id(i)).collect();
    g.induced_subgraph(&ids).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expected_value_bounded_by_optimum(g in graph_strategy(7), s in step_strategy()) {
        let g = without_isolated(&g);
        let ev = expected_value(&g, &s).unwrap();
        let opt = opt_value(&g, &OptMethod::BruteForce).unwrap();
        prop_assert!(ev.weight >= Scalar::zero());
        prop_assert!(ev.weight <= opt.satisfied);
    }

    #[test]
    fn transpose_invariance(g in graph_strategy(7), s in step_strategy()) {
        let g = without_isolated(&g);
        prop_assert_eq!(expected_value(&g, &s).unwrap(), expected_value(&g.transpose(), &s).unwrap());
    }

    #[test]
    fn ratio_scale_invariance(g in graph_strategy(6), s in step_strategy(), k in 1i64..9) {
        let g = without_isolated(&g);
        let d = Denominator::Optimum(OptMethod::BruteForce);
        let a = ratio_on_graph(&g, &s, &d);
        let b = ratio_on_graph(&g.scaled(&Scalar::from_ratio(k, 3)).unwrap(), &s, &d);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.ratio, b.ratio),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn quadratic_matches_expected_value(g in graph_strategy(7), s in step_strategy()) {
        let g = without_isolated(&g);
        let cm = ClassMap::from_graph(&g, false).unwrap();
        let q = class_quadratic(&g, &cm).unwrap();
        let x = cm.point_for(&s).unwrap();
        prop_assert_eq!(Scalar::Exact(q.eval(&x)), expected_value(&g, &s).unwrap().weight);
    }

    #[test]
    fn antisymmetric_classmap_agrees(g in graph_strategy(6), s in step_strategy()) {
        let g = without_isolated(&g);
        let cm = ClassMap::from_graph(&g, true).unwrap();
        let q = class_quadratic(&g, &cm).unwrap();
        let x = cm.point_for(&s).unwrap();
        prop_assert_eq!(Scalar::Exact(q.eval(&x)), expected_value(&g, &s).unwrap().weight);
    }

    #[test]
    fn frontier_dp_matches_brute_force(g in graph_strategy(11)) {
        let g = without_isolated(&g);
        let order: Vec<String> = g.vertices().to_vec();
        let a = opt_value(&g, &OptMethod::BruteForce).unwrap();
        let b = opt_value(&g, &OptMethod::FrontierDp { ordering: order }).unwrap();
        prop_assert_eq!(&a.satisfied, &b.satisfied);
        prop_assert_eq!(crate::digraph::cut_value(&g, &b.assignment).unwrap().satisfied, b.satisfied);
    }

    #[test]
    fn lp_value_is_sound(g in graph_strategy(6), s in step_strategy()) {
        let g = without_isolated(&g);
        let lp = compute_ratio(&s, SolveMode::Exact).unwrap();
        if let Ok(r) = ratio_on_graph(&g, &s, &Denominator::Optimum(OptMethod::BruteForce)) {
            prop_assert!(lp <= r.ratio, "LP {} exceeds graph ratio {}", lp, r.ratio);
        }
    }

    #[test]
    fn exact_and_float_lp_agree(s in step_strategy()) {
        let e = compute_ratio(&s, SolveMode::Exact).unwrap().to_f64();
        let f = compute_ratio(&s, SolveMode::Float).unwrap().to_f64();
        prop_assert!((e - f).abs() < 1e-9, "exact {} float {}", e, f);
    }

    #[test]
    fn witness_realizes_lp_value(s in step_strategy()) {
        let sol = solve_ratio_lp(&s, SolveMode::Exact).unwrap();
        let w = extract_witness_graph(&sol, &s).unwrap();
        let r = ratio_on_graph(&w.graph, &s, &Denominator::ReferenceCut(w.reference.clone())).unwrap();
        prop_assert!((r.ratio.to_f64() - sol.value.to_f64()).abs() < 1e-6);
    }

    #[test]
    fn random_lps_exact_vs_float(
        rows in prop::collection::vec((prop::collection::vec(-5i64..=5, 3), 0i64..=10), 1..=4),
        cost in prop::collection::vec(-4i64..=4, 3),
    ) {
        let mut p = LpProblem::<Rational>::new(3);
        p.objective = cost.iter().map(|&c| int(c)).collect();
        for (coeffs, rhs) in &rows {
            let c: Vec<(usize, Rational)> = coeffs.iter().enumerate().map(|(j, &a)| (j, int(a))).collect();
            p.add_constraint(c, Relation::Le, int(*rhs));
        }
        // Box the variables so the LP is bounded.
        let all: Vec<(usize, Rational)> = (0..3).map(|j| (j, int(1))).collect();
        p.add_constraint(all, Relation::Le, int(10));
        let exact = solve_lp(&p).unwrap();
        let float = solve_lp(&p.to_f64()).unwrap();
        prop_assert_eq!(exact.status, LpStatus::Optimal);
        prop_assert_eq!(float.status, LpStatus::Optimal);
        let e = crate::scalar::rational_to_f64(&exact.objective);
        prop_assert!((e - float.objective).abs() < 1e-7, "{} vs {}", e, float.objective);
    }

    #[test]
    fn sqrt2_sign_matches_float(a in -1000i64..1000, b in -1000i64..1000) {
        let x = Sqrt2Number::new(int(a), int(b));
        let f = x.to_f64();
        if f.abs() > 1e-9 {
            prop_assert_eq!(x.signum(), f.partial_cmp(&0.0).unwrap());
        }
    }
}

#[test]
fn constant_half_is_one_quarter() {
    let s = AntisymPiecewise::constant_half();
    assert_eq!(compute_ratio(&s, SolveMode::Exact).unwrap(), Scalar::from_ratio(1, 4));
    let mut b = WeightedDigraph::builder();
    b.edge("u", "v", Scalar::one()).unwrap();
    let g = b.build();
    assert_eq!(s.eval(&g.bias_of("u").unwrap()).unwrap(), Scalar::from_ratio(1, 2));
    let x = Assignment::ones_on(&g, &["u"]);
    let r = ratio_on_graph(&g, &s, &Denominator::ReferenceCut(x)).unwrap();
    assert_eq!(r.ratio, Scalar::from_ratio(1, 4));
}
