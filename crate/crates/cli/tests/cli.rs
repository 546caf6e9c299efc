use std::path::Path;
use std::process::Command;

use dicut::lb_suite::{named_instance, INSTANCE_NAMES};
use dicut::scalar::ratio;
use dicut_cli::files::{parse_graph, read_graph};
use dicut_cli::run_cli;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut argv = vec!["oblivious"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", r.stdout))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_general_report() {
    let r = run(&["verify", "general"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["id"], "general");
    assert_eq!(v["value"], "4031104/8135775");
    assert_eq!(v["target"], "0.4955");
    assert_eq!(v["direction"], "<=");
    assert_eq!(v["pass"], true);
}

#[test]
fn two_vertex_optimum_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("tv.json");
    let r = run(&["instance", "two_vertex", "--c", "9/8", "--out", path_str(&g)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = run(&["value", path_str(&g)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["value"], "9/17");
}

#[test]
fn instance_on_stdout_parses_back() {
    let r = run(&["instance", "two_vertex", "--c", "9/8"]);
    assert_eq!(r.code, 0);
    let g = parse_graph(&r.stdout, "stdout").unwrap();
    assert_eq!(g, named_instance("two_vertex", Some(&ratio(9, 8))).unwrap().graph);
}

#[test]
fn constant_half_evaluates_to_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let sel = dir.path().join("half.json");
    std::fs::write(&sel, r#"{"kind": "antisym_piecewise", "thresholds": ["1"], "values": []}"#).unwrap();
    for name in ["antisym8", "fj_g1"] {
        let g = dir.path().join(format!("{name}.json"));
        let c = if name == "fj_g1" { vec!["--c", "5/4"] } else { vec![] };
        let mut args = vec!["instance", name];
        args.extend(c);
        args.extend(["--out", path_str(&g)]);
        assert_eq!(run(&args).code, 0);
        let r = run(&["eval", path_str(&g), path_str(&sel)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_eq!(json(&r)["value"], "1/4");
    }
}

#[test]
fn named_instances_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in INSTANCE_NAMES {
        let c = match name {
            "glp36" | "antisym8" => None,
            _ => Some(ratio(7, 5)),
        };
        let expected = named_instance(name, c.as_ref()).unwrap().graph;
        let c_text = c.as_ref().map(|c| c.to_string());
        for ext in ["json", "tsv"] {
            let p = dir.path().join(format!("{name}.{ext}"));
            let mut args = vec!["instance", name, "--out", path_str(&p)];
            if let Some(c) = &c_text {
                args.extend(["--c", c.as_str()]);
            }
            let r = run(&args);
            assert_eq!(r.code, 0, "{name}: {}", r.stderr);
            let g = read_graph(&p).unwrap();
            if ext == "json" {
                assert_eq!(g, expected, "{name}");
            } else {
                // TSV does not record vertex order; compare weights edge by edge.
                assert_eq!(g.edges().len(), expected.edges().len(), "{name}");
                for e in expected.edges() {
                    let (t, h) = (expected.vertex_id(e.tail), expected.vertex_id(e.head));
                    assert_eq!(g.weight(t, h), Some(&e.weight), "{name} {t}->{h}");
                }
            }
        }
    }
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let r = run(&["sweep", "--b", "1/2", "--ells", "21,5", "--csv", path_str(&csv)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,b,ratio");
    assert!(lines[1].starts_with("5,"));
    let x21: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(x21[0], "21");
    let v: f64 = x21[2].parse().unwrap();
    assert!((v - 0.4811046511627907).abs() < 1e-9, "{v}");
    assert_eq!(json(&r)["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn ratio_of_small_step_function() {
    let dir = tempfile::tempdir().unwrap();
    let sel = dir.path().join("s.json");
    std::fs::write(&sel, r#"{"kind": "plsigmoid", "b": "1/2"}"#).unwrap();
    let wit = dir.path().join("w.json");
    let r = run(&["ratio", path_str(&sel), "--ell", "3", "--mode", "exact", "--witness", path_str(&wit)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["mode"], "exact");
    assert!(read_graph(&wit).unwrap().num_vertices() > 0);
    let r = run(&["ratio", path_str(&sel)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--ell"), "{}", r.stderr);
}

#[test]
fn find_hard_on_a_grid() {
    let r = run(&["find-hard", "--biases", "-1/10,0,1/10,1/5", "--family", "grid:1/10:1/2:1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["family_size"], 36);
    let z: f64 = v["decimal"].as_str().unwrap().parse().unwrap();
    assert!(z > 0.25 && z < 0.5, "{z}");
}

#[test]
fn search_reports_trace() {
    let r = run(&["search-intercept", "--ell", "4", "--lo", "2/5", "--hi", "3/5", "--iters", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert!(v["trace"].as_array().unwrap().len() >= 4);
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let r = run(&["sweep", "--b", "half", "--ells", "3"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--b"), "{}", r.stderr);
    let r = run(&["verify", "nonexistent"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("nonexistent"));
    let r = run(&["instance", "two_vertex"]);
    assert_eq!(r.code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn parse_errors_name_file_line_column() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.tsv");
    std::fs::write(&g, "a\tb\t1\nb\ta\tone\n").unwrap();
    let r = run(&["value", path_str(&g)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.tsv:2:5"), "{}", r.stderr);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["verify", "antisym"]);
    let b = run(&["verify", "antisym"]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["sweep", "--b", "149/309", "--ells", "7,3"]);
    let b = run(&["sweep", "--b", "149/309", "--ells", "3,7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_oblivious");
    let ok = Command::new(bin).args(["verify", "plsigmoid_half"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["value"], "6*sqrt(2) - 8");
    let bad = Command::new(bin).args(["sweep", "--ells", "3"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
