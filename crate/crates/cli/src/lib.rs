//! The `oblivious` command line: argument parsing, dispatch and JSON/CSV
//! output. [`run_cli`] is the whole program minus process exit.

pub mod files;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dicut::digraph::{opt_value, OptMethod, BRUTE_FORCE_LIMIT};
use dicut::hard_instance::{antisymmetric_grid, find_hard_graph, vertex_name, HardInstanceSpec};
use dicut::lb_suite::{named_instance, verify_all, verify_bound, BoundReport, BoundValue, Check};
use dicut::oblivious::{expected_value, ratio_on_graph, Denominator};
use dicut::ratio_lp::{extract_witness_graph, solve_ratio_lp};
use dicut::scalar::{format_f64, format_rational, parse_rational, rational_to_f64};
use dicut::search::{search_intercept, sweep_discretization};
use dicut::selection::{discretize_plsigmoid, AntisymPiecewise, Selection};
use dicut::simplex::{FloatReport, SolveMode};
use dicut::{Rational, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CERTIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

impl From<Mode> for SolveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => SolveMode::Exact,
            Mode::Float => SolveMode::Float,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "oblivious", version, about = "Approximation ratios of oblivious Max-DiCut algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact Max-DiCut optimum of a graph.
    Value {
        graph: PathBuf,
        /// Comma-separated vertex ordering for the frontier dynamic program.
        #[arg(long, value_delimiter = ',')]
        ordering: Option<Vec<String>>,
    },
    /// Expected cut of an oblivious algorithm on a graph.
    Eval { graph: PathBuf, selection: PathBuf },
    /// Approximation ratio of an antisymmetric step function via the ratio LP.
    Ratio {
        selection: PathBuf,
        #[arg(long, value_enum, default_value = "float")]
        mode: Mode,
        /// Discretize a sigmoid selection into this many positive classes.
        #[arg(long)]
        ell: Option<usize>,
        /// Write a witness graph (JSON) realizing the LP value.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Ratio of PLSigmoid_b discretizations for several class counts.
    Sweep {
        #[arg(long, value_parser = rational_arg)]
        b: Rational,
        #[arg(long, value_delimiter = ',', required = true)]
        ells: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "float")]
        mode: Mode,
    },
    /// Ternary search over the sigmoid intercept.
    SearchIntercept {
        #[arg(long)]
        ell: usize,
        #[arg(long, value_parser = rational_arg)]
        lo: Rational,
        #[arg(long, value_parser = rational_arg)]
        hi: Rational,
        #[arg(long)]
        iters: usize,
    },
    /// Worst graph for a finite family of antisymmetric algorithms.
    FindHard {
        /// Comma-separated class biases, e.g. -1/10,0,1/10,1/5.
        #[arg(long, value_parser = rational_arg, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        biases: Vec<Rational>,
        /// A JSON file of probability vectors, or grid:STEP:LO:HI.
        #[arg(long)]
        family: String,
        /// Write the graph (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive one of the lower-bound constants.
    Verify {
        /// plsigmoid_half, plsigmoid_family, general, antisym, fj_antisym,
        /// fj_general_tradeoff, or all.
        id: String,
    },
    /// Print or write a named graph.
    Instance {
        name: String,
        #[arg(long, value_parser = rational_arg)]
        c: Option<Rational>,
        /// Output file; `.tsv` selects the TSV format.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the program on `argv` (including the program name) and returns the
/// exit code.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn num(s: &Scalar) -> Value {
    json!({ "exact": s.as_rational().map(format_rational), "decimal": s.render_decimal() })
}

fn report_json(r: &Option<FloatReport>) -> Value {
    match r {
        Some(r) => json!({
            "primal_residual": r.primal_residual,
            "dual_infeasibility": r.dual_infeasibility,
            "duality_gap": r.duality_gap,
        }),
        None => Value::Null,
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Value { graph, ordering } => cmd_value(&graph, ordering, out),
        Command::Eval { graph, selection } => cmd_eval(&graph, &selection, out),
        Command::Ratio { selection, mode, ell, witness } => cmd_ratio(&selection, mode.into(), ell, witness.as_deref(), out),
        Command::Sweep { b, ells, csv, mode } => cmd_sweep(&b, &ells, csv.as_deref(), mode.into(), out),
        Command::SearchIntercept { ell, lo, hi, iters } => cmd_search(ell, &lo, &hi, iters, out),
        Command::FindHard { biases, family, out: path } => cmd_find_hard(biases, &family, path.as_deref(), out),
        Command::Verify { id } => cmd_verify(&id, out),
        Command::Instance { name, c, out: path } => cmd_instance(&name, c.as_ref(), path.as_deref(), out),
    }
}

fn cmd_value(path: &Path, ordering: Option<Vec<String>>, out: &mut dyn Write) -> Result<i32> {
    let g = files::read_graph(path)?;
    let method = match ordering {
        Some(ordering) => OptMethod::FrontierDp { ordering },
        None => OptMethod::BruteForce,
    };
    let opt = opt_value(&g, &method)?;
    let assignment: serde_json::Map<String, Value> =
        opt.assignment.iter().map(|(v, b)| (v.to_string(), Value::from(u8::from(b)))).collect();
    emit(
        out,
        &json!({
            "value": opt.value.render(),
            "decimal": opt.value.render_decimal(),
            "satisfied": opt.satisfied.render(),
            "total_weight": g.total_weight().render(),
            "method": if matches!(method, OptMethod::BruteForce) { "brute_force" } else { "frontier_dp" },
            "assignment": assignment,
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_eval(graph: &Path, selection: &Path, out: &mut dyn Write) -> Result<i32> {
    let g = files::read_graph(graph)?;
    let s = files::read_selection(selection)?;
    let ev = expected_value(&g, &s)?;
    let ratio = if g.num_vertices() <= BRUTE_FORCE_LIMIT {
        let r = ratio_on_graph(&g, &s, &Denominator::Optimum(OptMethod::BruteForce))?;
        num(&r.ratio)
    } else {
        Value::Null
    };
    emit(
        out,
        &json!({
            "selection": s.to_string(),
            "value": ev.normalized.render(),
            "decimal": ev.normalized.render_decimal(),
            "weight": ev.weight.render(),
            "ratio": ratio,
        }),
    )?;
    Ok(EXIT_OK)
}

fn step_function(s: Selection, ell: Option<usize>) -> Result<AntisymPiecewise> {
    match (s, ell) {
        (Selection::AntisymPiecewise(s), None) => Ok(s),
        (Selection::AntisymPiecewise(_), Some(_)) => bail!("--ell applies only to sigmoid selections"),
        (Selection::PlSigmoid(s), Some(ell)) => Ok(discretize_plsigmoid(s.intercept(), ell)?),
        (Selection::PlSigmoid(_), None) => bail!("a sigmoid selection needs --ell to be discretized"),
    }
}

fn cmd_ratio(path: &Path, mode: SolveMode, ell: Option<usize>, witness: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let s = step_function(files::read_selection(path)?, ell)?;
    let sol = solve_ratio_lp(&s, mode)?;
    if let Some(wpath) = witness {
        let w = extract_witness_graph(&sol, &s)?;
        let doc = files::graph_json(&w.graph, Some(&w.reference));
        std::fs::write(wpath, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("cannot write {}", wpath.display()))?;
    }
    emit(
        out,
        &json!({
            "ell": sol.ell,
            "mode": if matches!(mode, SolveMode::Exact) { "exact" } else { "float" },
            "value": sol.value.render(),
            "decimal": sol.value.render_decimal(),
            "iterations": sol.iterations,
            "report": report_json(&sol.report),
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_sweep(b: &Rational, ells: &[usize], csv: Option<&Path>, mode: SolveMode, out: &mut dyn Write) -> Result<i32> {
    let rows = sweep_discretization(b, ells, mode)?;
    let mut lines = String::from("x,b,ratio\n");
    let mut items = Vec::new();
    for row in &rows {
        let b_text = format_f64(rational_to_f64(&row.b));
        match &row.ratio {
            Ok(r) => {
                lines.push_str(&format!("{},{},{}\n", row.x, b_text, r.render_decimal()));
                items.push(json!({
                    "x": row.x,
                    "ell": row.ell,
                    "b": format_rational(&row.b),
                    "ratio": r.render(),
                    "decimal": r.render_decimal(),
                    "report": report_json(&row.report),
                }));
            }
            Err(e) => items.push(json!({ "x": row.x, "ell": row.ell, "b": format_rational(&row.b), "error": e.to_string() })),
        }
    }
    if let Some(p) = csv {
        std::fs::write(p, lines).with_context(|| format!("cannot write {}", p.display()))?;
    }
    emit(out, &json!({ "rows": items }))?;
    Ok(EXIT_OK)
}

fn cmd_search(ell: usize, lo: &Rational, hi: &Rational, iters: usize, out: &mut dyn Write) -> Result<i32> {
    let r = search_intercept(ell, lo, hi, iters)?;
    let trace: Vec<Value> = r
        .trace
        .iter()
        .map(|p| json!({ "b": format_rational(&p.b), "b_decimal": format_f64(rational_to_f64(&p.b)), "ratio": format_f64(p.ratio) }))
        .collect();
    emit(
        out,
        &json!({
            "ell": ell,
            "best_b": format_rational(&r.best_b),
            "best_b_decimal": format_f64(rational_to_f64(&r.best_b)),
            "best_ratio": format_f64(r.best_ratio),
            "bracket": [format_rational(&r.lo), format_rational(&r.hi)],
            "trace": trace,
        }),
    )?;
    Ok(EXIT_OK)
}

fn family_from(spec: &str, biases: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    if let Some(rest) = spec.strip_prefix("grid:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("--family grid spec must be grid:STEP:LO:HI, got {spec:?}");
        }
        let p = |s: &str| parse_rational(s).map_err(|e| anyhow!("--family: {e}"));
        return Ok(antisymmetric_grid(biases, &p(parts[0])?, &p(parts[1])?, &p(parts[2])?)?);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).with_context(|| format!("--family: cannot read {spec}"))?;
    files::parse_family(&text, spec)
}

fn cmd_find_hard(biases: Vec<Rational>, family: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let fam = family_from(family, &biases)?;
    let spec = HardInstanceSpec::new(biases, fam)?;
    let h = find_hard_graph(&spec)?;
    let doc = files::graph_json(&h.graph, Some(&h.reference));
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("cannot write {}", p.display()))?;
    }
    let value = Scalar::Exact(h.value.clone());
    emit(
        out,
        &json!({
            "value": value.render(),
            "decimal": value.render_decimal(),
            "family_size": h.per_algorithm.len(),
            "active_rows": h.active_rows,
            "per_algorithm": h.per_algorithm.iter().map(format_rational).collect::<Vec<_>>(),
            "vertex_names": format!("bit.class, e.g. {}", vertex_name((true, 0))),
            "graph": doc,
        }),
    )?;
    Ok(EXIT_OK)
}

fn value_json(v: &BoundValue) -> (Value, Value) {
    (Value::from(v.render()), Value::from(format_f64(v.to_f64())))
}

fn check_json(c: &Check) -> Value {
    let (value, decimal) = value_json(&c.value);
    json!({
        "label": c.label,
        "value": value,
        "decimal": decimal,
        "target": format_rational(&c.target),
        "direction": c.direction.symbol(),
        "pass": c.pass,
    })
}

pub fn bound_json(r: &BoundReport) -> Value {
    let (value, decimal) = value_json(&r.value);
    json!({
        "id": r.id,
        "value": value,
        "decimal": decimal,
        "target": r.target_text,
        "direction": r.direction.symbol(),
        "pass": r.pass,
        "certified": r.certified(),
        "upper_bound": r.upper_bound,
        "checks": r.checks.iter().map(check_json).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

fn cmd_verify(id: &str, out: &mut dyn Write) -> Result<i32> {
    let reports = if id == "all" { verify_all()? } else { vec![verify_bound(id)?] };
    let ok = reports.iter().all(BoundReport::certified);
    if id == "all" {
        emit(out, &Value::Array(reports.iter().map(bound_json).collect()))?;
    } else {
        emit(out, &bound_json(&reports[0]))?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED_CERTIFICATION })
}

fn cmd_instance(name: &str, c: Option<&Rational>, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let inst = named_instance(name, c)?;
    match path {
        Some(p) => {
            let tsv = p.extension().is_some_and(|e| e == "tsv");
            let body = if tsv {
                files::graph_tsv(&inst.graph)
            } else {
                serde_json::to_string_pretty(&files::graph_json(&inst.graph, Some(&inst.reference)))? + "\n"
            };
            std::fs::write(p, body).with_context(|| format!("cannot write {}", p.display()))?;
            emit(
                out,
                &json!({
                    "instance": name,
                    "path": p.display().to_string(),
                    "vertices": inst.graph.num_vertices(),
                    "edges": inst.graph.edges().len(),
                }),
            )?;
        }
        None => emit(out, &files::graph_json(&inst.graph, Some(&inst.reference)))?,
    }
    Ok(EXIT_OK)
}
