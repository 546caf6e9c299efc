//! Graph and selection-function files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

use dicut::digraph::{Assignment, WeightedDigraph};
use dicut::scalar::{format_rational, parse_rational};
use dicut::selection::{AntisymPiecewise, PlSigmoid, Selection};
use dicut::{Rational, Scalar};

/// A rational given either as a string literal or a bare JSON number.
#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Text(String),
    Number(serde_json::Number),
}

impl Num {
    fn rational(&self) -> Result<Rational> {
        let text = match self {
            Num::Text(s) => s.clone(),
            Num::Number(n) => n.to_string(),
        };
        parse_rational(&text).map_err(|e| anyhow!("{e}"))
    }
}

#[derive(Deserialize)]
struct JsonEdge {
    tail: String,
    head: String,
    w: Num,
}

#[derive(Deserialize)]
struct JsonGraph {
    #[serde(default)]
    vertices: Vec<String>,
    edges: Vec<JsonEdge>,
}

fn json_error(origin: &str, e: &serde_json::Error) -> anyhow::Error {
    anyhow!("{origin}:{}:{}: {e}", e.line(), e.column())
}

/// Parses a graph from TSV or JSON text; `origin` names the source in
/// error messages.
pub fn parse_graph(text: &str, origin: &str) -> Result<WeightedDigraph> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text, origin)
    } else {
        parse_graph_tsv(text, origin)
    }
}

fn parse_graph_json(text: &str, origin: &str) -> Result<WeightedDigraph> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| json_error(origin, &e))?;
    let mut b = WeightedDigraph::builder();
    for v in &doc.vertices {
        b.vertex(v);
    }
    for (k, e) in doc.edges.iter().enumerate() {
        let w = e.w.rational().with_context(|| format!("{origin}: edge {k} ({} -> {})", e.tail, e.head))?;
        b.edge(&e.tail, &e.head, Scalar::Exact(w))
            .map_err(|err| anyhow!("{origin}: edge {k} ({} -> {}): {err}", e.tail, e.head))?;
    }
    Ok(b.build())
}

fn parse_graph_tsv(text: &str, origin: &str) -> Result<WeightedDigraph> {
    let mut b = WeightedDigraph::builder();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            bail!("{origin}:{lineno}:1: expected tail<TAB>head<TAB>weight, found {} field(s)", fields.len());
        }
        let col = fields[0].len() + fields[1].len() + 3;
        let w = parse_rational(fields[2]).map_err(|e| anyhow!("{origin}:{lineno}:{col}: {e}"))?;
        b.edge(fields[0].trim(), fields[1].trim(), Scalar::Exact(w))
            .map_err(|e| anyhow!("{origin}:{lineno}:1: {e}"))?;
    }
    Ok(b.build())
}

pub fn read_graph(path: &Path) -> Result<WeightedDigraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_graph(&text, &path.display().to_string())
}

fn weight_text(w: &Scalar) -> String {
    match w {
        Scalar::Exact(r) => format_rational(r),
        Scalar::Float(f) => format!("{f:?}"),
    }
}

/// JSON graph document; `reference`, when given, is stored alongside and
/// ignored by the parser.
pub fn graph_json(g: &WeightedDigraph, reference: Option<&Assignment>) -> Value {
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .map(|e| {
            serde_json::json!({
                "tail": g.vertex_id(e.tail),
                "head": g.vertex_id(e.head),
                "w": weight_text(&e.weight),
            })
        })
        .collect();
    let mut doc = serde_json::json!({ "vertices": g.vertices(), "edges": edges });
    if let Some(x) = reference {
        let bits: serde_json::Map<String, Value> = x.iter().map(|(v, b)| (v.to_string(), Value::from(u8::from(b)))).collect();
        doc["reference"] = Value::Object(bits);
    }
    doc
}

pub fn graph_tsv(g: &WeightedDigraph) -> String {
    let mut out = String::from("# tail\thead\tweight\n");
    for e in g.edges() {
        let _ = writeln!(out, "{}\t{}\t{}", g.vertex_id(e.tail), g.vertex_id(e.head), weight_text(&e.weight));
    }
    out
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SelectionDoc {
    Plsigmoid { b: Num },
    AntisymPiecewise { thresholds: Vec<Num>, values: Vec<Num> },
}

pub fn parse_selection(text: &str, origin: &str) -> Result<Selection> {
    let doc: SelectionDoc = serde_json::from_str(text).map_err(|e| json_error(origin, &e))?;
    let sel = match doc {
        SelectionDoc::Plsigmoid { b } => {
            let b = b.rational().with_context(|| format!("{origin}: field b"))?;
            Selection::PlSigmoid(PlSigmoid::new(b).map_err(|e| anyhow!("{origin}: {e}"))?)
        }
        SelectionDoc::AntisymPiecewise { thresholds, values } => {
            let t = thresholds
                .iter()
                .enumerate()
                .map(|(k, x)| x.rational().with_context(|| format!("{origin}: thresholds[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            let v = values
                .iter()
                .enumerate()
                .map(|(k, x)| x.rational().with_context(|| format!("{origin}: values[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            Selection::AntisymPiecewise(AntisymPiecewise::new(t, v).map_err(|e| anyhow!("{origin}: {e}"))?)
        }
    };
    Ok(sel)
}

pub fn read_selection(path: &Path) -> Result<Selection> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_selection(&text, &path.display().to_string())
}

/// Probability vectors for `find-hard`: a JSON array of arrays.
pub fn parse_family(text: &str, origin: &str) -> Result<Vec<Vec<Rational>>> {
    let doc: Vec<Vec<Num>> = serde_json::from_str(text).map_err(|e| json_error(origin, &e))?;
    doc.iter()
        .enumerate()
        .map(|(k, row)| {
            row.iter()
                .map(|x| x.rational())
                .collect::<Result<Vec<_>>>()
                .with_context(|| format!("{origin}: family member {k}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_duplicates_are_summed() {
        let g = parse_graph("# c\na\tb\t1/2\n\na\tb\t0.25\nb\ta\t1\n", "t").unwrap();
        assert_eq!(g.weight("a", "b"), Some(&Scalar::from_ratio(3, 4)));
    }

    #[test]
    fn tsv_error_names_line_and_column() {
        let e = parse_graph("a\tb\t1\na\tc\tx7\n", "g.tsv").unwrap_err().to_string();
        assert!(e.starts_with("g.tsv:2:5:"), "{e}");
    }

    #[test]
    fn json_error_names_line_and_column() {
        let e = parse_graph("{\"edges\": [\n  {\"tail\": 1}]}", "g.json").unwrap_err().to_string();
        assert!(e.starts_with("g.json:2:"), "{e}");
    }

    #[test]
    fn selection_kinds() {
        let s = parse_selection(r#"{"kind":"plsigmoid","b":"149/309"}"#, "s").unwrap();
        assert!(matches!(s, Selection::PlSigmoid(_)));
        let s = parse_selection(r#"{"kind":"antisym_piecewise","thresholds":[0,"1/2",1],"values":[0.75,1]}"#, "s").unwrap();
        assert!(matches!(s, Selection::AntisymPiecewise(_)));
        assert!(parse_selection(r#"{"kind":"plsigmoid","b":"2"}"#, "s").is_err());
    }
}
