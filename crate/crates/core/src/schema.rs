//! JSON documents for operators, lattice functions, local perturbations and
//! metric graphs.
//!
//! Rationals are written as strings `"p/q"` and Gaussian rationals as
//! `"p/q+r/s i"`. Plain JSON numbers are accepted on input; decimals are
//! read exactly from their text. Errors carry the line of the input they
//! refer to whenever it can be located.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::lattice::{GraphEdge, LatticeFunction, LocalPerturbation, PeriodicGraph, PeriodicOperator, Shift, Term, VertexSite};
use crate::quantum::{EdgePerturbation, MetricEdge, MetricGraph, Segment};
use crate::scalar::{parse_rational, GaussRational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

/// Builds an error located at the first line of `text` mentioning `needle`.
fn located(text: &str, needle: &str, message: String) -> SchemaError {
    let line = text.lines().position(|l| l.contains(needle)).map(|i| i + 1);
    SchemaError { line, message }
}

fn parse_doc<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError { line: Some(e.line()), message: e.to_string() })
}

/// A JSON scalar given either as a string or a number.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn text(&self) -> String {
        match self {
            Num::Int(i) => i.to_string(),
            Num::Float(x) => x.to_string(),
            Num::Text(s) => s.clone(),
        }
    }

    fn rational(&self, src: &str) -> Result<BigRational, SchemaError> {
        let t = self.text();
        parse_rational(&t).map_err(|e| located(src, &t, e.to_string()))
    }

    fn gauss(&self, src: &str) -> Result<GaussRational, SchemaError> {
        let t = self.text();
        t.parse::<GaussRational>().map_err(|e| located(src, &t, e.to_string()))
    }

    fn from_rational(r: &BigRational) -> Self {
        match r.to_integer().to_i64() {
            Some(i) if r.is_integer() => Num::Int(i),
            _ => Num::Text(GaussRational::real(r.clone()).to_string()),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct TermDoc {
    u: String,
    v: String,
    shift: Vec<i64>,
    coeff: Num,
}

#[derive(Debug, Deserialize, Serialize)]
struct EdgeDoc {
    u: String,
    v: String,
    shift: Vec<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct OperatorDoc {
    dimension: usize,
    vertices: Vec<String>,
    terms: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<EdgeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<BTreeMap<String, Vec<Num>>>,
}

fn vertex_lookup<'a>(labels: &'a [String], src: &'a str) -> impl Fn(&str) -> Result<usize, SchemaError> + 'a {
    move |l: &str| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| located(src, &format!("\"{l}\""), format!("unknown vertex {l:?}")))
    }
}

fn check_shift(shift: &[i64], dim: usize, src: &str, what: &str) -> Result<Shift, SchemaError> {
    if shift.len() != dim {
        let needle = format!("{shift:?}").replace(' ', "");
        return Err(located(src, &needle[..needle.len().min(3)], format!("{what} shift {shift:?} has dimension {}, expected {dim}", shift.len())));
    }
    Ok(Shift(shift.to_vec()))
}

fn check_labels(labels: &[String], src: &str) -> Result<(), SchemaError> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(located(src, &format!("\"{l}\""), format!("duplicate vertex label {l:?}")));
        }
    }
    Ok(())
}

fn load_positions(
    positions: Option<BTreeMap<String, Vec<Num>>>,
    labels: &[String],
    dim: usize,
    src: &str,
) -> Result<Option<Vec<Vec<BigRational>>>, SchemaError> {
    let Some(map) = positions else { return Ok(None) };
    let idx = vertex_lookup(labels, src);
    let mut out = vec![None; labels.len()];
    for (label, coords) in map {
        let i = idx(&label)?;
        if coords.len() != dim {
            return Err(located(src, &format!("\"{label}\""), format!("position of {label:?} needs {dim} coordinates")));
        }
        out[i] = Some(coords.iter().map(|c| c.rational(src)).collect::<Result<Vec<_>, _>>()?);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or_else(|| located(src, "positions", format!("position of vertex {:?} is missing", labels[i])))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// Structural edges implied by the off-diagonal terms, one per conjugate pair.
fn edges_from_terms(terms: &[Term]) -> Vec<GraphEdge> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in terms {
        if t.u == t.v && t.shift.is_zero() {
            continue;
        }
        // Orient with u < v, or a positive shift on self-loops.
        let key = (t.u, t.v, t.shift.clone()).max((t.v, t.u, t.shift.neg()));
        let (u, v, shift) = if key.0 == key.1 { key.clone() } else { (key.1, key.0, key.2.neg()) };
        if seen.insert(key) {
            out.push(GraphEdge { u, v, shift });
        }
    }
    out
}

/// Loads an operator. Asymmetric term lists are rejected unless
/// `symmetrize` asks for the missing conjugate partners to be added.
pub fn load_operator(src: &str, symmetrize: bool) -> Result<PeriodicOperator, SchemaError> {
    let doc: OperatorDoc = parse_doc(src)?;
    let dim = doc.dimension;
    if dim == 0 {
        return Err(located(src, "dimension", "dimension must be positive".into()));
    }
    check_labels(&doc.vertices, src)?;
    let idx = vertex_lookup(&doc.vertices, src);
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in &doc.terms {
        terms.push(Term {
            u: idx(&t.u)?,
            v: idx(&t.v)?,
            shift: check_shift(&t.shift, dim, src, "term")?,
            coeff: t.coeff.gauss(src)?,
        });
    }
    let edges = match &doc.edges {
        Some(es) => es
            .iter()
            .map(|e| Ok(GraphEdge { u: idx(&e.u)?, v: idx(&e.v)?, shift: check_shift(&e.shift, dim, src, "edge")? }))
            .collect::<Result<Vec<_>, SchemaError>>()?,
        None => edges_from_terms(&terms),
    };
    let mut graph = PeriodicGraph::new(dim, doc.vertices.clone(), edges)
        .map_err(|e| located(src, "edges", e.to_string()))?;
    if let Some(p) = load_positions(doc.positions, &doc.vertices, dim, src)? {
        graph = graph.with_positions(p);
    }
    let built = if symmetrize { PeriodicOperator::symmetrized(graph, terms) } else { PeriodicOperator::new(graph, terms) };
    built.map_err(|e| located(src, "terms", e.to_string()))
}

pub fn operator_to_json(a: &PeriodicOperator) -> Value {
    let labels = &a.graph.vertices;
    let doc = OperatorDoc {
        dimension: a.dimension(),
        vertices: labels.clone(),
        terms: a
            .terms()
            .iter()
            .map(|t| TermDoc {
                u: labels[t.u].clone(),
                v: labels[t.v].clone(),
                shift: t.shift.0.clone(),
                coeff: Num::Text(t.coeff.to_string()),
            })
            .collect(),
        edges: Some(
            a.graph
                .edges
                .iter()
                .map(|e| EdgeDoc { u: labels[e.u].clone(), v: labels[e.v].clone(), shift: e.shift.0.clone() })
                .collect(),
        ),
        positions: a.graph.positions.as_ref().map(|p| {
            labels.iter().cloned().zip(p.iter().map(|c| c.iter().map(Num::from_rational).collect())).collect()
        }),
    };
    serde_json::to_value(doc).expect("operator document serializes")
}

#[derive(Debug, Deserialize, Serialize)]
struct SiteDoc {
    vertex: String,
    cell: Vec<i64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct ValueDoc {
    vertex: String,
    cell: Vec<i64>,
    value: Num,
}

#[derive(Debug, Deserialize, Serialize)]
struct FunctionDoc {
    values: Vec<ValueDoc>,
}

fn load_site(s: &SiteDoc, graph: &PeriodicGraph, src: &str) -> Result<VertexSite, SchemaError> {
    let vertex = vertex_lookup(&graph.vertices, src)(&s.vertex)?;
    Ok(VertexSite { vertex, cell: check_shift(&s.cell, graph.dimension, src, "site")? })
}

/// Loads a finitely supported function on the vertices of `graph`.
pub fn load_function(src: &str, graph: &PeriodicGraph) -> Result<LatticeFunction, SchemaError> {
    let doc: FunctionDoc = parse_doc(src)?;
    let mut f = LatticeFunction::new(graph.dimension);
    let mut seen = BTreeSet::new();
    for v in &doc.values {
        let site = load_site(&SiteDoc { vertex: v.vertex.clone(), cell: v.cell.clone() }, graph, src)?;
        if !seen.insert(site.clone()) {
            return Err(located(src, &format!("\"{}\"", v.vertex), format!("site {site:?} is listed twice")));
        }
        f.set(site, v.value.gauss(src)?);
    }
    Ok(f)
}

pub fn function_to_json(f: &LatticeFunction, graph: &PeriodicGraph) -> Value {
    let doc = FunctionDoc {
        values: f
            .iter()
            .map(|(s, v)| ValueDoc { vertex: graph.vertices[s.vertex].clone(), cell: s.cell.0.clone(), value: Num::Text(v.to_string()) })
            .collect(),
    };
    serde_json::to_value(doc).expect("function document serializes")
}

#[derive(Debug, Deserialize, Serialize)]
struct PerturbationDoc {
    sites: Vec<SiteDoc>,
    matrix: Vec<Vec<Num>>,
}

pub fn load_perturbation(src: &str, graph: &PeriodicGraph) -> Result<LocalPerturbation, SchemaError> {
    let doc: PerturbationDoc = parse_doc(src)?;
    let sites = doc.sites.iter().map(|s| load_site(s, graph, src)).collect::<Result<Vec<_>, _>>()?;
    let matrix = doc
        .matrix
        .iter()
        .map(|row| row.iter().map(|x| x.gauss(src)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    LocalPerturbation::new(sites, matrix).map_err(|e| located(src, "matrix", e.to_string()))
}

pub fn perturbation_to_json(b: &LocalPerturbation, graph: &PeriodicGraph) -> Value {
    let doc = PerturbationDoc {
        sites: b
            .sites()
            .iter()
            .map(|s| SiteDoc { vertex: graph.vertices[s.vertex].clone(), cell: s.cell.0.clone() })
            .collect(),
        matrix: b.matrix().iter().map(|r| r.iter().map(|x| Num::Text(x.to_string())).collect()).collect(),
    };
    serde_json::to_value(doc).expect("perturbation document serializes")
}

#[derive(Debug, Deserialize, Serialize)]
struct SegmentDoc {
    length: Num,
    value: Num,
}

#[derive(Debug, Deserialize, Serialize)]
struct MetricEdgeDoc {
    u: String,
    v: String,
    shift: Vec<i64>,
    length: Num,
    #[serde(default)]
    potential: Vec<SegmentDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct EdgePerturbationDoc {
    /// Index into `edges`.
    edge: usize,
    cell: Vec<i64>,
    potential: Vec<SegmentDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
struct MetricGraphDoc {
    dimension: usize,
    vertices: Vec<String>,
    edges: Vec<MetricEdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<BTreeMap<String, Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    perturbations: Vec<EdgePerturbationDoc>,
}

fn load_segments(segs: &[SegmentDoc], src: &str) -> Result<Vec<Segment>, SchemaError> {
    segs.iter()
        .map(|s| {
            let value = s.value.rational(src)?.to_f64().unwrap_or(f64::NAN);
            Ok(Segment { length: s.length.rational(src)?, value })
        })
        .collect()
}

fn segments_to_doc(segs: &[Segment]) -> Vec<SegmentDoc> {
    segs.iter().map(|s| SegmentDoc { length: Num::from_rational(&s.length), value: Num::Float(s.value) }).collect()
}

/// Loads a metric graph and the edge perturbations listed with it.
pub fn load_metric_graph(src: &str) -> Result<(MetricGraph, Vec<EdgePerturbation>), SchemaError> {
    let doc: MetricGraphDoc = parse_doc(src)?;
    let dim = doc.dimension;
    check_labels(&doc.vertices, src)?;
    let idx = vertex_lookup(&doc.vertices, src);
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(MetricEdge {
                u: idx(&e.u)?,
                v: idx(&e.v)?,
                shift: check_shift(&e.shift, dim, src, "edge")?,
                length: e.length.rational(src)?,
                potential: load_segments(&e.potential, src)?,
            })
        })
        .collect::<Result<Vec<_>, SchemaError>>()?;
    let mut g = MetricGraph::new(dim, doc.vertices.clone(), edges).map_err(|e| located(src, "edges", e.to_string()))?;
    if let Some(p) = load_positions(doc.positions, &doc.vertices, dim, src)? {
        g = g.with_positions(p);
    }
    let perturbations = doc
        .perturbations
        .iter()
        .map(|p| {
            if p.edge >= g.edges.len() {
                return Err(located(src, "perturbations", format!("perturbation names missing edge {}", p.edge)));
            }
            Ok(EdgePerturbation {
                edge: p.edge,
                cell: check_shift(&p.cell, dim, src, "perturbation")?,
                delta: load_segments(&p.potential, src)?,
            })
        })
        .collect::<Result<Vec<_>, SchemaError>>()?;
    Ok((g, perturbations))
}

pub fn metric_graph_to_json(g: &MetricGraph, perturbations: &[EdgePerturbation]) -> Value {
    let labels = &g.vertices;
    let doc = MetricGraphDoc {
        dimension: g.dimension,
        vertices: labels.clone(),
        edges: g
            .edges
            .iter()
            .map(|e| MetricEdgeDoc {
                u: labels[e.u].clone(),
                v: labels[e.v].clone(),
                shift: e.shift.0.clone(),
                length: Num::from_rational(&e.length),
                potential: segments_to_doc(&e.potential),
            })
            .collect(),
        positions: g.positions.as_ref().map(|p| {
            labels.iter().cloned().zip(p.iter().map(|c| c.iter().map(Num::from_rational).collect())).collect()
        }),
        perturbations: perturbations
            .iter()
            .map(|p| EdgePerturbationDoc { edge: p.edge, cell: p.cell.0.clone(), potential: segments_to_doc(&p.delta) })
            .collect(),
    };
    serde_json::to_value(doc).expect("metric graph document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn operator_round_trip() {
        for a in [fixtures::chain_laplacian(), fixtures::four_site_laplacian(), fixtures::pendant_pair(), fixtures::z2_schrodinger_pair(GaussRational::from_ratio(1, 2), GaussRational::from_int(0))] {
            let text = serde_json::to_string_pretty(&operator_to_json(&a)).unwrap();
            assert_eq!(load_operator(&text, false).unwrap(), a);
        }
    }

    #[test]
    fn minimal_document_and_symmetrization() {
        let text = r#"{"dimension":1,"vertices":["a"],"terms":[{"u":"a","v":"a","shift":[0],"coeff":"1"},{"u":"a","v":"a","shift":[1],"coeff":"-1/2"},{"u":"a","v":"a","shift":[-1],"coeff":"-1/2"}],"positions":{"a":[0]}}"#;
        assert_eq!(load_operator(text, false).unwrap(), fixtures::chain_laplacian());
        let half = r#"{"dimension":1,"vertices":["a"],"terms":[{"u":"a","v":"a","shift":[0],"coeff":1},{"u":"a","v":"a","shift":[1],"coeff":-0.5}],"positions":{"a":[0]}}"#;
        assert!(load_operator(half, false).is_err());
        assert_eq!(load_operator(half, true).unwrap(), fixtures::chain_laplacian());
    }

    #[test]
    fn errors_carry_lines() {
        let text = "{\n \"dimension\": 1,\n \"vertices\": [\"a\"],\n \"terms\": [\n  {\"u\": \"a\", \"v\": \"zz\", \"shift\": [0], \"coeff\": \"1\"}\n ]\n}";
        let err = load_operator(text, false).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.to_string().contains("zz"));
        let broken = "{\n \"dimension\": 1,\n \"vertices\": [\"a\",]\n}";
        assert_eq!(load_operator(broken, false).unwrap_err().line, Some(3));
    }

    #[test]
    fn function_and_perturbation_round_trip() {
        let g = fixtures::chain_graph();
        let f = LatticeFunction::from_pairs(1, [(VertexSite::new(0, vec![-2]), GaussRational::from_ratio(3, 7)), (VertexSite::new(0, vec![1]), "1/2-1 i".parse().unwrap())]);
        let text = serde_json::to_string(&function_to_json(&f, &g)).unwrap();
        assert_eq!(load_function(&text, &g).unwrap(), f);
        let a = fixtures::chain_laplacian();
        let b = crate::perturbation::plant_embedded(&a, &LatticeFunction::delta(1, VertexSite::new(0, vec![0])), &GaussRational::from_ratio(1, 2)).unwrap();
        let text = serde_json::to_string(&perturbation_to_json(&b, &g)).unwrap();
        assert_eq!(load_perturbation(&text, &g).unwrap(), b);
    }

    #[test]
    fn metric_graph_round_trip() {
        let text = r#"{"dimension":1, "vertices":["a"], "edges":[{"u":"a","v":"a","shift":[1],"length":"1","potential":[]}]}"#;
        let (g, p) = load_metric_graph(text).unwrap();
        assert!(p.is_empty());
        assert_eq!(g.edges[0].length, BigRational::from_integer(1.into()));
        let with = r#"{"dimension":1, "vertices":["a"], "edges":[{"u":"a","v":"a","shift":[1],"length":"1","potential":[{"length":"1/2","value":"3/2"},{"length":0.5,"value":0}]}],
            "perturbations":[{"edge":0,"cell":[2],"potential":[{"length":1,"value":"0.25"}]}]}"#;
        let (g2, p2) = load_metric_graph(with).unwrap();
        assert_eq!(g2.edges[0].potential.len(), 2);
        assert_eq!(p2[0].delta[0].value, 0.25);
        let again = serde_json::to_string(&metric_graph_to_json(&g2, &p2)).unwrap();
        assert_eq!(load_metric_graph(&again).unwrap(), (g2, p2));
    }
}
