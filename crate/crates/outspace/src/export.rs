//! JSON documents with a schema version and Graphviz DOT renderings with stable node ids.

use crate::folding::{FoldEventKind, GreedyFoldingPath};
use crate::free_group::{Word, DEFAULT_ALPHABET};
use crate::marked_graph::{CoreCover, MarkedGraph, OmegaData};
use crate::optimal_maps::GraphMorphism;
use crate::scalar::{Scalar, Q};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Version written to and required from every JSON document.
pub const SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema {0}")]
    Schema(u32),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: &'static str, found: String },
    #[error("bad word {0:?}")]
    Word(String),
    #[error("invalid graph: {0}")]
    Graph(String),
}

/// Envelope for any exported object.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: u32,
    pub kind: String,
    pub data: T,
}

impl<T: Serialize> Document<T> {
    pub fn new(kind: &str, data: T) -> Document<T> {
        Document { schema: SCHEMA, kind: kind.to_string(), data }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn word_str(w: &Word) -> String {
    w.display_with(DEFAULT_ALPHABET)
}

fn parse_word(s: &str) -> Result<Word, ExportError> {
    Word::parse(s).map_err(|_| ExportError::Word(s.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: String,
    /// Element of the free group read along the edge.
    pub word: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub rank: usize,
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
}

impl GraphRecord {
    pub fn from_graph<S: Scalar>(g: &MarkedGraph<S>) -> GraphRecord {
        let edges = (0..g.num_edges())
            .map(|e| {
                let (u, v) = g.edge(e);
                EdgeRecord {
                    id: format!("e{e}"),
                    from: u,
                    to: v,
                    length: g.length(e).to_string(),
                    word: word_str(&g.inverse_marking()[e]),
                }
            })
            .collect();
        GraphRecord { rank: g.rank(), vertices: g.num_vertices(), edges }
    }

    pub fn to_graph(&self) -> Result<MarkedGraph<Q>, ExportError> {
        let mut lengths = Vec::new();
        let mut words = Vec::new();
        for e in &self.edges {
            lengths.push(e.length.parse::<Q>().map_err(|err| ExportError::Graph(err.to_string()))?);
            words.push(parse_word(&e.word)?);
        }
        let edges = self.edges.iter().map(|e| (e.from, e.to)).collect();
        MarkedGraph::new(self.rank, self.vertices, edges, lengths, words).map_err(|e| ExportError::Graph(e.to_string()))
    }
}

/// A morphism guide: source and target graphs and the target path from vertex 0 of the target
/// to the image of each source vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismRecord {
    pub source: GraphRecord,
    pub target: GraphRecord,
    /// Images of the source vertices as edge paths in the target, written with `a` for edge
    /// 0, `b` for edge 1 and so on. Empty when the difference of markings should be used.
    #[serde(default)]
    pub lifts: Vec<String>,
}

impl MorphismRecord {
    pub fn from_morphism<S: Scalar>(m: &GraphMorphism<S>) -> MorphismRecord {
        MorphismRecord {
            source: GraphRecord::from_graph(m.source()),
            target: GraphRecord::from_graph(m.target()),
            lifts: m.lifts().iter().map(word_str).collect(),
        }
    }
}

pub fn graph_json<S: Scalar>(g: &MarkedGraph<S>) -> String {
    Document::new("marked_graph", GraphRecord::from_graph(g)).to_json()
}

fn check_header(v: &serde_json::Value, expected: &'static str) -> Result<(), ExportError> {
    let schema = v.get("schema").and_then(|s| s.as_u64()).unwrap_or(0) as u32;
    if schema != SCHEMA {
        return Err(ExportError::Schema(schema));
    }
    let kind = v.get("kind").and_then(|k| k.as_str()).unwrap_or("").to_string();
    if kind != expected {
        return Err(ExportError::Kind { expected, found: kind });
    }
    Ok(())
}

pub fn graph_from_json(text: &str) -> Result<MarkedGraph<Q>, ExportError> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    check_header(&v, "marked_graph")?;
    let d: Document<GraphRecord> = serde_json::from_value(v)?;
    d.data.to_graph()
}

pub fn morphism_from_json(text: &str) -> Result<MorphismRecord, ExportError> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    check_header(&v, "morphism")?;
    let d: Document<MorphismRecord> = serde_json::from_value(v)?;
    Ok(d.data)
}

#[derive(Clone, Debug, Serialize)]
pub struct EventRecord {
    pub index: usize,
    pub time: String,
    pub kind: FoldEventKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameRecord {
    pub time: String,
    pub graph: GraphRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathRecord {
    pub initial_volume: String,
    pub end_time: String,
    pub events: Vec<EventRecord>,
    /// Graphs at the start and after every event.
    pub frames: Vec<FrameRecord>,
}

impl PathRecord {
    pub fn from_path<S: Scalar>(p: &GreedyFoldingPath<S>) -> PathRecord {
        let events = p
            .events()
            .iter()
            .enumerate()
            .map(|(i, e)| EventRecord { index: i, time: e.time.to_string(), kind: e.kind })
            .collect();
        let mut times = vec![S::zero()];
        times.extend(p.events().iter().map(|e| e.time.clone()));
        let frames = times
            .into_iter()
            .filter_map(|t| {
                let g = p.graph_at(&t).ok()?;
                Some(FrameRecord { time: t.to_string(), graph: GraphRecord::from_graph(&g) })
            })
            .collect();
        PathRecord {
            initial_volume: p.initial_volume().to_string(),
            end_time: p.end_time().to_string(),
            events,
            frames,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering of a marked graph. Nodes are `v0, v1, …` and edges carry their index, so
/// renderings of the same graph at different times line up.
pub fn graph_dot<S: Scalar>(g: &MarkedGraph<S>, name: &str, bold: &[bool]) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    for v in 0..g.num_vertices() {
        writeln!(out, "  v{v} [label=\"{v}\"];").unwrap();
    }
    for e in 0..g.num_edges() {
        let (u, v) = g.edge(e);
        let style = if bold.get(e).copied().unwrap_or(false) { ", penwidth=3" } else { "" };
        writeln!(
            out,
            "  v{u} -> v{v} [id=\"e{e}\", label=\"e{e}: {} ({})\"{style}];",
            escape(&word_str(&g.inverse_marking()[e])),
            g.length(e)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a cover `A|G` over its base: the carrier in one cluster with the edges of
/// Ω̃ in red, and the base in another with Θ bold and Ω in red. Carrier nodes are `c0, c1, …`
/// and base nodes `g0, g1, …`.
pub fn cover_dot<S: Scalar>(c: &CoreCover<S>, omega: &OmegaData, name: &str) -> String {
    let letter = |l: i32| word_str(&Word::new(&[l]));
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    out.push_str("  subgraph cluster_cover {\n    label=\"cover\";\n");
    for v in 0..c.carrier().num_vertices() {
        writeln!(out, "    c{v} [label=\"{v}\"];").unwrap();
    }
    for (i, &(u, l, v)) in c.edges().iter().enumerate() {
        let red = if omega.omega_tilde_edges[i] { ", color=red" } else { "" };
        writeln!(out, "    c{u} -> c{v} [id=\"c{i}\", label=\"{}\"{red}];", letter(l)).unwrap();
    }
    out.push_str("  }\n  subgraph cluster_base {\n    label=\"base\";\n");
    let g = c.base();
    for v in 0..g.num_vertices() {
        writeln!(out, "    g{v} [label=\"{v}\"];").unwrap();
    }
    for e in 0..g.num_edges() {
        let (u, v) = g.edge(e);
        let mut style = String::new();
        if omega.theta_edges[e] {
            style.push_str(", penwidth=3");
        }
        if omega.omega_edges[e] {
            style.push_str(", color=red");
        }
        writeln!(
            out,
            "    g{u} -> g{v} [id=\"g{e}\", label=\"{} x{}\"{style}];",
            letter(e as i32 + 1),
            omega.edge_counts[e]
        )
        .unwrap();
    }
    out.push_str("  }\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::SubgroupGraph;
    use crate::marked_graph::{core_cover, omega_data};

    #[test]
    fn graph_round_trip() {
        let g = MarkedGraph::new(
            2,
            2,
            vec![(0, 1), (0, 1), (0, 1)],
            vec![Q::ratio(1, 2), Q::ratio(1, 3), Q::ratio(1, 6)],
            vec![Word::identity(), Word::parse("a").unwrap(), Word::parse("b").unwrap()],
        )
        .unwrap();
        let text = graph_json(&g);
        assert!(text.contains("\"schema\": 1"));
        assert_eq!(graph_from_json(&text).unwrap(), g);
        assert!(matches!(
            graph_from_json(&text.replace("\"schema\": 1", "\"schema\": 7")),
            Err(ExportError::Schema(7))
        ));
    }

    #[test]
    fn dot_ids_are_stable() {
        let g = MarkedGraph::<Q>::standard_rose(2);
        let a = graph_dot(&g, "g", &[]);
        assert_eq!(a, graph_dot(&g, "g", &[]));
        assert!(a.contains("v0 -> v0 [id=\"e1\""));
        let h = SubgroupGraph::new(2, &[Word::parse("aa").unwrap(), Word::parse("b").unwrap()]).unwrap();
        let c = core_cover(&h, &g).unwrap();
        let d = cover_dot(&c, &omega_data(&c), "cover");
        assert!(d.contains("color=red"));
        assert!(d.contains("g0 -> g0 [id=\"g0\", label=\"a x2\""));
    }
}
