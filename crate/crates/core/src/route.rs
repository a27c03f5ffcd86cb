//! Road graphs, per-segment safety, and safest-route search.
//!
//! Segment safety probabilities are treated as independent, so a route's
//! safety is the product of its segments' probabilities. Maximising that
//! product is the same as minimising the sum of `-ln p` over the route, which
//! is a shortest-path problem on nonnegative weights.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bn::{BayesianNetwork, BnError, Schema};
use crate::infer::{safety_probability, Evidence, InferError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("invalid road graph: {0}")]
    InvalidGraph(String),
    #[error("edge `{edge}`: static and dynamic evidence both set `{variable}`")]
    ConflictingEvidence { edge: String, variable: String },
    #[error("edge `{0}` has no evidence entry")]
    MissingEvidence(String),
    #[error("edge `{edge}`: static attribute: {source}")]
    StaticAttribute { edge: String, source: BnError },
    #[error("edge `{edge}`: {source}")]
    Inference { edge: String, source: InferError },
    #[error("edge `{0}` has no safety state")]
    MissingState(String),
    #[error("probability {0} is not positive")]
    NonPositiveProbability(f64),
    #[error("probability {0} is not in [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("no route from `{from}` to `{to}`")]
    Unreachable { from: String, to: String },
}

/// A directed road segment. Static attributes map variable names to state
/// labels and hold for every time of day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(rename = "static", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub static_attrs: BTreeMap<String, String>,
}

impl RoadEdge {
    pub fn new(id: impl Into<String>, tail: impl Into<String>, head: impl Into<String>) -> Self {
        RoadEdge {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            static_attrs: BTreeMap::new(),
        }
    }

    pub fn with_static(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.static_attrs.insert(variable.into(), state.into());
        self
    }

    /// An undirected road as two directed edges sharing static attributes.
    /// The reverse edge has id `<id>'`.
    pub fn two_way(
        id: impl Into<String>,
        a: impl Into<String>,
        b: impl Into<String>,
        static_attrs: BTreeMap<String, String>,
    ) -> [RoadEdge; 2] {
        let (id, a, b) = (id.into(), a.into(), b.into());
        let forward = RoadEdge {
            id: id.clone(),
            tail: a.clone(),
            head: b.clone(),
            static_attrs: static_attrs.clone(),
        };
        let back = RoadEdge {
            id: format!("{id}'"),
            tail: b,
            head: a,
            static_attrs,
        };
        [forward, back]
    }

    /// The static attributes as evidence over `schema`.
    pub fn static_evidence(&self, schema: &Schema) -> Result<Evidence, RouteError> {
        let mut evidence = Evidence::new();
        for (name, label) in &self.static_attrs {
            let (var, state) =
                schema
                    .resolve(name, label)
                    .map_err(|source| RouteError::StaticAttribute {
                        edge: self.id.clone(),
                        source,
                    })?;
            evidence
                .insert(schema, var, state)
                .expect("distinct map keys give distinct variables");
        }
        Ok(evidence)
    }
}

#[derive(Deserialize, Serialize)]
struct GraphDocument {
    nodes: Vec<String>,
    edges: Vec<RoadEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct RoadGraph {
    nodes: Vec<String>,
    edges: Vec<RoadEdge>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    tails: Vec<usize>,
    heads: Vec<usize>,
    outgoing: Vec<Vec<usize>>,
}

impl TryFrom<GraphDocument> for RoadGraph {
    type Error = RouteError;

    fn try_from(doc: GraphDocument) -> Result<Self, RouteError> {
        RoadGraph::new(doc.nodes, doc.edges)
    }
}

impl From<RoadGraph> for GraphDocument {
    fn from(graph: RoadGraph) -> Self {
        GraphDocument {
            nodes: graph.nodes,
            edges: graph.edges,
        }
    }
}

impl RoadGraph {
    pub fn new(nodes: Vec<String>, edges: Vec<RoadEdge>) -> Result<Self, RouteError> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, label) in nodes.iter().enumerate() {
            if node_index.insert(label.clone(), i).is_some() {
                return Err(RouteError::InvalidGraph(format!(
                    "duplicate node `{label}`"
                )));
            }
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut tails = Vec::with_capacity(edges.len());
        let mut heads = Vec::with_capacity(edges.len());
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (e, edge) in edges.iter().enumerate() {
            if edge_index.insert(edge.id.clone(), e).is_some() {
                return Err(RouteError::InvalidGraph(format!(
                    "duplicate edge `{}`",
                    edge.id
                )));
            }
            let endpoint = |label: &str| {
                node_index.get(label).copied().ok_or_else(|| {
                    RouteError::InvalidGraph(format!(
                        "edge `{}` references unknown node `{label}`",
                        edge.id
                    ))
                })
            };
            let (t, h) = (endpoint(&edge.tail)?, endpoint(&edge.head)?);
            tails.push(t);
            heads.push(h);
            outgoing[t].push(e);
        }
        Ok(RoadGraph {
            nodes,
            edges,
            node_index,
            edge_index,
            tails,
            heads,
            outgoing,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn node(&self, label: &str) -> Option<usize> {
        self.node_index.get(label).copied()
    }

    pub fn edge(&self, id: &str) -> Option<&RoadEdge> {
        self.edge_index.get(id).map(|&e| &self.edges[e])
    }

    pub fn edge_position(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// Edge positions leaving node `node`.
    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    pub fn tail_of(&self, edge: usize) -> usize {
        self.tails[edge]
    }

    pub fn head_of(&self, edge: usize) -> usize {
        self.heads[edge]
    }
}

/// Safety probability of one segment. A segment with `p = 0` is never routed
/// over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentState {
    pub edge_id: String,
    pub p: f64,
}

impl SegmentState {
    pub fn new(edge_id: impl Into<String>, p: f64) -> Result<Self, RouteError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(RouteError::ProbabilityOutOfRange(p));
        }
        Ok(SegmentState {
            edge_id: edge_id.into(),
            p,
        })
    }
}

/// Infers the safety probability of every edge from its static attributes
/// merged with its dynamic evidence. A variable present in both sources is
/// an error. Edges are evaluated in parallel; the first failing edge in graph
/// order is reported.
pub fn assign_safety(
    graph: &RoadGraph,
    bn: &BayesianNetwork,
    evidence_per_edge: &BTreeMap<String, Evidence>,
) -> Result<BTreeMap<String, SegmentState>, RouteError> {
    let schema = bn.schema();
    let results: Vec<Result<SegmentState, RouteError>> = graph
        .edges()
        .par_iter()
        .map(|edge| {
            let dynamic = evidence_per_edge
                .get(&edge.id)
                .ok_or_else(|| RouteError::MissingEvidence(edge.id.clone()))?;
            let merged = edge
                .static_evidence(schema)?
                .merge(dynamic)
                .map_err(|var| RouteError::ConflictingEvidence {
                    edge: edge.id.clone(),
                    variable: schema.variable(var).name().to_string(),
                })?;
            let p = safety_probability(bn, &merged).map_err(|source| RouteError::Inference {
                edge: edge.id.clone(),
                source,
            })?;
            SegmentState::new(edge.id.clone(), p)
        })
        .collect();
    results
        .into_iter()
        .map(|r| r.map(|s| (s.edge_id.clone(), s)))
        .collect()
}

/// `p(R)`, the product of segment probabilities, accumulated in log space.
pub fn route_safety(probabilities: &[f64]) -> f64 {
    probabilities.iter().map(|p| p.ln()).sum::<f64>().exp()
}

/// `-ln p`, the shortest-path weight of a segment.
pub fn edge_weight(p: f64) -> Result<f64, RouteError> {
    if p.is_nan() || p <= 0.0 {
        return Err(RouteError::NonPositiveProbability(p));
    }
    if p > 1.0 {
        return Err(RouteError::ProbabilityOutOfRange(p));
    }
    Ok(0.0 - p.ln())
}

/// Safest-route score `-ln(1 - p(R))`; infinite when `p(R) = 1`.
pub fn route_score(p_route: f64) -> f64 {
    -(-p_route).ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub edges: Vec<String>,
    pub nodes: Vec<String>,
    pub p_route: f64,
    #[serde(
        serialize_with = "serialize_score",
        deserialize_with = "deserialize_score"
    )]
    pub score: f64,
}

pub fn serialize_score<S: Serializer>(score: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    if score.is_infinite() && *score > 0.0 {
        serializer.serialize_str("inf")
    } else {
        serializer.serialize_f64(*score)
    }
}

pub fn deserialize_score<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Score {
        Number(f64),
        Text(String),
    }
    match Score::deserialize(deserializer)? {
        Score::Number(x) => Ok(x),
        Score::Text(s) if s == "inf" => Ok(f64::INFINITY),
        Score::Text(s) => Err(serde::de::Error::custom(format!("invalid score `{s}`"))),
    }
}

#[derive(Clone, Copy)]
struct Label {
    dist: f64,
    hops: usize,
    via: Option<usize>,
}

#[derive(PartialEq)]
struct QueueEntry {
    dist: f64,
    hops: usize,
    node: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.hops.cmp(&other.hops))
            .then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn path_edges(labels: &[Option<Label>], graph: &RoadGraph, mut node: usize) -> Vec<usize> {
    let mut edges = Vec::new();
    while let Some(e) = labels[node].and_then(|l| l.via) {
        edges.push(e);
        node = graph.tail_of(e);
    }
    edges.reverse();
    edges
}

/// Minimum-weight path by Dijkstra's algorithm with a binary heap. Edges for
/// which `weight` returns `None` are skipped; weights must be nonnegative.
///
/// Among paths of equal total weight the one with fewer edges wins, then the
/// lexicographically smaller sequence of edge ids. Returns the edge positions
/// of the path and its total weight.
pub fn shortest_path(
    graph: &RoadGraph,
    weight: impl Fn(usize) -> Option<f64>,
    from: &str,
    to: &str,
) -> Result<(Vec<usize>, f64), RouteError> {
    let source = graph
        .node(from)
        .ok_or_else(|| RouteError::UnknownNode(from.to_string()))?;
    let target = graph
        .node(to)
        .ok_or_else(|| RouteError::UnknownNode(to.to_string()))?;
    let weights: Vec<Option<f64>> = (0..graph.edges().len()).map(&weight).collect();

    let mut labels: Vec<Option<Label>> = vec![None; graph.nodes().len()];
    let mut settled = vec![false; graph.nodes().len()];
    let mut queue = BinaryHeap::new();
    labels[source] = Some(Label {
        dist: 0.0,
        hops: 0,
        via: None,
    });
    queue.push(Reverse(QueueEntry {
        dist: 0.0,
        hops: 0,
        node: source,
    }));

    while let Some(Reverse(entry)) = queue.pop() {
        let u = entry.node;
        if settled[u] {
            continue;
        }
        let label = labels[u].expect("queued nodes are labelled");
        if label.dist != entry.dist || label.hops != entry.hops {
            continue;
        }
        settled[u] = true;
        if u == target {
            break;
        }
        for &e in graph.outgoing(u) {
            let Some(w) = weights[e] else { continue };
            let v = graph.head_of(e);
            if settled[v] {
                continue;
            }
            let candidate = Label {
                dist: label.dist + w,
                hops: label.hops + 1,
                via: Some(e),
            };
            let better = match labels[v] {
                None => true,
                Some(old) => match candidate
                    .dist
                    .total_cmp(&old.dist)
                    .then(candidate.hops.cmp(&old.hops))
                {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let ids = |edges: Vec<usize>| -> Vec<&str> {
                            edges
                                .into_iter()
                                .map(|e| graph.edges()[e].id.as_str())
                                .collect()
                        };
                        let mut new_path = path_edges(&labels, graph, u);
                        new_path.push(e);
                        ids(new_path) < ids(path_edges(&labels, graph, v))
                    }
                },
            };
            if better {
                labels[v] = Some(candidate);
                queue.push(Reverse(QueueEntry {
                    dist: candidate.dist,
                    hops: candidate.hops,
                    node: v,
                }));
            }
        }
    }

    match labels[target] {
        Some(label) if settled[target] => Ok((path_edges(&labels, graph, target), label.dist)),
        _ => Err(RouteError::Unreachable {
            from: from.to_string(),
            to: to.to_string(),
        }),
    }
}

/// The route from `from` to `to` with the largest product of segment safety
/// probabilities. Zero-probability segments are excluded.
pub fn safest_route(
    graph: &RoadGraph,
    states: &BTreeMap<String, SegmentState>,
    from: &str,
    to: &str,
) -> Result<Route, RouteError> {
    let mut probabilities = Vec::with_capacity(graph.edges().len());
    for edge in graph.edges() {
        let state = states
            .get(&edge.id)
            .ok_or_else(|| RouteError::MissingState(edge.id.clone()))?;
        probabilities.push(state.p);
    }
    let weights = probabilities
        .iter()
        .map(|&p| {
            if p == 0.0 {
                Ok(None)
            } else {
                edge_weight(p).map(Some)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (path, _) = shortest_path(graph, |e| weights[e], from, to)?;
    let p_route = route_safety(&path.iter().map(|&e| probabilities[e]).collect::<Vec<_>>());
    let mut nodes = vec![from.to_string()];
    nodes.extend(path.iter().map(|&e| graph.edges()[e].head.clone()));
    Ok(Route {
        edges: path.iter().map(|&e| graph.edges()[e].id.clone()).collect(),
        nodes,
        p_route,
        score: route_score(p_route),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{DagStructure, VariableSpec};

    fn triangle() -> (RoadGraph, BTreeMap<String, SegmentState>) {
        let graph = RoadGraph::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                RoadEdge::new("ab", "A", "B"),
                RoadEdge::new("bc", "B", "C"),
                RoadEdge::new("ac", "A", "C"),
            ],
        )
        .unwrap();
        let states = [("ab", 0.9), ("bc", 0.9), ("ac", 0.8)]
            .into_iter()
            .map(|(id, p)| (id.to_string(), SegmentState::new(id, p).unwrap()))
            .collect();
        (graph, states)
    }

    #[test]
    fn triangle_prefers_two_safe_hops() {
        let (graph, states) = triangle();
        let route = safest_route(&graph, &states, "A", "C").unwrap();
        assert_eq!(route.edges, ["ab", "bc"]);
        assert_eq!(route.nodes, ["A", "B", "C"]);
        assert!((route.p_route - 0.81).abs() < 1e-12);
        assert!((route.score - 1.660_731_206_821_651).abs() < 1e-9);
    }

    #[test]
    fn single_edge_and_trivial_trip() {
        let (graph, states) = triangle();
        let route = safest_route(&graph, &states, "B", "C").unwrap();
        assert_eq!(route.edges, ["bc"]);
        assert!((route.p_route - 0.9).abs() < 1e-15);
        let route = safest_route(&graph, &states, "A", "A").unwrap();
        assert!(route.edges.is_empty());
        assert_eq!(route.nodes, ["A"]);
        assert_eq!(route.p_route, 1.0);
        assert_eq!(route.score, f64::INFINITY);
        let json = serde_json::to_value(&route).unwrap();
        assert_eq!(json["score"], "inf");
    }

    #[test]
    fn unreachable_and_unknown() {
        let (graph, states) = triangle();
        assert!(matches!(
            safest_route(&graph, &states, "C", "A"),
            Err(RouteError::Unreachable { .. })
        ));
        assert_eq!(
            safest_route(&graph, &states, "A", "Z"),
            Err(RouteError::UnknownNode("Z".into()))
        );
    }

    #[test]
    fn zero_probability_edges_are_dropped() {
        let (graph, mut states) = triangle();
        states.insert("bc".into(), SegmentState::new("bc", 0.0).unwrap());
        let route = safest_route(&graph, &states, "A", "C").unwrap();
        assert_eq!(route.edges, ["ac"]);
        states.insert("ac".into(), SegmentState::new("ac", 0.0).unwrap());
        assert!(matches!(
            safest_route(&graph, &states, "A", "C"),
            Err(RouteError::Unreachable { .. })
        ));
    }

    #[test]
    fn ties_prefer_fewer_edges_then_smaller_ids() {
        let graph = RoadGraph::new(
            vec!["S".into(), "M".into(), "T".into()],
            vec![
                RoadEdge::new("z", "S", "T"),
                RoadEdge::new("a1", "S", "M"),
                RoadEdge::new("a2", "M", "T"),
                RoadEdge::new("y", "S", "T"),
            ],
        )
        .unwrap();
        let states: BTreeMap<_, _> = ["z", "a1", "a2", "y"]
            .into_iter()
            .map(|id| (id.to_string(), SegmentState::new(id, 1.0).unwrap()))
            .collect();
        let route = safest_route(&graph, &states, "S", "T").unwrap();
        assert_eq!(route.edges, ["y"]);
    }

    #[test]
    fn weights() {
        assert_eq!(edge_weight(1.0).unwrap(), 0.0);
        assert!((edge_weight(0.81).unwrap() - 0.210_721_031_315_652_6).abs() < 1e-15);
        assert!((edge_weight((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            edge_weight(0.0),
            Err(RouteError::NonPositiveProbability(0.0))
        );
        assert_eq!(
            edge_weight(-0.5),
            Err(RouteError::NonPositiveProbability(-0.5))
        );
        assert!(edge_weight(1.5).is_err());
    }

    #[test]
    fn route_products() {
        assert!((route_safety(&[0.9, 0.9]) - 0.81).abs() < 1e-15);
        assert_eq!(route_safety(&[]), 1.0);
        assert_eq!(route_safety(&[1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn scores() {
        assert!((route_score(0.81) + 0.19f64.ln()).abs() < 1e-12);
        assert_eq!(route_score(0.0), 0.0);
        assert!((route_score(1.0 - (-2.0f64).exp()) - 2.0).abs() < 1e-12);
        assert_eq!(route_score(1.0), f64::INFINITY);
    }

    #[test]
    fn graph_validation() {
        let dup = RoadGraph::new(vec!["A".into(), "A".into()], vec![]);
        assert!(matches!(dup, Err(RouteError::InvalidGraph(_))));
        let missing = RoadGraph::new(vec!["A".into()], vec![RoadEdge::new("e", "A", "B")]);
        assert!(matches!(missing, Err(RouteError::InvalidGraph(_))));
        let twice = RoadGraph::new(
            vec!["A".into(), "B".into()],
            vec![RoadEdge::new("e", "A", "B"), RoadEdge::new("e", "B", "A")],
        );
        assert!(matches!(twice, Err(RouteError::InvalidGraph(_))));
    }

    #[test]
    fn graph_json() {
        let text = r#"{"nodes": ["A", "B"], "edges": [
            {"id": "e1", "tail": "A", "head": "B", "static": {"TR": "highway"}},
            {"id": "e2", "tail": "B", "head": "A"}]}"#;
        let graph = RoadGraph::from_json(text).unwrap();
        assert_eq!(graph.edge("e1").unwrap().static_attrs["TR"], "highway");
        assert!(graph.edge("e2").unwrap().static_attrs.is_empty());
        assert_eq!(RoadGraph::from_json(&graph.to_json()).unwrap(), graph);
        assert!(RoadGraph::from_json(
            r#"{"nodes": ["A"], "edges": [{"id": "e", "tail": "A", "head": "Q"}]}"#
        )
        .is_err());
    }

    #[test]
    fn two_way_roads_share_attributes() {
        let attrs = BTreeMap::from([("TR".to_string(), "highway".to_string())]);
        let [f, b] = RoadEdge::two_way("r1", "A", "B", attrs);
        assert_eq!((f.tail.as_str(), f.head.as_str()), ("A", "B"));
        assert_eq!((b.tail.as_str(), b.head.as_str()), ("B", "A"));
        assert_eq!(b.id, "r1'");
        assert_eq!(f.static_attrs, b.static_attrs);
    }

    fn weather_network() -> BayesianNetwork {
        let schema = Schema::new(vec![
            VariableSpec::new("TR", ["highway", "district_or_province"]).unwrap(),
            VariableSpec::new(
                "WC",
                ["normal", "rain", "fog", "wind", "snow", "hail", "other"],
            )
            .unwrap(),
            VariableSpec::new("C", ["none", "collision"]).unwrap(),
        ])
        .unwrap();
        let collision = [0.01, 0.04, 0.05, 0.02, 0.12, 0.08, 0.03];
        let mut c_rows = Vec::new();
        for tr in 0..2 {
            for p in collision {
                let p = p * if tr == 0 { 1.0 } else { 1.5 };
                c_rows.push(vec![1.0 - p, p]);
            }
        }
        BayesianNetwork::from_rows(
            schema,
            DagStructure::new(vec![vec![], vec![], vec![0, 1]]).unwrap(),
            vec![
                vec![vec![0.5, 0.5]],
                vec![vec![0.7, 0.1, 0.05, 0.05, 0.04, 0.03, 0.03]],
                c_rows,
            ],
        )
        .unwrap()
    }

    fn two_edge_graph() -> RoadGraph {
        RoadGraph::new(
            vec!["A".into(), "B".into()],
            vec![
                RoadEdge::new("e1", "A", "B").with_static("TR", "highway"),
                RoadEdge::new("e2", "A", "B").with_static("TR", "highway"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn snow_lowers_safety() {
        let bn = weather_network();
        let schema = bn.schema();
        let graph = two_edge_graph();
        let evidence = BTreeMap::from([
            (
                "e1".to_string(),
                Evidence::from_labels(schema, [("WC", "snow")]).unwrap(),
            ),
            (
                "e2".to_string(),
                Evidence::from_labels(schema, [("WC", "normal")]).unwrap(),
            ),
        ]);
        let states = assign_safety(&graph, &bn, &evidence).unwrap();
        assert!(states["e1"].p < states["e2"].p);
        assert!((states["e1"].p - 0.88).abs() < 1e-12);
        let route = safest_route(&graph, &states, "A", "B").unwrap();
        assert_eq!(route.edges, ["e2"]);
    }

    #[test]
    fn identical_evidence_gives_identical_safety() {
        let bn = weather_network();
        let graph = two_edge_graph();
        let e = Evidence::from_labels(bn.schema(), [("WC", "rain")]).unwrap();
        let evidence = BTreeMap::from([("e1".to_string(), e.clone()), ("e2".to_string(), e)]);
        let states = assign_safety(&graph, &bn, &evidence).unwrap();
        assert_eq!(states["e1"].p, states["e2"].p);
    }

    #[test]
    fn conflicting_and_missing_evidence() {
        let bn = weather_network();
        let graph = two_edge_graph();
        let clash = Evidence::from_labels(bn.schema(), [("TR", "highway")]).unwrap();
        let evidence = BTreeMap::from([
            ("e1".to_string(), clash),
            ("e2".to_string(), Evidence::new()),
        ]);
        assert_eq!(
            assign_safety(&graph, &bn, &evidence),
            Err(RouteError::ConflictingEvidence {
                edge: "e1".into(),
                variable: "TR".into()
            })
        );
        let evidence = BTreeMap::from([("e1".to_string(), Evidence::new())]);
        assert_eq!(
            assign_safety(&graph, &bn, &evidence),
            Err(RouteError::MissingEvidence("e2".into()))
        );
    }

    #[test]
    fn empty_graph_assigns_nothing() {
        let graph = RoadGraph::new(vec![], vec![]).unwrap();
        let states = assign_safety(&graph, &weather_network(), &BTreeMap::new()).unwrap();
        assert!(states.is_empty());
    }

    #[test]
    fn bad_static_attribute() {
        let graph = RoadGraph::new(
            vec!["A".into(), "B".into()],
            vec![RoadEdge::new("e1", "A", "B").with_static("TR", "motorway")],
        )
        .unwrap();
        let evidence = BTreeMap::from([("e1".to_string(), Evidence::new())]);
        assert!(matches!(
            assign_safety(&graph, &weather_network(), &evidence),
            Err(RouteError::StaticAttribute { .. })
        ));
    }
}
