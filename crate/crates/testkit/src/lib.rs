//! Reference implementations used to check `saferoute-core` by independent
//! routes, and fixtures shared between test targets.
//!
//! Nothing here calls the code paths it is used to check: the K2 oracle
//! tallies with a map and evaluates factorials in exact integer arithmetic,
//! and the route oracle enumerates every simple path.

pub mod oracle;
pub mod scenario;

use rand::Rng;
use saferoute_core::bn::{BayesianNetwork, DagStructure, Schema, VariableSpec};
use saferoute_core::infer::Evidence;
use saferoute_core::route::{RoadEdge, RoadGraph};

/// A random strictly positive distribution over `k` states.
pub fn random_row<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// A random network with `2..=max_vars` variables of cardinality in
/// `cards`, a random topological order, and at most `max_parents` parents
/// per node.
pub fn random_network<R: Rng>(
    rng: &mut R,
    max_vars: usize,
    cards: std::ops::RangeInclusive<usize>,
    max_parents: usize,
) -> BayesianNetwork {
    use rand::seq::SliceRandom;
    let n = rng.gen_range(2..=max_vars);
    let schema = Schema::new(
        (0..n)
            .map(|i| VariableSpec::indexed(format!("V{i}"), rng.gen_range(cards.clone())).unwrap())
            .collect(),
    )
    .unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parents = vec![Vec::new(); n];
    for pos in 1..n {
        let child = order[pos];
        let mut pool = order[..pos].to_vec();
        pool.shuffle(rng);
        let k = rng.gen_range(0..=max_parents.min(pos));
        parents[child] = pool[..k].to_vec();
    }
    let structure = DagStructure::new(parents).unwrap();
    let rows = (0..n)
        .map(|i| {
            let q: usize = structure
                .parents(i)
                .iter()
                .map(|&p| schema.cardinality(p))
                .product();
            (0..q)
                .map(|_| random_row(rng, schema.cardinality(i)))
                .collect()
        })
        .collect();
    BayesianNetwork::from_rows(schema, structure, rows).unwrap()
}

/// Random evidence over variables other than `query`.
pub fn random_evidence<R: Rng>(rng: &mut R, bn: &BayesianNetwork, query: usize) -> Evidence {
    let schema = bn.schema();
    let mut pairs = Vec::new();
    for v in 0..schema.len() {
        if v != query && rng.gen_bool(0.35) {
            pairs.push((v, rng.gen_range(0..schema.cardinality(v))));
        }
    }
    Evidence::from_pairs(schema, pairs).unwrap()
}

/// A random directed graph on `2..=max_nodes` nodes with edge probabilities
/// drawn from `[0.5, 1]`. Returns the graph and per-edge probabilities in
/// edge order.
pub fn random_road_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> (RoadGraph, Vec<f64>) {
    let n = rng.gen_range(2..=max_nodes);
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let density = rng.gen_range(0.15..0.6);
    let mut edges = Vec::new();
    let mut probabilities = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(density) {
                edges.push(RoadEdge::new(
                    format!("e{}", edges.len()),
                    &nodes[a],
                    &nodes[b],
                ));
                probabilities.push(rng.gen_range(0.5..=1.0));
            }
        }
    }
    (RoadGraph::new(nodes, edges).unwrap(), probabilities)
}
