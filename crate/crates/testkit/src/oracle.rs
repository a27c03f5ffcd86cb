use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use saferoute_core::route::RoadGraph;

const FACTORIAL_TABLE: usize = 512;

fn factorial(n: u64) -> BigUint {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![BigUint::one()];
        for k in 1..FACTORIAL_TABLE as u64 {
            let next = t.last().unwrap() * k;
            t.push(next);
        }
        t
    });
    match table.get(n as usize) {
        Some(f) => f.clone(),
        None => {
            (FACTORIAL_TABLE as u64..=n).fold(table[FACTORIAL_TABLE - 1].clone(), |acc, k| acc * k)
        }
    }
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (n >> shift).to_f64().unwrap().ln() + shift as f64 * LN_2
    }
}

/// `N_ijk` tallied with a map keyed by the parents' value tuple. Only
/// observed parent configurations appear.
pub fn tally(
    records: &[Vec<usize>],
    variable: usize,
    parents: &[usize],
    cardinality: usize,
) -> BTreeMap<Vec<usize>, Vec<u64>> {
    let mut rows: BTreeMap<Vec<usize>, Vec<u64>> = BTreeMap::new();
    for r in records {
        let key: Vec<usize> = parents.iter().map(|&p| r[p]).collect();
        rows.entry(key).or_insert_with(|| vec![0; cardinality])[r[variable]] += 1;
    }
    rows
}

/// Natural log of one node's Bayesian Dirichlet factor with integer prior
/// counts `a`, evaluated exactly as a ratio of factorials:
///
/// `Π_j (a·r − 1)! / (a·r + N_ij − 1)! · Π_k (a + N_ijk − 1)! / (a − 1)!`
///
/// Unobserved parent configurations contribute a factor of one.
pub fn bd_factor_ln(rows: &BTreeMap<Vec<usize>, Vec<u64>>, cardinality: usize, a: u64) -> f64 {
    let r = cardinality as u64;
    let mut numerator = BigUint::one();
    let mut denominator = BigUint::one();
    for counts in rows.values() {
        let total: u64 = counts.iter().sum();
        numerator *= factorial(a * r - 1);
        denominator *= factorial(a * r + total - 1);
        for &c in counts {
            numerator *= factorial(a + c - 1);
            denominator *= factorial(a - 1);
        }
    }
    ln_biguint(&numerator) - ln_biguint(&denominator)
}

/// The K2 factor (`a = 1`) for `variable` with `parents` over raw records.
pub fn k2_factor_ln(
    records: &[Vec<usize>],
    variable: usize,
    parents: &[usize],
    cardinality: usize,
) -> f64 {
    bd_factor_ln(
        &tally(records, variable, parents, cardinality),
        cardinality,
        1,
    )
}

/// A simple path found by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedPath {
    pub edges: Vec<usize>,
    pub ids: Vec<String>,
    /// Σ −ln p accumulated from the source outward.
    pub weight: f64,
    /// Π p accumulated directly.
    pub product: f64,
}

/// Every simple path from `from` to `to`, skipping edges with `p = 0`.
pub fn all_simple_paths(
    graph: &RoadGraph,
    probabilities: &[f64],
    from: &str,
    to: &str,
) -> Vec<EnumeratedPath> {
    let source = graph.node(from).expect("source");
    let target = graph.node(to).expect("target");
    let mut found = Vec::new();
    let mut visited = vec![false; graph.nodes().len()];
    let mut stack = Vec::new();
    fn walk(
        graph: &RoadGraph,
        probabilities: &[f64],
        node: usize,
        target: usize,
        visited: &mut Vec<bool>,
        stack: &mut Vec<usize>,
        found: &mut Vec<EnumeratedPath>,
    ) {
        if node == target {
            let weight = stack
                .iter()
                .fold(0.0, |acc, &e| acc + -probabilities[e].ln());
            let product = stack.iter().fold(1.0, |acc, &e| acc * probabilities[e]);
            found.push(EnumeratedPath {
                edges: stack.clone(),
                ids: stack.iter().map(|&e| graph.edges()[e].id.clone()).collect(),
                weight,
                product,
            });
            return;
        }
        visited[node] = true;
        for e in 0..graph.edges().len() {
            if graph.tail_of(e) != node || probabilities[e] == 0.0 {
                continue;
            }
            let next = graph.head_of(e);
            if visited[next] {
                continue;
            }
            stack.push(e);
            walk(graph, probabilities, next, target, visited, stack, found);
            stack.pop();
        }
        visited[node] = false;
    }
    walk(
        graph,
        probabilities,
        source,
        target,
        &mut visited,
        &mut stack,
        &mut found,
    );
    found
}

/// The best enumerated path: least weight, then fewest edges, then the
/// lexicographically smallest id sequence.
pub fn best_path(paths: &[EnumeratedPath]) -> Option<&EnumeratedPath> {
    paths.iter().min_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.edges.len().cmp(&b.edges.len()))
            .then(a.ids.cmp(&b.ids))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_oracle_anchor() {
        // counts [2, 1], r = 2: 1!/4! · 2! · 1! = 1/12
        let rows = BTreeMap::from([(vec![], vec![2, 1])]);
        assert!((bd_factor_ln(&rows, 2, 1) - (1.0f64 / 12.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn big_logs() {
        let n = factorial(500);
        let direct: f64 = (1..=500).map(|k| (k as f64).ln()).sum();
        assert!((ln_biguint(&n) - direct).abs() < 1e-9);
    }
}
