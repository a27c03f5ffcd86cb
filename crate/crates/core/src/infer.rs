//! Exact marginal inference: variable elimination, plus brute-force
//! enumeration used as a reference.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::{BayesianNetwork, BnError, Schema};

/// Largest number of completions [`enumerate_marginal`] will visit by default.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 22;

/// Name of the collision variable queried for segment safety.
pub const COLLISION_VARIABLE: &str = "C";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferError {
    #[error(transparent)]
    Bn(#[from] BnError),
    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),
    #[error("query variable {0} is also observed")]
    QueryInEvidence(usize),
    #[error("evidence has zero probability under the network")]
    ZeroEvidenceLikelihood,
    #[error("enumeration over {size} completions exceeds the limit of {limit}")]
    StateSpaceTooLarge { size: u64, limit: u64 },
    #[error("schema has no collision variable `{COLLISION_VARIABLE}`")]
    MissingCollisionVariable,
    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),
}

/// A partial assignment of observed variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Evidence {
    assignments: BTreeMap<usize, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn from_pairs(
        schema: &Schema,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, InferError> {
        let mut evidence = Evidence::new();
        for (var, state) in pairs {
            evidence.insert(schema, var, state)?;
        }
        Ok(evidence)
    }

    /// Evidence given as variable names and state labels.
    pub fn from_labels<'a>(
        schema: &Schema,
        labels: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, InferError> {
        let mut evidence = Evidence::new();
        for (name, label) in labels {
            let (var, state) = schema.resolve(name, label)?;
            evidence.insert(schema, var, state)?;
        }
        Ok(evidence)
    }

    /// Parses the JSON evidence format: an object mapping variable names to
    /// state labels.
    pub fn from_json(schema: &Schema, text: &str) -> Result<Self, InferError> {
        let labels: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| InferError::InvalidEvidence(e.to_string()))?;
        Evidence::from_labels(schema, labels.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn insert(&mut self, schema: &Schema, var: usize, state: usize) -> Result<(), InferError> {
        if var >= schema.len() {
            return Err(InferError::InvalidEvidence(format!(
                "variable {var} out of range"
            )));
        }
        if state >= schema.cardinality(var) {
            return Err(InferError::InvalidEvidence(format!(
                "state {state} out of range for `{}`",
                schema.variable(var).name()
            )));
        }
        if self.assignments.insert(var, state).is_some() {
            return Err(InferError::InvalidEvidence(format!(
                "`{}` assigned twice",
                schema.variable(var).name()
            )));
        }
        Ok(())
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.assignments.get(&var).copied()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.assignments.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    /// Union of two evidence sets. Returns the first variable observed by
    /// both, if any, as the error.
    pub fn merge(&self, other: &Evidence) -> Result<Evidence, usize> {
        let mut merged = self.clone();
        for (var, state) in other.iter() {
            if merged.assignments.insert(var, state).is_some() {
                return Err(var);
            }
        }
        Ok(merged)
    }

    pub fn to_labels(&self, schema: &Schema) -> BTreeMap<String, String> {
        self.iter()
            .map(|(v, s)| {
                let spec = schema.variable(v);
                (spec.name().to_string(), spec.states()[s].clone())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalDistribution {
    pub variable: usize,
    pub probabilities: Vec<f64>,
}

fn check_query(bn: &BayesianNetwork, query: usize, evidence: &Evidence) -> Result<(), InferError> {
    let schema = bn.schema();
    if query >= schema.len() {
        return Err(InferError::InvalidEvidence(format!(
            "query {query} out of range"
        )));
    }
    for (var, state) in evidence.iter() {
        if var >= schema.len() || state >= schema.cardinality(var) {
            return Err(InferError::InvalidEvidence(format!(
                "assignment {var}={state} does not fit the schema"
            )));
        }
    }
    if evidence.contains(query) {
        return Err(InferError::QueryInEvidence(query));
    }
    Ok(())
}

fn normalize(
    variable: usize,
    mut probabilities: Vec<f64>,
) -> Result<MarginalDistribution, InferError> {
    let total: f64 = probabilities.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(InferError::ZeroEvidenceLikelihood);
    }
    for p in &mut probabilities {
        *p /= total;
    }
    Ok(MarginalDistribution {
        variable,
        probabilities,
    })
}

/// `P(query | evidence)` by summing the joint over every completion of the
/// evidence, with the default size limit.
pub fn enumerate_marginal(
    bn: &BayesianNetwork,
    query: usize,
    evidence: &Evidence,
) -> Result<MarginalDistribution, InferError> {
    enumerate_marginal_with_limit(bn, query, evidence, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_marginal_with_limit(
    bn: &BayesianNetwork,
    query: usize,
    evidence: &Evidence,
    limit: u64,
) -> Result<MarginalDistribution, InferError> {
    check_query(bn, query, evidence)?;
    let schema = bn.schema();
    let free: Vec<usize> = (0..schema.len())
        .filter(|&v| !evidence.contains(v))
        .collect();
    let size = free
        .iter()
        .try_fold(1u64, |acc, &v| {
            acc.checked_mul(schema.cardinality(v) as u64)
        })
        .unwrap_or(u64::MAX);
    if size > limit {
        return Err(InferError::StateSpaceTooLarge { size, limit });
    }
    let mut assignment = vec![0usize; schema.len()];
    for (var, state) in evidence.iter() {
        assignment[var] = state;
    }
    let mut sums = vec![0.0; schema.cardinality(query)];
    'outer: loop {
        let joint: f64 = bn
            .cpts()
            .iter()
            .map(|c| c.conditional(&assignment))
            .product();
        sums[assignment[query]] += joint;
        for &v in free.iter().rev() {
            assignment[v] += 1;
            if assignment[v] < schema.cardinality(v) {
                continue 'outer;
            }
            assignment[v] = 0;
        }
        break;
    }
    normalize(query, sums)
}

/// A table over a sorted scope, row-major with the first scope variable most
/// significant.
#[derive(Debug, Clone)]
struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// The CPT of `variable` with observed variables fixed.
    fn from_cpt(bn: &BayesianNetwork, variable: usize, evidence: &Evidence) -> Self {
        let schema = bn.schema();
        let cpt = bn.cpt(variable);
        let mut family: Vec<usize> = cpt.parents().to_vec();
        family.push(variable);
        family.sort_unstable();
        let scope: Vec<usize> = family
            .iter()
            .copied()
            .filter(|&v| !evidence.contains(v))
            .collect();
        let cards: Vec<usize> = scope.iter().map(|&v| schema.cardinality(v)).collect();
        let size: usize = cards.iter().product();
        let mut assignment = vec![0usize; schema.len()];
        for (var, state) in evidence.iter() {
            assignment[var] = state;
        }
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; scope.len()];
        for _ in 0..size {
            for (&v, &d) in scope.iter().zip(&digits) {
                assignment[v] = d;
            }
            values.push(cpt.conditional(&assignment));
            increment(&mut digits, &cards);
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    fn strides_in(&self, scope: &[usize]) -> Vec<usize> {
        let mut own = vec![0usize; self.scope.len()];
        let mut stride = 1;
        for k in (0..self.scope.len()).rev() {
            own[k] = stride;
            stride *= self.cards[k];
        }
        scope
            .iter()
            .map(|v| match self.scope.binary_search(v) {
                Ok(k) => own[k],
                Err(_) => 0,
            })
            .collect()
    }

    fn product(&self, other: &Factor) -> Factor {
        let scope: Vec<usize> = self
            .scope
            .iter()
            .chain(&other.scope)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cards: Vec<usize> = scope
            .iter()
            .map(|v| match self.scope.binary_search(v) {
                Ok(k) => self.cards[k],
                Err(_) => other.cards[other.scope.binary_search(v).unwrap()],
            })
            .collect();
        let a_strides = self.strides_in(&scope);
        let b_strides = other.strides_in(&scope);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // odometer step, keeping both source offsets in sync
            for k in (0..scope.len()).rev() {
                digits[k] += 1;
                ia += a_strides[k];
                ib += b_strides[k];
                if digits[k] < cards[k] {
                    break;
                }
                ia -= a_strides[k] * cards[k];
                ib -= b_strides[k] * cards[k];
                digits[k] = 0;
            }
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let k = self.scope.binary_search(&var).expect("variable in scope");
        let card = self.cards[k];
        let inner: usize = self.cards[k + 1..].iter().product();
        let outer: usize = self.cards[..k].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(k);
        cards.remove(k);
        Factor {
            scope,
            cards,
            values,
        }
    }
}

fn increment(digits: &mut [usize], cards: &[usize]) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < cards[k] {
            return;
        }
        digits[k] = 0;
    }
}

fn restricted_factors(bn: &BayesianNetwork, evidence: &Evidence) -> Vec<Factor> {
    (0..bn.schema().len())
        .map(|v| Factor::from_cpt(bn, v, evidence))
        .collect()
}

/// Greedy min-degree order over the interaction graph of the restricted
/// factors, recomputed after each elimination; ties go to the lowest index.
fn min_degree_order(factors: &[Factor], hidden: &BTreeSet<usize>) -> Vec<usize> {
    let mut scopes: Vec<BTreeSet<usize>> = factors
        .iter()
        .map(|f| f.scope.iter().copied().collect())
        .collect();
    let mut remaining = hidden.clone();
    let mut order = Vec::with_capacity(hidden.len());
    while !remaining.is_empty() {
        let neighbours = |v: usize, scopes: &[BTreeSet<usize>]| -> BTreeSet<usize> {
            scopes
                .iter()
                .filter(|s| s.contains(&v))
                .flatten()
                .copied()
                .filter(|&u| u != v)
                .collect()
        };
        let next = *remaining
            .iter()
            .min_by_key(|&&v| (neighbours(v, &scopes).len(), v))
            .unwrap();
        let merged = neighbours(next, &scopes);
        scopes.retain(|s| !s.contains(&next));
        scopes.push(merged);
        remaining.remove(&next);
        order.push(next);
    }
    order
}

fn eliminate(
    mut factors: Vec<Factor>,
    query: usize,
    order: &[usize],
) -> Result<MarginalDistribution, InferError> {
    for &var in order {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors
            .into_iter()
            .partition(|f| f.scope.binary_search(&var).is_ok());
        factors = rest;
        if let Some(product) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(product.sum_out(var));
        }
    }
    let result = factors
        .into_iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(&f));
    debug_assert_eq!(result.scope, [query]);
    normalize(query, result.values)
}

/// `P(query | evidence)` by variable elimination in min-degree order.
pub fn eliminate_marginal(
    bn: &BayesianNetwork,
    query: usize,
    evidence: &Evidence,
) -> Result<MarginalDistribution, InferError> {
    check_query(bn, query, evidence)?;
    let factors = restricted_factors(bn, evidence);
    let hidden: BTreeSet<usize> = (0..bn.schema().len())
        .filter(|&v| v != query && !evidence.contains(v))
        .collect();
    let order = min_degree_order(&factors, &hidden);
    eliminate(factors, query, &order)
}

/// Variable elimination with a caller-chosen order, which must list every
/// unobserved non-query variable exactly once.
pub fn eliminate_marginal_with_order(
    bn: &BayesianNetwork,
    query: usize,
    evidence: &Evidence,
    order: &[usize],
) -> Result<MarginalDistribution, InferError> {
    check_query(bn, query, evidence)?;
    let hidden: BTreeSet<usize> = (0..bn.schema().len())
        .filter(|&v| v != query && !evidence.contains(v))
        .collect();
    let given: BTreeSet<usize> = order.iter().copied().collect();
    if given != hidden || order.len() != hidden.len() {
        return Err(InferError::InvalidOrder(format!(
            "expected a permutation of {hidden:?}, got {order:?}"
        )));
    }
    eliminate(restricted_factors(bn, evidence), query, order)
}

/// `p(c)`: probability of the collision state of `C` given the evidence.
pub fn collision_probability(bn: &BayesianNetwork, evidence: &Evidence) -> Result<f64, InferError> {
    let c = bn
        .schema()
        .index_of(COLLISION_VARIABLE)
        .ok_or(InferError::MissingCollisionVariable)?;
    let marginal = eliminate_marginal(bn, c, evidence)?;
    Ok(marginal.probabilities[1])
}

/// `p(s) = 1 − p(c)`.
pub fn safety_probability(bn: &BayesianNetwork, evidence: &Evidence) -> Result<f64, InferError> {
    Ok(1.0 - collision_probability(bn, evidence)?)
}
