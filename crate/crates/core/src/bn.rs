//! Discrete Bayesian network types: schemas, records, DAG structures, CPTs,
//! and evaluation of the factored joint distribution.
//!
//! Parent configurations are ranked in mixed radix over the parents sorted by
//! ascending variable index, with the lowest-index parent as the most
//! significant digit. A CPT row `j` therefore corresponds to the parent states
//! returned by [`config_unrank`] for `j`, and every file format in this crate
//! stores CPT rows in that order.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Maximum deviation of a CPT row sum from 1 accepted on construction.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnError {
    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("structure contains a directed cycle: {cycle:?}")]
    CyclicStructure { cycle: Vec<usize> },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid CPT for variable {variable}: {reason}")]
    InvalidCpt { variable: usize, reason: String },
}

/// How a variable is used when evidence is gathered for a road segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableRole {
    /// Stable over short time frames (road type, lanes, zone).
    Static,
    /// Changes within short time frames (weather, light, traffic behaviour).
    Dynamic,
    /// The query variable; never part of segment evidence.
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVariableSpec")]
pub struct VariableSpec {
    name: String,
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<VariableRole>,
}

#[derive(Deserialize)]
struct RawVariableSpec {
    name: String,
    states: Vec<String>,
    #[serde(default)]
    role: Option<VariableRole>,
}

impl TryFrom<RawVariableSpec> for VariableSpec {
    type Error = BnError;

    fn try_from(raw: RawVariableSpec) -> Result<Self, BnError> {
        let spec = VariableSpec::new(raw.name, raw.states)?;
        Ok(match raw.role {
            Some(role) => spec.with_role(role),
            None => spec,
        })
    }
}

impl VariableSpec {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Result<Self, BnError> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let invalid = |reason: &str| BnError::InvalidVariable {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if name.is_empty() {
            return Err(invalid("empty name"));
        }
        if states.len() < 2 {
            return Err(invalid("cardinality must be at least 2"));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(invalid(&format!("duplicate state label `{s}`")));
            }
        }
        Ok(VariableSpec {
            name,
            states,
            role: None,
        })
    }

    /// A variable whose states are labelled `"0"`, `"1"`, ...
    pub fn indexed(name: impl Into<String>, cardinality: usize) -> Result<Self, BnError> {
        VariableSpec::new(name, (0..cardinality).map(|k| k.to_string()))
    }

    pub fn with_role(mut self, role: VariableRole) -> Self {
        self.role = Some(role);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn role(&self) -> Option<VariableRole> {
        self.role
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<VariableSpec>", into = "Vec<VariableSpec>")]
pub struct Schema {
    variables: Vec<VariableSpec>,
}

impl TryFrom<Vec<VariableSpec>> for Schema {
    type Error = BnError;

    fn try_from(variables: Vec<VariableSpec>) -> Result<Self, BnError> {
        Schema::new(variables)
    }
}

impl From<Schema> for Vec<VariableSpec> {
    fn from(schema: Schema) -> Self {
        schema.variables
    }
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self, BnError> {
        let mut seen = HashSet::new();
        for v in &variables {
            if !seen.insert(v.name.as_str()) {
                return Err(BnError::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Schema { variables })
    }

    /// The thirteen road-safety variables of the accident case study, with
    /// state labels in the order of their integer codes.
    pub fn case_study() -> Self {
        const VARIABLES: [(&str, &[&str]); 13] = [
            ("TR", &["highway", "district_or_province"]),
            ("TRL", &["single_lane", "separated_lanes"]),
            (
                "RF",
                &[
                    "bad_surface",
                    "faulty_signals",
                    "faulty_lighting",
                    "road_works",
                    "queue",
                    "downhill",
                    "curve",
                    "bad_visibility",
                ],
            ),
            (
                "WC",
                &["normal", "rain", "fog", "wind", "snow", "hail", "other"],
            ),
            ("RC", &["dry", "wet", "snow", "clean", "dirty"]),
            ("LC", &["daylight", "twilight", "public_lighting", "night"]),
            ("W", &["week", "weekend"]),
            (
                "PD",
                &[
                    "morning_rush",
                    "morning",
                    "noon",
                    "evening_rush",
                    "evening",
                    "night",
                ],
            ),
            ("C", &["none", "collision"]),
            ("V", &["low", "normal", "high"]),
            ("VD", &["low", "high"]),
            ("LCB", &["not_frequent", "frequent"]),
            ("RZ", &["none", "commercial", "residential"]),
        ];
        let variables = VARIABLES
            .iter()
            .map(|(name, states)| {
                VariableSpec::new(*name, states.iter().copied()).expect("case-study variable")
            })
            .collect();
        Schema::new(variables).expect("case-study schema")
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> &VariableSpec {
        &self.variables[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.variables[index].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables
            .iter()
            .map(VariableSpec::cardinality)
            .collect()
    }

    /// Resolves a `(variable name, state label)` pair to indices.
    pub fn resolve(&self, name: &str, label: &str) -> Result<(usize, usize), BnError> {
        let var = self
            .index_of(name)
            .ok_or_else(|| BnError::UnknownVariable(name.to_string()))?;
        let state =
            self.variables[var]
                .state_index(label)
                .ok_or_else(|| BnError::UnknownState {
                    variable: name.to_string(),
                    state: label.to_string(),
                })?;
        Ok((var, state))
    }

    /// Checks that `values` is a complete, in-range assignment.
    pub fn check_record(&self, values: &[usize]) -> Result<(), BnError> {
        if values.len() != self.len() {
            return Err(BnError::SchemaMismatch(format!(
                "record has {} values, schema has {} variables",
                values.len(),
                self.len()
            )));
        }
        for (i, (&value, var)) in values.iter().zip(&self.variables).enumerate() {
            if value >= var.cardinality() {
                return Err(BnError::SchemaMismatch(format!(
                    "value {value} out of range for variable {i} (`{}`, cardinality {})",
                    var.name,
                    var.cardinality()
                )));
            }
        }
        Ok(())
    }
}

/// One complete assignment: a state index per schema variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Record(pub Vec<usize>);

impl Record {
    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: Schema, records: Vec<Record>) -> Result<Self, BnError> {
        for (row, r) in records.iter().enumerate() {
            schema
                .check_record(&r.0)
                .map_err(|e| BnError::SchemaMismatch(format!("record {row}: {e}")))?;
        }
        Ok(Dataset { schema, records })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// SHA-256 over the schema and the records, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for v in self.schema.variables() {
            hasher.update(v.name.as_bytes());
            hasher.update([0u8]);
            for s in &v.states {
                hasher.update(s.as_bytes());
                hasher.update([0u8]);
            }
            hasher.update([1u8]);
        }
        for r in &self.records {
            for &value in &r.0 {
                hasher.update((value as u64).to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// Rank of a parent configuration: mixed radix, first entry most significant.
pub fn config_rank(states: &[usize], cards: &[usize]) -> usize {
    states
        .iter()
        .zip(cards)
        .fold(0, |rank, (&state, &card)| rank * card + state)
}

/// Inverse of [`config_rank`].
pub fn config_unrank(mut rank: usize, cards: &[usize]) -> Vec<usize> {
    let mut states = vec![0; cards.len()];
    for (slot, &card) in states.iter_mut().zip(cards).rev() {
        *slot = rank % card;
        rank /= card;
    }
    states
}

/// Parent sets of a directed graph over variable indices.
///
/// Parent lists are kept sorted ascending. Acyclicity is not enforced here so
/// that arbitrary graphs can be checked with [`validate_dag`];
/// [`BayesianNetwork::new`] requires it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DagStructure {
    parents: Vec<Vec<usize>>,
}

impl DagStructure {
    pub fn new(mut parents: Vec<Vec<usize>>) -> Result<Self, BnError> {
        let n = parents.len();
        for (child, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            for w in ps.windows(2) {
                if w[0] == w[1] {
                    return Err(BnError::InvalidStructure(format!(
                        "duplicate parent {} of node {child}",
                        w[0]
                    )));
                }
            }
            for &p in ps.iter() {
                if p == child {
                    return Err(BnError::InvalidStructure(format!(
                        "node {child} is its own parent"
                    )));
                }
                if p >= n {
                    return Err(BnError::InvalidStructure(format!(
                        "parent {p} of node {child} is out of range for {n} nodes"
                    )));
                }
            }
        }
        Ok(DagStructure { parents })
    }

    /// A structure with no edges.
    pub fn empty(n: usize) -> Self {
        DagStructure {
            parents: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| self.parents[c].binary_search(&node).is_ok())
            .collect()
    }
}

/// Topological order of `structure`, ties broken by ascending index.
///
/// On failure the error carries one directed cycle, listed parent before
/// child.
pub fn validate_dag(structure: &DagStructure) -> Result<Vec<usize>, BnError> {
    let n = structure.len();
    let mut indegree: Vec<usize> = structure.parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (child, ps) in structure.parents.iter().enumerate() {
        for &p in ps {
            children[p].push(child);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(node)) = ready.pop() {
        order.push(node);
        for &c in &children[node] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every unplaced node keeps at least one unplaced parent, so walking
    // parents from any of them must revisit a node.
    let start = (0..n).find(|&i| indegree[i] > 0).expect("unplaced node");
    let mut walk = vec![start];
    let mut position = vec![usize::MAX; n];
    position[start] = 0;
    let mut node = start;
    loop {
        let next = *structure.parents[node]
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("unplaced parent");
        if position[next] != usize::MAX {
            let mut cycle = walk[position[next]..].to_vec();
            cycle.reverse();
            return Err(BnError::CyclicStructure { cycle });
        }
        position[next] = walk.len();
        walk.push(next);
        node = next;
    }
}

/// Conditional probability table `P(X_i | Pa(X_i))`, stored row-major with
/// one row per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    variable: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    cardinality: usize,
    table: Vec<f64>,
}

impl Cpt {
    /// `parents` must be sorted ascending; `rows` are indexed by
    /// [`config_rank`] over `parent_cards`.
    pub fn new(
        variable: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        cardinality: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, BnError> {
        let invalid = |reason: String| BnError::InvalidCpt { variable, reason };
        if parents.len() != parent_cards.len() {
            return Err(invalid(
                "parent list and parent cardinalities differ in length".into(),
            ));
        }
        if parents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("parents must be strictly ascending".into()));
        }
        let configs: usize = parent_cards.iter().product();
        if rows.len() != configs {
            return Err(invalid(format!(
                "expected {configs} rows, found {}",
                rows.len()
            )));
        }
        let mut table = Vec::with_capacity(configs * cardinality);
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != cardinality {
                return Err(invalid(format!(
                    "row {j} has {} entries, expected {cardinality}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(invalid(format!("row {j} has entry {bad} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(invalid(format!("row {j} sums to {sum}")));
            }
            table.extend(row);
        }
        Ok(Cpt {
            variable,
            parents,
            parent_cards,
            cardinality,
            table,
        })
    }

    pub fn variable(&self) -> usize {
        self.variable
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    /// q_i, the number of parent configurations (1 for a root).
    pub fn parent_configs(&self) -> usize {
        self.table.len() / self.cardinality
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.table[config * self.cardinality..(config + 1) * self.cardinality]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(self.cardinality)
    }

    pub fn prob(&self, config: usize, state: usize) -> f64 {
        self.table[config * self.cardinality + state]
    }

    /// Parent configuration rank selected by a complete assignment.
    pub fn config_of(&self, assignment: &[usize]) -> usize {
        self.parents
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |rank, (&p, &card)| rank * card + assignment[p])
    }

    /// `P(X_i = assignment[i] | parents as in assignment)`.
    pub fn conditional(&self, assignment: &[usize]) -> f64 {
        self.prob(self.config_of(assignment), assignment[self.variable])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    schema: Schema,
    structure: DagStructure,
    cpts: Vec<Cpt>,
    order: Vec<usize>,
}

impl BayesianNetwork {
    pub fn new(schema: Schema, structure: DagStructure, cpts: Vec<Cpt>) -> Result<Self, BnError> {
        let n = schema.len();
        if structure.len() != n {
            return Err(BnError::SchemaMismatch(format!(
                "structure has {} nodes, schema has {n} variables",
                structure.len()
            )));
        }
        if cpts.len() != n {
            return Err(BnError::SchemaMismatch(format!(
                "{} CPTs for {n} variables",
                cpts.len()
            )));
        }
        let order = validate_dag(&structure)?;
        for (i, cpt) in cpts.iter().enumerate() {
            let invalid = |reason: String| BnError::InvalidCpt {
                variable: i,
                reason,
            };
            if cpt.variable != i {
                return Err(invalid(format!(
                    "CPT at position {i} is for variable {}",
                    cpt.variable
                )));
            }
            if cpt.parents != structure.parents(i) {
                return Err(invalid("CPT parents differ from structure".into()));
            }
            if cpt.cardinality != schema.cardinality(i) {
                return Err(invalid("CPT cardinality differs from schema".into()));
            }
            if cpt
                .parents
                .iter()
                .zip(&cpt.parent_cards)
                .any(|(&p, &c)| schema.cardinality(p) != c)
            {
                return Err(invalid("parent cardinalities differ from schema".into()));
            }
        }
        Ok(BayesianNetwork {
            schema,
            structure,
            cpts,
            order,
        })
    }

    /// Builds a network from per-variable CPT rows, deriving parent
    /// cardinalities from the schema.
    pub fn from_rows(
        schema: Schema,
        structure: DagStructure,
        rows: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, BnError> {
        if rows.len() != schema.len() || structure.len() != schema.len() {
            return Err(BnError::SchemaMismatch(format!(
                "{} CPTs and {} structure nodes for {} variables",
                rows.len(),
                structure.len(),
                schema.len()
            )));
        }
        let cpts = rows
            .into_iter()
            .enumerate()
            .map(|(i, table)| {
                let parents = structure.parents(i).to_vec();
                let cards = parents.iter().map(|&p| schema.cardinality(p)).collect();
                Cpt::new(i, parents, cards, schema.cardinality(i), table)
            })
            .collect::<Result<Vec<_>, _>>()?;
        BayesianNetwork::new(schema, structure, cpts)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn structure(&self) -> &DagStructure {
        &self.structure
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, variable: usize) -> &Cpt {
        &self.cpts[variable]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Natural log of the joint probability of a complete assignment;
    /// `-inf` when any factor is zero.
    pub fn log_joint(&self, assignment: &Record) -> Result<f64, BnError> {
        self.schema.check_record(&assignment.0)?;
        let mut total = 0.0;
        for cpt in &self.cpts {
            let p = cpt.conditional(&assignment.0);
            if p == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += p.ln();
        }
        Ok(total)
    }

    /// Product of the CPT factors selected by a complete assignment.
    pub fn joint_probability(&self, assignment: &Record) -> Result<f64, BnError> {
        Ok(self.log_joint(assignment)?.exp())
    }

    /// Ancestral sampling of one complete assignment.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Record {
        let mut values = vec![0; self.schema.len()];
        for &node in &self.order {
            let cpt = &self.cpts[node];
            let row = cpt.row(cpt.config_of(&values));
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut state = row.len() - 1;
            for (k, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    state = k;
                    break;
                }
            }
            values[node] = state;
        }
        Record(values)
    }

    pub fn sample_dataset<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let records = (0..n).map(|_| self.sample(rng)).collect();
        Dataset {
            schema: self.schema.clone(),
            records,
        }
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            schema: self.schema.clone(),
            parents: self.structure.parents.clone(),
            cpts: self
                .cpts
                .iter()
                .map(|c| c.rows().map(<[f64]>::to_vec).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkFormatError> {
        let doc: NetworkDocument = serde_json::from_str(text)?;
        Ok(BayesianNetwork::try_from(doc)?)
    }
}

/// JSON interchange form of a [`BayesianNetwork`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub schema: Schema,
    pub parents: Vec<Vec<usize>>,
    pub cpts: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<NetworkDocument> for BayesianNetwork {
    type Error = BnError;

    fn try_from(doc: NetworkDocument) -> Result<Self, BnError> {
        let structure = DagStructure::new(doc.parents)?;
        BayesianNetwork::from_rows(doc.schema, structure, doc.cpts)
    }
}

#[derive(Debug, Error)]
pub enum NetworkFormatError {
    #[error("malformed network JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] BnError),
}

/// Parent sets as named edges, useful for reports.
pub fn named_edges(schema: &Schema, structure: &DagStructure) -> BTreeSet<(String, String)> {
    structure
        .parent_sets()
        .iter()
        .enumerate()
        .flat_map(|(child, ps)| {
            ps.iter().map(move |&p| {
                (
                    schema.variable(p).name().to_string(),
                    schema.variable(child).name().to_string(),
                )
            })
        })
        .collect()
}
