//! Accident-record CSV parsing with missing-value imputation, the
//! static/dynamic attribute split, train/test splitting, and evidence
//! snapshot files.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::{DateTime, Datelike, FixedOffset, Timelike, Weekday};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::{Dataset, Record, Schema, VariableRole};
use crate::infer::{Evidence, InferError};
use crate::route::RoadGraph;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("line {line}, column `{column}`: unknown state `{value}`")]
    UnknownState {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}, column `{column}`: missing value rejected by policy")]
    RejectedMissing { line: u64, column: String },
    #[error("column `{0}` has no observed values to impute from")]
    NothingToImpute(String),
    #[error("variable `{0}` is not a case-study variable and has no static/dynamic role")]
    UntaggedVariable(String),
    #[error("split fraction {0} is not in (0, 1)")]
    InvalidFraction(f64),
    #[error("malformed snapshot JSON: {0}")]
    SnapshotJson(#[from] serde_json::Error),
    #[error("snapshot {index}: invalid timestamp `{value}`")]
    BadTimestamp { index: usize, value: String },
    #[error("snapshot {index}: timestamps must be strictly increasing")]
    NonMonotoneTimestamps { index: usize },
    #[error("snapshot {index}: unknown edge `{edge}`")]
    UnknownEdge { index: usize, edge: String },
    #[error("snapshot {index}, edge `{edge}`: static variable `{variable}` in dynamic evidence")]
    StaticInSnapshot {
        index: usize,
        edge: String,
        variable: String,
    },
    #[error("snapshot {index}, edge `{edge}`: `{variable}` is not a dynamic variable")]
    NotDynamic {
        index: usize,
        edge: String,
        variable: String,
    },
    #[error("snapshot {index}, edge `{edge}`: {source}")]
    SnapshotEvidence {
        index: usize,
        edge: String,
        source: InferError,
    },
}

/// Cells of a CSV file as read, before any interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    lines: Vec<u64>,
}

impl RawTable {
    pub fn new(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, IngestError> {
        let lines = (0..rows.len() as u64).map(|r| r + 2).collect();
        let table = RawTable {
            header,
            rows,
            lines,
        };
        for (row, &line) in table.rows.iter().zip(&table.lines) {
            if row.len() != table.header.len() {
                return Err(IngestError::Ragged {
                    line,
                    expected: table.header.len(),
                    found: row.len(),
                });
            }
        }
        Ok(table)
    }

    /// Reads comma-separated text whose first row is the header. Blank lines
    /// are skipped; every other row must have as many cells as the header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, IngestError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for result in csv.records() {
            let record = result?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(IngestError::Ragged {
                    line,
                    expected: header.len(),
                    found: record.len(),
                });
            }
            rows.push(record.iter().map(str::to_string).collect());
            lines.push(line);
        }
        Ok(RawTable {
            header,
            rows,
            lines,
        })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputationMode {
    /// Any missing cell is an error.
    Reject,
    /// Fill with the column's most frequent observed state (lowest index on ties).
    ColumnMode,
    /// Draw from the column's observed state frequencies with a seeded RNG.
    MarginalSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputationPolicy {
    pub mode: ImputationMode,
    pub seed: u64,
}

impl Default for ImputationPolicy {
    fn default() -> Self {
        ImputationPolicy {
            mode: ImputationMode::ColumnMode,
            seed: 0,
        }
    }
}

/// Summary of a [`parse_dataset`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub records: usize,
    pub policy: ImputationPolicy,
    pub missing_cells: usize,
    pub imputed_per_column: BTreeMap<String, usize>,
}

impl ParseReport {
    pub fn imputed_cells(&self) -> usize {
        self.imputed_per_column.values().sum()
    }
}

fn parse_cell(spec: &crate::bn::VariableSpec, cell: &str, line: u64) -> Result<usize, IngestError> {
    if let Some(k) = spec.state_index(cell) {
        return Ok(k);
    }
    match cell.parse::<usize>() {
        Ok(k) if k < spec.cardinality() => Ok(k),
        _ => Err(IngestError::UnknownState {
            line,
            column: spec.name().to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Converts a raw table into a dataset over `schema`. Columns are matched to
/// variables by name, in any order. A cell is a state label or an integer
/// state index; an empty cell is missing and is resolved by `policy`.
pub fn parse_dataset(
    table: &RawTable,
    schema: &Schema,
    policy: ImputationPolicy,
) -> Result<(Dataset, ParseReport), IngestError> {
    let header: BTreeSet<&str> = table.header.iter().map(String::as_str).collect();
    let expected: BTreeSet<&str> = schema.variables().iter().map(|v| v.name()).collect();
    if header.len() != table.header.len() {
        return Err(IngestError::HeaderMismatch("duplicate column name".into()));
    }
    if header != expected {
        let missing: Vec<_> = expected.difference(&header).collect();
        let extra: Vec<_> = header.difference(&expected).collect();
        return Err(IngestError::HeaderMismatch(format!(
            "missing columns {missing:?}, unexpected columns {extra:?}"
        )));
    }
    // column position of each schema variable
    let columns: Vec<usize> = schema
        .variables()
        .iter()
        .map(|v| table.header.iter().position(|h| h == v.name()).unwrap())
        .collect();

    let n = schema.len();
    let mut cells: Vec<Vec<Option<usize>>> = Vec::with_capacity(table.rows.len());
    let mut missing = Vec::new();
    for (r, (row, &line)) in table.rows.iter().zip(&table.lines).enumerate() {
        let mut values = Vec::with_capacity(n);
        for (var, &col) in columns.iter().enumerate() {
            let cell = row[col].trim();
            let spec = schema.variable(var);
            if cell.is_empty() {
                if policy.mode == ImputationMode::Reject {
                    return Err(IngestError::RejectedMissing {
                        line,
                        column: spec.name().to_string(),
                    });
                }
                missing.push((r, var));
                values.push(None);
            } else {
                values.push(Some(parse_cell(spec, cell, line)?));
            }
        }
        cells.push(values);
    }

    let mut imputed_per_column: BTreeMap<String, usize> = schema
        .variables()
        .iter()
        .map(|v| (v.name().to_string(), 0))
        .collect();
    if !missing.is_empty() {
        let mut frequencies = vec![Vec::new(); n];
        for (var, freq) in frequencies.iter_mut().enumerate() {
            *freq = vec![0u64; schema.cardinality(var)];
            for row in &cells {
                if let Some(k) = row[var] {
                    freq[k] += 1;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
        for &(r, var) in &missing {
            let freq = &frequencies[var];
            let observed: u64 = freq.iter().sum();
            let name = schema.variable(var).name();
            if observed == 0 {
                return Err(IngestError::NothingToImpute(name.to_string()));
            }
            let state = match policy.mode {
                ImputationMode::ColumnMode => {
                    let max = *freq.iter().max().unwrap();
                    freq.iter().position(|&c| c == max).unwrap()
                }
                ImputationMode::MarginalSample => {
                    let mut draw = rng.gen_range(0..observed);
                    freq.iter()
                        .position(|&c| {
                            if draw < c {
                                true
                            } else {
                                draw -= c;
                                false
                            }
                        })
                        .unwrap()
                }
                ImputationMode::Reject => unreachable!("rejected while reading"),
            };
            cells[r][var] = Some(state);
            *imputed_per_column.get_mut(name).unwrap() += 1;
        }
    }

    let records = cells
        .into_iter()
        .map(|row| Record(row.into_iter().map(|v| v.expect("imputed")).collect()))
        .collect();
    let dataset = Dataset::new(schema.clone(), records).expect("parsed values are in range");
    let report = ParseReport {
        records: dataset.len(),
        policy,
        missing_cells: missing.len(),
        imputed_per_column,
    };
    Ok((dataset, report))
}

/// How [`write_dataset`] renders cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFormat {
    Index,
    Label,
}

/// Writes a dataset as CSV with a header of variable names in schema order.
pub fn write_dataset<W: Write>(
    dataset: &Dataset,
    writer: W,
    format: CellFormat,
) -> Result<(), IngestError> {
    let schema = dataset.schema();
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(schema.variables().iter().map(|v| v.name()))?;
    for record in dataset.records() {
        csv.write_record(
            record
                .values()
                .iter()
                .enumerate()
                .map(|(var, &k)| match format {
                    CellFormat::Index => k.to_string(),
                    CellFormat::Label => schema.variable(var).states()[k].clone(),
                }),
        )?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}

const CASE_STUDY_STATIC: [&str; 3] = ["TR", "TRL", "RZ"];
const CASE_STUDY_DYNAMIC: [&str; 9] = ["RF", "WC", "RC", "LC", "W", "PD", "V", "VD", "LCB"];
const CASE_STUDY_TARGET: &str = "C";

/// Role of a variable: its explicit tag, else the case-study default.
pub fn variable_role(spec: &crate::bn::VariableSpec) -> Option<VariableRole> {
    spec.role().or_else(|| {
        let name = spec.name();
        if CASE_STUDY_STATIC.contains(&name) {
            Some(VariableRole::Static)
        } else if CASE_STUDY_DYNAMIC.contains(&name) {
            Some(VariableRole::Dynamic)
        } else if name == CASE_STUDY_TARGET {
            Some(VariableRole::Target)
        } else {
            None
        }
    })
}

/// Partitions the schema's variable indices into static and dynamic sets.
/// Target variables belong to neither.
pub fn split_attributes(
    schema: &Schema,
) -> Result<(BTreeSet<usize>, BTreeSet<usize>), IngestError> {
    let mut static_vars = BTreeSet::new();
    let mut dynamic_vars = BTreeSet::new();
    for (i, spec) in schema.variables().iter().enumerate() {
        match variable_role(spec) {
            Some(VariableRole::Static) => {
                static_vars.insert(i);
            }
            Some(VariableRole::Dynamic) => {
                dynamic_vars.insert(i);
            }
            Some(VariableRole::Target) => {}
            None => return Err(IngestError::UntaggedVariable(spec.name().to_string())),
        }
    }
    Ok((static_vars, dynamic_vars))
}

/// Shuffles record positions with a seeded RNG and cuts them into a training
/// set of `round(fraction · N)` records and a test set of the rest.
pub fn train_test_split(
    dataset: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), IngestError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(IngestError::InvalidFraction(fraction));
    }
    let n = dataset.len();
    let n_train = (fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| {
        let records = idx.iter().map(|&i| dataset.records()[i].clone()).collect();
        Dataset::new(dataset.schema().clone(), records).expect("subset of a valid dataset")
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Part-of-day state for an hour of the day. Hours not covered by a listed
/// range (07h and 12h) take the nearest listed range below them.
pub fn part_of_day(hour: u32) -> usize {
    match hour {
        8 | 9 => 0,
        10..=12 => 1,
        13..=15 => 2,
        16..=18 => 3,
        19..=21 => 4,
        _ => 5,
    }
}

/// Week state: 1 on Saturday and Sunday.
pub fn week_state(time: &DateTime<FixedOffset>) -> usize {
    matches!(time.weekday(), Weekday::Sat | Weekday::Sun) as usize
}

/// Dynamic evidence for every listed segment at one point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: DateTime<FixedOffset>,
    pub edges: BTreeMap<String, Evidence>,
}

impl Snapshot {
    /// Evidence for one edge: its snapshot entry (empty if unlisted) plus
    /// `W` and `PD` derived from the timestamp when the schema has them and
    /// the entry does not set them.
    pub fn evidence_for(&self, schema: &Schema, edge: &str) -> Evidence {
        let mut evidence = self.edges.get(edge).cloned().unwrap_or_default();
        let derived = [
            ("W", week_state(&self.time)),
            ("PD", part_of_day(self.time.hour())),
        ];
        for (name, state) in derived {
            if let Some(var) = schema.index_of(name) {
                if !evidence.contains(var) && state < schema.cardinality(var) {
                    evidence
                        .insert(schema, var, state)
                        .expect("derived state in range");
                }
            }
        }
        evidence
    }

    /// Evidence for every edge of `graph`.
    pub fn evidence_map(&self, schema: &Schema, graph: &RoadGraph) -> BTreeMap<String, Evidence> {
        graph
            .edges()
            .iter()
            .map(|e| (e.id.clone(), self.evidence_for(schema, &e.id)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotSeries {
    snapshots: Vec<Snapshot>,
}

impl SnapshotSeries {
    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Wire form of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDocument {
    pub time: String,
    #[serde(default)]
    pub edges: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SnapshotFile {
    Many(Vec<SnapshotDocument>),
    One(SnapshotDocument),
}

/// Parses a snapshot file (one snapshot object or an array of them) and
/// checks it against the schema and graph.
pub fn load_snapshots(
    text: &str,
    schema: &Schema,
    graph: &RoadGraph,
) -> Result<SnapshotSeries, IngestError> {
    let docs = match serde_json::from_str::<SnapshotFile>(text) {
        Ok(SnapshotFile::Many(docs)) => docs,
        Ok(SnapshotFile::One(doc)) => vec![doc],
        Err(_) => {
            // re-parse strictly for a useful message
            serde_json::from_str::<Vec<SnapshotDocument>>(text)?;
            unreachable!("untagged parse failed but strict parse succeeded")
        }
    };
    snapshots_from_documents(docs, schema, graph)
}

pub fn snapshots_from_documents(
    docs: Vec<SnapshotDocument>,
    schema: &Schema,
    graph: &RoadGraph,
) -> Result<SnapshotSeries, IngestError> {
    let mut snapshots: Vec<Snapshot> = Vec::with_capacity(docs.len());
    for (index, doc) in docs.into_iter().enumerate() {
        let time =
            DateTime::parse_from_rfc3339(&doc.time).map_err(|_| IngestError::BadTimestamp {
                index,
                value: doc.time.clone(),
            })?;
        if snapshots.last().is_some_and(|prev| prev.time >= time) {
            return Err(IngestError::NonMonotoneTimestamps { index });
        }
        let mut edges = BTreeMap::new();
        for (edge, labels) in doc.edges {
            if graph.edge(&edge).is_none() {
                return Err(IngestError::UnknownEdge { index, edge });
            }
            for name in labels.keys() {
                if let Some(var) = schema.index_of(name) {
                    match variable_role(schema.variable(var)) {
                        Some(VariableRole::Dynamic) => {}
                        Some(VariableRole::Static) => {
                            return Err(IngestError::StaticInSnapshot {
                                index,
                                edge,
                                variable: name.clone(),
                            });
                        }
                        _ => {
                            return Err(IngestError::NotDynamic {
                                index,
                                edge,
                                variable: name.clone(),
                            });
                        }
                    }
                }
            }
            let evidence =
                Evidence::from_labels(schema, labels.iter().map(|(k, v)| (k.as_str(), v.as_str())))
                    .map_err(|source| IngestError::SnapshotEvidence {
                        index,
                        edge: edge.clone(),
                        source,
                    })?;
            edges.insert(edge, evidence);
        }
        snapshots.push(Snapshot { time, edges });
    }
    Ok(SnapshotSeries { snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::VariableSpec;
    use crate::route::RoadEdge;

    fn collision_schema() -> Schema {
        Schema::new(vec![VariableSpec::new("C", ["none", "collision"]).unwrap()]).unwrap()
    }

    fn table(text: &str) -> RawTable {
        RawTable::from_csv(text.as_bytes()).unwrap()
    }

    #[test]
    fn labels_map_to_indices() {
        let (d, report) = parse_dataset(
            &table("C\nnone\ncollision\nnone\n"),
            &collision_schema(),
            ImputationPolicy::default(),
        )
        .unwrap();
        let values: Vec<usize> = d.records().iter().map(|r| r.values()[0]).collect();
        assert_eq!(values, [0, 1, 0]);
        assert_eq!(report.imputed_cells(), 0);
    }

    #[test]
    fn integer_codes_and_column_order() {
        let schema = Schema::new(vec![
            VariableSpec::new("A", ["x", "y", "z"]).unwrap(),
            VariableSpec::new("B", ["p", "q"]).unwrap(),
        ])
        .unwrap();
        let (d, _) = parse_dataset(
            &table("B,A\n1,2\np,x\n\"q\",1\n"),
            &schema,
            ImputationPolicy::default(),
        )
        .unwrap();
        let rows: Vec<Vec<usize>> = d.records().iter().map(|r| r.values().to_vec()).collect();
        assert_eq!(rows, [vec![2, 1], vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn column_mode_imputation() {
        // a blank line is skipped by the reader, so the missing cell is quoted
        let text = "C\n0\n0\n0\n0\n0\n1\n1\n\"\"\n";
        let (d, report) = parse_dataset(
            &table(text),
            &collision_schema(),
            ImputationPolicy::default(),
        )
        .unwrap();
        assert_eq!(d.records().last().unwrap().values(), [0]);
        assert_eq!(report.missing_cells, 1);
        assert_eq!(report.imputed_per_column["C"], 1);
    }

    #[test]
    fn reject_policy() {
        let policy = ImputationPolicy {
            mode: ImputationMode::Reject,
            seed: 0,
        };
        let err = parse_dataset(&table("C\n0\n\"\"\n"), &collision_schema(), policy).unwrap_err();
        assert!(matches!(err, IngestError::RejectedMissing { line: 3, .. }));
    }

    #[test]
    fn marginal_sample_is_seeded() {
        let schema = Schema::new(vec![
            VariableSpec::indexed("A", 3).unwrap(),
            VariableSpec::indexed("B", 2).unwrap(),
        ])
        .unwrap();
        let text = "A,B\n0,1\n1,\n2,0\n,1\n1,\n,0\n";
        let policy = ImputationPolicy {
            mode: ImputationMode::MarginalSample,
            seed: 42,
        };
        let (a, ra) = parse_dataset(&table(text), &schema, policy).unwrap();
        let (b, _) = parse_dataset(&table(text), &schema, policy).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.missing_cells, 4);
        assert_eq!(ra.imputed_cells(), 4);
        // observed cells untouched
        assert_eq!(a.records()[0].values(), [0, 1]);
        assert_eq!(a.records()[2].values(), [2, 0]);
    }

    #[test]
    fn bad_cells_and_headers() {
        let schema = collision_schema();
        let err = parse_dataset(
            &table("C\n0\ncrash\n"),
            &schema,
            ImputationPolicy::default(),
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::UnknownState { line: 3, .. }));
        let err =
            parse_dataset(&table("C\n2\n"), &schema, ImputationPolicy::default()).unwrap_err();
        assert!(matches!(err, IngestError::UnknownState { .. }));
        let err =
            parse_dataset(&table("X\n0\n"), &schema, ImputationPolicy::default()).unwrap_err();
        assert!(matches!(err, IngestError::HeaderMismatch(_)));
        let err = RawTable::from_csv("C,D\n0,1\n0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IngestError::Ragged { line: 3, .. }));
        let err =
            parse_dataset(&table("C\n\"\"\n"), &schema, ImputationPolicy::default()).unwrap_err();
        assert!(matches!(err, IngestError::NothingToImpute(_)));
    }

    #[test]
    fn write_then_parse() {
        let (d, _) = parse_dataset(
            &table("C\nnone\ncollision\n"),
            &collision_schema(),
            ImputationPolicy::default(),
        )
        .unwrap();
        for format in [CellFormat::Index, CellFormat::Label] {
            let mut out = Vec::new();
            write_dataset(&d, &mut out, format).unwrap();
            let (again, _) = parse_dataset(
                &RawTable::from_csv(out.as_slice()).unwrap(),
                &collision_schema(),
                ImputationPolicy::default(),
            )
            .unwrap();
            assert_eq!(again, d);
        }
    }

    #[test]
    fn case_study_partition() {
        let schema = Schema::case_study();
        let (s, d) = split_attributes(&schema).unwrap();
        let names = |set: &BTreeSet<usize>| -> BTreeSet<String> {
            set.iter()
                .map(|&i| schema.variable(i).name().to_string())
                .collect()
        };
        assert_eq!(
            names(&s),
            BTreeSet::from(["TR", "TRL", "RZ"].map(String::from))
        );
        assert_eq!(
            names(&d),
            BTreeSet::from(["RF", "WC", "RC", "LC", "W", "PD", "V", "VD", "LCB"].map(String::from))
        );
        assert!(s.is_disjoint(&d));
        assert_eq!(s.len() + d.len() + 1, schema.len());
    }

    #[test]
    fn partial_and_custom_schemas() {
        let only_tr = Schema::new(vec![VariableSpec::new("TR", ["a", "b"]).unwrap()]).unwrap();
        let (s, d) = split_attributes(&only_tr).unwrap();
        assert_eq!((s.len(), d.len()), (1, 0));
        let custom = Schema::new(vec![VariableSpec::indexed("SLOPE", 2).unwrap()]).unwrap();
        assert!(matches!(
            split_attributes(&custom),
            Err(IngestError::UntaggedVariable(_))
        ));
        let tagged = Schema::new(vec![VariableSpec::indexed("SLOPE", 2)
            .unwrap()
            .with_role(VariableRole::Static)])
        .unwrap();
        assert_eq!(split_attributes(&tagged).unwrap().0.len(), 1);
    }

    fn dataset_of(n: usize) -> Dataset {
        let schema = Schema::new(vec![VariableSpec::indexed("A", 10).unwrap()]).unwrap();
        Dataset::new(schema, (0..n).map(|i| Record(vec![i % 10])).collect()).unwrap()
    }

    #[test]
    fn split_sizes() {
        let (train, test) = train_test_split(&dataset_of(10), 0.8, 7).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = train_test_split(&dataset_of(1), 0.5, 7).unwrap();
        assert_eq!((train.len(), test.len()), (1, 0));
        assert!(train_test_split(&dataset_of(1), 1.0, 7).is_err());
        assert!(train_test_split(&dataset_of(1), 0.0, 7).is_err());
    }

    #[test]
    fn split_is_deterministic_partition() {
        let d = dataset_of(57);
        let (a_train, a_test) = train_test_split(&d, 0.8, 3).unwrap();
        let (b_train, b_test) = train_test_split(&d, 0.8, 3).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        let mut all: Vec<_> = a_train
            .records()
            .iter()
            .chain(a_test.records())
            .cloned()
            .collect();
        let mut original = d.records().to_vec();
        all.sort();
        original.sort();
        assert_eq!(all, original);
    }

    #[test]
    fn hour_buckets() {
        let expected = [
            5, 5, 5, 5, 5, 5, 5, 5, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5, 5,
        ];
        let got: Vec<usize> = (0..24).map(part_of_day).collect();
        assert_eq!(got, expected);
    }

    fn graph() -> RoadGraph {
        RoadGraph::new(
            vec!["A".into(), "B".into()],
            vec![RoadEdge::new("e1", "A", "B"), RoadEdge::new("e2", "B", "A")],
        )
        .unwrap()
    }

    #[test]
    fn hourly_series() {
        let schema = Schema::case_study();
        let docs: Vec<String> = (8..20)
            .map(|h| {
                format!(r#"{{"time": "2016-06-26T{h:02}:00:00-05:00", "edges": {{"e1": {{"WC": "rain"}}}}}}"#)
            })
            .collect();
        let text = format!("[{}]", docs.join(","));
        let series = load_snapshots(&text, &schema, &graph()).unwrap();
        assert_eq!(series.len(), 12);
        let first = &series.snapshots()[0];
        let e = first.evidence_for(&schema, "e1");
        // 2016-06-26 was a Sunday
        assert_eq!(e.get(schema.index_of("W").unwrap()), Some(1));
        assert_eq!(e.get(schema.index_of("PD").unwrap()), Some(0));
        assert_eq!(e.get(schema.index_of("WC").unwrap()), Some(1));
        let unlisted = first.evidence_for(&schema, "e2");
        assert_eq!(unlisted.len(), 2);
    }

    #[test]
    fn snapshot_errors() {
        let schema = Schema::case_study();
        let g = graph();
        let err = load_snapshots(
            r#"{"time": "2016-06-26T08:00:00Z", "edges": {"e1": {"TR": "highway"}}}"#,
            &schema,
            &g,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::StaticInSnapshot { .. }));
        let err = load_snapshots(
            r#"{"time": "2016-06-26T08:00:00Z", "edges": {"e9": {}}}"#,
            &schema,
            &g,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::UnknownEdge { .. }));
        let err = load_snapshots(
            r#"[{"time": "2016-06-26T09:00:00Z"}, {"time": "2016-06-26T09:00:00Z"}]"#,
            &schema,
            &g,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            IngestError::NonMonotoneTimestamps { index: 1 }
        ));
        let err = load_snapshots(
            r#"{"time": "2016-06-26T08:00:00Z", "edges": {"e1": {"C": "collision"}}}"#,
            &schema,
            &g,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::NotDynamic { .. }));
        let err = load_snapshots(r#"{"time": "yesterday"}"#, &schema, &g).unwrap_err();
        assert!(matches!(err, IngestError::BadTimestamp { .. }));
        let err = load_snapshots(
            r#"{"time": "2016-06-26T08:00:00Z", "edges": {"e1": {"WC": "sleet"}}}"#,
            &schema,
            &g,
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::SnapshotEvidence { .. }));
        assert!(load_snapshots("[]", &schema, &g).unwrap().is_empty());
    }
}
