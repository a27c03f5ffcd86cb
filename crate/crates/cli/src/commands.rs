use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use saferoute_core::bn::{BayesianNetwork, Dataset, Schema};
use saferoute_core::infer::{collision_probability, Evidence};
use saferoute_core::ingest::{
    load_snapshots, parse_dataset, train_test_split, ImputationPolicy, RawTable, Snapshot,
};
use saferoute_core::learn::{k2_search, learn_parameters, DirichletPrior, K2Config, LearnManifest};
use saferoute_core::route::{assign_safety, safest_route, RoadGraph, Route, RouteError};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::manifest::{manifest_path_for, InputFile, RunManifest};
use crate::replay::{ReplayEntry, ReplayReport};
use crate::{Cli, Command, InferArgs, LearnArgs, ReplayArgs, RouteArgs, ValidateArgs};

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let (manifest, out) = match &cli.command {
        Command::Learn(args) => (learn(args)?, args.out.as_deref()),
        Command::Infer(args) => (infer(args)?, args.out.as_deref()),
        Command::Route(args) => (route(args)?, args.out.as_deref()),
        Command::Replay(args) => (replay(args)?, args.out.as_deref()),
        Command::Validate(args) => (validate(args)?, args.out.as_deref()),
    };
    let manifest = manifest.finish(started.elapsed());
    let text = to_pretty(&manifest);
    match cli.manifest.clone().or_else(|| out.map(manifest_path_for)) {
        Some(path) => write_file(&path, &text),
        None => {
            let _ = std::io::stderr().write_all(text.as_bytes());
            Ok(())
        }
    }
}

/// Reads a file, recording its hash in the manifest.
struct Inputs {
    files: Vec<InputFile>,
}

impl Inputs {
    fn new() -> Self {
        Inputs { files: Vec::new() }
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::from(e).in_file(path))?;
        self.files.push(InputFile::hash(path, &bytes));
        String::from_utf8(bytes).map_err(|_| CliError::data("not valid UTF-8").in_file(path))
    }

    fn network(&mut self, path: &Path) -> Result<BayesianNetwork, CliError> {
        let text = self.read(path)?;
        BayesianNetwork::from_json(&text).map_err(|e| CliError::from(e).in_file(path))
    }

    fn graph(&mut self, path: &Path) -> Result<RoadGraph, CliError> {
        let text = self.read(path)?;
        RoadGraph::from_json(&text).map_err(|e| CliError::data(e.to_string()).in_file(path))
    }

    fn schema(&mut self, path: Option<&Path>) -> Result<Schema, CliError> {
        match path {
            None => Ok(Schema::case_study()),
            Some(path) => {
                let text = self.read(path)?;
                serde_json::from_str(&text).map_err(|e| CliError::data(e.to_string()).in_file(path))
            }
        }
    }

    fn evidence(&mut self, schema: &Schema, path: &Path) -> Result<Evidence, CliError> {
        let text = self.read(path)?;
        Evidence::from_json(schema, &text).map_err(|e| CliError::from(e).in_file(path))
    }

    fn dataset(
        &mut self,
        schema: &Schema,
        path: &Path,
        policy: ImputationPolicy,
    ) -> Result<(Dataset, saferoute_core::ingest::ParseReport), CliError> {
        let text = self.read(path)?;
        let table =
            RawTable::from_csv(text.as_bytes()).map_err(|e| CliError::from(e).in_file(path))?;
        parse_dataset(&table, schema, policy).map_err(|e| CliError::from(e).in_file(path))
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::from(e).in_file(path))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(CliError::from),
    }
}

fn outputs(paths: &[Option<&PathBuf>]) -> Vec<String> {
    paths
        .iter()
        .flatten()
        .map(|p| p.display().to_string())
        .collect()
}

fn learn(args: &LearnArgs) -> Result<RunManifest, CliError> {
    if !(args.split > 0.0 && args.split <= 1.0) {
        return Err(CliError::usage(format!(
            "--split must be in (0, 1], got {}",
            args.split
        )));
    }
    let mut inputs = Inputs::new();
    let schema = inputs.schema(args.schema.as_deref())?;
    let policy = ImputationPolicy {
        mode: args.impute.into(),
        seed: args.seed,
    };
    let (dataset, report) = inputs.dataset(&schema, &args.dataset, policy)?;
    let report_text = to_pretty(&report);
    match &args.report {
        Some(path) => write_file(path, &report_text)?,
        None => {
            let _ = std::io::stderr().write_all(report_text.as_bytes());
        }
    }

    let mut config = K2Config::for_variables(schema.len());
    if let Some(names) = &args.ordering {
        config.ordering = names
            .iter()
            .map(|name| {
                schema.index_of(name.trim()).ok_or_else(|| {
                    CliError::usage(format!("--ordering: unknown variable {name:?}"))
                })
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(k) = args.max_parents {
        config.max_parents = k;
    }
    config.prior_counts = args.prior_counts;
    config.validate(schema.len())?;

    let (train, test) = if args.split == 1.0 {
        (dataset, None)
    } else {
        let (train, test) = train_test_split(&dataset, args.split, args.seed)?;
        (train, Some(test))
    };
    if train.is_empty() {
        return Err(CliError::data("no training records").in_file(&args.dataset));
    }
    let structure = k2_search(&train, &config)?;
    let prior = DirichletPrior::uniform(f64::from(args.prior_counts))?;
    let network = learn_parameters(&train, &structure, &prior)?;
    emit(args.out.as_deref(), &(network.to_json() + "\n"))?;

    let test_log_likelihood = match &test {
        Some(test) if !test.is_empty() => {
            let mut total = 0.0;
            for r in test.records() {
                total += network.log_joint(r)?;
            }
            Some(total / test.len() as f64)
        }
        _ => None,
    };
    let learned = LearnManifest::new(&train, &config, &structure)?;
    let mut manifest = RunManifest::new(
        "learn",
        json!({
            "ordering": learned.ordering,
            "max_parents": config.max_parents,
            "prior_counts": config.prior_counts,
            "impute": policy.mode,
            "split": args.split,
            "seed": args.seed,
        }),
    );
    manifest.inputs = inputs.files;
    manifest.seeds = vec![args.seed];
    manifest.outputs = outputs(&[args.out.as_ref(), args.report.as_ref()]);
    manifest.details = Some(json!({
        "learn": learned,
        "parse": report,
        "train_records": train.len(),
        "test_records": test.as_ref().map_or(0, Dataset::len),
        "test_avg_log_likelihood": test_log_likelihood,
    }));
    Ok(manifest)
}

#[derive(Serialize)]
struct InferOutput {
    p_collision: f64,
    p_safety: f64,
}

fn infer(args: &InferArgs) -> Result<RunManifest, CliError> {
    let mut inputs = Inputs::new();
    let network = inputs.network(&args.network)?;
    let evidence = match &args.evidence {
        Some(path) => inputs.evidence(network.schema(), path)?,
        None => Evidence::new(),
    };
    let p_collision = collision_probability(&network, &evidence)?;
    let output = InferOutput {
        p_collision,
        p_safety: 1.0 - p_collision,
    };
    emit(args.out.as_deref(), &to_pretty(&output))?;
    let mut manifest = RunManifest::new(
        "infer",
        json!({ "evidence": evidence.to_labels(network.schema()) }),
    );
    manifest.inputs = inputs.files;
    manifest.outputs = outputs(&[args.out.as_ref()]);
    Ok(manifest)
}

fn check_endpoints(graph: &RoadGraph, from: &str, to: &str) -> Result<(), CliError> {
    for node in [from, to] {
        if graph.node(node).is_none() {
            return Err(RouteError::UnknownNode(node.to_string()).into());
        }
    }
    Ok(())
}

fn route_for(
    network: &BayesianNetwork,
    graph: &RoadGraph,
    evidence: &BTreeMap<String, Evidence>,
    from: &str,
    to: &str,
) -> Result<Route, CliError> {
    let states = assign_safety(graph, network, evidence)?;
    Ok(safest_route(graph, &states, from, to)?)
}

fn load_series(
    inputs: &mut Inputs,
    network: &BayesianNetwork,
    graph: &RoadGraph,
    path: &Path,
) -> Result<Vec<Snapshot>, CliError> {
    let text = inputs.read(path)?;
    let series = load_snapshots(&text, network.schema(), graph)
        .map_err(|e| CliError::from(e).in_file(path))?;
    Ok(series.snapshots().to_vec())
}

fn route(args: &RouteArgs) -> Result<RunManifest, CliError> {
    let mut inputs = Inputs::new();
    let network = inputs.network(&args.network)?;
    let graph = inputs.graph(&args.graph)?;
    check_endpoints(&graph, &args.from, &args.to)?;
    let (evidence, time) = match &args.snapshot {
        Some(path) => {
            let snapshots = load_series(&mut inputs, &network, &graph, path)?;
            let [snapshot] = snapshots.as_slice() else {
                return Err(CliError::data(format!(
                    "expected one snapshot, found {}",
                    snapshots.len()
                ))
                .in_file(path));
            };
            (
                snapshot.evidence_map(network.schema(), &graph),
                Some(snapshot.time.to_rfc3339()),
            )
        }
        None => (
            graph
                .edges()
                .iter()
                .map(|e| (e.id.clone(), Evidence::new()))
                .collect(),
            None,
        ),
    };
    let route = route_for(&network, &graph, &evidence, &args.from, &args.to)?;
    emit(args.out.as_deref(), &to_pretty(&route))?;
    let mut manifest = RunManifest::new(
        "route",
        json!({ "from": args.from, "to": args.to, "time": time }),
    );
    manifest.inputs = inputs.files;
    manifest.outputs = outputs(&[args.out.as_ref()]);
    Ok(manifest)
}

fn replay(args: &ReplayArgs) -> Result<RunManifest, CliError> {
    let mut inputs = Inputs::new();
    let network = inputs.network(&args.network)?;
    let graph = inputs.graph(&args.graph)?;
    check_endpoints(&graph, &args.from, &args.to)?;
    let snapshots = load_series(&mut inputs, &network, &graph, &args.snapshots)?;
    let mut entries = Vec::with_capacity(snapshots.len());
    for snapshot in &snapshots {
        let time = snapshot.time.to_rfc3339();
        let evidence = snapshot.evidence_map(network.schema(), &graph);
        let route =
            route_for(&network, &graph, &evidence, &args.from, &args.to).map_err(|e| CliError {
                kind: e.kind,
                message: format!("snapshot {time}: {}", e.message),
            })?;
        entries.push(ReplayEntry::new(time, route));
    }
    let report = ReplayReport::new(&args.from, &args.to, entries);
    emit(args.out.as_deref(), &to_pretty(&report))?;
    if let Some(path) = &args.plot_data {
        write_file(path, &report.plot_data())?;
    }
    for change in &report.route_changes {
        eprintln!(
            "route changes at {}: {} -> {}",
            change.time,
            change.previous_nodes.join(" > "),
            change.nodes.join(" > ")
        );
    }
    let mut manifest = RunManifest::new(
        "replay",
        json!({ "from": args.from, "to": args.to, "snapshots": snapshots.len() }),
    );
    manifest.inputs = inputs.files;
    manifest.outputs = outputs(&[args.out.as_ref(), args.plot_data.as_ref()]);
    Ok(manifest)
}

#[derive(Serialize)]
struct FileCheck {
    kind: &'static str,
    path: String,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

fn validate(args: &ValidateArgs) -> Result<RunManifest, CliError> {
    let mut inputs = Inputs::new();
    let mut checks = Vec::new();
    let mut record = |kind, path: &Path, result: Result<String, CliError>| {
        let (ok, detail) = match result {
            Ok(summary) => (true, Some(summary)),
            Err(e) => (false, Some(e.message)),
        };
        checks.push(FileCheck {
            kind,
            path: path.display().to_string(),
            ok,
            detail,
        });
    };

    let network = args.network.as_deref().map(|path| {
        let loaded = inputs.network(path);
        let summary = loaded.as_ref().map(|bn| {
            format!(
                "{} variables, {} edges",
                bn.schema().len(),
                bn.structure().edge_count()
            )
        });
        record(
            "network",
            path,
            summary.map_err(|e| CliError::data(e.message.clone())),
        );
        loaded.ok()
    });
    let schema = match (network.as_ref().and_then(Option::as_ref), &args.schema) {
        (Some(bn), None) => Some(bn.schema().clone()),
        (_, Some(path)) => {
            let loaded = inputs.schema(Some(path));
            let summary = loaded.as_ref().map(|s| format!("{} variables", s.len()));
            record(
                "schema",
                path,
                summary.map_err(|e| CliError::data(e.message.clone())),
            );
            loaded.ok()
        }
        (None, None) => Some(Schema::case_study()),
    };
    if let Some(path) = &args.dataset {
        let result = match &schema {
            Some(schema) => inputs
                .dataset(schema, path, ImputationPolicy::default())
                .map(|(d, r)| format!("{} records, {} missing cells", d.len(), r.missing_cells)),
            None => Err(CliError::data("no usable schema")),
        };
        record("dataset", path, result);
    }
    if let Some(path) = &args.evidence {
        let result = match &schema {
            Some(schema) => inputs
                .evidence(schema, path)
                .map(|e| format!("{} observed variables", e.len())),
            None => Err(CliError::data("no usable schema")),
        };
        record("evidence", path, result);
    }
    let graph = args.graph.as_deref().map(|path| {
        let loaded = inputs.graph(path).and_then(|g| {
            if let Some(schema) = &schema {
                for edge in g.edges() {
                    edge.static_evidence(schema)?;
                }
            }
            Ok(g)
        });
        let summary = loaded
            .as_ref()
            .map(|g| format!("{} nodes, {} edges", g.nodes().len(), g.edges().len()));
        record(
            "graph",
            path,
            summary.map_err(|e| CliError::data(e.message.clone())),
        );
        loaded.ok()
    });
    if let Some(path) = &args.snapshots {
        let result = match (graph.as_ref().and_then(Option::as_ref), &schema) {
            (Some(graph), Some(schema)) => inputs.read(path).and_then(|text| {
                load_snapshots(&text, schema, graph)
                    .map(|s| format!("{} snapshots", s.len()))
                    .map_err(CliError::from)
            }),
            (None, _) => Err(CliError::usage("--snapshots needs a valid --graph")),
            (_, None) => Err(CliError::data("no usable schema")),
        };
        record("snapshots", path, result);
    }

    let failed = checks.iter().filter(|c| !c.ok).count();
    emit(
        args.out.as_deref(),
        &to_pretty(&json!({ "files": checks, "failed": failed })),
    )?;
    for check in checks.iter().filter(|c| !c.ok) {
        eprintln!(
            "invalid {} {}: {}",
            check.kind,
            check.path,
            check.detail.as_deref().unwrap_or("")
        );
    }
    if failed > 0 {
        return Err(CliError::data(format!(
            "{failed} file(s) failed validation"
        )));
    }
    let mut manifest = RunManifest::new("validate", json!({}));
    manifest.inputs = inputs.files;
    manifest.outputs = outputs(&[args.out.as_ref()]);
    Ok(manifest)
}
