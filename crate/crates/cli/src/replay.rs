use std::collections::BTreeMap;
use std::fmt::Write as _;

use saferoute_core::route::{serialize_score, Route};
use serde::Serialize;

/// The safest route for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayEntry {
    pub time: String,
    pub edges: Vec<String>,
    pub nodes: Vec<String>,
    pub p_route: f64,
    #[serde(serialize_with = "serialize_score")]
    pub score: f64,
}

impl ReplayEntry {
    pub fn new(time: String, route: Route) -> Self {
        ReplayEntry {
            time,
            edges: route.edges,
            nodes: route.nodes,
            p_route: route.p_route,
            score: route.score,
        }
    }

    pub fn route(&self) -> Route {
        Route {
            edges: self.edges.clone(),
            nodes: self.nodes.clone(),
            p_route: self.p_route,
            score: self.score,
        }
    }
}

/// A snapshot whose route differs from the one before it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteChange {
    pub time: String,
    pub previous_time: String,
    pub previous_nodes: Vec<String>,
    pub nodes: Vec<String>,
}

/// The best and worst start times of a route chosen more than once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVariation {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub best_time: String,
    #[serde(serialize_with = "serialize_score")]
    pub best_score: f64,
    pub worst_time: String,
    #[serde(serialize_with = "serialize_score")]
    pub worst_score: f64,
}

impl ScoreVariation {
    pub fn spread(&self) -> f64 {
        self.best_score - self.worst_score
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub from: String,
    pub to: String,
    pub entries: Vec<ReplayEntry>,
    /// Highest score, earliest on ties. Absent for an empty series.
    pub best_start_time: Option<String>,
    pub route_changes: Vec<RouteChange>,
    /// One item per repeated route whose score is not constant, in order of
    /// first appearance.
    pub score_variations: Vec<ScoreVariation>,
}

impl ReplayReport {
    pub fn new(from: &str, to: &str, entries: Vec<ReplayEntry>) -> Self {
        let mut best: Option<&ReplayEntry> = None;
        for entry in &entries {
            if best.is_none_or(|b| entry.score > b.score) {
                best = Some(entry);
            }
        }
        let best_start_time = best.map(|e| e.time.clone());

        let route_changes = entries
            .windows(2)
            .filter(|w| w[0].edges != w[1].edges)
            .map(|w| RouteChange {
                time: w[1].time.clone(),
                previous_time: w[0].time.clone(),
                previous_nodes: w[0].nodes.clone(),
                nodes: w[1].nodes.clone(),
            })
            .collect();

        let mut first_seen: Vec<&Vec<String>> = Vec::new();
        let mut groups: BTreeMap<&Vec<String>, Vec<&ReplayEntry>> = BTreeMap::new();
        for entry in &entries {
            let group = groups.entry(&entry.edges).or_default();
            if group.is_empty() {
                first_seen.push(&entry.edges);
            }
            group.push(entry);
        }
        let score_variations = first_seen
            .into_iter()
            .filter_map(|edges| {
                let group = &groups[edges];
                let mut hi = group[0];
                let mut lo = group[0];
                for &e in &group[1..] {
                    if e.score > hi.score {
                        hi = e;
                    }
                    if e.score < lo.score {
                        lo = e;
                    }
                }
                (hi.score != lo.score).then(|| ScoreVariation {
                    nodes: hi.nodes.clone(),
                    edges: hi.edges.clone(),
                    best_time: hi.time.clone(),
                    best_score: hi.score,
                    worst_time: lo.time.clone(),
                    worst_score: lo.score,
                })
            })
            .collect();

        ReplayReport {
            from: from.to_string(),
            to: to.to_string(),
            entries,
            best_start_time,
            route_changes,
            score_variations,
        }
    }

    /// `time,score` rows for plotting.
    pub fn plot_data(&self) -> String {
        let mut csv = String::from("time,score\n");
        for e in &self.entries {
            let score = if e.score == f64::INFINITY {
                "inf".to_string()
            } else {
                e.score.to_string()
            };
            let _ = writeln!(csv, "{},{}", e.time, score);
        }
        csv
    }
}
