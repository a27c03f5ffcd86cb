//! Case-study fixtures: a seeded generator network over the thirteen
//! road-safety variables, and a storm crossing a small road network over
//! twelve hourly snapshots.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saferoute_core::bn::{config_unrank, BayesianNetwork, DagStructure, Schema};
use saferoute_core::ingest::SnapshotDocument;
use saferoute_core::route::{RoadEdge, RoadGraph};

fn idx(schema: &Schema, name: &str) -> usize {
    schema.index_of(name).unwrap()
}

/// Parent sets of the generator, by name. Every parent precedes its child
/// in schema order.
pub const GENERATOR_EDGES: [(&str, &[&str]); 7] = [
    ("TRL", &["TR"]),
    ("RF", &["TR"]),
    ("RC", &["WC"]),
    ("C", &["RF", "WC", "LC"]),
    ("V", &["TR", "C"]),
    ("VD", &["W", "PD"]),
    ("LCB", &["V", "VD"]),
];

/// A generator network over the case-study schema with seeded random CPTs.
/// Collision rows put between 1% and 25% of their mass on `collision`.
pub fn case_study_generator(seed: u64) -> BayesianNetwork {
    let schema = Schema::case_study();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parents = vec![Vec::new(); schema.len()];
    for (child, ps) in GENERATOR_EDGES {
        parents[idx(&schema, child)] = ps.iter().map(|p| idx(&schema, p)).collect();
    }
    let structure = DagStructure::new(parents).unwrap();
    let c = idx(&schema, "C");
    let rows = (0..schema.len())
        .map(|i| {
            let q: usize = structure
                .parents(i)
                .iter()
                .map(|&p| schema.cardinality(p))
                .product();
            (0..q)
                .map(|_| {
                    if i == c {
                        let p = rng.gen_range(0.01..0.25);
                        vec![1.0 - p, p]
                    } else {
                        let raw: Vec<f64> = (0..schema.cardinality(i))
                            .map(|_| rng.gen::<f64>().powi(2) + 0.02)
                            .collect();
                        let total: f64 = raw.iter().sum();
                        raw.iter().map(|x| x / total).collect()
                    }
                })
                .collect()
        })
        .collect();
    BayesianNetwork::from_rows(schema, structure, rows).unwrap()
}

/// Collision probability for the storm network, by road type, weather and
/// light.
fn storm_collision(tr: usize, wc: usize, lc: usize) -> f64 {
    const WEATHER: [f64; 7] = [0.002, 0.02, 0.015, 0.008, 0.04, 0.06, 0.01];
    const LIGHT: [f64; 4] = [1.0, 1.5, 1.8, 2.5];
    const ROAD: [f64; 2] = [1.0, 1.3];
    WEATHER[wc] * LIGHT[lc] * ROAD[tr]
}

/// Case-study schema where `C` depends on road type, weather and light and
/// every other variable is an independent uniform root.
pub fn storm_network() -> BayesianNetwork {
    let schema = Schema::case_study();
    let (tr, wc, lc, c) = (
        idx(&schema, "TR"),
        idx(&schema, "WC"),
        idx(&schema, "LC"),
        idx(&schema, "C"),
    );
    let mut parents = vec![Vec::new(); schema.len()];
    parents[c] = vec![tr, wc, lc];
    let structure = DagStructure::new(parents).unwrap();
    let cards = [
        schema.cardinality(tr),
        schema.cardinality(wc),
        schema.cardinality(lc),
    ];
    let rows = (0..schema.len())
        .map(|i| {
            if i == c {
                (0..cards.iter().product::<usize>())
                    .map(|j| {
                        let s = config_unrank(j, &cards);
                        let p = storm_collision(s[0], s[1], s[2]);
                        vec![1.0 - p, p]
                    })
                    .collect()
            } else {
                let k = schema.cardinality(i);
                vec![vec![1.0 / k as f64; k]]
            }
        })
        .collect();
    BayesianNetwork::from_rows(schema, structure, rows).unwrap()
}

/// Two-way roads between Dothan and Atlanta: a western highway corridor
/// through Eufaula, Columbus and LaGrange, an eastern district-road corridor
/// through Albany, Americus and Macon, and a link from Eufaula to Americus.
pub const STORM_ROADS: [(&str, &str, &str, &str); 9] = [
    ("w1", "Dothan", "Eufaula", "highway"),
    ("w2", "Eufaula", "Columbus", "highway"),
    ("w3", "Columbus", "LaGrange", "highway"),
    ("w4", "LaGrange", "Atlanta", "highway"),
    ("e1", "Dothan", "Albany", "district_or_province"),
    ("e2", "Albany", "Americus", "district_or_province"),
    ("e3", "Americus", "Macon", "district_or_province"),
    ("e4", "Macon", "Atlanta", "district_or_province"),
    ("x1", "Eufaula", "Americus", "district_or_province"),
];

pub fn storm_graph() -> RoadGraph {
    let nodes = [
        "Dothan", "Eufaula", "Columbus", "LaGrange", "Albany", "Americus", "Macon", "Atlanta",
    ]
    .map(String::from)
    .to_vec();
    let edges = STORM_ROADS
        .iter()
        .flat_map(|&(id, a, b, tr)| {
            RoadEdge::two_way(
                id,
                a,
                b,
                BTreeMap::from([("TR".to_string(), tr.to_string())]),
            )
        })
        .collect();
    RoadGraph::new(nodes, edges).unwrap()
}

/// Weather per road for each hour from 08:00 to 19:00. A storm cell enters
/// the western corridor at 13:00, drifts east from 15:00 and leaves rain
/// behind it on the west.
fn storm_weather(hour: u32) -> BTreeMap<&'static str, &'static str> {
    let mut weather: BTreeMap<&str, &str> =
        STORM_ROADS.iter().map(|&(id, ..)| (id, "normal")).collect();
    let mut set = |ids: &[&'static str], wc: &'static str| {
        for id in ids {
            weather.insert(id, wc);
        }
    };
    match hour {
        8..=10 => set(&["e1", "e2"], "fog"),
        11 | 12 => {}
        13 => set(&["w2", "w3"], "hail"),
        14 => set(&["w2", "w3", "w4", "x1"], "hail"),
        15 => {
            set(&["w3", "w4"], "rain");
            set(&["x1", "e2", "e3"], "hail");
        }
        16 => {
            set(&["w2", "w3"], "rain");
            set(&["e2", "e3", "e4"], "hail");
        }
        _ => {
            set(&["w3"], "rain");
            set(&["e3", "e4"], "rain");
        }
    }
    weather
}

fn light(hour: u32) -> &'static str {
    match hour {
        19.. => "twilight",
        _ => "daylight",
    }
}

/// Twelve hourly snapshots, 08:00 to 19:00 local time on 2016-06-26. Both
/// directions of a road share its weather and light.
pub fn storm_snapshots() -> Vec<SnapshotDocument> {
    (8..20)
        .map(|hour| {
            let weather = storm_weather(hour);
            let mut edges = BTreeMap::new();
            for (id, wc) in weather {
                let labels = BTreeMap::from([
                    ("WC".to_string(), wc.to_string()),
                    ("LC".to_string(), light(hour).to_string()),
                ]);
                edges.insert(id.to_string(), labels.clone());
                edges.insert(format!("{id}'"), labels);
            }
            SnapshotDocument {
                time: format!("2016-06-26T{hour:02}:00:00-05:00"),
                edges,
            }
        })
        .collect()
}
