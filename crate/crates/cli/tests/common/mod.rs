//! Fixture files and a runner for the `saferoute` binary.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use saferoute_core::bn::BayesianNetwork;
use saferoute_core::ingest::{write_dataset, CellFormat};
use saferoute_testkit::scenario::{
    case_study_generator, storm_graph, storm_network, storm_snapshots,
};

pub fn saferoute<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_saferoute"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

pub fn storm_files(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        write(dir, "storm_network.json", &storm_network().to_json()),
        write(dir, "storm_graph.json", &storm_graph().to_json()),
        write(
            dir,
            "storm_snapshots.json",
            &serde_json::to_string_pretty(&storm_snapshots()).unwrap(),
        ),
    )
}

/// `n` records sampled from the seeded case-study generator, as a labelled CSV.
pub fn generated_csv(dir: &Path, name: &str, seed: u64, n: usize) -> (PathBuf, BayesianNetwork) {
    use rand::SeedableRng;
    let generator = case_study_generator(seed);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dataset = generator.sample_dataset(n, &mut rng);
    let path = dir.join(name);
    let file = fs::File::create(&path).unwrap();
    write_dataset(&dataset, std::io::BufWriter::new(file), CellFormat::Label).unwrap();
    (path, generator)
}

pub fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("JSON on stdout")
}
