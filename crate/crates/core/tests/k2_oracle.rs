use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saferoute_core::bn::{BayesianNetwork, DagStructure, Dataset, Record, Schema, VariableSpec};
use saferoute_core::learn::{
    count_stats, k2_log_score, k2_search, learn_parameters, network_log_score, DirichletPrior,
    K2Config,
};
use saferoute_testkit::oracle::{bd_factor_ln, k2_factor_ln, tally};
use saferoute_testkit::random_network;

fn binary_schema(n: usize) -> Schema {
    Schema::new(
        (0..n)
            .map(|i| VariableSpec::indexed(format!("X{i}"), 2).unwrap())
            .collect(),
    )
    .unwrap()
}

fn dataset(schema: &Schema, rows: &[Vec<usize>]) -> Dataset {
    Dataset::new(schema.clone(), rows.iter().cloned().map(Record).collect()).unwrap()
}

fn parent_sets(n: usize, child: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&v| v != child).collect();
    (0..1usize << others.len())
        .map(|mask| {
            others
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

fn check_all_families(rows: &[Vec<usize>], n: usize) {
    let schema = binary_schema(n);
    let d = dataset(&schema, rows);
    for child in 0..n {
        for parents in parent_sets(n, child) {
            let got = k2_log_score(&count_stats(&d, child, &parents).unwrap(), 1);
            let want = k2_factor_ln(rows, child, &parents, 2);
            assert!(
                (got - want).abs() < 1e-9,
                "child {child} parents {parents:?}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn k2_matches_factorials_exhaustively_small() {
    // every dataset of up to 4 records over 2 binary variables
    for len in 0..=4usize {
        for code in 0..(1usize << (2 * len)) {
            let rows: Vec<Vec<usize>> = (0..len)
                .map(|r| vec![(code >> (2 * r)) & 1, (code >> (2 * r + 1)) & 1])
                .collect();
            check_all_families(&rows, 2);
        }
    }
}

#[test]
fn k2_matches_factorials_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(1..=3);
        let len = rng.gen_range(0..=12);
        let rows: Vec<Vec<usize>> = (0..len)
            .map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect())
            .collect();
        check_all_families(&rows, n);
    }
}

#[test]
fn general_prior_counts_match_factorials() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let schema = Schema::new(vec![
        VariableSpec::indexed("A", 3).unwrap(),
        VariableSpec::indexed("B", 4).unwrap(),
    ])
    .unwrap();
    for _ in 0..50 {
        let rows: Vec<Vec<usize>> = (0..rng.gen_range(0..40))
            .map(|_| vec![rng.gen_range(0..3), rng.gen_range(0..4)])
            .collect();
        let d = dataset(&schema, &rows);
        for a in 1..=3u32 {
            let got = k2_log_score(&count_stats(&d, 1, &[0]).unwrap(), a);
            let want = bd_factor_ln(&tally(&rows, 1, &[0], 4), 4, a as u64);
            assert!((got - want).abs() < 1e-9);
        }
    }
}

#[test]
fn adding_a_parent_changes_only_that_node() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bn = random_network(&mut rng, 5, 2..=3, 2);
    let d = bn.sample_dataset(300, &mut rng);
    let n = d.schema().len();
    let order = bn.topological_order().to_vec();
    // add an edge from the first to the last node in topological order
    let (from, to) = (order[0], order[n - 1]);
    if bn.structure().parents(to).contains(&from) {
        return;
    }
    let mut parents = bn.structure().parent_sets().to_vec();
    let before = network_log_score(&d, bn.structure(), 1).unwrap();
    let node_before = k2_log_score(&count_stats(&d, to, &parents[to]).unwrap(), 1);
    parents[to].push(from);
    let node_after = k2_log_score(&count_stats(&d, to, &parents[to]).unwrap(), 1);
    let after = network_log_score(&d, &DagStructure::new(parents).unwrap(), 1).unwrap();
    assert!(((after - before) - (node_after - node_before)).abs() < 1e-9);
}

fn chain_sample(n: usize, dependent: bool, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let a = rng.gen_bool(0.5) as usize;
            let p_b = if !dependent {
                0.5
            } else if a == 1 {
                0.9
            } else {
                0.1
            };
            vec![a, rng.gen_bool(p_b) as usize]
        })
        .collect();
    dataset(&binary_schema(2), &rows)
}

fn chain_config() -> K2Config {
    K2Config {
        ordering: vec![0, 1],
        max_parents: 1,
        prior_counts: 1,
    }
}

#[test]
fn strong_dependence_is_found() {
    let d = chain_sample(2000, true, 1);
    let rows: Vec<Vec<usize>> = d.records().iter().map(|r| r.0.clone()).collect();
    // the oracle agrees the edge wins
    assert!(k2_factor_ln(&rows, 1, &[0], 2) > k2_factor_ln(&rows, 1, &[], 2));
    let s = k2_search(&d, &chain_config()).unwrap();
    assert_eq!(s.parent_sets(), [vec![], vec![0]]);
}

#[test]
fn independence_leaves_no_edge() {
    for seed in 0..5 {
        let d = chain_sample(5000, false, 100 + seed);
        let s = k2_search(&d, &chain_config()).unwrap();
        assert_eq!(s, DagStructure::empty(2), "seed {seed}");
    }
}

#[test]
fn duplicating_records_keeps_the_argmax() {
    for (dependent, seed) in [(true, 7), (false, 8)] {
        let d = chain_sample(2000, dependent, seed);
        let mut doubled = d.records().to_vec();
        doubled.extend(d.records().iter().cloned());
        let d2 = Dataset::new(d.schema().clone(), doubled).unwrap();
        assert_eq!(
            k2_search(&d, &chain_config()).unwrap(),
            k2_search(&d2, &chain_config()).unwrap()
        );
    }
}

/// A→B, A→C, B→D, C→D with every CPT entry 0.1 or 0.9.
pub fn diamond() -> BayesianNetwork {
    let hi = vec![0.1, 0.9];
    let lo = vec![0.9, 0.1];
    BayesianNetwork::from_rows(
        binary_schema(4),
        DagStructure::new(vec![vec![], vec![0], vec![0], vec![1, 2]]).unwrap(),
        vec![
            vec![lo.clone()],
            vec![lo.clone(), hi.clone()],
            vec![hi.clone(), lo.clone()],
            vec![lo.clone(), hi.clone(), hi.clone(), lo.clone()],
        ],
    )
    .unwrap()
}

#[test]
fn diamond_structure_is_recovered() {
    let truth = diamond();
    let d = truth.sample_dataset(5000, &mut ChaCha8Rng::seed_from_u64(2024));
    let config = K2Config {
        ordering: vec![0, 1, 2, 3],
        max_parents: 2,
        prior_counts: 1,
    };
    assert_eq!(k2_search(&d, &config).unwrap(), *truth.structure());
}

#[test]
fn search_respects_ordering_and_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let truth = random_network(&mut rng, 6, 2..=3, 3);
    let d = truth.sample_dataset(2000, &mut rng);
    let n = d.schema().len();
    let mut ordering: Vec<usize> = (0..n).rev().collect();
    ordering.rotate_left(1);
    for cap in 0..n {
        let config = K2Config {
            ordering: ordering.clone(),
            max_parents: cap,
            prior_counts: 1,
        };
        let s = k2_search(&d, &config).unwrap();
        for (pos, &node) in ordering.iter().enumerate() {
            assert!(s.parents(node).len() <= cap);
            assert!(s.parents(node).iter().all(|p| ordering[..pos].contains(p)));
        }
    }
}

#[test]
fn learned_cpts_always_normalize() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for size in [0, 1, 5, 200] {
        let truth = random_network(&mut rng, 6, 2..=4, 3);
        let d = truth.sample_dataset(size, &mut rng);
        let bn = learn_parameters(&d, truth.structure(), &DirichletPrior::default()).unwrap();
        for cpt in bn.cpts() {
            for row in cpt.rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
            }
        }
    }
}
