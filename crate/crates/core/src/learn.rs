//! Structure and parameter learning from complete categorical data.
//!
//! Structure search is the classical K2 greedy loop over a fixed variable
//! ordering, scored with the Bayesian Dirichlet metric whose prior counts are
//! all equal (all ones gives the K2 metric). The structure prior is uniform,
//! so it contributes the same constant to every candidate and is omitted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bn::{validate_dag, BayesianNetwork, BnError, Cpt, DagStructure, Dataset};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error(transparent)]
    Bn(#[from] BnError),
    #[error("invalid K2 configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid Dirichlet prior: {0}")]
    InvalidPrior(String),
}

/// Counts `N_ijk` of one node against one parent set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStats {
    variable: usize,
    parent_set: Vec<usize>,
    parent_cards: Vec<usize>,
    cardinality: usize,
    counts: Vec<u64>,
    row_totals: Vec<u64>,
}

impl SufficientStats {
    pub fn variable(&self) -> usize {
        self.variable
    }

    pub fn parent_set(&self) -> &[usize] {
        &self.parent_set
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    /// q_i
    pub fn parent_configs(&self) -> usize {
        self.row_totals.len()
    }

    /// `N_ijk` for row `j`.
    pub fn row(&self, config: usize) -> &[u64] {
        &self.counts[config * self.cardinality..(config + 1) * self.cardinality]
    }

    /// `N_ij`
    pub fn row_total(&self, config: usize) -> u64 {
        self.row_totals[config]
    }

    pub fn total(&self) -> u64 {
        self.row_totals.iter().sum()
    }
}

/// Tallies `N_ijk` in a single pass. The parent set is sorted so that rows
/// follow the network's parent-configuration ranking.
pub fn count_stats(
    dataset: &Dataset,
    variable: usize,
    parent_set: &[usize],
) -> Result<SufficientStats, LearnError> {
    let schema = dataset.schema();
    let n = schema.len();
    if variable >= n {
        return Err(BnError::SchemaMismatch(format!("variable {variable} out of range")).into());
    }
    let mut parents = parent_set.to_vec();
    parents.sort_unstable();
    if parents.windows(2).any(|w| w[0] == w[1]) {
        return Err(BnError::SchemaMismatch("duplicate index in parent set".into()).into());
    }
    if let Some(&p) = parents.iter().find(|&&p| p >= n || p == variable) {
        return Err(BnError::SchemaMismatch(format!(
            "parent {p} is invalid for variable {variable}"
        ))
        .into());
    }
    let parent_cards: Vec<usize> = parents.iter().map(|&p| schema.cardinality(p)).collect();
    let cardinality = schema.cardinality(variable);
    let configs: usize = parent_cards.iter().product();
    let mut counts = vec![0u64; configs * cardinality];
    for record in dataset.records() {
        let values = record.values();
        let config = parents
            .iter()
            .zip(&parent_cards)
            .fold(0, |rank, (&p, &card)| rank * card + values[p]);
        counts[config * cardinality + values[variable]] += 1;
    }
    let row_totals = counts
        .chunks(cardinality)
        .map(|row| row.iter().sum())
        .collect();
    Ok(SufficientStats {
        variable,
        parent_set: parents,
        parent_cards,
        cardinality,
        counts,
        row_totals,
    })
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Log of one node's factor of the Bayesian Dirichlet metric with every
/// prior count `N'_ijk` equal to `prior_counts` (1 gives the K2 metric):
///
/// `Σ_j [lnΓ(N'_ij) − lnΓ(N'_ij + N_ij) + Σ_k (lnΓ(N'_ijk + N_ijk) − lnΓ(N'_ijk))]`
pub fn k2_log_score(stats: &SufficientStats, prior_counts: u32) -> f64 {
    let cell_prior = f64::from(prior_counts);
    let row_prior = cell_prior * stats.cardinality as f64;
    let ln_gamma_cell_prior = ln_gamma(cell_prior);
    let ln_gamma_row_prior = ln_gamma(row_prior);
    let mut score = 0.0;
    for j in 0..stats.parent_configs() {
        let total = stats.row_total(j);
        if total == 0 {
            continue;
        }
        score += ln_gamma_row_prior - ln_gamma(row_prior + total as f64);
        for &count in stats.row(j) {
            if count > 0 {
                score += ln_gamma(cell_prior + count as f64) - ln_gamma_cell_prior;
            }
        }
    }
    score
}

/// Per-node log scores of `structure`; their sum is the network log score up
/// to the constant structure prior.
pub fn node_log_scores(
    dataset: &Dataset,
    structure: &DagStructure,
    prior_counts: u32,
) -> Result<Vec<f64>, LearnError> {
    if structure.len() != dataset.schema().len() {
        return Err(BnError::SchemaMismatch("structure size differs from schema".into()).into());
    }
    (0..structure.len())
        .map(|i| {
            Ok(k2_log_score(
                &count_stats(dataset, i, structure.parents(i))?,
                prior_counts,
            ))
        })
        .collect()
}

pub fn network_log_score(
    dataset: &Dataset,
    structure: &DagStructure,
    prior_counts: u32,
) -> Result<f64, LearnError> {
    Ok(node_log_scores(dataset, structure, prior_counts)?
        .iter()
        .sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct K2Config {
    /// Variable indices; each node may only take parents that precede it.
    pub ordering: Vec<usize>,
    pub max_parents: usize,
    /// `N'_ijk`, the same positive integer for every cell.
    pub prior_counts: u32,
}

impl K2Config {
    pub const DEFAULT_MAX_PARENTS: usize = 3;

    /// Schema order, at most three parents, K2 prior counts.
    pub fn for_variables(n: usize) -> Self {
        K2Config {
            ordering: (0..n).collect(),
            max_parents: Self::DEFAULT_MAX_PARENTS.min(n.saturating_sub(1)),
            prior_counts: 1,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), LearnError> {
        let mut seen = vec![false; n];
        if self.ordering.len() != n {
            return Err(LearnError::InvalidConfig(format!(
                "ordering has {} entries for {n} variables",
                self.ordering.len()
            )));
        }
        for &v in &self.ordering {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(LearnError::InvalidConfig(format!(
                    "ordering is not a permutation (entry {v})"
                )));
            }
        }
        if n > 0 && self.max_parents > n - 1 {
            return Err(LearnError::InvalidConfig(format!(
                "max_parents {} exceeds {} for {n} variables",
                self.max_parents,
                n - 1
            )));
        }
        if self.prior_counts == 0 {
            return Err(LearnError::InvalidConfig(
                "prior_counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Greedy K2 search. Candidates for each node are scored in parallel; the
/// winner is the highest score, ties going to the lowest variable index, and
/// it is added only if it strictly improves the node score.
pub fn k2_search(dataset: &Dataset, config: &K2Config) -> Result<DagStructure, LearnError> {
    let n = dataset.schema().len();
    config.validate(n)?;
    let mut parents = vec![Vec::new(); n];
    for (position, &node) in config.ordering.iter().enumerate() {
        let mut predecessors = config.ordering[..position].to_vec();
        predecessors.sort_unstable();
        let mut chosen: Vec<usize> = Vec::new();
        let mut current = k2_log_score(&count_stats(dataset, node, &chosen)?, config.prior_counts);
        while chosen.len() < config.max_parents {
            let candidates: Vec<usize> = predecessors
                .iter()
                .copied()
                .filter(|c| !chosen.contains(c))
                .collect();
            if candidates.is_empty() {
                break;
            }
            let scored = candidates
                .par_iter()
                .map(|&c| {
                    let mut trial = chosen.clone();
                    trial.push(c);
                    count_stats(dataset, node, &trial)
                        .map(|s| (c, k2_log_score(&s, config.prior_counts)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut best: Option<(usize, f64)> = None;
            for (c, score) in scored {
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((c, score));
                }
            }
            match best {
                Some((c, score)) if score > current => {
                    chosen.push(c);
                    current = score;
                }
                _ => break,
            }
        }
        chosen.sort_unstable();
        parents[node] = chosen;
    }
    Ok(DagStructure::new(parents)?)
}

/// Dirichlet hyperparameters `α_ijk`, either one value for every cell or an
/// explicit table per variable laid out like the CPT (row-major, `q_i · r_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPrior {
    alpha: PriorAlpha,
}

#[derive(Debug, Clone, PartialEq)]
enum PriorAlpha {
    Uniform(f64),
    PerCell(Vec<Vec<f64>>),
}

impl Default for DirichletPrior {
    fn default() -> Self {
        DirichletPrior {
            alpha: PriorAlpha::Uniform(1.0),
        }
    }
}

impl DirichletPrior {
    pub fn uniform(alpha: f64) -> Result<Self, LearnError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(LearnError::InvalidPrior(format!(
                "alpha {alpha} is not positive"
            )));
        }
        Ok(DirichletPrior {
            alpha: PriorAlpha::Uniform(alpha),
        })
    }

    pub fn per_cell(tables: Vec<Vec<f64>>) -> Result<Self, LearnError> {
        if let Some(bad) = tables
            .iter()
            .flatten()
            .find(|a| !(**a > 0.0 && a.is_finite()))
        {
            return Err(LearnError::InvalidPrior(format!(
                "alpha {bad} is not positive"
            )));
        }
        Ok(DirichletPrior {
            alpha: PriorAlpha::PerCell(tables),
        })
    }

    fn row(&self, variable: usize, config: usize, cardinality: usize) -> Vec<f64> {
        match &self.alpha {
            PriorAlpha::Uniform(a) => vec![*a; cardinality],
            PriorAlpha::PerCell(tables) => {
                tables[variable][config * cardinality..(config + 1) * cardinality].to_vec()
            }
        }
    }

    fn check_shape(&self, variable: usize, cells: usize) -> Result<(), LearnError> {
        match &self.alpha {
            PriorAlpha::Uniform(_) => Ok(()),
            PriorAlpha::PerCell(tables) => match tables.get(variable) {
                Some(t) if t.len() == cells => Ok(()),
                Some(t) => Err(LearnError::InvalidPrior(format!(
                    "variable {variable} needs {cells} hyperparameters, got {}",
                    t.len()
                ))),
                None => Err(LearnError::InvalidPrior(format!(
                    "no hyperparameters for variable {variable}"
                ))),
            },
        }
    }
}

/// Posterior-mean CPTs: `θ_ijk = (α_ijk + N_ijk) / (α_ij + N_ij)`.
pub fn learn_parameters(
    dataset: &Dataset,
    structure: &DagStructure,
    prior: &DirichletPrior,
) -> Result<BayesianNetwork, LearnError> {
    let schema = dataset.schema();
    if structure.len() != schema.len() {
        return Err(BnError::SchemaMismatch(format!(
            "structure has {} nodes, schema has {} variables",
            structure.len(),
            schema.len()
        ))
        .into());
    }
    validate_dag(structure)?;
    let mut cpts = Vec::with_capacity(schema.len());
    for i in 0..schema.len() {
        let stats = count_stats(dataset, i, structure.parents(i))?;
        let r = stats.cardinality();
        prior.check_shape(i, stats.parent_configs() * r)?;
        let rows = (0..stats.parent_configs())
            .map(|j| {
                let alpha = prior.row(i, j, r);
                let denominator = alpha.iter().sum::<f64>() + stats.row_total(j) as f64;
                alpha
                    .iter()
                    .zip(stats.row(j))
                    .map(|(a, &count)| (a + count as f64) / denominator)
                    .collect()
            })
            .collect();
        cpts.push(Cpt::new(
            i,
            stats.parent_set().to_vec(),
            stats.parent_cards.clone(),
            r,
            rows,
        )?);
    }
    Ok(BayesianNetwork::new(
        schema.clone(),
        structure.clone(),
        cpts,
    )?)
}

/// Record of a structure-learning run, written beside the learned network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnManifest {
    pub ordering: Vec<String>,
    pub max_parents: usize,
    pub prior_counts: u32,
    pub dataset_hash: String,
    pub records: usize,
    pub node_log_scores: Vec<NodeScore>,
    pub total_log_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScore {
    pub variable: String,
    pub parents: Vec<String>,
    pub log_score: f64,
}

impl LearnManifest {
    pub fn new(
        dataset: &Dataset,
        config: &K2Config,
        structure: &DagStructure,
    ) -> Result<Self, LearnError> {
        let schema = dataset.schema();
        let name = |i: usize| schema.variable(i).name().to_string();
        let scores = node_log_scores(dataset, structure, config.prior_counts)?;
        Ok(LearnManifest {
            ordering: config.ordering.iter().map(|&i| name(i)).collect(),
            max_parents: config.max_parents,
            prior_counts: config.prior_counts,
            dataset_hash: dataset.fingerprint(),
            records: dataset.len(),
            total_log_score: scores.iter().sum(),
            node_log_scores: scores
                .into_iter()
                .enumerate()
                .map(|(i, log_score)| NodeScore {
                    variable: name(i),
                    parents: structure.parents(i).iter().map(|&p| name(p)).collect(),
                    log_score,
                })
                .collect(),
        })
    }
}
