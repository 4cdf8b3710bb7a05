use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    cv_candidates, hill_climb_from, select_best, shotgun_search, threshold_path, CandidatePool, Provenance,
    DEFAULT_CV_FOLDS, DEFAULT_HILL_CLIMB_ROUNDS, DEFAULT_RIDGE, DEFAULT_SSS_ITERS, DEFAULT_SSS_WIDTH,
    DEFAULT_THRESHOLD_COUNT,
};
use crate::dag::Dag;
use crate::error::Result;
use crate::rng;
use crate::wishart::{DataStats, Scorer};

/// Tunables for [`bayes_search`]. Every field has a JSON default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub ridge: f64,
    pub threshold_count: usize,
    /// Zero disables the cross-validation pool.
    pub cv_folds: usize,
    pub sss_width: usize,
    pub sss_iters: usize,
    /// Number of best-scoring candidates used as shotgun seeds.
    pub sss_seeds: usize,
    pub hill_climb_rounds: usize,
    /// Hill-climb only the best `k` candidates; `None` climbs from every one.
    pub hill_climb_top: Option<usize>,
    /// Reject candidates with more edges than this.
    pub max_edges: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            ridge: DEFAULT_RIDGE,
            threshold_count: DEFAULT_THRESHOLD_COUNT,
            cv_folds: DEFAULT_CV_FOLDS,
            sss_width: DEFAULT_SSS_WIDTH,
            sss_iters: DEFAULT_SSS_ITERS,
            sss_seeds: 20,
            hill_climb_rounds: DEFAULT_HILL_CLIMB_ROUNDS,
            hill_climb_top: None,
            max_edges: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub dag: Dag,
    pub score: f64,
    pub pool_size: usize,
    pub provenance_counts: BTreeMap<String, usize>,
}

/// Full candidate-pool search.
///
/// The pool starts from `seeds` (typically baseline solution paths), adds the
/// threshold path of the full-data covariance and, when `y` is given and
/// `cv_folds > 0`, the cross-validation pool. The best candidates then seed a
/// shotgun search, every candidate (or the best `hill_climb_top`) is hill
/// climbed, and the posterior mode of the final pool is returned.
pub fn bayes_search<S: Scorer + ?Sized, R: Rng + ?Sized>(
    data: &DataStats,
    y: Option<&DMatrix<f64>>,
    seeds: &[Dag],
    scorer: &S,
    cfg: &SearchConfig,
    rng: &mut R,
) -> Result<(SearchOutcome, CandidatePool)> {
    let mut pool = CandidatePool::with_edge_cap(cfg.max_edges);
    pool.extend(seeds.iter().cloned(), Provenance::BaselinePath);
    pool.extend(threshold_path(&data.s, cfg.ridge, cfg.threshold_count)?, Provenance::Threshold);
    if let Some(y) = y.filter(|_| cfg.cv_folds > 0) {
        pool.merge(cv_candidates(y, cfg.cv_folds, cfg.threshold_count, cfg.ridge, rng)?);
    }
    if pool.is_empty() {
        pool.insert(Dag::empty(data.p()), Provenance::Seed);
    }
    pool.score_all(scorer)?;

    let mut sss_seeds = CandidatePool::new();
    for e in pool.ranked().into_iter().take(cfg.sss_seeds) {
        sss_seeds.insert_scored(e.dag.clone(), e.score, e.provenance);
    }
    if !sss_seeds.is_empty() {
        pool.merge(shotgun_search(&sss_seeds, scorer, cfg.sss_width, cfg.sss_iters, rng)?);
    }

    let starts: Vec<(Dag, f64)> = match cfg.hill_climb_top {
        Some(k) => pool.ranked().into_iter().take(k).map(|e| (e.dag.clone(), e.score.unwrap())).collect(),
        None => pool.entries().iter().map(|e| (e.dag.clone(), e.score.unwrap())).collect(),
    };
    let base: u64 = rng.random();
    let climbed: Vec<Result<(Dag, f64)>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, (d, s))| hill_climb_from(d, s, scorer, cfg.hill_climb_rounds, &mut rng::stream(base, k as u64)))
        .collect();
    for c in climbed {
        let (d, s) = c?;
        pool.insert_scored(d, Some(s), Provenance::Hillclimb);
    }

    let (dag, score) = select_best(&mut pool, scorer)?;
    let outcome = SearchOutcome {
        dag,
        score,
        pool_size: pool.len(),
        provenance_counts: pool.provenance_counts(),
    };
    Ok((outcome, pool))
}
