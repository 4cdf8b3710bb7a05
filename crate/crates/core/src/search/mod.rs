//! Stochastic graph search around penalized-likelihood solution paths.
//!
//! Candidate graphs come from thresholding the modified Cholesky factor of a
//! ridge-regularized precision estimate (on the full data and on
//! cross-validation subsamples), from baseline solution paths, and from local
//! search: shotgun stochastic search and greedy hill climbing. The posterior
//! mode over the resulting pool is the estimate.

mod moves;
mod pipeline;
mod pool;

pub use moves::{random_absent_edge, random_present_edge, sample_toggles, toggled_score};
pub use pipeline::{bayes_search, SearchConfig, SearchOutcome};
pub use pool::{compare_candidates, select_best, CandidatePool, PoolEntry, Provenance};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::dag::{modified_cholesky, support_dag, Dag};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::rng;
use crate::wishart::{DataStats, Scorer};

pub const DEFAULT_RIDGE: f64 = 0.5;
pub const DEFAULT_THRESHOLD_COUNT: usize = 300;
pub const DEFAULT_HILL_CLIMB_ROUNDS: usize = 20;
pub const DEFAULT_SSS_WIDTH: usize = 50;
pub const DEFAULT_SSS_ITERS: usize = 10;
pub const DEFAULT_CV_FOLDS: usize = 10;

/// Type-7 empirical quantile of sorted data.
fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Graphs obtained by thresholding `L` from `(S + ridge·I)⁻¹ = L D⁻¹ Lᵀ` at
/// `count` evenly spaced quantiles `k/(count+1)` of the nonzero `|L_ij|`.
/// Deduplicated and ordered from dense to sparse.
pub fn threshold_path(s: &SymMatrix, ridge: f64, count: usize) -> Result<Vec<Dag>> {
    if !(ridge > 0.0) {
        return Err(Error::InvalidConfig(format!("ridge = {ridge} must be positive")));
    }
    let omega = s.add_diagonal(ridge).inverse()?;
    let l = modified_cholesky(&omega)?.l;
    Ok(threshold_factor(&l, count))
}

pub(crate) fn threshold_factor(l: &DMatrix<f64>, count: usize) -> Vec<Dag> {
    let p = l.nrows();
    let mut values: Vec<f64> = (0..p)
        .flat_map(|j| ((j + 1)..p).map(move |i| (i, j)))
        .map(|(i, j)| l[(i, j)].abs())
        .filter(|v| *v != 0.0)
        .collect();
    if values.is_empty() {
        return vec![Dag::empty(p)];
    }
    values.sort_by(f64::total_cmp);
    let mut out: Vec<Dag> = Vec::new();
    for k in 1..=count {
        let tau = quantile_sorted(&values, k as f64 / (count + 1) as f64);
        let d = support_dag(l, tau);
        if out.last() != Some(&d) {
            out.push(d);
        }
    }
    out
}

/// Threshold paths on `folds` leave-one-fold-out subsamples of `y`, pooled.
/// Rows are randomly partitioned into folds of (nearly) equal size.
pub fn cv_candidates<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    folds: usize,
    count: usize,
    ridge: f64,
    rng: &mut R,
) -> Result<CandidatePool> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    let n = y.nrows();
    if n < folds {
        return Err(Error::TooFewRows { rows: n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut fold_of = vec![0usize; n];
    for (pos, &row) in order.iter().enumerate() {
        fold_of[row] = pos % folds;
    }
    let paths: Vec<Result<Vec<Dag>>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let kept: Vec<usize> = (0..n).filter(|&r| fold_of[r] != f).collect();
            let sub = y.select_rows(kept.iter());
            threshold_path(&DataStats::from_data(&sub).s, ridge, count)
        })
        .collect();
    let mut pool = CandidatePool::new();
    for path in paths {
        pool.extend(path?, Provenance::Cv);
    }
    Ok(pool)
}

/// Greedy hill climbing: each round proposes one uniformly random edge
/// addition, then one uniformly random deletion, each accepted only on a
/// strict score increase. Returns the final graph and its score.
pub fn hill_climb<S: Scorer + ?Sized, R: Rng + ?Sized>(
    start: &Dag,
    scorer: &S,
    rounds: usize,
    rng: &mut R,
) -> Result<(Dag, f64)> {
    let score = scorer.score(start)?;
    hill_climb_from(start.clone(), score, scorer, rounds, rng)
}

pub(crate) fn hill_climb_from<S: Scorer + ?Sized, R: Rng + ?Sized>(
    mut current: Dag,
    mut score: f64,
    scorer: &S,
    rounds: usize,
    rng: &mut R,
) -> Result<(Dag, f64)> {
    for _ in 0..rounds {
        if let Some(e) = random_absent_edge(&current, rng) {
            let (next, s) = toggled_score(scorer, &current, score, e)?;
            if s > score {
                current = next;
                score = s;
            }
        }
        if let Some(e) = random_present_edge(&current, rng) {
            let (next, s) = toggled_score(scorer, &current, score, e)?;
            if s > score {
                current = next;
                score = s;
            }
        }
    }
    Ok((current, score))
}

/// Shotgun stochastic search. Every seed starts a trajectory; at each of
/// `iters` steps up to `width` uniformly chosen single-edge toggles of the
/// current graph are scored and the trajectory moves to the best of them.
/// The returned pool holds the seeds plus every scored neighbor.
pub fn shotgun_search<S: Scorer + ?Sized, R: Rng + ?Sized>(
    seeds: &CandidatePool,
    scorer: &S,
    width: usize,
    iters: usize,
    rng: &mut R,
) -> Result<CandidatePool> {
    if seeds.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut pool = seeds.clone();
    if iters == 0 || width == 0 {
        return Ok(pool);
    }
    pool.score_all(scorer)?;
    let base_seed: u64 = rng.random();
    let starts: Vec<(Dag, f64)> = pool
        .entries()
        .iter()
        .map(|e| (e.dag.clone(), e.score.unwrap()))
        .collect();
    let trajectories: Vec<Result<Vec<(Dag, f64)>>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, (start, start_score))| {
            let mut r = rng::stream(base_seed, k as u64);
            let mut visited = Vec::new();
            let (mut cur, mut cur_score) = (start, start_score);
            for _ in 0..iters {
                let mut best: Option<(Dag, f64)> = None;
                for e in sample_toggles(cur.p(), width, &mut r) {
                    let (nb, s) = toggled_score(scorer, &cur, cur_score, e)?;
                    let better = match &best {
                        None => true,
                        Some((bd, bs)) => compare_candidates((&nb, s), (bd, *bs)).is_lt(),
                    };
                    visited.push((nb.clone(), s));
                    if better {
                        best = Some((nb, s));
                    }
                }
                match best {
                    Some((d, s)) => {
                        cur = d;
                        cur_score = s;
                    }
                    None => break,
                }
            }
            Ok(visited)
        })
        .collect();
    for t in trajectories {
        for (d, s) in t? {
            pool.insert_scored(d, Some(s), Provenance::Sss);
        }
    }
    Ok(pool)
}
