//! Posterior-mode search: threshold and cross-validation candidate pools,
//! shotgun stochastic search and hill climbing.
//!
//! `cargo run --release --example graph_search`

use bayes_dag::baselines::structure_metrics;
use bayes_dag::prelude::*;
use bayes_dag::rng;
use bayes_dag::search::{bayes_search, SearchConfig};

fn main() -> bayes_dag::Result<()> {
    let (p, n) = (30, 60);
    let mut r = rng::stream(8, 0);
    let truth = gen_true_model(p, 0.5, 3.0, &mut r)?;
    let (y, data) = sample_data(&truth, n, &mut r);
    let scorer = BayesScorer::new(&data, PriorSpec::default_for(p))?;

    let (outcome, pool) = bayes_search(&data, Some(&y), &[], &scorer, &SearchConfig::default(), &mut r)?;
    println!("pool of {} graphs: {:?}", pool.len(), outcome.provenance_counts);
    println!("true graph score     {:.3}", scorer.score(&truth.dag0)?);
    println!("selected graph score {:.3} ({} edges)", outcome.score, outcome.dag.edge_count());
    let m = structure_metrics(&outcome.dag, &truth.dag0)?;
    println!("ppv {:?} tpr {:?} fpr {:?}", m.ppv, m.tpr, m.fpr);
    Ok(())
}
