//! Exact DAG-Wishart scores: normalizing constants, per-graph log posterior
//! scores and posterior ratios against the true graph.
//!
//! `cargo run --example scoring`

use bayes_dag::prelude::*;
use bayes_dag::rng;

fn main() -> bayes_dag::Result<()> {
    // Normalizing constant of the full DAG on two vertices with U = I.
    let full = Dag::complete(2);
    let lz = log_norm_const(&full, &SymMatrix::identity(2), &[7.0, 6.0])?;
    println!("log z(full 2-DAG, U=I, alpha=(7,6)) = {lz:.6}");

    let mut r = rng::stream(11, 0);
    let truth = gen_true_model(20, 0.5, 3.0, &mut r)?;
    let (_, data) = sample_data(&truth, 200, &mut r);
    let prior = PriorSpec::default_for(20);
    println!("true graph: {} edges", truth.dag0.edge_count());

    let scorer = BayesScorer::new(&data, prior.clone())?;
    for (name, d) in [
        ("empty", Dag::empty(20)),
        ("truth", truth.dag0.clone()),
        ("complete", Dag::complete(20)),
    ] {
        println!("{name:>9}: log score {:>12.3}", scorer.score(&d)?);
    }

    for case in PerturbCase::ALL {
        let d = perturb(&truth.dag0, case, &mut r)?;
        let ratio = log_posterior_ratio(&d, &truth.dag0, &data, &prior)?;
        println!("{:>12} ({:>2} edges): log ratio vs truth {ratio:>10.3}", case.label(), d.edge_count());
    }
    Ok(())
}
