//! Monte Carlo scores under the non-local prior, which penalizes small
//! coefficients, next to the exact DAG-Wishart scores.
//!
//! `cargo run --release --example nonlocal`

use bayes_dag::prelude::*;
use bayes_dag::rng;
use bayes_dag::wishart::{nonlocal_mc_score, NonLocalConfig};

fn main() -> bayes_dag::Result<()> {
    let (p, n) = (6, 300);
    let mut r = rng::stream(9, 0);
    let truth = gen_true_model(p, 0.5, 3.0, &mut r)?;
    let (_, data) = sample_data(&truth, n, &mut r);
    let prior = PriorSpec::default_for(p);
    let scorer = BayesScorer::new(&data, prior.clone())?;
    let cfg = NonLocalConfig { r: 1, mc_samples: 4000 };

    let sub = perturb(&truth.dag0, PerturbCase::SubHalf, &mut r)?;
    let sup = perturb(&truth.dag0, PerturbCase::SuperDouble, &mut r)
        .unwrap_or_else(|_| Dag::complete(p));
    for (name, d) in [("truth", &truth.dag0), ("subgraph", &sub), ("supergraph", &sup)] {
        let nl = nonlocal_mc_score(d, &data, &cfg, prior.q, &mut r)?;
        println!(
            "{name:>10} ({:>2} edges): local {:>10.3}  non-local {:>10.3} +/- {:.3}",
            d.edge_count(),
            scorer.score(d)?,
            nl.estimate,
            nl.std_error
        );
    }
    Ok(())
}
