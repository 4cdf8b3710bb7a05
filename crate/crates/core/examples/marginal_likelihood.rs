//! Closed-form marginal likelihood against an importance-sampling estimate.
//!
//! `cargo run --release --example marginal_likelihood`

use std::f64::consts::PI;

use bayes_dag::prelude::*;
use bayes_dag::rng;
use bayes_dag::wishart::{mc_marginal_loglik, McOptions};

fn main() -> bayes_dag::Result<()> {
    let mut r = rng::stream(1, 0);
    let truth = gen_true_model(3, 0.5, 3.0, &mut r)?;
    let (y, data) = sample_data(&truth, 20, &mut r);
    let d = &truth.dag0;
    let hyper = default_hyper(d, 10.0)?;
    let post = hyper.posterior(&data)?;

    let exact = log_norm_const(d, &post.u, &post.alpha)? - log_norm_const(d, &hyper.u, &hyper.alpha)?
        - (20.0 * 3.0 / 2.0) * (2.0 * PI).ln();
    println!("closed form: {exact:.6}");
    for temper in [1.0, 0.5, 0.2] {
        let est = mc_marginal_loglik(d, &y, &hyper, McOptions { samples: 20_000, temper }, &mut r)?;
        println!(
            "proposal temper {temper}: {:.6} +/- {:.6} (ess {:.0})",
            est.estimate, est.std_error, est.ess
        );
    }
    Ok(())
}
