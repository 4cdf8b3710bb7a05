//! Exact draws from the conjugate DAG-Wishart posterior and the resulting
//! precision-matrix error as the sample size grows.
//!
//! `cargo run --release --example posterior_sampling`

use bayes_dag::prelude::*;
use bayes_dag::rng;

fn main() -> bayes_dag::Result<()> {
    let p = 15;
    let mut r = rng::stream(5, 0);
    let truth = gen_true_model(p, 0.5, 3.0, &mut r)?;
    let hyper = default_hyper(&truth.dag0, 10.0)?;

    for n in [50, 200, 800, 3200] {
        let (_, data) = sample_data(&truth, n, &mut r);
        let mut errors: Vec<f64> = (0..200)
            .map(|_| {
                let draw = sample_posterior(&truth.dag0, &data, &hyper, &mut r)?;
                let diff = compose(&draw).as_matrix() - truth.omega0.as_matrix();
                Ok(SymMatrix::from_lower(diff).spectral_norm())
            })
            .collect::<bayes_dag::Result<_>>()?;
        errors.sort_by(f64::total_cmp);
        println!("n = {n:>5}: median ||Omega - Omega0||_2 = {:.4}", errors[errors.len() / 2]);
    }
    Ok(())
}
