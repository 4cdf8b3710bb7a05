//! Lasso-DAG and CSCS solution paths with BIC selection, plus the
//! quantile-tuned Lasso-DAG.
//!
//! `cargo run --release --example baselines`

use bayes_dag::baselines::{
    lasso_dag_quantile, path_fit_and_select, structure_metrics, GridSpec, Method, SolverOptions,
};
use bayes_dag::prelude::*;
use bayes_dag::rng;

fn main() -> bayes_dag::Result<()> {
    let (p, n) = (30, 100);
    let mut r = rng::stream(4, 0);
    let truth = gen_true_model(p, 0.5, 3.0, &mut r)?;
    let (_, data) = sample_data(&truth, n, &mut r);
    let opts = SolverOptions::default();
    println!("true graph: {} edges", truth.dag0.edge_count());

    for method in [Method::LassoDag, Method::Cscs] {
        let (path, best) = path_fit_and_select(method, &data.s, n, &GridSpec::geometric_default(), &opts)?;
        let bp = path.best().expect("nonempty path");
        let m = structure_metrics(&best, &truth.dag0)?;
        println!(
            "{:>9}: {} path points, BIC pick lambda {:.4} with {} edges, ppv {:?}, tpr {:?}",
            method.label(),
            path.points.len(),
            bp.lambda,
            best.edge_count(),
            m.ppv,
            m.tpr
        );
    }
    let (fit, d) = lasso_dag_quantile(&data.s, n, 0.1, &opts)?;
    let m = structure_metrics(&d, &truth.dag0)?;
    println!(
        "lasso-dag with quantile penalties: {} edges after {} sweeps, ppv {:?}, tpr {:?}",
        d.edge_count(),
        fit.sweeps,
        m.ppv,
        m.tpr
    );
    Ok(())
}
