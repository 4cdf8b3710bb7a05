//! Finite-sample report on the regularity assumptions for a simulated model.
//!
//! `cargo run --example diagnostics`

use bayes_dag::prelude::*;
use bayes_dag::rng;
use bayes_dag::wishart::{assumption_diagnostics, AsymptoticConfig};

fn main() -> bayes_dag::Result<()> {
    let p = 20;
    let truth = gen_true_model(p, 0.5, 3.0, &mut rng::stream(2, 0))?;
    let hyper = default_hyper(&truth.dag0, 10.0)?;
    let ev = truth.omega0.eigenvalues();
    let cfg = AsymptoticConfig {
        k: 1.0,
        epsilon0: ev[0].min(1.0 / ev[ev.len() - 1]),
        d: None,
        s: None,
        eta: None,
        q: 1.0 / p as f64,
        c: 12.0,
        delta1: 1.0,
        delta2: 1.0,
    };
    for n in [100, 10_000, 1_000_000] {
        let report = assumption_diagnostics(&truth.omega0, &truth.dag0, &hyper, &cfg, n, p)?;
        println!("n = {n}");
        for c in &report.checks {
            let q: Vec<String> = c.quantities.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
            println!("  assumption {} {}: {}", c.id, if c.passed { "pass" } else { "FAIL" }, q.join(", "));
        }
    }
    Ok(())
}
