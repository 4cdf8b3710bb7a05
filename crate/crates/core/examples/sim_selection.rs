//! Model-selection comparison: Lasso-DAG (BIC and quantile tuning), CSCS and
//! the Bayesian candidate-pool search, scored by PPV, TPR and FPR.
//!
//! `cargo run --release --example sim_selection -- [p] [n] [replicates]`

use std::time::Instant;

use bayes_dag::experiments::{run_sim_selection, ExperimentConfig, NRule};

fn main() -> bayes_dag::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let p = args.first().copied().unwrap_or(40);
    let n = args.get(1).copied().unwrap_or(30);
    let replicates = args.get(2).copied().unwrap_or(2);

    let cfg = ExperimentConfig {
        seed: 2024,
        p_list: vec![p],
        n_rule: NRule::Fixed(n),
        replicates,
        ..Default::default()
    };
    let start = Instant::now();
    let table = run_sim_selection(&cfg)?;
    let summary = table.summary();
    println!("p={p} n={n} replicates={replicates} ({:.1?})", start.elapsed());
    println!("{:<20} {:>8} {:>8} {:>8} {:>8}", "method", "ppv", "tpr", "fpr", "edges");
    let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.4}"));
    for row in &summary.rows {
        println!(
            "{:<20} {:>8} {:>8} {:>8} {:>8}",
            row.label,
            fmt(summary.get(row, "ppv")),
            fmt(summary.get(row, "tpr")),
            fmt(summary.get(row, "fpr")),
            fmt(summary.get(row, "edges")),
        );
    }
    Ok(())
}
