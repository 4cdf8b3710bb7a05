//! Log posterior ratios of perturbed graphs against the true graph along a
//! `(p, n = p/5)` schedule.
//!
//! `cargo run --release --example sim_ratio`

use bayes_dag::experiments::{run_sim_ratio, ExperimentConfig};

fn main() -> bayes_dag::Result<()> {
    let cfg = ExperimentConfig {
        seed: 1,
        replicates: 3,
        ..Default::default()
    };
    let table = run_sim_ratio(&cfg)?;
    let summary = table.summary();
    println!("{:>4} {:>4} {:>13} {:>14}", "p", "n", "case", "mean log ratio");
    for row in &summary.rows {
        println!(
            "{:>4} {:>4} {:>13} {:>14.2}",
            row.p,
            row.n,
            row.label,
            summary.get(row, "log_ratio").unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
