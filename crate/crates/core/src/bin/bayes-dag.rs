//! Command-line front end. Exit status: 0 on success, 2 on configuration or
//! input errors, 3 on numerical failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use bayes_dag::baselines::{self, GridSpec, Method, SolverOptions};
use bayes_dag::dag::Dag;
use bayes_dag::experiments::{
    self, read_data_csv, with_threads, write_data_csv, ExperimentConfig, HyperConfig, ModelFile,
};
use bayes_dag::rng;
use bayes_dag::search::{bayes_search, SearchConfig};
use bayes_dag::synth::{gen_true_model, sample_data, GeneratorInfo};
use bayes_dag::wishart::{
    assumption_diagnostics, log_prior_dag, nonlocal_mc_score, AsymptoticConfig, BayesScorer, DataStats,
    NonLocalConfig, Scorer,
};
use bayes_dag::{Error, Result};

#[derive(Parser)]
#[command(name = "bayes-dag", version, about = "Bayesian structure learning for ordered Gaussian DAGs")]
struct Cli {
    /// Master seed (overrides the seed in an experiment config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMethod {
    LassoDag,
    LassoDagQ,
    Cscs,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a true model and data; writes Y.csv and model.json.
    GenData {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        fill: f64,
        #[arg(long = "max-parents", default_value_t = 3.0)]
        max_parents: f64,
    },
    /// Exact log posterior score of one DAG.
    Score {
        #[arg(long)]
        data: PathBuf,
        /// Hyperparameter JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// DAG JSON `{"p": .., "edges": [[i, j], ..]}`.
        #[arg(long)]
        dag: PathBuf,
        /// Also estimate the non-local score with this many draws per vertex.
        #[arg(long)]
        nonlocal_samples: Option<usize>,
    },
    /// Candidate-pool search for the posterior mode.
    Search {
        #[arg(long)]
        data: PathBuf,
        /// Hyperparameter JSON, optionally with a "search" object.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Maximum number of edges of any candidate.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Penalized-likelihood baseline.
    Baseline {
        #[arg(long, value_enum)]
        method: BaselineMethod,
        #[arg(long)]
        data: PathBuf,
        /// `auto` or a JSON file holding an array of penalties.
        #[arg(long, default_value = "auto")]
        grid: String,
    },
    /// Log posterior ratios of perturbed graphs against the truth.
    SimRatio {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Baselines against the Bayesian search on simulated data.
    SimSelection {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Exact posterior over all DAGs on a few vertices.
    EnumStudy {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Finite-sample report on the regularity assumptions.
    DiagnoseAssumptions {
        /// Model JSON written by gen-data.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        /// JSON `{"hyper": {..}, "asymptotic": {..}}`.
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_config(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn from_value<T: for<'de> Deserialize<'de>>(v: serde_json::Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Hyperparameters plus an optional `"search"` object.
fn hyper_and_search(path: Option<&Path>) -> Result<(HyperConfig, SearchConfig)> {
    let Some(path) = path else {
        return Ok((HyperConfig::default(), SearchConfig::default()));
    };
    let mut v = read_config(path)?;
    let search = match v.as_object_mut().and_then(|m| m.remove("search")) {
        Some(s) => from_value(s)?,
        None => SearchConfig::default(),
    };
    Ok((from_value(v)?, search))
}

fn experiment_config(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn load_data(path: &Path) -> Result<(nalgebra::DMatrix<f64>, DataStats)> {
    let y = read_data_csv(path)?;
    let stats = DataStats::from_data(&y);
    Ok((y, stats))
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out;
    match cli.command {
        Command::GenData { p, n, fill, max_parents } => {
            let mut r = rng::stream(seed, 0);
            let model = gen_true_model(p, fill, max_parents, &mut r)?;
            let (y, _) = sample_data(&model, n, &mut r);
            fs::create_dir_all(&out)?;
            write_data_csv(&out.join("Y.csv"), &y)?;
            ModelFile::from_model(&model, Some(GeneratorInfo::new(p, n, seed, fill, max_parents)))
                .save(&out.join("model.json"))?;
            println!("wrote {} and {}", out.join("Y.csv").display(), out.join("model.json").display());
        }
        Command::Score {
            data,
            config,
            dag,
            nonlocal_samples,
        } => {
            let (_, stats) = load_data(&data)?;
            let (hyper, _) = hyper_and_search(config.as_deref())?;
            let d = Dag::from_json(&fs::read_to_string(&dag)?)?;
            let prior = hyper.prior_for(stats.p())?;
            let q = prior.q;
            let score = BayesScorer::new(&stats, prior)?.score(&d)?;
            let mut result = json!({
                "dag": d,
                "n": stats.n,
                "log_score": score,
                "log_prior": log_prior_dag(&d, q),
            });
            if let Some(samples) = nonlocal_samples {
                let cfg = NonLocalConfig {
                    r: hyper.r,
                    mc_samples: samples,
                };
                let est = nonlocal_mc_score(&d, &stats, &cfg, q, &mut rng::stream(seed, 0))?;
                result["nonlocal"] = serde_json::to_value(est)?;
            }
            write_json(&out, &result)?;
            println!("log score {score}");
        }
        Command::Search { data, config, budget } => {
            let (y, stats) = load_data(&data)?;
            let (hyper, mut search) = hyper_and_search(config.as_deref())?;
            if budget.is_some() {
                search.max_edges = budget;
            }
            let scorer = BayesScorer::new(&stats, hyper.prior_for(stats.p())?)?;
            let (outcome, _) = with_threads(cli.threads, || {
                bayes_search(&stats, Some(&y), &[], &scorer, &search, &mut rng::stream(seed, 0))
            })??;
            write_json(
                &out,
                &json!({
                    "dag": outcome.dag,
                    "score": outcome.score,
                    "pool_size": outcome.pool_size,
                    "provenance_counts": outcome.provenance_counts,
                    "seed": seed,
                    "version": experiments::crate_version(),
                }),
            )?;
            println!("selected {} edges, log score {}", outcome.dag.edge_count(), outcome.score);
        }
        Command::Baseline { method, data, grid } => {
            let (_, stats) = load_data(&data)?;
            let opts = SolverOptions::default();
            let grid_spec = if grid == "auto" {
                GridSpec::geometric_default()
            } else {
                GridSpec::Explicit(from_value(read_config(Path::new(&grid))?)?)
            };
            let result = match method {
                BaselineMethod::LassoDagQ => {
                    let (fit, d) = baselines::lasso_dag_quantile(
                        &stats.s,
                        stats.n,
                        baselines::DEFAULT_QUANTILE_ALPHA,
                        &opts,
                    )?;
                    json!({"method": "lasso-dag-q", "dag": d, "sweeps": fit.sweeps, "residual": fit.residual})
                }
                BaselineMethod::LassoDag | BaselineMethod::Cscs => {
                    let m = if matches!(method, BaselineMethod::Cscs) { Method::Cscs } else { Method::LassoDag };
                    let (path, best) = with_threads(cli.threads, || {
                        baselines::path_fit_and_select(m, &stats.s, stats.n, &grid_spec, &opts)
                    })??;
                    let points: Vec<_> = path
                        .points
                        .iter()
                        .map(|pt| json!({"lambda": pt.lambda, "bic": pt.bic, "edges": pt.dag.edge_count(), "dag": pt.dag}))
                        .collect();
                    json!({"method": m.label(), "dag": best, "path": points})
                }
            };
            write_json(&out, &result)?;
            println!("wrote {}", out.display());
        }
        Command::SimRatio { config } => {
            let cfg = experiment_config(config.as_deref(), cli.seed)?;
            let table = with_threads(cli.threads, || experiments::run_sim_ratio(&cfg))??;
            report(experiments::write_study(&table, &out, true)?);
        }
        Command::SimSelection { config } => {
            let cfg = experiment_config(config.as_deref(), cli.seed)?;
            let table = with_threads(cli.threads, || experiments::run_sim_selection(&cfg))??;
            report(experiments::write_study(&table, &out, true)?);
        }
        Command::EnumStudy { config } => {
            let cfg = experiment_config(config.as_deref(), cli.seed)?;
            let table = with_threads(cli.threads, || experiments::exact_enumeration_study(&cfg))??;
            report(experiments::write_study(&table, &out, true)?);
        }
        Command::DiagnoseAssumptions { model, n, config } => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct DiagConfig {
                #[serde(default)]
                hyper: HyperConfig,
                asymptotic: AsymptoticConfig,
            }
            let cfg: DiagConfig = from_value(read_config(&config)?)?;
            let m = ModelFile::load(&model)?.to_model()?;
            let hyper = cfg.hyper.prior_for(m.p())?.hyper_for(&m.dag0);
            let report = assumption_diagnostics(&m.omega0, &m.dag0, &hyper, &cfg.asymptotic, n, m.p())?;
            write_json(&out, &serde_json::to_value(&report)?)?;
            for c in &report.checks {
                println!("assumption {}: {}", c.id, if c.passed { "pass" } else { "fail" });
            }
        }
    }
    Ok(())
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
