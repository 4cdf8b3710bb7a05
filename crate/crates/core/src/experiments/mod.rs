//! Simulation studies and file I/O.
//!
//! Every study is a pure function of an [`ExperimentConfig`]: cells
//! `(p, n, replicate)` draw from their own random streams, run in parallel,
//! and are collected in canonical order, so output bytes do not depend on the
//! number of worker threads.
//!
//! Configuration schema (all keys optional):
//!
//! ```json
//! {
//!   "seed": 0,
//!   "p_list": [100, 200, 300],
//!   "n_rule": {"ratio": 0.2},
//!   "replicates": 5,
//!   "fill": 0.5,
//!   "max_expected_parents": 3.0,
//!   "hyper": {"U": "identity", "alpha_offset": 10.0, "q": null, "r": 1},
//!   "search": {"ridge": 0.5, "threshold_count": 300, "cv_folds": 10,
//!              "sss_width": 50, "sss_iters": 10, "sss_seeds": 20,
//!              "hill_climb_rounds": 20, "hill_climb_top": null, "max_edges": null},
//!   "baselines": {"grid": null, "grid_points": 20, "quantile_alpha": 0.1,
//!                 "tol": 1e-6, "max_sweeps": 20000}
//! }
//! ```
//!
//! `n_rule` is one of `{"ratio": r}` (`n = round(r·p)`), `{"fixed": n}` or
//! `{"list": [n1, n2, …]}`. A `null` `q` means `1/p`. A `null` baseline grid
//! brackets the true edge count from a third to three times.

mod io;
mod table;

pub use io::{read_data_csv, write_data_csv, ModelFile};
pub use table::{crate_version, Metadata, ResultTable, Row};

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{
    lasso_dag_quantile, path_fit_and_select, structure_metrics, GridSpec, Method, Metrics, SolverOptions,
    DEFAULT_MAX_SWEEPS, DEFAULT_QUANTILE_ALPHA, DEFAULT_TOLERANCE,
};
use crate::dag::{enumerate_all_dags, perturb, Dag, PerturbCase};
use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, SymMatrix};
use crate::rng;
use crate::search::{bayes_search, select_best, CandidatePool, Provenance, SearchConfig};
use crate::synth::{gen_true_model, sample_data, TrueModel, DEFAULT_FILL, DEFAULT_MAX_EXPECTED_PARENTS};
use crate::wishart::{
    default_edge_probability, log_posterior_ratio, log_prior_dag, BayesScorer, DataStats, PriorSpec, Scorer,
    ShapeRule, DEFAULT_ALPHA_OFFSET,
};

/// Largest `p` accepted by [`exact_enumeration_study`].
pub const MAX_STUDY_P: usize = 5;

/// Scale matrix: the string `"identity"` or a dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleConfig {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

/// DAG-Wishart hyperparameters as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperConfig {
    #[serde(rename = "U")]
    pub u: ScaleConfig,
    pub alpha_offset: f64,
    /// Edge probability; `None` means `1/p`.
    pub q: Option<f64>,
    /// Non-local prior power.
    pub r: u32,
}

impl Default for HyperConfig {
    fn default() -> Self {
        HyperConfig {
            u: ScaleConfig::Named("identity".into()),
            alpha_offset: DEFAULT_ALPHA_OFFSET,
            q: None,
            r: 1,
        }
    }
}

impl HyperConfig {
    pub fn prior_for(&self, p: usize) -> Result<PriorSpec> {
        let u = match &self.u {
            ScaleConfig::Named(s) if s == "identity" => SymMatrix::identity(p),
            ScaleConfig::Named(s) => return Err(Error::InvalidConfig(format!("unknown scale matrix {s:?}"))),
            ScaleConfig::Matrix(rows) => {
                let u = SymMatrix::from_rows(rows)?;
                if u.dim() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: u.dim(),
                    });
                }
                crate::linalg::Cholesky::new(u.as_matrix())?;
                u
            }
        };
        if !(self.alpha_offset > 2.0) {
            return Err(Error::InvalidConfig(format!("alpha_offset = {} must exceed 2", self.alpha_offset)));
        }
        let q = self.q.unwrap_or_else(|| default_edge_probability(p));
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidConfig(format!("q = {q} must lie in (0, 1)")));
        }
        Ok(PriorSpec {
            u,
            shape: ShapeRule::Offset(self.alpha_offset),
            q,
        })
    }

    fn describe_q(&self) -> String {
        self.q.map_or("1/p".to_string(), |q| q.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NRule {
    Ratio(f64),
    Fixed(usize),
    List(Vec<usize>),
}

impl NRule {
    pub fn sizes(&self, p: usize) -> Vec<usize> {
        match self {
            NRule::Ratio(r) => vec![(r * p as f64).round() as usize],
            NRule::Fixed(n) => vec![*n],
            NRule::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Explicit penalty grid; `None` brackets the true edge count.
    pub grid: Option<Vec<f64>>,
    pub grid_points: usize,
    pub quantile_alpha: f64,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            grid: None,
            grid_points: 20,
            quantile_alpha: DEFAULT_QUANTILE_ALPHA,
            tol: DEFAULT_TOLERANCE,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

impl BaselineConfig {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_sweeps: self.max_sweeps,
        }
    }

    pub fn grid_for(&self, true_edges: Option<usize>) -> GridSpec {
        match (&self.grid, true_edges) {
            (Some(g), _) => GridSpec::Explicit(g.clone()),
            (None, Some(e)) => GridSpec::around_truth(e, self.grid_points),
            (None, None) => GridSpec::geometric_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub p_list: Vec<usize>,
    pub n_rule: NRule,
    pub replicates: usize,
    pub fill: f64,
    pub max_expected_parents: f64,
    pub hyper: HyperConfig,
    pub search: SearchConfig,
    pub baselines: BaselineConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            p_list: vec![100, 200, 300],
            n_rule: NRule::Ratio(0.2),
            replicates: 5,
            fill: DEFAULT_FILL,
            max_expected_parents: DEFAULT_MAX_EXPECTED_PARENTS,
            hyper: HyperConfig::default(),
            search: SearchConfig::default(),
            baselines: BaselineConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// All `(p, n)` cells in schedule order. Fails on `p < 2` or `n < 2`.
    pub fn cells(&self) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for &p in &self.p_list {
            if p < 2 {
                return Err(Error::InvalidConfig(format!("p = {p} must be at least 2")));
            }
            for n in self.n_rule.sizes(p) {
                if n < 2 {
                    return Err(Error::InvalidConfig(format!("n = {n} for p = {p} must be at least 2")));
                }
                out.push((p, n));
            }
        }
        Ok(out)
    }

    fn metadata(&self, experiment: &str) -> Metadata {
        Metadata::new(experiment, self.hash(), self.seed)
            .with("q", self.hyper.describe_q())
            .with("alpha_offset", self.hyper.alpha_offset)
            .with("fill", self.fill)
            .with("max_expected_parents", self.max_expected_parents)
            .with("n_rule", serde_json::to_string(&self.n_rule).expect("serializes"))
            .with("replicates", self.replicates)
            .with("rng", "chacha8, one stream per (cell, replicate)")
    }

    /// Generates the true model and data for one replicate of a cell.
    pub fn replicate_data(&self, cell: usize, replicate: usize, p: usize, n: usize) -> Result<Replicate> {
        let mut r = rng::substream(self.seed, cell as u64, replicate as u64);
        let model = gen_true_model(p, self.fill, self.max_expected_parents, &mut r)?;
        let (y, data) = sample_data(&model, n, &mut r);
        Ok(Replicate { model, y, data, rng: r })
    }
}

/// One simulated dataset and the stream that continues after it.
pub struct Replicate {
    pub model: TrueModel,
    pub y: DMatrix<f64>,
    pub data: DataStats,
    pub rng: rng::StreamRng,
}

/// Runs `f` on a dedicated pool of `threads` workers (`None` = rayon default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    let pool = b.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(f))
}

fn jobs(cells: &[(usize, usize)], replicates: usize) -> Vec<(usize, usize, usize, usize)> {
    cells
        .iter()
        .enumerate()
        .flat_map(|(c, &(p, n))| (0..replicates).map(move |k| (c, k, p, n)))
        .collect()
}

pub const RATIO_COLUMNS: [&str; 4] = ["log_ratio", "prior_term", "edges", "true_edges"];

/// Log posterior ratios `log π(D|Y) − log π(D₀|Y)` for the four perturbation
/// cases of the true DAG, per cell and replicate.
pub fn run_sim_ratio(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let cells = cfg.cells()?;
    let rows: Vec<Result<Vec<Row>>> = jobs(&cells, cfg.replicates)
        .into_par_iter()
        .map(|(c, k, p, n)| {
            let mut rep = cfg.replicate_data(c, k, p, n)?;
            let prior = cfg.hyper.prior_for(p)?;
            let d0 = &rep.model.dag0;
            PerturbCase::ALL
                .iter()
                .map(|&case| {
                    let d = perturb(d0, case, &mut rep.rng)?;
                    let ratio = log_posterior_ratio(&d, d0, &rep.data, &prior)?;
                    let prior_term = log_prior_dag(&d, prior.q) - log_prior_dag(d0, prior.q);
                    Ok(Row {
                        p,
                        n,
                        label: case.label().to_string(),
                        replicate: Some(k),
                        values: vec![
                            Some(ratio),
                            Some(prior_term),
                            Some(d.edge_count() as f64),
                            Some(d0.edge_count() as f64),
                        ],
                    })
                })
                .collect()
        })
        .collect();
    let mut table = ResultTable::new(
        cfg.metadata("sim-ratio").with("perturbation", "uniform edge removal/addition"),
        &RATIO_COLUMNS,
    );
    for r in rows {
        table.rows.extend(r?);
    }
    Ok(table)
}

pub const SELECTION_COLUMNS: [&str; 8] = ["ppv", "tpr", "fpr", "tp", "fp", "fn", "tn", "edges"];
pub const SELECTION_METHODS: [&str; 4] = ["lasso-dag-bic", "lasso-dag-quantile", "cscs-bic", "bayes"];

fn metric_values(m: &Metrics) -> Vec<Option<f64>> {
    vec![
        m.ppv,
        m.tpr,
        m.fpr,
        Some(m.tp as f64),
        Some(m.fp as f64),
        Some(m.fn_ as f64),
        Some(m.tn as f64),
        Some((m.tp + m.fp) as f64),
    ]
}

/// Estimates from every method on one replicate, in [`SELECTION_METHODS`] order.
pub fn selection_estimates(cfg: &ExperimentConfig, rep: &mut Replicate) -> Result<Vec<Dag>> {
    let p = rep.model.p();
    let n = rep.data.n;
    let s = &rep.data.s;
    let opts = cfg.baselines.solver_options();
    let grid = cfg.baselines.grid_for(Some(rep.model.dag0.edge_count()));
    let (lasso_path, lasso_best) = path_fit_and_select(Method::LassoDag, s, n, &grid, &opts)?;
    let (_, lasso_q) = lasso_dag_quantile(s, n, cfg.baselines.quantile_alpha, &opts)?;
    let (cscs_path, cscs_best) = path_fit_and_select(Method::Cscs, s, n, &grid, &opts)?;

    let seeds: Vec<Dag> = lasso_path
        .dags()
        .chain(cscs_path.dags())
        .chain([&lasso_q])
        .cloned()
        .collect();
    let scorer = BayesScorer::new(&rep.data, cfg.hyper.prior_for(p)?)?;
    let (outcome, _) = bayes_search(&rep.data, Some(&rep.y), &seeds, &scorer, &cfg.search, &mut rep.rng)?;
    Ok(vec![lasso_best, lasso_q, cscs_best, outcome.dag])
}

/// Edge-recovery metrics of the three baselines and the Bayesian search, per
/// cell and replicate. Use [`ResultTable::summary`] for method means.
pub fn run_sim_selection(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let cells = cfg.cells()?;
    let rows: Vec<Result<Vec<Row>>> = jobs(&cells, cfg.replicates)
        .into_par_iter()
        .map(|(c, k, p, n)| {
            let mut rep = cfg.replicate_data(c, k, p, n)?;
            let estimates = selection_estimates(cfg, &mut rep)?;
            SELECTION_METHODS
                .iter()
                .zip(estimates)
                .map(|(label, d)| {
                    let m = structure_metrics(&d, &rep.model.dag0)?;
                    Ok(Row {
                        p,
                        n,
                        label: label.to_string(),
                        replicate: Some(k),
                        values: metric_values(&m),
                    })
                })
                .collect()
        })
        .collect();
    let s = &cfg.search;
    let meta = cfg
        .metadata("sim-selection")
        .with(
            "baseline_grid",
            cfg.baselines
                .grid
                .as_ref()
                .map_or(format!("bracket [E0/3, 3 E0], {} points", cfg.baselines.grid_points), |g| {
                    format!("{g:?}")
                }),
        )
        .with("quantile_alpha", cfg.baselines.quantile_alpha)
        .with("solver_tol", cfg.baselines.tol)
        .with(
            "search",
            format!(
                "ridge={} thresholds={} (quantile spacing) cv_folds={} sss={}x{} from top {} hill_climb={} rounds",
                s.ridge, s.threshold_count, s.cv_folds, s.sss_width, s.sss_iters, s.sss_seeds, s.hill_climb_rounds
            ),
        );
    let mut table = ResultTable::new(meta, &SELECTION_COLUMNS);
    for r in rows {
        table.rows.extend(r?);
    }
    Ok(table)
}

pub const ENUM_COLUMNS: [&str; 6] = [
    "post_true",
    "mode_is_true",
    "mode_matches_select_best",
    "prob_sum",
    "true_edges",
    "dags",
];

/// Exact posterior over every DAG on `p ≤ 5` vertices: reports `π(D₀|Y)`,
/// whether the mode is `D₀`, and whether it agrees with [`select_best`] over
/// the full pool.
pub fn exact_enumeration_study(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let cells = cfg.cells()?;
    if let Some(&(p, _)) = cells.iter().find(|(p, _)| *p > MAX_STUDY_P) {
        return Err(Error::TooLarge { p, max: MAX_STUDY_P });
    }
    let rows: Vec<Result<Row>> = jobs(&cells, cfg.replicates)
        .into_par_iter()
        .map(|(c, k, p, n)| {
            let rep = cfg.replicate_data(c, k, p, n)?;
            let scorer = BayesScorer::new(&rep.data, cfg.hyper.prior_for(p)?)?;
            let dags = enumerate_all_dags(p)?;
            let scores = dags.iter().map(|d| scorer.score(d)).collect::<Result<Vec<f64>>>()?;
            let lse = log_sum_exp(&scores);
            let probs: Vec<f64> = scores.iter().map(|s| (s - lse).exp()).collect();
            let truth = dags.iter().position(|d| *d == rep.model.dag0).expect("enumeration is complete");
            let mode = (0..dags.len())
                .reduce(|a, b| if scores[b] > scores[a] { b } else { a })
                .expect("nonempty");
            let mut pool = CandidatePool::new();
            pool.extend(dags.iter().cloned(), Provenance::Seed);
            let (best, _) = select_best(&mut pool, &scorer)?;
            let flag = |b: bool| Some(if b { 1.0 } else { 0.0 });
            Ok(Row {
                p,
                n,
                label: "enumeration".into(),
                replicate: Some(k),
                values: vec![
                    Some(probs[truth]),
                    flag(mode == truth),
                    flag(dags[mode] == best),
                    Some(probs.iter().sum()),
                    Some(rep.model.dag0.edge_count() as f64),
                    Some(dags.len() as f64),
                ],
            })
        })
        .collect();
    let mut table = ResultTable::new(cfg.metadata("enum-study"), &ENUM_COLUMNS);
    for r in rows {
        table.rows.push(r?);
    }
    Ok(table)
}

/// Writes `table` (and its summary when requested) under `dir`.
pub fn write_study(table: &ResultTable, dir: &Path, with_summary: bool) -> Result<Vec<PathBuf>> {
    let mut paths = table.write(dir, "results")?;
    if with_summary {
        paths.extend(table.summary().write(dir, "summary")?);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            p_list: vec![20],
            n_rule: NRule::Fixed(40),
            replicates: 2,
            ..Default::default()
        }
    }

    #[test]
    fn config_defaults_and_hash() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.cells().unwrap(), vec![(100, 20), (200, 40), (300, 60)]);
        assert_eq!(cfg.hash().len(), 64);
        let other = ExperimentConfig { seed: 1, ..cfg.clone() };
        assert_ne!(cfg.hash(), other.hash());
        assert!(matches!(ExperimentConfig::from_json(r#"{"bogus": 1}"#), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn hyper_config_parsing() {
        let h: HyperConfig = serde_json::from_str(r#"{"U": [[2.0, 0.0], [0.0, 2.0]], "q": 0.3}"#).unwrap();
        let prior = h.prior_for(2).unwrap();
        assert_eq!(prior.q, 0.3);
        assert_eq!(prior.u.get(1, 1), 2.0);
        assert!(h.prior_for(3).is_err());
        let bad: HyperConfig = serde_json::from_str(r#"{"U": "ones"}"#).unwrap();
        assert!(bad.prior_for(2).is_err());
    }

    #[test]
    fn zero_replicates_give_empty_table() {
        let cfg = ExperimentConfig { replicates: 0, ..small() };
        assert!(run_sim_ratio(&cfg).unwrap().rows.is_empty());
    }

    #[test]
    fn ratio_prior_term_is_edge_difference() {
        let cfg = small();
        let t = run_sim_ratio(&cfg).unwrap();
        assert_eq!(t.rows.len(), 8);
        let q: f64 = 1.0 / 20.0;
        for r in &t.rows {
            let diff = t.get(r, "edges").unwrap() - t.get(r, "true_edges").unwrap();
            let expect = diff * (q / (1.0 - q)).ln();
            assert!((t.get(r, "prior_term").unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_rejects_large_p() {
        let cfg = ExperimentConfig {
            p_list: vec![6],
            ..small()
        };
        assert!(matches!(exact_enumeration_study(&cfg), Err(Error::TooLarge { .. })));
    }
}
