//! DAG-Wishart priors and exact posterior DAG scores.
//!
//! The DAG-Wishart density on the Cholesky space of a DAG `d` is
//!
//! ```text
//! exp{-½ tr((L D⁻¹ Lᵀ) U)} · Π_i D_ii^{-α_i/2}
//! ```
//!
//! and its normalizing constant factors over vertices. Conjugacy maps
//! `(U, α)` to `(U + nS, n + α)`, so the marginal likelihood of a DAG is a
//! ratio of two normalizing constants and every score below is a sum of
//! per-vertex terms. All arithmetic is in log space.

mod diagnostics;
mod montecarlo;
mod nonlocal;
mod sampler;

pub use diagnostics::{assumption_diagnostics, AssumptionCheck, AsymptoticConfig, DiagnosticsReport};
pub use montecarlo::{gaussian_log_likelihood, mc_marginal_loglik, McEstimate, McOptions};
pub use nonlocal::{nonlocal_log_prior, nonlocal_mc_score, NonLocalConfig};
pub use sampler::{sample_dag_wishart, sample_posterior, sample_prior};

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dag::{CholeskyParam, Dag};
use crate::error::{Error, Result};
use crate::linalg::{ConditionalBlock, IndexSet, SymMatrix};

/// Shape offset used by the default hyperparameters: `α_i = ν_i + 10`.
pub const DEFAULT_ALPHA_OFFSET: f64 = 10.0;

/// Concrete DAG-Wishart hyperparameters for one DAG: scale `U` and one shape
/// per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DagWishartHyper {
    pub u: SymMatrix,
    pub alpha: Vec<f64>,
}

impl DagWishartHyper {
    /// Checks `α_i − ν_i(d) > 2` for every vertex.
    pub fn validate_for(&self, d: &Dag) -> Result<()> {
        if self.u.dim() != d.p() || self.alpha.len() != d.p() {
            return Err(Error::DimensionMismatch {
                expected: d.p(),
                found: self.alpha.len().min(self.u.dim()),
            });
        }
        for j in 1..=d.p() {
            let gap = self.alpha[j - 1] - d.nu(j) as f64;
            if !(gap > 2.0) {
                return Err(Error::InvalidShape { vertex: j, gap });
            }
        }
        Ok(())
    }

    /// Posterior hyperparameters `(U + nS, n + α)`.
    pub fn posterior(&self, data: &DataStats) -> Result<DagWishartHyper> {
        let u = self.u.add(&data.s.scaled(data.n as f64))?;
        let alpha = self.alpha.iter().map(|a| a + data.n as f64).collect();
        Ok(DagWishartHyper { u, alpha })
    }
}

/// How shape parameters depend on the DAG being scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeRule {
    /// `α_i(d) = ν_i(d) + offset`.
    Offset(f64),
    /// The same `α` for every DAG.
    Fixed(Vec<f64>),
}

impl ShapeRule {
    pub fn alpha(&self, j: usize, nu: usize) -> f64 {
        match self {
            ShapeRule::Offset(c) => nu as f64 + c,
            ShapeRule::Fixed(a) => a[j - 1],
        }
    }
}

/// A DAG-Wishart prior family plus the Erdos–Renyi edge probability: the full
/// specification needed to score any DAG on `p` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub u: SymMatrix,
    pub shape: ShapeRule,
    pub q: f64,
}

impl PriorSpec {
    /// `U = I_p`, `α_i = ν_i + 10`, `q = 1/p`.
    pub fn default_for(p: usize) -> Self {
        PriorSpec {
            u: SymMatrix::identity(p),
            shape: ShapeRule::Offset(DEFAULT_ALPHA_OFFSET),
            q: default_edge_probability(p),
        }
    }

    pub fn p(&self) -> usize {
        self.u.dim()
    }

    pub fn hyper_for(&self, d: &Dag) -> DagWishartHyper {
        DagWishartHyper {
            u: self.u.clone(),
            alpha: (1..=d.p()).map(|j| self.shape.alpha(j, d.nu(j))).collect(),
        }
    }
}

/// Edge probability used when none is configured.
pub fn default_edge_probability(p: usize) -> f64 {
    if p >= 2 {
        1.0 / p as f64
    } else {
        0.5
    }
}

/// Sufficient statistics of a zero-mean sample: `n` and `S = (1/n) Σ y yᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataStats {
    pub n: usize,
    pub s: SymMatrix,
}

impl DataStats {
    /// From an `n × p` data matrix.
    pub fn from_data(y: &DMatrix<f64>) -> Self {
        let n = y.nrows();
        let s = if n == 0 {
            DMatrix::zeros(y.ncols(), y.ncols())
        } else {
            y.transpose() * y / n as f64
        };
        DataStats {
            n,
            s: SymMatrix::from_lower(s),
        }
    }

    pub fn p(&self) -> usize {
        self.s.dim()
    }

    /// `S̃ = S + U/n`.
    pub fn s_tilde(&self, u: &SymMatrix) -> Result<SymMatrix> {
        self.s.add(&u.scaled(1.0 / self.n as f64))
    }
}

/// One vertex's contribution to `log z_D(U, α)`.
pub fn log_norm_const_vertex(u: &SymMatrix, j: usize, parents: &IndexSet, alpha: f64) -> Result<f64> {
    let nu = parents.len() as f64;
    let gap = alpha - nu;
    if !(gap > 2.0) {
        return Err(Error::InvalidShape { vertex: j, gap });
    }
    let block = ConditionalBlock::new(u, j, parents)?;
    Ok(ln_gamma(gap / 2.0 - 1.0)
        + (alpha / 2.0 - 1.0) * LN_2
        + nu / 2.0 * PI.ln()
        + (gap / 2.0 - 1.5) * block.log_det_parents()
        - (gap / 2.0 - 1.0) * block.log_det_family())
}

/// `log z_D(U, α)`.
pub fn log_norm_const(d: &Dag, u: &SymMatrix, alpha: &[f64]) -> Result<f64> {
    if u.dim() != d.p() || alpha.len() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            found: alpha.len(),
        });
    }
    (1..=d.p())
        .map(|j| log_norm_const_vertex(u, j, d.parents(j), alpha[j - 1]))
        .sum()
}

/// `−½ tr((L D⁻¹ Lᵀ) U) − Σ (α_i/2) ln D_ii`.
pub fn log_unnorm_density(d: &Dag, hyper: &DagWishartHyper, param: &CholeskyParam) -> Result<f64> {
    param.check_support(d)?;
    let u = hyper.u.as_matrix();
    let mut quad = 0.0;
    for j in 0..d.p() {
        let col = param.l.column(j);
        quad += col.dot(&(u * col)) / param.d[j];
    }
    let logd: f64 = param
        .d
        .iter()
        .zip(&hyper.alpha)
        .map(|(dj, a)| a / 2.0 * dj.ln())
        .sum();
    Ok(-0.5 * quad - logd)
}

/// Normalized log density of the DAG-Wishart distribution.
pub fn log_density(d: &Dag, hyper: &DagWishartHyper, param: &CholeskyParam) -> Result<f64> {
    Ok(log_unnorm_density(d, hyper, param)? - log_norm_const(d, &hyper.u, &hyper.alpha)?)
}

/// Erdos–Renyi log prior of one vertex's parent set (zero for vertex `p`).
pub fn log_prior_vertex(p: usize, j: usize, nu: usize, q: f64) -> f64 {
    if j >= p {
        return 0.0;
    }
    let free = (p - j - nu) as f64;
    let mut s = 0.0;
    if nu > 0 {
        s += nu as f64 * q.ln();
    }
    if free > 0.0 {
        s += free * (1.0 - q).ln();
    }
    s
}

/// `log π(d) = Σ_{i<p} [ν_i ln q + (p − i − ν_i) ln(1 − q)]`.
pub fn log_prior_dag(d: &Dag, q: f64) -> f64 {
    (1..=d.p()).map(|j| log_prior_vertex(d.p(), j, d.nu(j), q)).sum()
}

/// Anything that assigns a decomposable log score to ordered DAGs.
pub trait Scorer: Sync {
    fn p(&self) -> usize;

    /// Contribution of vertex `j` with parent set `parents`.
    fn vertex_score(&self, j: usize, parents: &IndexSet) -> Result<f64>;

    fn score(&self, d: &Dag) -> Result<f64> {
        if d.p() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: d.p(),
            });
        }
        (1..=d.p()).map(|j| self.vertex_score(j, d.parents(j))).sum()
    }
}

/// Exact DAG-Wishart log posterior score, up to a DAG-independent constant:
/// `log π(d) + log z_d(U + nS, n + α) − log z_d(U, α)`.
#[derive(Debug, Clone)]
pub struct BayesScorer {
    prior: PriorSpec,
    n: usize,
    u_post: SymMatrix,
}

impl BayesScorer {
    pub fn new(data: &DataStats, prior: PriorSpec) -> Result<Self> {
        if data.p() != prior.p() {
            return Err(Error::DimensionMismatch {
                expected: prior.p(),
                found: data.p(),
            });
        }
        if !(prior.q > 0.0 && prior.q < 1.0) {
            return Err(Error::InvalidConfig(format!("q = {} must lie in (0, 1)", prior.q)));
        }
        let u_post = prior.u.add(&data.s.scaled(data.n as f64))?;
        Ok(BayesScorer { prior, n: data.n, u_post })
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl Scorer for BayesScorer {
    fn p(&self) -> usize {
        self.prior.p()
    }

    fn vertex_score(&self, j: usize, parents: &IndexSet) -> Result<f64> {
        let nu = parents.len();
        let alpha = self.prior.shape.alpha(j, nu);
        let post = log_norm_const_vertex(&self.u_post, j, parents, alpha + self.n as f64)?;
        let prior = log_norm_const_vertex(&self.prior.u, j, parents, alpha)?;
        Ok(log_prior_vertex(self.p(), j, nu, self.prior.q) + post - prior)
    }
}

/// Log posterior score of `d` under `prior` given `data`.
pub fn log_score(d: &Dag, data: &DataStats, prior: &PriorSpec) -> Result<f64> {
    BayesScorer::new(data, prior.clone())?.score(d)
}

/// `log π(d1 | Y) − log π(d2 | Y)`.
pub fn log_posterior_ratio(d1: &Dag, d2: &Dag, data: &DataStats, prior: &PriorSpec) -> Result<f64> {
    if d1.p() != d2.p() {
        return Err(Error::DimensionMismatch {
            expected: d1.p(),
            found: d2.p(),
        });
    }
    if d1 == d2 {
        return Ok(0.0);
    }
    let scorer = BayesScorer::new(data, prior.clone())?;
    // Only vertices whose parent sets differ contribute.
    let mut r = 0.0;
    for j in 1..=d1.p() {
        if d1.parents(j) != d2.parents(j) {
            r += scorer.vertex_score(j, d1.parents(j))? - scorer.vertex_score(j, d2.parents(j))?;
        }
    }
    Ok(r)
}
