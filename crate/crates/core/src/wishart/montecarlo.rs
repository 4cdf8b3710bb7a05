//! Importance-sampling estimates of marginal likelihoods.
//!
//! These are deliberately slow oracles for the closed-form scores: the
//! likelihood is evaluated row by row from the raw data and the proposal is a
//! DAG-Wishart posterior, so agreement with the normalizing-constant ratio
//! checks the constant, the sampler and the conjugacy update together.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{log_density, sample_dag_wishart, DagWishartHyper, DataStats};
use crate::dag::{CholeskyParam, Dag};
use crate::error::{Error, Result};

/// Below this effective sample size an estimate is reported as degenerate.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 10.0;

/// Log-scale Monte Carlo estimate with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub ess: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub samples: usize,
    /// Fraction of the data used to build the proposal: the proposal is the
    /// DAG-Wishart posterior at `(U + t·nS, α + t·n)`. `1.0` is the exact
    /// conjugate posterior; smaller values give a wider proposal.
    pub temper: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 10_000,
            temper: 1.0,
        }
    }
}

/// `Σ_rows log N(y; 0, (L D⁻¹ Lᵀ)⁻¹)` computed from the rows of `y`.
pub fn gaussian_log_likelihood(y: &DMatrix<f64>, param: &CholeskyParam) -> f64 {
    let (n, p) = y.shape();
    let log_det_d: f64 = param.d.iter().map(|v| v.ln()).sum();
    let mut quad = 0.0;
    for row in y.row_iter() {
        // z = Lᵀ y has independent coordinates with variances D.
        let z = param.l.tr_mul(&row.transpose());
        quad += z.iter().zip(param.d.iter()).map(|(zi, di)| zi * zi / di).sum::<f64>();
    }
    -0.5 * (n * p) as f64 * (2.0 * PI).ln() - 0.5 * n as f64 * log_det_d - 0.5 * quad
}

/// Turns log importance weights into a log-mean estimate.
pub(crate) fn summarize_log_weights(log_w: &[f64]) -> Result<McEstimate> {
    let m = log_w.len();
    if m == 0 {
        return Err(Error::DegenerateWeights { ess: 0.0 });
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights { ess: 0.0 });
    }
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = w.iter().sum();
    let sum_sq: f64 = w.iter().map(|x| x * x).sum();
    let ess = sum * sum / sum_sq;
    if ess < MIN_EFFECTIVE_SAMPLES {
        return Err(Error::DegenerateWeights { ess });
    }
    let mean = sum / m as f64;
    let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    Ok(McEstimate {
        estimate: max + mean.ln(),
        std_error: (var / m as f64).sqrt() / mean,
        ess,
        samples: m,
    })
}

/// Importance-sampling estimate of `log ∫ p(Y | D, L) π(D, L) d(D, L)`.
///
/// Includes the Gaussian `(2π)^{-np/2}` constant, so it should agree with
/// `log z(Ũ, α̃) − log z(U, α) − (np/2) log 2π`.
pub fn mc_marginal_loglik<R: Rng + ?Sized>(
    d: &Dag,
    y: &DMatrix<f64>,
    hyper: &DagWishartHyper,
    opts: McOptions,
    rng: &mut R,
) -> Result<McEstimate> {
    hyper.validate_for(d)?;
    if y.ncols() != d.p() {
        return Err(Error::DimensionMismatch {
            expected: d.p(),
            found: y.ncols(),
        });
    }
    if !(opts.temper > 0.0 && opts.temper <= 1.0) {
        return Err(Error::InvalidConfig(format!("temper = {} must lie in (0, 1]", opts.temper)));
    }
    let stats = DataStats::from_data(y);
    let t = opts.temper;
    let proposal = DagWishartHyper {
        u: hyper.u.add(&stats.s.scaled(t * stats.n as f64))?,
        alpha: hyper.alpha.iter().map(|a| a + t * stats.n as f64).collect(),
    };
    let mut log_w = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        let theta = sample_dag_wishart(d, &proposal.u, &proposal.alpha, rng)?;
        let lw = gaussian_log_likelihood(y, &theta) + log_density(d, hyper, &theta)?
            - log_density(d, &proposal, &theta)?;
        log_w.push(lw);
    }
    summarize_log_weights(&log_w)
}
