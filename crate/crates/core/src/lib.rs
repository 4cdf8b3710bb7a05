//! Bayesian structure learning for Gaussian DAG models with a known vertex
//! ordering.
//!
//! The crate scores ordered DAGs exactly under DAG-Wishart priors, samples the
//! conjugate posterior of the Cholesky parameters, searches graph space with
//! hill climbing and shotgun stochastic search around penalized-likelihood
//! solution paths, and runs the simulation studies end to end.
//!
//! ```
//! use bayes_dag::prelude::*;
//! use bayes_dag::rng;
//!
//! let mut r = rng::stream(7, 0);
//! let truth = gen_true_model(6, 0.5, 3.0, &mut r).unwrap();
//! let (_, data) = sample_data(&truth, 400, &mut r);
//! let prior = PriorSpec::default_for(6);
//! let empty = Dag::empty(6);
//! let ratio = log_posterior_ratio(&empty, &truth.dag0, &data, &prior).unwrap();
//! assert!(ratio < 0.0);
//! ```

pub mod baselines;
pub mod dag;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod search;
pub mod synth;
pub mod wishart;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dag::{
        compose, enumerate_all_dags, modified_cholesky, perturb, support_dag, CholeskyParam, Dag, PerturbCase,
    };
    pub use crate::error::{Error, Result};
    pub use crate::linalg::{log_det_pd, schur_conditional, IndexSet, SymMatrix};
    pub use crate::synth::{default_hyper, gen_true_model, sample_data, TrueModel};
    pub use crate::wishart::{
        log_norm_const, log_posterior_ratio, log_prior_dag, log_score, log_unnorm_density, sample_posterior,
        BayesScorer, DagWishartHyper, DataStats, PriorSpec, Scorer, ShapeRule,
    };
}
