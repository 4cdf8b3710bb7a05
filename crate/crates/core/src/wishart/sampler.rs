//! Exact draws from DAG-Wishart distributions.
//!
//! Vertices are independent. For vertex `i` with parents `pa_i`,
//!
//! ```text
//! D_ii⁻¹           ~ Gamma(shape = (α_i − ν_i)/2 − 1, rate = U_{i|pa_i}/2)
//! L_{pa_i,i} | D_ii ~ N(−(U^{>i})⁻¹ U_{·i}^>, D_ii (U^{>i})⁻¹)
//! ```
//!
//! The posterior is the same family at `(U + nS, n + α)`, so its rate is
//! `n c_i / 2` with `c_i` the conditional variance of `S̃ = S + U/n` and the
//! coefficient covariance is `(D_ii / n)(S̃^{>i})⁻¹`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{DagWishartHyper, DataStats};
use crate::dag::{CholeskyParam, Dag};
use crate::error::{Error, Result};
use crate::linalg::{ConditionalBlock, SymMatrix};

/// One joint draw `(D, L)` from the DAG-Wishart distribution `(u, alpha)` on `d`.
pub fn sample_dag_wishart<R: Rng + ?Sized>(
    d: &Dag,
    u: &SymMatrix,
    alpha: &[f64],
    rng: &mut R,
) -> Result<CholeskyParam> {
    let p = d.p();
    if u.dim() != p || alpha.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: alpha.len(),
        });
    }
    let mut dvec = DVector::zeros(p);
    let mut l = DMatrix::identity(p, p);
    for j in 1..=p {
        let pa = d.parents(j);
        let gap = alpha[j - 1] - pa.len() as f64;
        if !(gap > 2.0) {
            return Err(Error::InvalidShape { vertex: j, gap });
        }
        let block = ConditionalBlock::new(u, j, pa)?;
        let shape = gap / 2.0 - 1.0;
        let rate = block.conditional_variance / 2.0;
        let precision: f64 = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .sample(rng);
        let djj = 1.0 / precision;
        dvec[j - 1] = djj;
        if !pa.is_empty() {
            let z = DVector::from_fn(pa.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let noise = block.chol.solve_upper(&z) * djj.sqrt();
            for (k, i) in pa.zero_based().enumerate() {
                l[(i, j - 1)] = -block.coef[k] + noise[k];
            }
        }
    }
    Ok(CholeskyParam { d: dvec, l })
}

pub fn sample_prior<R: Rng + ?Sized>(d: &Dag, hyper: &DagWishartHyper, rng: &mut R) -> Result<CholeskyParam> {
    sample_dag_wishart(d, &hyper.u, &hyper.alpha, rng)
}

/// One exact draw from the conjugate posterior of `(D, L)` given `d` and the data.
pub fn sample_posterior<R: Rng + ?Sized>(
    d: &Dag,
    data: &DataStats,
    hyper: &DagWishartHyper,
    rng: &mut R,
) -> Result<CholeskyParam> {
    let post = hyper.posterior(data)?;
    sample_dag_wishart(d, &post.u, &post.alpha, rng)
}
