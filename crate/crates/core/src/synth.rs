//! Synthetic ground truth: a sparse unit lower-triangular `L₀`, `D₀ = I`, and
//! i.i.d. Gaussian samples from `N(0, (L₀ᵀ)⁻¹ D₀ L₀⁻¹)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dag::{compose, support_dag, CholeskyParam, Dag};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::wishart::{DagWishartHyper, DataStats};

pub const DEFAULT_FILL: f64 = 0.5;
pub const DEFAULT_MAX_EXPECTED_PARENTS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrueModel {
    pub l0: DMatrix<f64>,
    pub d0: DVector<f64>,
    pub dag0: Dag,
    pub sigma0: SymMatrix,
    pub omega0: SymMatrix,
}

impl TrueModel {
    pub fn from_cholesky(param: &CholeskyParam) -> Result<Self> {
        let omega0 = compose(param);
        let sigma0 = omega0.inverse()?;
        Ok(TrueModel {
            l0: param.l.clone(),
            d0: param.d.clone(),
            dag0: support_dag(&param.l, 0.0),
            sigma0,
            omega0,
        })
    }

    pub fn p(&self) -> usize {
        self.d0.len()
    }

    pub fn param(&self) -> CholeskyParam {
        CholeskyParam {
            d: self.d0.clone(),
            l: self.l0.clone(),
        }
    }

    /// Smallest `|L₀_ij|` over true edges (`∞` for an empty graph).
    pub fn min_signal(&self) -> f64 {
        self.dag0
            .edges()
            .map(|(i, j)| self.l0[(i - 1, j - 1)].abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Probability that a strictly-lower entry of column `j` is kept.
pub fn keep_probability(p: usize, j: usize, max_expected_parents: f64) -> f64 {
    (max_expected_parents / (p - j) as f64).min(1.0)
}

/// Each entry below the diagonal of column `j` is kept independently with
/// probability `min(1, max_expected_parents / (p − j))` and set to `fill`.
pub fn gen_true_model<R: Rng + ?Sized>(
    p: usize,
    fill: f64,
    max_expected_parents: f64,
    rng: &mut R,
) -> Result<TrueModel> {
    if p < 2 {
        return Err(Error::InvalidConfig(format!("need p >= 2, got {p}")));
    }
    let mut l = DMatrix::identity(p, p);
    for j in 1..p {
        let keep = keep_probability(p, j, max_expected_parents);
        for i in (j + 1)..=p {
            if rng.random::<f64>() < keep {
                l[(i - 1, j - 1)] = fill;
            }
        }
    }
    TrueModel::from_cholesky(&CholeskyParam {
        d: DVector::from_element(p, 1.0),
        l,
    })
}

/// `n` rows drawn as `y = (L₀ᵀ)⁻¹ D₀^{1/2} z`, `z ~ N(0, I)`.
pub fn sample_data<R: Rng + ?Sized>(model: &TrueModel, n: usize, rng: &mut R) -> (DMatrix<f64>, DataStats) {
    let p = model.p();
    let sd: Vec<f64> = model.d0.iter().map(|v| v.sqrt()).collect();
    let mut y = DMatrix::zeros(n, p);
    let mut row = vec![0.0; p];
    for r in 0..n {
        for (k, v) in row.iter_mut().enumerate() {
            *v = sd[k] * rng.sample::<f64, _>(StandardNormal);
        }
        // Back substitution with the unit upper-triangular Lᵀ.
        for i in (0..p).rev() {
            let mut s = row[i];
            for k in (i + 1)..p {
                s -= model.l0[(k, i)] * row[k];
            }
            row[i] = s;
        }
        for (c, v) in row.iter().enumerate() {
            y[(r, c)] = *v;
        }
    }
    let stats = DataStats::from_data(&y);
    (y, stats)
}

/// `U = I_p`, `α_i = ν_i(d) + offset`.
pub fn default_hyper(d: &Dag, offset: f64) -> Result<DagWishartHyper> {
    if !(offset > 2.0) {
        return Err(Error::InvalidShape { vertex: 1, gap: offset });
    }
    Ok(DagWishartHyper {
        u: SymMatrix::identity(d.p()),
        alpha: (1..=d.p()).map(|j| d.nu(j) as f64 + offset).collect(),
    })
}

/// Recorded alongside generated data so a run can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    pub fill: f64,
    pub max_expected_parents: f64,
    pub keep_rule: String,
}

impl GeneratorInfo {
    pub fn new(p: usize, n: usize, seed: u64, fill: f64, max_expected_parents: f64) -> Self {
        GeneratorInfo {
            p,
            n,
            seed,
            fill,
            max_expected_parents,
            keep_rule: format!("keep L[i,j] (i>j) with probability min(1, {max_expected_parents}/(p-j))"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn p2_always_has_the_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = gen_true_model(2, 0.5, 3.0, &mut rng).unwrap();
            assert_eq!(m.l0[(1, 0)], 0.5);
            assert_eq!(m.dag0.edge_count(), 1);
        }
    }

    #[test]
    fn zero_fill_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = gen_true_model(8, 0.0, 3.0, &mut rng).unwrap();
        assert_eq!(m.dag0, Dag::empty(8));
    }

    #[test]
    fn sigma_inverts_omega() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = gen_true_model(30, 0.5, 3.0, &mut rng).unwrap();
        let prod = m.sigma0.as_matrix() * m.omega0.as_matrix();
        let err = (prod - DMatrix::identity(30, 30)).abs().max();
        assert!(err < 1e-8, "{err}");
        assert!(m.dag0.edges().all(|(i, j)| m.l0[(i - 1, j - 1)] == 0.5));
        assert_eq!(m.min_signal(), 0.5);
    }

    #[test]
    fn fixed_seed_reproduces_data() {
        let m = gen_true_model(5, 0.5, 3.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let (a, _) = sample_data(&m, 7, &mut ChaCha8Rng::seed_from_u64(99));
        let (b, _) = sample_data(&m, 7, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
    }

    #[test]
    fn single_row_gives_rank_one_psd() {
        let m = gen_true_model(4, 0.5, 3.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let (_, stats) = sample_data(&m, 1, &mut ChaCha8Rng::seed_from_u64(5));
        let ev = stats.s.eigenvalues();
        assert!(ev.iter().all(|v| *v > -1e-12));
        assert_eq!(ev.iter().filter(|v| **v > 1e-10).count(), 1);
    }

    #[test]
    fn default_hyper_examples() {
        let h = default_hyper(&Dag::empty(3), 10.0).unwrap();
        assert_eq!(h.alpha, vec![10.0, 10.0, 10.0]);
        assert_eq!(h.u, SymMatrix::identity(3));
        let h = default_hyper(&Dag::complete(3), 10.0).unwrap();
        assert_eq!(h.alpha, vec![12.0, 11.0, 10.0]);
        assert!(matches!(default_hyper(&Dag::empty(3), 2.0), Err(Error::InvalidShape { .. })));
    }
}
