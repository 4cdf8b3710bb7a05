//! Column-wise cyclic coordinate descent for the two penalized Cholesky
//! objectives.
//!
//! Both objectives split over the columns of a lower-triangular factor. For
//! column `j` with free entries `x_i`, `i > j`:
//!
//! * Lasso-DAG: `xᵀ S x + λ Σ|x_i|` with the diagonal pinned to 1,
//! * CSCS: `xᵀ S x − 2 ln x_j + λ Σ|x_i|` with a free positive diagonal.
//!
//! An off-diagonal coordinate minimizes `S_ii t² + 2 b t + λ|t|`, giving
//! `t = −soft(b, λ/2) / S_ii`. The CSCS diagonal solves
//! `S_jj t² + a t − 1 = 0` for its positive root.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_SWEEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LassoDag,
    Cscs,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::LassoDag => "lasso-dag",
            Method::Cscs => "cscs",
        }
    }
}

/// Penalty level: one value for every column or one per vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda {
    Scalar(f64),
    PerVertex(Vec<f64>),
}

impl From<f64> for Lambda {
    fn from(v: f64) -> Self {
        Lambda::Scalar(v)
    }
}

impl From<Vec<f64>> for Lambda {
    fn from(v: Vec<f64>) -> Self {
        Lambda::PerVertex(v)
    }
}

impl Lambda {
    fn resolve(&self, p: usize) -> Result<Vec<f64>> {
        let v = match self {
            Lambda::Scalar(l) => vec![*l; p],
            Lambda::PerVertex(v) if v.len() == p => v.clone(),
            Lambda::PerVertex(v) => {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: v.len(),
                })
            }
        };
        if let Some(bad) = v.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidConfig(format!("penalty {bad} must be finite and nonnegative")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest allowed subgradient residual at convergence.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOLERANCE,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// A converged fit with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverFit {
    pub method: Method,
    /// Lower-triangular factor (`L̂` or `T̂`).
    pub estimate: DMatrix<f64>,
    /// Largest number of sweeps any column needed.
    pub sweeps: usize,
    /// Largest subgradient residual over all coordinates.
    pub residual: f64,
    /// Total objective before the first sweep and after every sweep.
    pub objective: Vec<f64>,
}

impl SolverFit {
    /// True when the objective trace never increases beyond rounding.
    pub fn is_monotone(&self) -> bool {
        self.objective
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()))
    }

    /// Nonzero strictly-lower entries of the estimate.
    pub fn edge_count(&self) -> usize {
        let p = self.estimate.nrows();
        (0..p).map(|j| ((j + 1)..p).filter(|&i| self.estimate[(i, j)] != 0.0).count()).sum()
    }
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

struct ColumnFit {
    x: Vec<f64>,
    sweeps: usize,
    residual: f64,
    trace: Vec<f64>,
}

/// Solves column `j` (0-based) starting from `x`, the entries in rows `j..p`.
fn solve_column(
    s: &DMatrix<f64>,
    j: usize,
    lambda: f64,
    method: Method,
    mut x: Vec<f64>,
    opts: &SolverOptions,
) -> Result<ColumnFit> {
    let m = x.len();
    let sv = |a: usize, b: usize| s[(j + a, j + b)];
    if method == Method::Cscs && !(sv(0, 0) > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("S[{0},{0}] = {1}", j + 1, sv(0, 0))));
    }
    // r = S x restricted to rows and columns j..p.
    let mut r: Vec<f64> = (0..m).map(|a| (0..m).map(|b| sv(a, b) * x[b]).sum()).collect();

    let objective = |x: &[f64], r: &[f64]| -> f64 {
        let quad: f64 = x.iter().zip(r).map(|(a, b)| a * b).sum();
        let l1: f64 = x[1..].iter().map(|v| v.abs()).sum();
        let barrier = if method == Method::Cscs { -2.0 * x[0].ln() } else { 0.0 };
        quad + barrier + lambda * l1
    };
    let residual = |x: &[f64], r: &[f64]| -> f64 {
        let mut worst: f64 = 0.0;
        if method == Method::Cscs {
            worst = (2.0 * r[0] - 2.0 / x[0]).abs();
        }
        for a in 1..m {
            let g = 2.0 * r[a];
            let v = if x[a] != 0.0 {
                (g + lambda * x[a].signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    };

    let update = |a: usize, new: f64, x: &mut [f64], r: &mut [f64]| {
        let delta = new - x[a];
        if delta != 0.0 {
            x[a] = new;
            for (k, rk) in r.iter_mut().enumerate() {
                *rk += sv(k, a) * delta;
            }
        }
    };

    let mut trace = vec![objective(&x, &r)];
    let mut res = residual(&x, &r);
    let mut sweeps = 0;
    while res > opts.tol {
        if sweeps == opts.max_sweeps {
            return Err(Error::NotConverged { sweeps, residual: res });
        }
        if method == Method::Cscs {
            let saa = sv(0, 0);
            let a = r[0] - saa * x[0];
            let root = (-a + (a * a + 4.0 * saa).sqrt()) / (2.0 * saa);
            update(0, root, &mut x, &mut r);
        }
        for a in 1..m {
            let saa = sv(a, a);
            let new = if saa > 0.0 {
                let b = r[a] - saa * x[a];
                -soft(b, lambda / 2.0) / saa
            } else {
                0.0
            };
            update(a, new, &mut x, &mut r);
        }
        sweeps += 1;
        trace.push(objective(&x, &r));
        res = residual(&x, &r);
    }
    Ok(ColumnFit {
        x,
        sweeps,
        residual: res,
        trace,
    })
}

/// Fits either objective. `warm` is a lower-triangular starting point.
pub fn fit(
    method: Method,
    s: &SymMatrix,
    lambda: &Lambda,
    warm: Option<&DMatrix<f64>>,
    opts: &SolverOptions,
) -> Result<SolverFit> {
    let p = s.dim();
    let lambdas = lambda.resolve(p)?;
    if let Some(w) = warm {
        if w.nrows() != p || w.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: w.nrows(),
            });
        }
    }
    let sm = s.as_matrix();
    let columns: Vec<Result<ColumnFit>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let x0: Vec<f64> = match (warm, method) {
                (Some(w), _) => (j..p).map(|i| w[(i, j)]).collect(),
                (None, Method::LassoDag) => (j..p).map(|i| if i == j { 1.0 } else { 0.0 }).collect(),
                (None, Method::Cscs) => (j..p).map(|i| if i == j { 1.0 / sm[(j, j)].sqrt() } else { 0.0 }).collect(),
            };
            let mut x0 = x0;
            if method == Method::LassoDag {
                x0[0] = 1.0;
            } else if !(x0[0] > 0.0) {
                x0[0] = 1.0 / sm[(j, j)].sqrt();
            }
            solve_column(sm, j, lambdas[j], method, x0, opts)
        })
        .collect();

    let mut estimate = DMatrix::zeros(p, p);
    let mut sweeps = 0;
    let mut residual: f64 = 0.0;
    let mut traces = Vec::with_capacity(p);
    for (j, c) in columns.into_iter().enumerate() {
        let c = c?;
        for (a, v) in c.x.iter().enumerate() {
            estimate[(j + a, j)] = *v;
        }
        sweeps = sweeps.max(c.sweeps);
        residual = residual.max(c.residual);
        traces.push(c.trace);
    }
    let objective = (0..=sweeps)
        .map(|k| traces.iter().map(|t| t[k.min(t.len() - 1)]).sum())
        .collect();
    Ok(SolverFit {
        method,
        estimate,
        sweeps,
        residual,
        objective,
    })
}

/// Lasso-DAG estimate `L̂` (unit diagonal).
pub fn lasso_dag_fit(s: &SymMatrix, lambda: impl Into<Lambda>) -> Result<SolverFit> {
    fit(Method::LassoDag, s, &lambda.into(), None, &SolverOptions::default())
}

/// CSCS estimate `T̂` (positive diagonal).
pub fn cscs_fit(s: &SymMatrix, lambda: f64) -> Result<SolverFit> {
    fit(Method::Cscs, s, &Lambda::Scalar(lambda), None, &SolverOptions::default())
}

/// Smallest scalar penalty at which the fit from a cold start has no edges.
pub fn lambda_max(method: Method, s: &SymMatrix) -> f64 {
    let m = s.as_matrix();
    let p = s.dim();
    let mut best: f64 = 0.0;
    for j in 0..p {
        let scale = match method {
            Method::LassoDag => 1.0,
            Method::Cscs => 1.0 / m[(j, j)].sqrt(),
        };
        for i in (j + 1)..p {
            best = best.max(2.0 * m[(i, j)].abs() * scale);
        }
    }
    best
}

/// Precision estimate implied by a factor: `F Fᵀ`.
pub fn implied_precision(estimate: &DMatrix<f64>) -> SymMatrix {
    SymMatrix::from_lower(estimate * estimate.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Cholesky;

    fn example_s() -> SymMatrix {
        SymMatrix::from_rows(&[
            vec![2.0, 0.6, 0.3, 0.1],
            vec![0.6, 1.5, -0.4, 0.2],
            vec![0.3, -0.4, 1.2, 0.5],
            vec![0.1, 0.2, 0.5, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_fixed_point() {
        let s = SymMatrix::identity(5);
        for method in [Method::LassoDag, Method::Cscs] {
            let f = fit(method, &s, &Lambda::Scalar(0.1), None, &SolverOptions::default()).unwrap();
            assert_eq!(f.estimate, DMatrix::identity(5, 5));
            assert_eq!(f.sweeps, 0);
        }
    }

    #[test]
    fn huge_penalty_gives_diagonal() {
        let s = example_s();
        let l = lasso_dag_fit(&s, 1e6).unwrap();
        assert_eq!(l.estimate, DMatrix::identity(4, 4));
        let t = cscs_fit(&s, 1e6).unwrap();
        for j in 0..4 {
            assert!((t.estimate[(j, j)] - 1.0 / s.get(j + 1, j + 1).sqrt()).abs() < 1e-9);
        }
        assert_eq!(t.edge_count(), 0);
    }

    #[test]
    fn lambda_max_is_sharp() {
        let s = example_s();
        for method in [Method::LassoDag, Method::Cscs] {
            let lm = lambda_max(method, &s);
            let above = fit(method, &s, &Lambda::Scalar(lm * 1.001), None, &SolverOptions::default()).unwrap();
            let below = fit(method, &s, &Lambda::Scalar(lm * 0.9), None, &SolverOptions::default()).unwrap();
            assert_eq!(above.edge_count(), 0);
            assert!(below.edge_count() > 0);
        }
    }

    #[test]
    fn cscs_without_penalty_is_cholesky_of_inverse() {
        let s = example_s();
        let t = cscs_fit(&s, 0.0).unwrap();
        let g = Cholesky::new(s.inverse().unwrap().as_matrix()).unwrap();
        let err = (&t.estimate - g.factor()).abs().max();
        assert!(err < 1e-5, "{err}");
        assert!(t.is_monotone());
    }

    #[test]
    fn certificates() {
        let s = example_s();
        for lam in [0.01, 0.1, 0.5] {
            let f = lasso_dag_fit(&s, lam).unwrap();
            assert!(f.residual <= DEFAULT_TOLERANCE && f.is_monotone());
            let f = cscs_fit(&s, lam).unwrap();
            assert!(f.residual <= DEFAULT_TOLERANCE && f.is_monotone());
            assert!((0..4).all(|j| f.estimate[(j, j)] > 0.0));
        }
    }

    #[test]
    fn rejects_bad_penalties() {
        let s = example_s();
        assert!(lasso_dag_fit(&s, -1.0).is_err());
        assert!(matches!(
            lasso_dag_fit(&s, vec![0.1; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sweep_limit_reports_not_converged() {
        let s = example_s();
        let opts = SolverOptions { tol: 0.0, max_sweeps: 3 };
        assert!(matches!(
            fit(Method::Cscs, &s, &Lambda::Scalar(0.01), None, &opts),
            Err(Error::NotConverged { .. })
        ));
    }
}
