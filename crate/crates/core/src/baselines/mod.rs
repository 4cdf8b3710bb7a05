//! Penalized-likelihood competitors: Lasso-DAG and CSCS solution paths, BIC
//! selection, quantile-tuned Lasso-DAG, and structure-recovery metrics.

mod solver;

pub use solver::{
    cscs_fit, fit, implied_precision, lambda_max, lasso_dag_fit, Lambda, Method, SolverFit, SolverOptions,
    DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dag::{max_edges, support_dag, Dag};
use crate::error::{Error, Result};
use crate::linalg::{log_det_pd, SymMatrix};

pub const DEFAULT_QUANTILE_ALPHA: f64 = 0.1;
pub const DEFAULT_GRID_POINTS: usize = 50;
pub const DEFAULT_GRID_RATIO: f64 = 1e-2;
const BISECTION_STEPS: usize = 25;
const LAMBDA_FLOOR_RATIO: f64 = 1e-3;

/// `n·tr(SΩ̂) − n·log|Ω̂| + log(n)·E`.
pub fn bic_score(omega_hat: &SymMatrix, s: &SymMatrix, n: usize, edges: usize) -> Result<f64> {
    if omega_hat.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: omega_hat.dim(),
        });
    }
    let nf = n as f64;
    let trace = s.as_matrix().component_mul(omega_hat.as_matrix()).sum();
    Ok(nf * trace - nf * log_det_pd(omega_hat)? + nf.ln() * edges as f64)
}

/// Per-vertex penalties `2 n^{-1/2} z(α / (2p(i−1)))`, where `z(q)` is the
/// upper-`q` standard normal quantile and `i = p − j + 1` counts vertex `j`
/// and its `p − j` candidate parents. `i` is clamped to 2 for the last vertex.
pub fn quantile_lambdas(p: usize, n: usize, alpha: f64) -> Result<Vec<f64>> {
    if p < 2 || n < 1 {
        return Err(Error::InvalidConfig(format!("quantile penalties need p >= 2 and n >= 1, got p={p}, n={n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let z = Normal::standard();
    Ok((1..=p)
        .map(|j| {
            let i = (p - j + 1).max(2);
            let tail = alpha / (2.0 * p as f64 * (i - 1) as f64);
            2.0 / (n as f64).sqrt() * z.inverse_cdf(1.0 - tail)
        })
        .collect())
}

/// How the penalty grid of a solution path is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpec {
    /// Explicit penalties; sorted into strictly decreasing order.
    Explicit(Vec<f64>),
    /// `points` log-spaced penalties from `λ_max` down to `ratio·λ_max`.
    Geometric { points: usize, ratio: f64 },
    /// Endpoints found by bisection so that edge counts span
    /// `[min_edges, max_edges]`, with `points` log-spaced penalties between.
    Bracket {
        min_edges: usize,
        max_edges: usize,
        points: usize,
    },
}

impl GridSpec {
    pub fn geometric_default() -> Self {
        GridSpec::Geometric {
            points: DEFAULT_GRID_POINTS,
            ratio: DEFAULT_GRID_RATIO,
        }
    }

    /// Edge counts from a third to three times the true count.
    pub fn around_truth(true_edges: usize, points: usize) -> Self {
        GridSpec::Bracket {
            min_edges: true_edges / 3,
            max_edges: 3 * true_edges,
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub lambda: f64,
    pub estimate: DMatrix<f64>,
    pub dag: Dag,
    pub bic: f64,
}

/// Fits along a strictly decreasing penalty grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub method: Method,
    pub points: Vec<PathPoint>,
}

impl SolutionPath {
    pub fn dags(&self) -> impl Iterator<Item = &Dag> {
        self.points.iter().map(|pt| &pt.dag)
    }

    /// Point with the smallest BIC; ties go to the larger penalty.
    pub fn best(&self) -> Option<&PathPoint> {
        self.points
            .iter()
            .reduce(|best, pt| if pt.bic < best.bic { pt } else { best })
    }
}

fn log_grid(hi: f64, lo: f64, points: usize) -> Vec<f64> {
    if points <= 1 || !(hi > lo) {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Edge count at `lambda` from a cold start, or `None` when the solver hits
/// its sweep limit (which happens only at penalties far into the dense end).
fn edges_at(method: Method, s: &SymMatrix, lambda: f64, opts: &SolverOptions) -> Result<Option<usize>> {
    match fit(method, s, &Lambda::Scalar(lambda), None, opts) {
        Ok(f) => Ok(Some(f.edge_count())),
        Err(Error::NotConverged { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Bisection in `log λ` on `[lo, hi]` for the point where `dense(edges)`
/// flips from true to false; a fit that does not converge counts as dense.
/// Returns the final `(lo, hi)` and whether `lo` was a converged fit.
fn bisect(
    method: Method,
    s: &SymMatrix,
    mut lo: f64,
    mut hi: f64,
    opts: &SolverOptions,
    dense: impl Fn(usize) -> bool,
) -> Result<(f64, f64, bool)> {
    let mut lo_converged = false;
    for _ in 0..BISECTION_STEPS {
        let mid = (lo * hi).sqrt();
        match edges_at(method, s, mid, opts)? {
            Some(e) if !dense(e) => hi = mid,
            e => {
                lo = mid;
                lo_converged = e.is_some();
            }
        }
    }
    Ok((lo, hi, lo_converged))
}

/// Strictly decreasing penalty grid for `spec`.
pub fn resolve_grid(method: Method, s: &SymMatrix, spec: &GridSpec, opts: &SolverOptions) -> Result<Vec<f64>> {
    let lmax = lambda_max(method, s).max(f64::MIN_POSITIVE);
    let grid = match spec {
        GridSpec::Explicit(v) => {
            if v.is_empty() || v.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(Error::InvalidConfig("explicit grid needs positive finite penalties".into()));
            }
            let mut v = v.clone();
            v.sort_by(|a, b| b.total_cmp(a));
            v.dedup();
            v
        }
        GridSpec::Geometric { points, ratio } => {
            if *points == 0 || !(*ratio > 0.0 && *ratio < 1.0) {
                return Err(Error::InvalidConfig(format!("geometric grid needs points > 0 and ratio in (0,1), got {points}, {ratio}")));
            }
            log_grid(lmax, lmax * ratio, *points)
        }
        GridSpec::Bracket {
            min_edges,
            max_edges: hi_edges,
            points,
        } => {
            if *points == 0 || min_edges > hi_edges {
                return Err(Error::InvalidConfig(format!("bad edge bracket [{min_edges}, {hi_edges}] with {points} points")));
            }
            let floor = lmax * LAMBDA_FLOOR_RATIO;
            // Sparse end: smallest penalty seen with at most `min_edges` edges.
            let (_, sparse, _) = bisect(method, s, floor, lmax, opts, |e| e > *min_edges)?;
            // Dense end: largest penalty seen with at least `max_edges` edges.
            let target = (*hi_edges).min(max_edges(s.dim()));
            let (lo, hi, lo_converged) = bisect(method, s, floor, lmax, opts, |e| e >= target)?;
            let dense = if lo_converged { lo } else { hi };
            log_grid(sparse, dense, *points)
        }
    };
    Ok(grid)
}

/// Fits the path from sparse to dense with warm starts, scores each point by
/// BIC on `Ω̂ = F Fᵀ`, and returns the path with the BIC-best graph.
pub fn path_fit_and_select(
    method: Method,
    s: &SymMatrix,
    n: usize,
    grid: &GridSpec,
    opts: &SolverOptions,
) -> Result<(SolutionPath, Dag)> {
    let lambdas = resolve_grid(method, s, grid, opts)?;
    let mut points = Vec::with_capacity(lambdas.len());
    let mut warm: Option<DMatrix<f64>> = None;
    for lambda in lambdas {
        let f = fit(method, s, &Lambda::Scalar(lambda), warm.as_ref(), opts)?;
        let dag = support_dag(&f.estimate, 0.0);
        let bic = bic_score(&implied_precision(&f.estimate), s, n, dag.edge_count())?;
        warm = Some(f.estimate.clone());
        points.push(PathPoint {
            lambda,
            estimate: f.estimate,
            dag,
            bic,
        });
    }
    let path = SolutionPath { method, points };
    let best = path.best().expect("grid is nonempty").dag.clone();
    Ok((path, best))
}

/// Lasso-DAG with the per-vertex quantile penalties.
pub fn lasso_dag_quantile(s: &SymMatrix, n: usize, alpha: f64, opts: &SolverOptions) -> Result<(SolverFit, Dag)> {
    let lambdas = quantile_lambdas(s.dim(), n, alpha)?;
    let f = fit(Method::LassoDag, s, &Lambda::PerVertex(lambdas), None, opts)?;
    let d = support_dag(&f.estimate, 0.0);
    Ok((f, d))
}

/// Edge-recovery counts and rates over the `p(p−1)/2` possible edges. A rate
/// whose denominator is zero is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ppv: Option<f64>,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

pub fn structure_metrics(est: &Dag, truth: &Dag) -> Result<Metrics> {
    if est.p() != truth.p() {
        return Err(Error::DimensionMismatch {
            expected: truth.p(),
            found: est.p(),
        });
    }
    let tp = est.edges().filter(|&(i, j)| truth.has_edge(i, j)).count();
    let fp = est.edge_count() - tp;
    let fn_ = truth.edge_count() - tp;
    let tn = max_edges(truth.p()) - tp - fp - fn_;
    Ok(Metrics {
        ppv: ratio(tp, tp + fp),
        tpr: ratio(tp, tp + fn_),
        fpr: ratio(fp, fp + tn),
        tp,
        fp,
        fn_,
        tn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bic_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(bic_score(&i2, &i2, 10, 0).unwrap(), 20.0);
        let diff = bic_score(&i2, &i2, 10, 1).unwrap() - bic_score(&i2, &i2, 10, 0).unwrap();
        assert!((diff - 10f64.ln()).abs() < 1e-14);
        assert!(matches!(bic_score(&SymMatrix::zeros(2), &i2, 10, 0), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn quantile_example() {
        let l = quantile_lambdas(5, 100, 0.1).unwrap();
        // Vertex 4 has one candidate parent, so it uses index i = 2.
        assert!((l[3] - 0.465_27).abs() < 1e-4, "{}", l[3]);
        assert_eq!(l[4], l[3]);
        assert!(l.windows(2).all(|w| w[0] >= w[1]));
        let big = quantile_lambdas(5, 10_000, 0.1).unwrap();
        assert!((l[0] / big[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_examples() {
        let t = Dag::from_edges(4, &[(2, 1), (4, 3)]).unwrap();
        let m = structure_metrics(&t, &t).unwrap();
        assert_eq!((m.ppv, m.tpr, m.fpr), (Some(1.0), Some(1.0), Some(0.0)));
        let m = structure_metrics(&Dag::empty(4), &t).unwrap();
        assert_eq!((m.ppv, m.tpr, m.fpr), (None, Some(0.0), Some(0.0)));
        let m = structure_metrics(&Dag::complete(4), &Dag::empty(4)).unwrap();
        assert_eq!((m.fpr, m.tpr), (Some(1.0), None));
        assert_eq!(m.tp + m.fp + m.fn_ + m.tn, 6);
        assert!(structure_metrics(&Dag::empty(3), &t).is_err());
    }

    #[test]
    fn single_point_grid() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let (path, best) =
            path_fit_and_select(Method::Cscs, &s, 50, &GridSpec::Explicit(vec![0.1]), &SolverOptions::default())
                .unwrap();
        assert_eq!(path.points.len(), 1);
        assert_eq!(best, path.points[0].dag);
    }

    #[test]
    fn grids_strictly_decrease() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.5, 0.2], vec![0.5, 1.0, 0.3], vec![0.2, 0.3, 1.0]]).unwrap();
        let opts = SolverOptions::default();
        for spec in [
            GridSpec::Explicit(vec![0.1, 0.3, 0.1, 0.2]),
            GridSpec::geometric_default(),
            GridSpec::around_truth(1, 10),
        ] {
            let g = resolve_grid(Method::LassoDag, &s, &spec, &opts).unwrap();
            assert!(g.windows(2).all(|w| w[0] > w[1]), "{spec:?}: {g:?}");
        }
    }
}
