//! Independent oracles shared by the integration tests. Nothing here calls the
//! code under test except for plain data types.

#![allow(dead_code)]

use std::io::Write;

use bayes_dag::prelude::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Normalizing constant of the DAG-Wishart kernel by quadrature. The
/// kernel factors over vertices; for vertex `j` with parents `pa`, the
/// Gaussian integral over the free column of `L` is done in closed form and
/// the remaining integral over `x = 1/D_jj` numerically. Needs every
/// `α_j − ν_j ≥ 4` so the integrand is bounded at zero.
pub fn quadrature_log_norm_const(d: &Dag, u: &DMatrix<f64>, alpha: &[f64]) -> f64 {
    let mut total = 0.0;
    for j in 1..=d.p() {
        let pa: Vec<usize> = d.parents(j).iter().map(|i| i - 1).collect();
        let nu = pa.len() as f64;
        let c = u[(j - 1, j - 1)];
        let (log_gauss, kappa) = if pa.is_empty() {
            (0.0, c)
        } else {
            let a = DMatrix::from_fn(pa.len(), pa.len(), |r, s| u[(pa[r], pa[s])]);
            let b = DVector::from_fn(pa.len(), |r, _| u[(pa[r], j - 1)]);
            let ainv = a.clone().try_inverse().unwrap();
            let kappa = c - (b.transpose() * &ainv * &b)[(0, 0)];
            let log_gauss = 0.5 * nu * (2.0 * std::f64::consts::PI).ln() - 0.5 * a.determinant().ln();
            (log_gauss, kappa)
        };
        let m = alpha[j - 1] / 2.0 - 2.0 - nu / 2.0;
        assert!(m >= 0.0, "quadrature oracle needs alpha - nu >= 4");
        // Scale so the integrand peaks near 1.
        let peak = if m > 0.0 { 2.0 * m / kappa } else { 0.0 };
        let log_peak = if m > 0.0 { m * peak.ln() - 0.5 * kappa * peak } else { 0.0 };
        let f = |x: f64| {
            if x <= 0.0 {
                if m == 0.0 { (-log_peak).exp() } else { 0.0 }
            } else {
                (m * x.ln() - 0.5 * kappa * x - log_peak).exp()
            }
        };
        let upper = (2.0 / kappa) * (4.0 * m + 100.0);
        let integral = simpson(&f, 0.0, upper, 1e-13);
        total += log_gauss + integral.ln() + log_peak;
    }
    total
}

/// `−½ tr(L D⁻¹ Lᵀ U) − Σ (α_i/2) ln D_ii`, written out directly.
pub fn direct_log_kernel(u: &DMatrix<f64>, alpha: &[f64], dvec: &DVector<f64>, l: &DMatrix<f64>) -> f64 {
    let p = dvec.len();
    let dinv = DMatrix::from_diagonal(&dvec.map(|v| 1.0 / v));
    let omega = l * dinv * l.transpose();
    let tr = (omega * u).trace();
    -0.5 * tr - (0..p).map(|i| 0.5 * alpha[i] * dvec[i].ln()).sum::<f64>()
}

/// Random symmetric positive definite matrix with entries of order one.
pub fn random_pd<R: Rng>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let b = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let a = &b * b.transpose() / p as f64 + DMatrix::identity(p, p) * 0.5;
    0.5 * (&a + a.transpose())
}

/// Random DAG on `p` vertices with edge probability `prob`.
pub fn random_dag<R: Rng>(p: usize, prob: f64, rng: &mut R) -> Dag {
    let edges: Vec<(usize, usize)> = (1..p)
        .flat_map(|j| ((j + 1)..=p).map(move |i| (i, j)))
        .filter(|_| rng.random::<f64>() < prob)
        .collect();
    Dag::from_edges(p, &edges).unwrap()
}

/// FISTA for `min_x xᵀ A x + 2 bᵀ x + λ‖x‖₁`, iterated to a fixed point.
pub fn fista_lasso(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let m = a.nrows();
    let lip = 2.0 * a.clone().symmetric_eigenvalues().max();
    let step = 1.0 / lip;
    let soft = |v: f64, t: f64| v.signum() * (v.abs() - t).max(0.0);
    let mut x = DVector::zeros(m);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let grad = 2.0 * (a * &y + b);
        let z = &y - step * grad;
        let xn = z.map(|v| soft(v, step * lambda));
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let yn = &xn + ((t - 1.0) / tn) * (&xn - &x);
        let change = (&xn - &x).amax();
        x = xn;
        y = yn;
        t = tn;
        if change < 1e-15 {
            break;
        }
    }
    x
}

/// Prints a line straight to the process stderr so it survives output capture.
pub fn report(line: &str) {
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{line}");
}

/// Conditional variance `Σ_ii − Σ_iM Σ_MM⁻¹ Σ_Mi` with 0-based indices.
pub fn conditional_variance(sigma: &DMatrix<f64>, i: usize, m: &[usize]) -> f64 {
    if m.is_empty() {
        return sigma[(i, i)];
    }
    let smm = DMatrix::from_fn(m.len(), m.len(), |r, c| sigma[(m[r], m[c])]);
    let smi = DVector::from_fn(m.len(), |r, _| sigma[(m[r], i)]);
    let sol = smm.lu().solve(&smi).unwrap();
    sigma[(i, i)] - smi.dot(&sol)
}
