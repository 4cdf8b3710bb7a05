//! Finite-sample report on the regularity conditions behind the consistency
//! results. The asymptotic conditions are of the form "quantity → 0"; at a
//! fixed `(n, p)` we report the quantity and flag it as passing when it is
//! below 1. Hard inequalities (eigenvalue bounds, shape gaps) are checked
//! exactly.

use serde::{Deserialize, Serialize};

use super::DagWishartHyper;
use crate::dag::{modified_cholesky, Dag};
use crate::error::Result;
use crate::linalg::SymMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConfig {
    pub k: f64,
    pub epsilon0: f64,
    /// Max parents per vertex; computed from the true DAG when absent.
    #[serde(default)]
    pub d: Option<f64>,
    /// Smallest nonzero `|L₀|`; computed from `Ω₀` when absent.
    #[serde(default)]
    pub s: Option<f64>,
    /// `η_n`; computed as `d (log p / n)^{(1/2)/(1 + k/2)}` when absent.
    #[serde(default)]
    pub eta: Option<f64>,
    pub q: f64,
    pub c: f64,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub id: u8,
    pub passed: bool,
    pub quantities: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<AssumptionCheck>,
}

impl DiagnosticsReport {
    pub fn check(&self, id: u8) -> &AssumptionCheck {
        &self.checks[usize::from(id) - 1]
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const EIG_TOL: f64 = 1e-10;

/// Never fails on a violated assumption; only a non-PD `Ω₀` is an error.
pub fn assumption_diagnostics(
    omega0: &SymMatrix,
    dag0: &Dag,
    hyper: &DagWishartHyper,
    cfg: &AsymptoticConfig,
    n: usize,
    p: usize,
) -> Result<DiagnosticsReport> {
    let nf = n as f64;
    let log_p_over_n = (p.max(2) as f64).ln() / nf;
    let k = cfg.k;
    let eps = cfg.epsilon0;

    let ev = omega0.eigenvalues();
    let (eig_min, eig_max) = (ev[0], ev[ev.len() - 1]);
    let a1_rate = log_p_over_n.powf(0.5 - 1.0 / (2.0 + k)) / eps.powi(4);
    let a1 = AssumptionCheck {
        id: 1,
        passed: eps > 0.0
            && eps <= 1.0
            && eps <= eig_min + EIG_TOL
            && eig_max <= 1.0 / eps + EIG_TOL
            && a1_rate < 1.0,
        quantities: vec![
            ("eig_min".into(), eig_min),
            ("eig_max".into(), eig_max),
            ("rate".into(), a1_rate),
        ],
    };

    let d = cfg.d.unwrap_or(dag0.max_in_degree() as f64);
    let a2_first = d.powf(2.0 + k) * log_p_over_n.sqrt();
    let a2_second = log_p_over_n.sqrt().powf(k / (2.0 * (k + 2.0))) * nf.ln();
    let a2 = AssumptionCheck {
        id: 2,
        passed: a2_first < 1.0 && a2_second < 1.0,
        quantities: vec![
            ("d".into(), d),
            ("d_rate".into(), a2_first),
            ("log_n_rate".into(), a2_second),
        ],
    };

    let eta = cfg
        .eta
        .unwrap_or_else(|| d * log_p_over_n.powf(0.5 / (1.0 + k / 2.0)));
    let q_n = (-eta * nf).exp();
    let a3 = AssumptionCheck {
        id: 3,
        passed: cfg.q > 0.0 && cfg.q <= q_n,
        quantities: vec![("eta".into(), eta), ("q_n".into(), q_n), ("q".into(), cfg.q)],
    };

    let s = match cfg.s {
        Some(s) => s,
        None => {
            let l0 = modified_cholesky(omega0)?.l;
            dag0.edges()
                .map(|(i, j)| l0[(i - 1, j - 1)].abs())
                .fold(f64::INFINITY, f64::min)
        }
    };
    let signal = eta * d / (eps * s * s);
    let a4 = AssumptionCheck {
        id: 4,
        passed: s.is_finite() && signal < 1.0,
        quantities: vec![("s".into(), s), ("signal_ratio".into(), signal)],
    };

    let gaps: Vec<f64> = (1..=dag0.p())
        .map(|j| hyper.alpha[j - 1] - dag0.nu(j) as f64)
        .collect();
    let gap_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let gap_max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let uev = hyper.u.eigenvalues();
    let (u_min, u_max) = (uev[0], uev[uev.len() - 1]);
    let a5 = AssumptionCheck {
        id: 5,
        passed: gap_min > 2.0
            && gap_max < cfg.c
            && cfg.delta1 > 0.0
            && cfg.delta1 <= u_min + EIG_TOL
            && u_max <= cfg.delta2 + EIG_TOL,
        quantities: vec![
            ("shape_gap_min".into(), gap_min),
            ("shape_gap_max".into(), gap_max),
            ("u_eig_min".into(), u_min),
            ("u_eig_max".into(), u_max),
        ],
    };

    Ok(DiagnosticsReport {
        checks: vec![a1, a2, a3, a4, a5],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AsymptoticConfig {
        AsymptoticConfig {
            k: 1.0,
            epsilon0: 1.0,
            d: None,
            s: None,
            eta: None,
            q: 0.01,
            c: 12.0,
            delta1: 1.0,
            delta2: 1.0,
        }
    }

    #[test]
    fn identity_truth_passes_eigen_bounds() {
        let p = 10;
        let dag0 = Dag::empty(p);
        let hyper = DagWishartHyper {
            u: SymMatrix::identity(p),
            alpha: vec![10.0; p],
        };
        let rep = assumption_diagnostics(&SymMatrix::identity(p), &dag0, &hyper, &cfg(), 1000, p).unwrap();
        assert!(rep.check(1).passed);
        assert!(rep.check(5).passed);
    }

    #[test]
    fn boundary_shape_fails() {
        let p = 3;
        let dag0 = Dag::from_edges(p, &[(2, 1)]).unwrap();
        let hyper = DagWishartHyper {
            u: SymMatrix::identity(p),
            alpha: vec![3.0, 2.0, 2.0],
        };
        let rep = assumption_diagnostics(&SymMatrix::identity(p), &dag0, &hyper, &cfg(), 100, p).unwrap();
        assert!(!rep.check(5).passed);
    }
}
