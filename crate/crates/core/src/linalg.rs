//! Dense symmetric positive-definite kernel.
//!
//! Everything downstream works with log-determinants of small principal
//! submatrices and Schur-complement conditional variances, so this module
//! keeps a single Cholesky routine and builds both on top of it. A pivot
//! that is not strictly positive is a hard error; nothing is jittered.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix. Symmetry is checked on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(DMatrix<f64>);

const SYMMETRY_TOL: f64 = 1e-9;

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidConfig(format!(
                        "matrix is not symmetric at ({}, {}): {a} vs {b}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self::from_lower(m))
    }

    /// Symmetrizes by mirroring the lower triangle. Used for matrices that are
    /// symmetric by construction but may carry rounding asymmetry.
    pub fn from_lower(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                m[(j, i)] = m[(i, j)];
            }
        }
        SymMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Entry at 1-based position (i, j).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix(&self.0 * c)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(SymMatrix(&self.0 + &other.0))
    }

    pub fn add_diagonal(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        SymMatrix(m)
    }

    /// Principal submatrix on a set of 1-based indices, copied contiguously.
    pub fn principal(&self, idx: &IndexSet) -> DMatrix<f64> {
        let z: Vec<usize> = idx.zero_based().collect();
        DMatrix::from_fn(z.len(), z.len(), |a, b| self.0[(z[a], z[b])])
    }

    /// Column vector `(A_{k i})_{k in idx}`.
    pub fn cross(&self, idx: &IndexSet, i: usize) -> DVector<f64> {
        DVector::from_iterator(idx.len(), idx.zero_based().map(|k| self.0[(k, i - 1)]))
    }

    pub fn inverse(&self) -> Result<Self> {
        let chol = Cholesky::new(&self.0)?;
        Ok(SymMatrix::from_lower(chol.inverse()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Strictly increasing list of 1-based vertex labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Sorts and deduplicates; rejects label 0.
    pub fn new(mut v: Vec<usize>) -> Result<Self> {
        v.sort_unstable();
        v.dedup();
        if v.first() == Some(&0) {
            return Err(Error::InvalidConfig("vertex labels are 1-based".into()));
        }
        Ok(IndexSet(v))
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        IndexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn zero_based(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|i| i - 1)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    /// Returns true if `i` was newly inserted.
    pub fn insert(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    pub fn remove(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

/// Lower-triangular Cholesky factor `A = G Gᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: DMatrix<f64>,
}

impl Cholesky {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let mut g = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= g[(j, k)] * g[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite(format!(
                    "pivot {} of {} is {:.3e}",
                    j + 1,
                    n,
                    d
                )));
            }
            let djj = d.sqrt();
            g[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= g[(i, k)] * g[(j, k)];
                }
                g[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { factor: g })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.factor.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let g = &self.factor;
        let n = g.nrows();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= g[(i, k)] * y[k];
            }
            y[i] = s / g[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= g[(k, i)] * y[k];
            }
            y[i] = s / g[(i, i)];
        }
        y
    }

    /// Solves `Gᵀ x = b` (used to draw from `N(0, A⁻¹)` as `x = G⁻ᵀ z`).
    pub fn solve_upper(&self, b: &DVector<f64>) -> DVector<f64> {
        let g = &self.factor;
        let n = g.nrows();
        let mut x = b.clone();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= g[(k, i)] * x[k];
            }
            x[i] = s / g[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.factor.nrows();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }
}

/// Natural log of `det(A)`; the 0×0 matrix has determinant 1.
pub fn log_det_pd(a: &SymMatrix) -> Result<f64> {
    Ok(Cholesky::new(a.as_matrix())?.log_det())
}

/// Conditional variance `A_{i|M} = A_ii − A_iM A_MM⁻¹ A_Mi` (1-based `i`).
pub fn schur_conditional(a: &SymMatrix, i: usize, m: &IndexSet) -> Result<f64> {
    Ok(ConditionalBlock::new(a, i, m)?.conditional_variance)
}

/// Everything the per-vertex formulas need from `A` restricted to `{i} ∪ M`:
/// the factorized `A_MM`, the regression `A_MM⁻¹ A_Mi`, and `A_{i|M}`.
#[derive(Debug, Clone)]
pub struct ConditionalBlock {
    pub chol: Cholesky,
    pub coef: DVector<f64>,
    pub conditional_variance: f64,
}

impl ConditionalBlock {
    pub fn new(a: &SymMatrix, i: usize, m: &IndexSet) -> Result<Self> {
        debug_assert!(!m.contains(i));
        let amm = a.principal(m);
        let chol = Cholesky::new(&amm)?;
        let ami = a.cross(m, i);
        let coef = chol.solve(&ami);
        let cv = a.get(i, i) - ami.dot(&coef);
        if !(cv > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "conditional variance of vertex {i} is {cv:.3e}"
            )));
        }
        Ok(ConditionalBlock {
            chol,
            coef,
            conditional_variance: cv,
        })
    }

    /// `log det(A_MM)`.
    pub fn log_det_parents(&self) -> f64 {
        self.chol.log_det()
    }

    /// `log det(A_{{i}∪M})` via `|A_{≥}| = |A_MM| · A_{i|M}`.
    pub fn log_det_family(&self) -> f64 {
        self.chol.log_det() + self.conditional_variance.ln()
    }
}

/// Numerically stable `log Σ exp(x_k)`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m2() -> SymMatrix {
        SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(log_det_pd(&SymMatrix::identity(3)).unwrap(), 0.0);
        assert_eq!(log_det_pd(&SymMatrix::zeros(0)).unwrap(), 0.0);
        assert_abs_diff_eq!(log_det_pd(&m2()).unwrap(), 3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn log_det_rejects_indefinite() {
        let a = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(log_det_pd(&a), Err(Error::NotPositiveDefinite(_))));
        let z = SymMatrix::zeros(2);
        assert!(log_det_pd(&z).is_err());
    }

    #[test]
    fn schur_examples() {
        let m = IndexSet::new(vec![2]).unwrap();
        assert_abs_diff_eq!(schur_conditional(&m2(), 1, &m).unwrap(), 1.5, epsilon = 1e-14);
        assert_eq!(schur_conditional(&m2(), 1, &IndexSet::empty()).unwrap(), 2.0);
        let i3 = SymMatrix::identity(3);
        let m = IndexSet::new(vec![1, 3]).unwrap();
        assert_eq!(schur_conditional(&i3, 2, &m).unwrap(), 1.0);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let r = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn index_set_normalizes() {
        let s = IndexSet::new(vec![4, 2, 4, 3]).unwrap();
        assert_eq!(s.as_slice(), &[2, 3, 4]);
        assert!(IndexSet::new(vec![0, 1]).is_err());
        let mut s = s;
        assert!(!s.insert(3));
        assert!(s.insert(1));
        assert!(s.remove(4));
        assert_eq!(s.as_slice(), &[1, 2, 3]);
    }

    #[test]
    fn log_sum_exp_stable() {
        assert_abs_diff_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
