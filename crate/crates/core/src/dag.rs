//! Ordered DAGs and their Cholesky parametrization.
//!
//! Vertices are labelled `1..=p` and every edge points from a larger label to
//! a smaller one, so `(i, j)` with `i > j` means `i → j` and `i ∈ pa(j)`.
//! Acyclicity is therefore structural. A precision matrix factors uniquely as
//! `Ω = L D⁻¹ Lᵀ` with `L` unit lower-triangular, and the DAG is read off the
//! zero pattern of `L`: `L_ij ≠ 0` only if `i ∈ pa(j)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, IndexSet, SymMatrix};

/// Largest `p` accepted by [`enumerate_all_dags`].
pub const MAX_ENUMERATION_P: usize = 6;

/// A DAG on `p` vertices consistent with the parent ordering.
///
/// Equality and hashing are on the sorted parent sets, which is the canonical
/// edge-set identity used for deduplication.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "DagJson", into = "DagJson")]
pub struct Dag {
    p: usize,
    parents: Vec<IndexSet>,
}

#[derive(Serialize, Deserialize)]
struct DagJson {
    p: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<DagJson> for Dag {
    type Error = Error;
    fn try_from(j: DagJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|e| (e[0], e[1])).collect();
        Dag::from_edges(j.p, &edges)
    }
}

impl From<Dag> for DagJson {
    fn from(d: Dag) -> Self {
        DagJson {
            p: d.p,
            edges: d.edges().map(|(i, j)| [i, j]).collect(),
        }
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag(p={}, edges=[", self.p)?;
        for (k, (i, j)) in self.edges().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}->{j}")?;
        }
        write!(f, "])")
    }
}

/// Number of possible edges `C(p, 2)`.
pub fn max_edges(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

impl Dag {
    pub fn empty(p: usize) -> Self {
        Dag {
            p,
            parents: vec![IndexSet::empty(); p],
        }
    }

    pub fn complete(p: usize) -> Self {
        let parents = (1..=p)
            .map(|j| IndexSet::from_sorted_unchecked(((j + 1)..=p).collect()))
            .collect();
        Dag { p, parents }
    }

    /// Builds a DAG from `(i, j)` pairs meaning `i → j`; requires `p ≥ i > j ≥ 1`.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut d = Dag::empty(p);
        for &(i, j) in edges {
            if !(j >= 1 && i > j && i <= p) {
                return Err(Error::InvalidConfig(format!(
                    "edge ({i}, {j}) must satisfy {p} >= i > j >= 1"
                )));
            }
            d.parents[j - 1].insert(i);
        }
        Ok(d)
    }

    pub fn from_parent_sets(parents: Vec<IndexSet>) -> Result<Self> {
        let p = parents.len();
        for (idx, pa) in parents.iter().enumerate() {
            let j = idx + 1;
            if pa.iter().any(|i| i <= j || i > p) {
                return Err(Error::InvalidConfig(format!(
                    "parents of vertex {j} must lie in {}..={p}",
                    j + 1
                )));
            }
        }
        Ok(Dag { p, parents })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `pa_j`, 1-based.
    pub fn parents(&self, j: usize) -> &IndexSet {
        &self.parents[j - 1]
    }

    pub fn parent_sets(&self) -> &[IndexSet] {
        &self.parents
    }

    /// `ν_j = |pa_j|`.
    pub fn nu(&self, j: usize) -> usize {
        self.parents[j - 1].len()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (1..i).filter(|&j| self.parents[j - 1].contains(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(IndexSet::len).sum()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(IndexSet::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i > j && j >= 1 && i <= self.p && self.parents[j - 1].contains(i)
    }

    /// Edges `(i, j)` ordered by child `j`, then parent `i`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(jz, pa)| pa.iter().map(move |i| (i, jz + 1)))
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }

    pub fn absent_edges(&self) -> Vec<(usize, usize)> {
        all_edges(self.p)
            .filter(|&(i, j)| !self.parents[j - 1].contains(i))
            .collect()
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> bool {
        assert!(i > j && j >= 1 && i <= self.p, "edge ({i}, {j}) out of range");
        self.parents[j - 1].insert(i)
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        assert!(i > j && j >= 1 && i <= self.p, "edge ({i}, {j}) out of range");
        self.parents[j - 1].remove(i)
    }

    pub fn with_edge(&self, i: usize, j: usize) -> Dag {
        let mut d = self.clone();
        d.add_edge(i, j);
        d
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Dag {
        let mut d = self.clone();
        d.remove_edge(i, j);
        d
    }

    pub fn is_subgraph_of(&self, other: &Dag) -> bool {
        self.p == other.p
            && self
                .parents
                .iter()
                .zip(&other.parents)
                .all(|(a, b)| a.is_subset(b))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dag serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// All `C(p, 2)` possible edges `(i, j)`, `i > j`, in child-major order.
pub fn all_edges(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=p).flat_map(move |j| ((j + 1)..=p).map(move |i| (i, j)))
}

/// Cholesky parameter `(D, L)`: positive conditional variances and a unit
/// lower-triangular `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyParam {
    pub d: DVector<f64>,
    pub l: DMatrix<f64>,
}

impl CholeskyParam {
    pub fn new(d: DVector<f64>, l: DMatrix<f64>) -> Result<Self> {
        let p = d.len();
        if l.nrows() != p || l.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: l.nrows(),
            });
        }
        if let Some(k) = d.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidConfig(format!("D[{}] must be positive", k + 1)));
        }
        for i in 0..p {
            if l[(i, i)] != 1.0 {
                return Err(Error::InvalidConfig(format!("L[{0},{0}] must be 1", i + 1)));
            }
            for j in (i + 1)..p {
                if l[(i, j)] != 0.0 {
                    return Err(Error::InvalidConfig("L must be lower triangular".into()));
                }
            }
        }
        Ok(CholeskyParam { d, l })
    }

    pub fn identity(p: usize) -> Self {
        CholeskyParam {
            d: DVector::from_element(p, 1.0),
            l: DMatrix::identity(p, p),
        }
    }

    pub fn p(&self) -> usize {
        self.d.len()
    }

    /// Errors if `L` has a nonzero outside the parent sets of `dag`.
    pub fn check_support(&self, dag: &Dag) -> Result<()> {
        if dag.p() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: dag.p(),
                found: self.p(),
            });
        }
        for j in 1..=self.p() {
            for i in (j + 1)..=self.p() {
                if self.l[(i - 1, j - 1)] != 0.0 && !dag.has_edge(i, j) {
                    return Err(Error::SupportViolation { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// `Ω = L D⁻¹ Lᵀ` → `(D, L)`.
pub fn modified_cholesky(omega: &SymMatrix) -> Result<CholeskyParam> {
    let chol = Cholesky::new(omega.as_matrix())?;
    let g = chol.factor();
    let p = g.nrows();
    let mut l = g.clone();
    let mut d = DVector::zeros(p);
    for j in 0..p {
        let gjj = g[(j, j)];
        d[j] = 1.0 / (gjj * gjj);
        for i in j..p {
            l[(i, j)] /= gjj;
        }
        l[(j, j)] = 1.0;
    }
    Ok(CholeskyParam { d, l })
}

/// `(D, L)` → `Ω = L D⁻¹ Lᵀ`.
pub fn compose(param: &CholeskyParam) -> SymMatrix {
    let mut scaled = param.l.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= param.d[j];
    }
    SymMatrix::from_lower(&scaled * param.l.transpose())
}

/// DAG with `i ∈ pa_j` iff `|L_ij| > τ`.
pub fn support_dag(l: &DMatrix<f64>, tau: f64) -> Dag {
    let p = l.nrows();
    let parents = (0..p)
        .map(|j| {
            IndexSet::from_sorted_unchecked(
                ((j + 1)..p).filter(|&i| l[(i, j)].abs() > tau).map(|i| i + 1).collect(),
            )
        })
        .collect();
    Dag { p, parents }
}

/// The four alternative-graph constructions compared against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PerturbCase {
    /// Subgraph with half the edges.
    SubHalf,
    /// Supergraph with twice the edges.
    SuperDouble,
    /// Uniform random graph with half the edges.
    RandHalf,
    /// Uniform random graph with twice the edges.
    RandDouble,
}

impl PerturbCase {
    pub const ALL: [PerturbCase; 4] = [
        PerturbCase::SubHalf,
        PerturbCase::SuperDouble,
        PerturbCase::RandHalf,
        PerturbCase::RandDouble,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PerturbCase::SubHalf => "sub_half",
            PerturbCase::SuperDouble => "super_double",
            PerturbCase::RandHalf => "rand_half",
            PerturbCase::RandDouble => "rand_double",
        }
    }
}

pub fn perturb<R: Rng + ?Sized>(d0: &Dag, case: PerturbCase, rng: &mut R) -> Result<Dag> {
    let e = d0.edge_count();
    let p = d0.p();
    let total = max_edges(p);
    if e < 2 {
        return Err(Error::InfeasibleEdgeCount {
            requested: e,
            reason: "the reference graph needs at least 2 edges".into(),
        });
    }
    let double = 2 * e;
    if matches!(case, PerturbCase::SuperDouble | PerturbCase::RandDouble) && double > total {
        return Err(Error::InfeasibleEdgeCount {
            requested: double,
            reason: format!("only {total} edges exist on {p} vertices"),
        });
    }
    let pick = |population: &[(usize, usize)], k: usize, rng: &mut R| -> Vec<(usize, usize)> {
        let mut idx = sample(rng, population.len(), k).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|t| population[t]).collect()
    };
    let out = match case {
        PerturbCase::SubHalf => {
            let kept = pick(&d0.edge_list(), e / 2, rng);
            Dag::from_edges(p, &kept)?
        }
        PerturbCase::SuperDouble => {
            let mut d = d0.clone();
            for (i, j) in pick(&d0.absent_edges(), e, rng) {
                d.add_edge(i, j);
            }
            d
        }
        PerturbCase::RandHalf | PerturbCase::RandDouble => {
            let k = if case == PerturbCase::RandHalf { e / 2 } else { double };
            let all: Vec<_> = all_edges(p).collect();
            Dag::from_edges(p, &pick(&all, k, rng))?
        }
    };
    Ok(out)
}

/// Every ordered DAG on `p ≤ 6` vertices, each once.
pub fn enumerate_all_dags(p: usize) -> Result<Vec<Dag>> {
    if p > MAX_ENUMERATION_P {
        return Err(Error::TooLarge {
            p,
            max: MAX_ENUMERATION_P,
        });
    }
    let edges: Vec<_> = all_edges(p).collect();
    let count = 1usize << edges.len();
    Ok((0..count)
        .map(|mask| {
            let mut d = Dag::empty(p);
            for (b, &(i, j)) in edges.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    d.add_edge(i, j);
                }
            }
            d
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn modified_cholesky_examples() {
        let id = modified_cholesky(&SymMatrix::identity(4)).unwrap();
        assert_eq!(id, CholeskyParam::identity(4));

        let omega = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let cp = modified_cholesky(&omega).unwrap();
        assert_abs_diff_eq!(cp.l[(1, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cp.d[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cp.d[1], 2.0, epsilon = 1e-15);
        let back = compose(&cp);
        assert_abs_diff_eq!(back.get(1, 1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(back.get(2, 1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(back.get(2, 2), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn compose_identity() {
        assert_eq!(compose(&CholeskyParam::identity(3)), SymMatrix::identity(3));
    }

    #[test]
    fn modified_cholesky_rejects_indefinite() {
        let a = SymMatrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        assert!(matches!(modified_cholesky(&a), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn support_dag_examples() {
        assert_eq!(support_dag(&DMatrix::identity(4, 4), 0.3), Dag::empty(4));
        let dense = DMatrix::from_fn(4, 4, |i, j| if i > j { 0.1 } else if i == j { 1.0 } else { 0.0 });
        assert_eq!(support_dag(&dense, 0.0), Dag::complete(4));
        let mut l = DMatrix::identity(3, 3);
        l[(1, 0)] = 0.3;
        l[(2, 0)] = 0.05;
        assert_eq!(support_dag(&l, 0.1), Dag::from_edges(3, &[(2, 1)]).unwrap());
    }

    #[test]
    fn support_violation_detected() {
        let mut cp = CholeskyParam::identity(3);
        cp.l[(2, 0)] = 0.4;
        let d = Dag::from_edges(3, &[(2, 1)]).unwrap();
        assert_eq!(cp.check_support(&d), Err(Error::SupportViolation { row: 3, col: 1 }));
        assert!(cp.check_support(&Dag::complete(3)).is_ok());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_all_dags(2).unwrap().len(), 2);
        assert_eq!(enumerate_all_dags(4).unwrap().len(), 64);
        let five = enumerate_all_dags(5).unwrap();
        assert_eq!(five.len(), 1024);
        let uniq: HashSet<_> = five.iter().collect();
        assert_eq!(uniq.len(), 1024);
        assert!(matches!(enumerate_all_dags(7), Err(Error::TooLarge { p: 7, .. })));
    }

    #[test]
    fn perturb_edge_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d0 = Dag::from_edges(6, &[(2, 1), (3, 1), (4, 2), (6, 5)]).unwrap();
        let sub = perturb(&d0, PerturbCase::SubHalf, &mut rng).unwrap();
        assert_eq!(sub.edge_count(), 2);
        assert!(sub.is_subgraph_of(&d0));
        let sup = perturb(&d0, PerturbCase::SuperDouble, &mut rng).unwrap();
        assert_eq!(sup.edge_count(), 8);
        assert!(d0.is_subgraph_of(&sup));
        assert_eq!(perturb(&d0, PerturbCase::RandDouble, &mut rng).unwrap().edge_count(), 8);

        let two = Dag::from_edges(3, &[(2, 1), (3, 2)]).unwrap();
        assert_eq!(perturb(&two, PerturbCase::RandHalf, &mut rng).unwrap().edge_count(), 1);
    }

    #[test]
    fn perturb_infeasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let one = Dag::from_edges(3, &[(2, 1)]).unwrap();
        assert!(matches!(
            perturb(&one, PerturbCase::SubHalf, &mut rng),
            Err(Error::InfeasibleEdgeCount { .. })
        ));
        let two = Dag::from_edges(3, &[(2, 1), (3, 1)]).unwrap();
        assert!(perturb(&two, PerturbCase::SuperDouble, &mut rng).is_err());
    }

    #[test]
    fn json_shape() {
        let d = Dag::from_edges(3, &[(3, 1), (2, 1)]).unwrap();
        assert_eq!(d.to_json(), r#"{"p":3,"edges":[[2,1],[3,1]]}"#);
        assert_eq!(Dag::from_json(&d.to_json()).unwrap(), d);
        assert!(Dag::from_json(r#"{"p":3,"edges":[[1,2]]}"#).is_err());
    }

    #[test]
    fn children_and_degrees() {
        let d = Dag::from_edges(4, &[(4, 1), (4, 2), (3, 2)]).unwrap();
        assert_eq!(d.children(4), vec![1, 2]);
        assert_eq!(d.nu(2), 2);
        assert_eq!(d.max_in_degree(), 2);
        assert_eq!(d.absent_edges().len(), 3);
    }
}
