use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::wishart::Scorer;

/// Where a candidate graph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Seed,
    Threshold,
    Cv,
    Sss,
    Hillclimb,
    BaselinePath,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Seed => "seed",
            Provenance::Threshold => "threshold",
            Provenance::Cv => "cv",
            Provenance::Sss => "sss",
            Provenance::Hillclimb => "hillclimb",
            Provenance::BaselinePath => "baseline-path",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub dag: Dag,
    pub score: Option<f64>,
    pub provenance: Provenance,
}

/// Deduplicated set of candidate DAGs with cached scores, kept in insertion
/// order. Insertion order is the canonical order for every reduction, so
/// results never depend on thread count.
#[derive(Debug, Clone, Default)]
pub struct CandidatePool {
    entries: Vec<PoolEntry>,
    index: HashMap<Dag, usize>,
    max_edges: Option<usize>,
}

impl CandidatePool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pool that silently rejects graphs with more than `max_edges` edges.
    pub fn with_edge_cap(max_edges: Option<usize>) -> Self {
        CandidatePool {
            max_edges,
            ..Self::default()
        }
    }

    pub fn edge_cap(&self) -> Option<usize> {
        self.max_edges
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn contains(&self, d: &Dag) -> bool {
        self.index.contains_key(d)
    }

    pub fn get(&self, d: &Dag) -> Option<&PoolEntry> {
        self.index.get(d).map(|&k| &self.entries[k])
    }

    /// Returns false for duplicates and graphs over the edge cap.
    pub fn insert(&mut self, dag: Dag, provenance: Provenance) -> bool {
        self.insert_scored(dag, None, provenance)
    }

    pub fn insert_scored(&mut self, dag: Dag, score: Option<f64>, provenance: Provenance) -> bool {
        if self.max_edges.is_some_and(|m| dag.edge_count() > m) {
            return false;
        }
        if let Some(&k) = self.index.get(&dag) {
            if self.entries[k].score.is_none() {
                self.entries[k].score = score;
            }
            return false;
        }
        self.index.insert(dag.clone(), self.entries.len());
        self.entries.push(PoolEntry {
            dag,
            score,
            provenance,
        });
        true
    }

    pub fn extend<I: IntoIterator<Item = Dag>>(&mut self, dags: I, provenance: Provenance) -> usize {
        dags.into_iter().filter(|d| self.insert(d.clone(), provenance)).count()
    }

    /// Merges `other` into `self`, keeping the first provenance and any cached score.
    pub fn merge(&mut self, other: CandidatePool) {
        for e in other.entries {
            self.insert_scored(e.dag, e.score, e.provenance);
        }
    }

    /// Scores every entry that has no cached score, in parallel.
    pub fn score_all<S: Scorer + ?Sized>(&mut self, scorer: &S) -> Result<()> {
        let todo: Vec<usize> = (0..self.entries.len())
            .filter(|&k| self.entries[k].score.is_none())
            .collect();
        let scores: Vec<Result<f64>> = todo
            .par_iter()
            .map(|&k| scorer.score(&self.entries[k].dag))
            .collect();
        for (k, s) in todo.into_iter().zip(scores) {
            self.entries[k].score = Some(s?);
        }
        Ok(())
    }

    pub fn provenance_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.provenance.label().to_string()).or_insert(0) += 1;
        }
        m
    }

    /// Scored entries, best first, with the same tie rule as [`select_best`].
    pub fn ranked(&self) -> Vec<&PoolEntry> {
        let mut v: Vec<&PoolEntry> = self.entries.iter().filter(|e| e.score.is_some()).collect();
        v.sort_by(|a, b| compare_candidates((&a.dag, a.score.unwrap()), (&b.dag, b.score.unwrap())));
        v
    }
}

/// Orders candidates best first: higher score, then fewer edges, then the
/// lexicographically smaller edge list.
pub fn compare_candidates(a: (&Dag, f64), b: (&Dag, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1)
        .then_with(|| a.0.edge_count().cmp(&b.0.edge_count()))
        .then_with(|| a.0.edges().cmp(b.0.edges()))
}

/// Posterior mode over the pool. Scores are computed (and cached) as needed.
pub fn select_best<S: Scorer + ?Sized>(pool: &mut CandidatePool, scorer: &S) -> Result<(Dag, f64)> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    pool.score_all(scorer)?;
    let best = pool
        .entries
        .iter()
        .min_by(|a, b| compare_candidates((&a.dag, a.score.unwrap()), (&b.dag, b.score.unwrap())))
        .expect("pool is nonempty");
    Ok((best.dag.clone(), best.score.unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IndexSet;

    /// Scores a DAG by a fixed per-edge weight table.
    struct EdgeCount(f64);

    impl Scorer for EdgeCount {
        fn p(&self) -> usize {
            3
        }
        fn vertex_score(&self, _j: usize, parents: &IndexSet) -> Result<f64> {
            Ok(self.0 * parents.len() as f64)
        }
    }

    #[test]
    fn dedup_and_counts() {
        let mut pool = CandidatePool::new();
        assert!(pool.insert(Dag::empty(3), Provenance::Seed));
        assert!(!pool.insert(Dag::empty(3), Provenance::Cv));
        assert!(pool.insert(Dag::complete(3), Provenance::Cv));
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.provenance_counts()["seed"], 1);
        assert_eq!(pool.provenance_counts()["cv"], 1);
    }

    #[test]
    fn edge_cap_filters() {
        let mut pool = CandidatePool::with_edge_cap(Some(1));
        assert!(!pool.insert(Dag::complete(3), Provenance::Seed));
        assert!(pool.insert(Dag::from_edges(3, &[(2, 1)]).unwrap(), Provenance::Seed));
    }

    #[test]
    fn select_best_rules() {
        let mut pool = CandidatePool::new();
        assert_eq!(select_best(&mut pool, &EdgeCount(1.0)), Err(Error::EmptyPool));

        pool.insert(Dag::from_edges(3, &[(3, 1)]).unwrap(), Provenance::Seed);
        let (d, s) = select_best(&mut pool, &EdgeCount(1.0)).unwrap();
        assert_eq!((d.edge_count(), s), (1, 1.0));

        // All scores tie at zero: fewest edges wins, then smallest edge list.
        let mut pool = CandidatePool::new();
        pool.insert(Dag::complete(3), Provenance::Seed);
        pool.insert(Dag::from_edges(3, &[(3, 2)]).unwrap(), Provenance::Seed);
        pool.insert(Dag::from_edges(3, &[(2, 1)]).unwrap(), Provenance::Seed);
        let (d, _) = select_best(&mut pool, &EdgeCount(0.0)).unwrap();
        assert_eq!(d, Dag::from_edges(3, &[(2, 1)]).unwrap());
    }
}
