//! Local moves: single-edge additions and deletions with incremental scoring.

use rand::seq::index::sample;
use rand::Rng;

use crate::dag::{max_edges, Dag};
use crate::error::Result;
use crate::wishart::Scorer;

/// Uniformly random absent edge, or `None` for the complete graph.
pub fn random_absent_edge<R: Rng + ?Sized>(d: &Dag, rng: &mut R) -> Option<(usize, usize)> {
    let p = d.p();
    let absent = max_edges(p) - d.edge_count();
    if absent == 0 {
        return None;
    }
    let mut k = rng.random_range(0..absent);
    for j in 1..p {
        let free = p - j - d.nu(j);
        if k < free {
            let pa = d.parents(j);
            let i = ((j + 1)..=p).filter(|&i| !pa.contains(i)).nth(k)?;
            return Some((i, j));
        }
        k -= free;
    }
    None
}

/// Uniformly random present edge, or `None` for the empty graph.
pub fn random_present_edge<R: Rng + ?Sized>(d: &Dag, rng: &mut R) -> Option<(usize, usize)> {
    let e = d.edge_count();
    if e == 0 {
        return None;
    }
    d.edges().nth(rng.random_range(0..e))
}

/// Score after toggling edge `(i, j)`, given the current score.
pub fn toggled_score<S: Scorer + ?Sized>(
    scorer: &S,
    d: &Dag,
    current: f64,
    edge: (usize, usize),
) -> Result<(Dag, f64)> {
    let (i, j) = edge;
    let old = scorer.vertex_score(j, d.parents(j))?;
    let next = if d.has_edge(i, j) { d.without_edge(i, j) } else { d.with_edge(i, j) };
    let new = scorer.vertex_score(j, next.parents(j))?;
    Ok((next, current - old + new))
}

/// Up to `width` distinct single-edge toggles of `d`, chosen uniformly.
pub fn sample_toggles<R: Rng + ?Sized>(p: usize, width: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let total = max_edges(p);
    let k = width.min(total);
    let mut idx = sample(rng, total, k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|t| edge_at(p, t)).collect()
}

/// The `t`-th edge in child-major order.
fn edge_at(p: usize, mut t: usize) -> (usize, usize) {
    for j in 1..p {
        let c = p - j;
        if t < c {
            return (j + 1 + t, j);
        }
        t -= c;
    }
    unreachable!("edge index out of range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::all_edges;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edge_index_matches_enumeration_order() {
        let p = 6;
        let all: Vec<_> = all_edges(p).collect();
        for (t, e) in all.iter().enumerate() {
            assert_eq!(edge_at(p, t), *e);
        }
    }

    #[test]
    fn random_edges_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = Dag::from_edges(5, &[(3, 1), (5, 2)]).unwrap();
        for _ in 0..200 {
            let (i, j) = random_absent_edge(&d, &mut rng).unwrap();
            assert!(!d.has_edge(i, j) && i > j);
            let (i, j) = random_present_edge(&d, &mut rng).unwrap();
            assert!(d.has_edge(i, j));
        }
        assert_eq!(random_absent_edge(&Dag::complete(4), &mut rng), None);
        assert_eq!(random_present_edge(&Dag::empty(4), &mut rng), None);
    }
}
