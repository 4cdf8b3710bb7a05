//! Property tests over randomly generated inputs.

mod common;

use bayes_dag::baselines::{bic_score, structure_metrics};
use bayes_dag::experiments::{Metadata, ResultTable, Row};
use bayes_dag::linalg::log_sum_exp;
use bayes_dag::prelude::*;
use bayes_dag::rng::stream;
use bayes_dag::search::{hill_climb, threshold_path, CandidatePool, Provenance};
use common::*;
use proptest::prelude::*;

fn dag_strategy(max_p: usize) -> impl Strategy<Value = Dag> {
    (2..=max_p).prop_flat_map(|p| {
        proptest::collection::vec(any::<bool>(), p * (p - 1) / 2).prop_map(move |bits| {
            let edges: Vec<_> = bayes_dag::dag::all_edges(p)
                .zip(bits)
                .filter_map(|(e, b)| b.then_some(e))
                .collect();
            Dag::from_edges(p, &edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_round_trip(p in 1usize..30, seed in any::<u64>()) {
        let omega = SymMatrix::new(random_pd(p, &mut stream(seed, 0))).unwrap();
        let param = modified_cholesky(&omega).unwrap();
        let back = compose(&param);
        let err = (back.as_matrix() - omega.as_matrix()).amax();
        prop_assert!(err < 1e-10, "round trip error {}", err);
        prop_assert!(param.d.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn schur_conditional_matches_direct_formula(p in 2usize..10, seed in any::<u64>(), mask in any::<u16>()) {
        let mut rng = stream(seed, 0);
        let sigma = random_pd(p, &mut rng);
        let m: Vec<usize> = (2..=p).filter(|k| mask & (1 << k) != 0).collect();
        let ours = schur_conditional(&SymMatrix::new(sigma.clone()).unwrap(), 1, &IndexSet::new(m.clone()).unwrap()).unwrap();
        let zero: Vec<usize> = m.iter().map(|k| k - 1).collect();
        let direct = conditional_variance(&sigma, 0, &zero);
        prop_assert!((ours - direct).abs() < 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn perturbations_respect_containment_and_counts(p in 8usize..25, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let d0 = random_dag(p, 0.15, &mut rng);
        let e = d0.edge_count();
        prop_assume!(e >= 2 && 2 * e <= p * (p - 1) / 2);
        let sub = perturb(&d0, PerturbCase::SubHalf, &mut rng).unwrap();
        prop_assert!(sub.is_subgraph_of(&d0));
        prop_assert_eq!(sub.edge_count(), e / 2);
        let sup = perturb(&d0, PerturbCase::SuperDouble, &mut rng).unwrap();
        prop_assert!(d0.is_subgraph_of(&sup));
        prop_assert_eq!(sup.edge_count(), 2 * e);
        prop_assert_eq!(perturb(&d0, PerturbCase::RandHalf, &mut rng).unwrap().edge_count(), e / 2);
        prop_assert_eq!(perturb(&d0, PerturbCase::RandDouble, &mut rng).unwrap().edge_count(), 2 * e);
    }

    #[test]
    fn dag_json_round_trip(d in dag_strategy(9)) {
        prop_assert_eq!(Dag::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn posterior_ratio_is_antisymmetric(a in dag_strategy(7), seed in any::<u64>()) {
        let p = a.p();
        let mut rng = stream(seed, 0);
        let b = random_dag(p, 0.5, &mut rng);
        let model = gen_true_model(p, 0.5, 2.0, &mut rng).unwrap();
        let (_, data) = sample_data(&model, 12, &mut rng);
        let prior = PriorSpec::default_for(p);
        let ab = log_posterior_ratio(&a, &b, &data, &prior).unwrap();
        let ba = log_posterior_ratio(&b, &a, &data, &prior).unwrap();
        prop_assert!((ab + ba).abs() < 1e-9 * (1.0 + ab.abs()));
        prop_assert_eq!(log_posterior_ratio(&a, &a, &data, &prior).unwrap(), 0.0);
    }

    #[test]
    fn half_edge_probability_prior_is_flat(a in dag_strategy(8)) {
        let p = a.p();
        let flat = (p * (p - 1) / 2) as f64 * 0.5f64.ln();
        prop_assert!((log_prior_dag(&a, 0.5) - flat).abs() < 1e-12);
    }

    #[test]
    fn threshold_path_is_nested_and_dense_to_sparse(p in 3usize..15, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let model = gen_true_model(p, 0.5, 3.0, &mut rng).unwrap();
        let (_, data) = sample_data(&model, 2 * p, &mut rng);
        let path = threshold_path(&data.s, 0.5, 40).unwrap();
        for w in path.windows(2) {
            prop_assert!(w[1].is_subgraph_of(&w[0]));
            prop_assert!(w[1] != w[0]);
        }
    }

    #[test]
    fn pool_deduplicates(dags in proptest::collection::vec(dag_strategy(4), 1..40)) {
        let mut pool = CandidatePool::new();
        for d in &dags {
            pool.insert(d.clone(), Provenance::Sss);
        }
        let mut distinct = dags.clone();
        distinct.sort_by_key(|d| (d.p(), d.edge_list()));
        distinct.dedup();
        prop_assert_eq!(pool.len(), distinct.len());
    }

    #[test]
    fn metric_counts_partition_possible_edges(a in dag_strategy(10), seed in any::<u64>()) {
        let b = random_dag(a.p(), 0.3, &mut stream(seed, 0));
        let m = structure_metrics(&a, &b).unwrap();
        let p = a.p();
        prop_assert_eq!(m.tp + m.fp + m.fn_ + m.tn, p * (p - 1) / 2);
        prop_assert_eq!(m.tp + m.fp, a.edge_count());
        prop_assert_eq!(m.tp + m.fn_, b.edge_count());
    }

    #[test]
    fn bic_edge_penalty_is_log_n_per_edge(p in 1usize..8, n in 2usize..500, e in 0usize..20, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let omega = SymMatrix::new(random_pd(p, &mut rng)).unwrap();
        let s = SymMatrix::new(random_pd(p, &mut rng)).unwrap();
        let diff = bic_score(&omega, &s, n, e + 1).unwrap() - bic_score(&omega, &s, n, e).unwrap();
        prop_assert!((diff - (n as f64).ln()).abs() < 1e-9 * (1.0 + bic_score(&omega, &s, n, e).unwrap().abs()));
    }

    #[test]
    fn hill_climb_never_lowers_the_score(start in dag_strategy(6), seed in any::<u64>()) {
        let p = start.p();
        let mut rng = stream(seed, 0);
        let model = gen_true_model(p, 0.5, 2.0, &mut rng).unwrap();
        let (_, data) = sample_data(&model, 30, &mut rng);
        let scorer = BayesScorer::new(&data, PriorSpec::default_for(p)).unwrap();
        let before = scorer.score(&start).unwrap();
        let (d, after) = hill_climb(&start, &scorer, 5, &mut rng).unwrap();
        prop_assert!(after >= before);
        prop_assert!((after - scorer.score(&d).unwrap()).abs() < 1e-8 * (1.0 + after.abs()));
    }

    #[test]
    fn result_table_round_trips(
        values in proptest::collection::vec(proptest::option::of(-1e12f64..1e12), 3 * 4),
        seed in any::<u64>(),
    ) {
        let mut table = ResultTable::new(
            Metadata::new("prop", "abc".into(), seed).with("q", 0.25),
            &["a", "b", "c"],
        );
        for (k, chunk) in values.chunks(3).enumerate() {
            table.rows.push(Row {
                p: 10 + k,
                n: 2 * k + 2,
                label: format!("case{}", k % 2),
                replicate: (k != 3).then_some(k),
                values: chunk.to_vec(),
            });
        }
        prop_assert_eq!(&ResultTable::from_csv(&table.to_csv().unwrap()).unwrap(), &table);
        prop_assert_eq!(&ResultTable::from_json(&table.to_json().unwrap()).unwrap(), &table);
    }

    #[test]
    fn log_sum_exp_matches_naive(xs in proptest::collection::vec(-50.0f64..50.0, 1..20)) {
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((log_sum_exp(&xs) - naive).abs() < 1e-12 * (1.0 + naive.abs()));
    }
}

#[test]
fn enumeration_posterior_sums_to_one() {
    let mut rng = stream(3, 0);
    let model = gen_true_model(4, 0.5, 2.0, &mut rng).unwrap();
    let (_, data) = sample_data(&model, 50, &mut rng);
    let scorer = BayesScorer::new(&data, PriorSpec::default_for(4)).unwrap();
    let scores: Vec<f64> = enumerate_all_dags(4).unwrap().iter().map(|d| scorer.score(d).unwrap()).collect();
    let z = log_sum_exp(&scores);
    let total: f64 = scores.iter().map(|s| (s - z).exp()).sum();
    assert!((total - 1.0).abs() < 1e-10);
}
