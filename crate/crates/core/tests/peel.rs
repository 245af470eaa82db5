use proptest::prelude::*;
use sparse_rank::ensembles::{sample_bernoulli, sample_sym_adj};
use sparse_rank::exactlin::rank_exact;
use sparse_rank::peel::{
    bipartite_decomposition, corank_decomposition, corank_decomposition_ordered, k_core, karp_sipser_ordered,
    LeafOrder,
};
use sparse_rank::{Seed, SparseBinMatrix};

fn graph() -> impl Strategy<Value = SparseBinMatrix> {
    (1..80usize, 0.2f64..8.0, any::<u64>())
        .prop_map(|(n, d, s)| sample_sym_adj(n, (d / n as f64).min(1.0), Seed::new(s)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn decomposition_identity_and_lower_bound(a in graph()) {
        let dec = corank_decomposition(&a).unwrap();
        prop_assert!(dec.identity_holds(), "{:?}", dec);
        prop_assert!(dec.corank_total >= dec.i_ks);
    }

    #[test]
    fn leaf_order_does_not_change_the_split(a in graph()) {
        let low = corank_decomposition_ordered(&a, LeafOrder::LowestIndex).unwrap();
        let high = corank_decomposition_ordered(&a, LeafOrder::HighestIndex).unwrap();
        prop_assert_eq!(low, high);
    }

    #[test]
    fn bipartite_identities(
        rows in 1..60usize,
        cols in 1..60usize,
        d in 0.2f64..6.0,
        s in any::<u64>(),
    ) {
        let b = sample_bernoulli(rows, cols, (d / cols as f64).min(1.0), Seed::new(s)).unwrap();
        let dec = bipartite_decomposition(&b).unwrap();
        prop_assert!(dec.identities_hold(), "{:?}", dec);
        prop_assert!(dec.lower_bound_holds(), "{:?}", dec);
    }

    #[test]
    fn k_core_is_the_maximal_min_degree_set(a in graph(), k in 1..5usize) {
        let core = k_core(&a, k).unwrap();
        let mut inside = vec![false; a.n_rows()];
        for &v in &core.vertices {
            inside[v] = true;
        }
        let degree_in = |v: usize| a.row(v).iter().filter(|&&u| inside[u as usize]).count();
        for &v in &core.vertices {
            prop_assert!(degree_in(v) >= k);
        }
        // an outside vertex with k neighbours inside could be added back
        for v in (0..a.n_rows()).filter(|&v| !inside[v]) {
            prop_assert!(degree_in(v) < k);
        }
    }

    #[test]
    fn ks_partitions_the_vertices(a in graph()) {
        let ks = karp_sipser_ordered(&a, LeafOrder::LowestIndex).unwrap();
        let mut all: Vec<usize> = ks.core_vertices.iter().chain(&ks.isolated).chain(&ks.peeled).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..a.n_rows()).collect::<Vec<_>>());
        let core = a.principal_submatrix(&ks.core_vertices);
        prop_assert!(core.row_weights().into_iter().all(|w| w >= 2));
    }
}

#[test]
fn identity_at_moderate_size() {
    for s in 0..5 {
        let a = sample_sym_adj(500, 12.0 / 500.0, Seed::new(s)).unwrap();
        assert!(corank_decomposition(&a).unwrap().identity_holds());
    }
}

#[test]
fn dense_core_of_sparse_graph() {
    // a 3-core of G(n, 15/n) is nonempty and of full rank in typical samples
    let a = sample_sym_adj(400, 15.0 / 400.0, Seed::new(3)).unwrap();
    let core = k_core(&a, 3).unwrap();
    assert!(core.vertices.len() > 300);
    assert_eq!(rank_exact(&a.principal_submatrix(&core.vertices)).unwrap().corank_cols, 0);
}
