use proptest::prelude::*;
use sparse_rank::ensembles::{sample_abc, sample_bernoulli, sample_sym_adj, stack_abc_sample};
use sparse_rank::Seed;

/// Upper `1e-4` quantile of chi-square with `k` degrees of freedom
/// (Wilson-Hilferty).
fn chi2_upper(k: f64) -> f64 {
    let z = 3.719;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}

#[test]
fn bernoulli_cells_are_uniform() {
    // counts per column over many samples; each is Binomial(rows * samples, p)
    let (rows, cols, p, samples) = (50, 40, 0.1, 200);
    let mut counts = vec![0f64; cols];
    for s in 0..samples {
        let m = sample_bernoulli(rows, cols, p, Seed::new(7).child(s)).unwrap();
        for (c, w) in m.col_weights().into_iter().enumerate() {
            counts[c] += w as f64;
        }
    }
    let trials = (rows * samples as usize) as f64;
    let mean = trials * p;
    let var = trials * p * (1.0 - p);
    let chi2: f64 = counts.iter().map(|&c| (c - mean) * (c - mean) / var).sum();
    assert!(chi2 < chi2_upper(cols as f64), "chi2 = {chi2}");
    let total: f64 = counts.iter().sum();
    let z = (total - mean * cols as f64) / (var * cols as f64).sqrt();
    assert!(z.abs() < 4.0, "z = {z}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sym_adj_is_symmetric_without_loops(n in 1..60usize, p in 0.0f64..1.0, s in any::<u64>()) {
        let a = sample_sym_adj(n, p, Seed::new(s)).unwrap();
        prop_assert_eq!(a.transpose(), a.clone());
        prop_assert!((0..n).all(|i| !a.get(i, i)));
    }

    #[test]
    fn samplers_are_deterministic(n in 1..40usize, p in 0.0f64..1.0, s in any::<u64>()) {
        prop_assert_eq!(
            sample_bernoulli(n, n + 3, p, Seed::new(s)).unwrap(),
            sample_bernoulli(n, n + 3, p, Seed::new(s)).unwrap()
        );
    }

    #[test]
    fn abc_accounts_for_every_half_edge(n in 1..40usize, gamma in 1..4usize, d in 1..5usize, s in any::<u64>()) {
        let sample = sample_abc(n, gamma, d, Seed::new(s)).unwrap();
        prop_assert_eq!(sample.assignment.nnz() + sample.multi_edge_count, gamma * d * n);
        prop_assert_eq!(sample.simple, sample.multi_edge_count == 0);
    }

    #[test]
    fn stacked_blocks_are_identical(k in 1..10usize, s in any::<u64>()) {
        let (gamma, d) = (2, 4);
        let n = gamma * k;
        let (b, _) = stack_abc_sample(n, gamma, d, Seed::new(s)).unwrap();
        let block = n / gamma;
        let top: Vec<usize> = (0..block).collect();
        let bottom: Vec<usize> = (block..n).collect();
        prop_assert_eq!(b.select_rows(&top), b.select_rows(&bottom));
    }
}
