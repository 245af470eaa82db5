use proptest::prelude::*;
use rand::seq::SliceRandom;
use sparse_rank::ensembles::{sample_frc, stack_abc, stack_abc_simple};
use sparse_rank::gradcode::{
    adversarial_bound, adversarial_search, decoding_error, dependency_upper_bound, expected_error_mc,
    frc_expected_error, least_squares_error, straggler_set, zero_row_lower_bound, CG_REL_TOL,
};
use sparse_rank::Seed;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nested_sets_only_add_error(seed in any::<u64>(), s1 in 0..20usize, extra in 0..20usize) {
        let a = stack_abc(64, 2, 4, Seed::new(seed)).unwrap();
        let mut cols: Vec<usize> = (0..64).collect();
        cols.shuffle(&mut Seed::new(seed).child(1).rng());
        let small = &cols[..s1];
        let large = &cols[..s1 + extra];
        let e_small = least_squares_error(&a, small).unwrap();
        let e_large = least_squares_error(&a, large).unwrap();
        prop_assert!(e_small <= e_large + 1e-8, "{} > {}", e_small, e_large);
    }

    #[test]
    fn sandwich_and_dual_agreement(seed in any::<u64>(), s in 0..40usize) {
        let a = stack_abc(64, 2, 4, Seed::new(seed)).unwrap();
        let set = straggler_set(64, s, Seed::new(seed), 0);
        let rep = decoding_error(&a, &set, CG_REL_TOL).unwrap();
        let lower = zero_row_lower_bound(&a, &set) as f64;
        let upper = dependency_upper_bound(&a, &set).unwrap() as f64;
        prop_assert!(lower <= rep.err + 1e-9 && rep.err <= upper + 1e-6, "{} {} {}", lower, rep.err, upper);
        prop_assert!(rep.residual_gap <= 1e-6 * 64.0);
        prop_assert!(rep.err <= 64.0 + 1e-9);
    }
}

#[test]
fn spectral_bound_dominates_on_simple_samples() {
    for i in 0..3 {
        let (a, _, _) = stack_abc_simple(64, 2, 4, Seed::new(i), 1_000_000).unwrap();
        let s = 6;
        let bound = adversarial_bound(&a, s).unwrap();
        for t in 0..50 {
            let set = straggler_set(64, s, Seed::new(100 + i), t);
            let err = least_squares_error(&a, &set).unwrap() / 64.0;
            assert!(err <= bound.bound + 1e-12, "{err} > {}", bound.bound);
        }
        let worst = adversarial_search(&a, s, 300, Seed::new(i)).unwrap();
        assert!(worst.normalized <= bound.bound + 1e-12);
    }
}

#[test]
fn frc_monte_carlo_matches_oracle() {
    let frc = sample_frc(32, 4).unwrap();
    let est = expected_error_mc(&frc, 0.25, 3000, Seed::new(5)).unwrap();
    let oracle = frc_expected_error(32, 4, 8) / 32.0;
    assert!((est.mean - oracle).abs() <= 4.0 * est.stderr, "{} vs {oracle}", est.mean);
}
