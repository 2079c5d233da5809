//! CRP sampler and log-probability against exhaustive partition enumeration.

mod common;

#[test]
fn log_probability_matches_closed_form() {
    for n in 1..=6 {
        for beta in [0.3, 1.0, 2.0, 7.5] {
            for p in common::partitions(n) {
                let want = common::seating_probability(&p, beta);
                let got = common::library_probability(&p, beta);
                assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-15, "{p:?} {beta}");
            }
        }
    }
}

#[test]
fn seating_probabilities_sum_to_one() {
    for n in 1..=6 {
        for beta in [0.5, 1.0, 2.0, 10.0] {
            let total: f64 = common::partitions(n).iter().map(|p| common::library_probability(p, beta)).sum();
            assert!((total - 1.0).abs() <= 1e-9, "n={n} beta={beta}: {total}");
        }
    }
}

#[test]
fn sampler_matches_enumeration_for_three_customers() {
    for beta in [0.5, 1.0, 2.0] {
        let tv = common::crp_total_variation(3, beta, 100_000, 99);
        assert!(tv <= 0.01, "beta {beta}: tv {tv}");
    }
}
