//! Matrix-completion oracles: planted rank-1 recovery and a finite-difference
//! check of the training objective's gradient.

mod common;

#[test]
fn planted_rank_one_is_recovered() {
    for s in [1, 2, 3] {
        let e = common::rank_one_recovery_rmse(s);
        assert!(e <= 0.05, "seed {s}: rmse {e}");
    }
}

#[test]
fn gradient_matches_central_differences() {
    for s in [10, 11, 12] {
        let e = common::max_gradient_relative_error(s);
        assert!(e <= 1e-4, "seed {s}: relative error {e}");
    }
}
