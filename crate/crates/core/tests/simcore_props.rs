//! Randomized properties of the delivery simulation.

mod common;

use std::collections::BTreeSet;

use proactive_cache::caching::CachePlacement;
use proactive_cache::simcore::{self, NetworkConfig};
use proactive_cache::socialnet::SocialGraph;
use proactive_cache::workload::{Catalog, Request, RequestTrace};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn conservation_and_capacity(s in any::<u64>()) {
        let x = common::instance(s);
        let a = simcore::simulate_case1_detailed(&x.cfg, &x.trace, &x.sbs_caches, &x.catalog).unwrap();
        let b = simcore::simulate_case2_detailed(&x.cfg, &x.trace, &x.user_caches, &x.graph, &x.catalog).unwrap();
        for out in [&a, &b] {
            let (bits, excess) = common::conservation_errors(&x.cfg, &x.catalog, out);
            prop_assert!(bits <= 1e-9, "megabit error {}", bits);
            prop_assert!(excess <= 1e-9, "capacity excess {}", excess);
            prop_assert!((0.0..=1.0).contains(&out.report.backhaul_load));
            prop_assert!((0.0..=1.0).contains(&out.report.small_cell_load));
            prop_assert!((0.0..=1.0).contains(&out.report.satisfied_fraction));
        }
    }

    // Case I only: in case II a larger cache can start extra D2D transfers
    // that dilute the shared D2D capacity (see the test below).
    #[test]
    fn larger_sbs_caches_never_hurt(s in any::<u64>(), extra in any::<u64>()) {
        let x = common::instance(s);
        let f = x.catalog.file_count;
        let grow = |caches: &[proactive_cache::caching::CachePlacement]| {
            caches.iter().enumerate().map(|(k, c)| {
                let mut c = c.clone();
                for file in 0..f {
                    if (extra >> ((k * 7 + file) % 64)) & 1 == 1 {
                        c.stored.insert(file);
                    }
                }
                c
            }).collect::<Vec<_>>()
        };
        let small = simcore::simulate_case1(&x.cfg, &x.trace, &x.sbs_caches, &x.catalog).unwrap();
        let big = simcore::simulate_case1(&x.cfg, &x.trace, &grow(&x.sbs_caches), &x.catalog).unwrap();
        prop_assert!(big.satisfied_fraction >= small.satisfied_fraction);
        prop_assert!(big.backhaul_load <= small.backhaul_load + 1e-12);
    }

    #[test]
    fn reports_are_deterministic(s in any::<u64>()) {
        let x = common::instance(s);
        let a = simcore::simulate_case2(&x.cfg, &x.trace, &x.user_caches, &x.graph, &x.catalog).unwrap();
        let b = simcore::simulate_case2(&x.cfg, &x.trace, &x.user_caches, &x.graph, &x.catalog).unwrap();
        prop_assert_eq!(a, b);
    }
}


#[test]
fn extra_d2d_transfers_dilute_shared_capacity() {
    // Deadline 0.65 s. Alone, user 0's D2D download takes 1/10.25 s after
    // activation at t = 1 and meets it; when user 2 also gets a D2D source the
    // 10 Mbit/s is split evenly and both miss it.
    let catalog = Catalog::new(2, 1.0, 1.0 / 0.65).unwrap();
    let cfg = NetworkConfig::round_robin(1, 4, 4, 0.5, 0.0, 10.0).unwrap();
    let graph = SocialGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
    let trace = RequestTrace {
        horizon_s: 4,
        entries: vec![
            Request { arrival_time_s: 0.5, user: 0, file: 0 },
            Request { arrival_time_s: 0.5, user: 2, file: 1 },
        ],
    };
    let cache = |node, files: &[usize]| CachePlacement {
        node_id: node,
        capacity_mbit: 1.0,
        stored: files.iter().copied().collect::<BTreeSet<_>>(),
    };
    let small = [cache(1, &[0]), cache(3, &[])];
    let big = [cache(1, &[0]), cache(3, &[1])];
    let a = simcore::simulate_case2(&cfg, &trace, &small, &graph, &catalog).unwrap();
    let b = simcore::simulate_case2(&cfg, &trace, &big, &graph, &catalog).unwrap();
    assert_eq!(a.satisfied_fraction, 0.5);
    assert_eq!(b.satisfied_fraction, 0.0);
}
