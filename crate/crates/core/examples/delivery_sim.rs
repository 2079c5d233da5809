//! Hand-built case I and case II deliveries with their event logs.

use std::collections::BTreeSet;

use proactive_cache::caching::CachePlacement;
use proactive_cache::simcore::{self, NetworkConfig};
use proactive_cache::socialnet::SocialGraph;
use proactive_cache::workload::{Catalog, Request, RequestTrace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::new(8, 1.0, 1.0)?;
    let trace = RequestTrace {
        horizon_s: 16,
        entries: [(0.2, 0, 1), (0.4, 4, 2), (0.9, 1, 1), (3.5, 2, 5)]
            .into_iter()
            .map(|(t, u, f)| Request { arrival_time_s: t, user: u, file: f })
            .collect(),
    };
    let mut stdout = std::io::stdout();

    let cfg = NetworkConfig::round_robin(4, 8, 16, 64.0, 2.0, 0.0)?;
    let caches: Vec<CachePlacement> = (0..4)
        .map(|s| CachePlacement { node_id: s, capacity_mbit: 2.0, stored: BTreeSet::from([1, 2]) })
        .collect();
    let out = simcore::simulate_case1_detailed(&cfg, &trace, &caches, &catalog)?;
    println!("case I: satisfied {:.2}, backhaul load {:.3}", out.report.satisfied_fraction, out.report.backhaul_load);
    simcore::write_event_log(&out.outcomes, &mut stdout)?;

    let cfg = NetworkConfig::round_robin(4, 8, 16, 32.0, 0.0, 64.0)?;
    let graph = SocialGraph::from_edges(8, &[(0, 3), (1, 3), (2, 3), (4, 5)])?;
    let influencer = [CachePlacement { node_id: 3, capacity_mbit: 2.0, stored: BTreeSet::from([1, 5]) }];
    let out = simcore::simulate_case2_detailed(&cfg, &trace, &influencer, &graph, &catalog)?;
    println!("case II: satisfied {:.2}, small cell load {:.3}", out.report.satisfied_fraction, out.report.small_cell_load);
    simcore::write_event_log(&out.outcomes, &mut stdout)?;
    Ok(())
}
