//! Greedy versus random placement and the request share each one covers.

use proactive_cache::caching;
use proactive_cache::seed::{self, Stream};
use proactive_cache::workload;

fn main() -> proactive_cache::Result<()> {
    let dist = workload::zipf_pmf(128, 1.0)?;
    for cache_mbit in [8.0, 32.0, 64.0] {
        let greedy = caching::greedy_place(dist.pmf(), cache_mbit, 1.0, 0)?;
        let random = caching::random_place(128, cache_mbit, 1.0, 0, &mut seed::stream(3, Stream::RandomPlacement))?;
        let covered = |p: &caching::CachePlacement| p.stored.iter().map(|&f| dist.pmf()[f]).sum::<f64>();
        println!(
            "S = {cache_mbit:>4} Mbit: greedy covers {:.3}, random covers {:.3} of requests",
            covered(&greedy),
            covered(&random)
        );
    }
    Ok(())
}
