//! Chinese restaurant process seatings and the popularity they induce.

use proactive_cache::crp::{self, TableMapping};
use proactive_cache::seed::{self, Stream};

fn main() -> proactive_cache::Result<()> {
    for beta in [1.0, 10.0, 100.0] {
        let seating = crp::crp_sample(12, beta, &mut seed::stream(8, Stream::Crp))?;
        let pop = crp::community_popularity(&seating, 128, TableMapping::CreationOrder, &mut seed::stream(8, Stream::TablePermutation))?;
        let history: f64 = pop.distribution[..seating.history_tables()].iter().sum();
        println!(
            "beta {beta:>5}: tables {:?}, log p = {:.3}, history mass {history:.3}",
            seating.table_counts,
            crp::crp_log_probability(&seating)?
        );
    }
    Ok(())
}
