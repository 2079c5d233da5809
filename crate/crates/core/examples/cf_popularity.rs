//! Popularity estimation by regularized SVD on request counts.

use proactive_cache::caching;
use proactive_cache::popularity::{self, CfParams};
use proactive_cache::seed::{self, Stream};
use proactive_cache::workload;

fn main() -> proactive_cache::Result<()> {
    let dist = workload::zipf_pmf(128, 1.2)?;
    let trace = workload::generate_trace(2048, 1024, 32, &dist, &mut seed::stream(1, Stream::Trace))?;
    let truth = popularity::build_ground_truth(&trace, 32, 128)?;
    let split = popularity::mask_training(&truth, 0.2, &mut seed::stream(1, Stream::Mask))?;
    println!("{} observed pairs: {} train, {} held out", truth.len(), split.train.len(), split.test.len());

    for rank in [0, 8] {
        let params = CfParams { rank, ..CfParams::default() };
        let fit = popularity::fit(&split.train, params, &mut seed::stream(1, Stream::Training))?;
        let h = &fit.objective_history;
        println!(
            "rank {rank}: objective {:.2} -> {:.2}, held-out rmse {:.4}",
            h[0],
            h[h.len() - 1],
            popularity::rmse(&fit.model, &split.test)?
        );
        let p_hat = popularity::estimate_matrix(&fit.model);
        let users: Vec<usize> = (0..32).collect();
        let ranked = caching::rank_files(&caching::popularity_scores(&p_hat, &users)?);
        println!("  predicted top files: {:?}", &ranked[..10]);
    }
    Ok(())
}
