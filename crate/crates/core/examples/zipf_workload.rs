//! ZipF popularity and a seeded request trace.

use proactive_cache::seed::{self, Stream};
use proactive_cache::workload;

fn main() -> proactive_cache::Result<()> {
    let dist = workload::zipf_pmf(128, 0.8)?;
    println!("top-5 pmf: {:.4?}", &dist.pmf()[..5]);

    let mut rng = seed::stream(42, Stream::Trace);
    let trace = workload::generate_trace(2048, 1024, 32, &dist, &mut rng)?;
    println!("{} requests, digest {:016x}", trace.len(), trace.digest());
    for r in trace.entries.iter().take(5) {
        println!("  t={:8.3}s user {:2} file {:3}", r.arrival_time_s, r.user, r.file);
    }

    let mut counts = vec![0usize; 128];
    for r in &trace.entries {
        counts[r.file] += 1;
    }
    for f in 0..5 {
        let expected = dist.pmf()[f] * trace.len() as f64;
        println!("file {f}: {} requests (expected {expected:.1})", counts[f]);
    }
    Ok(())
}
