//! One case I run per regime: CF-driven SBS caching against random caching.

use proactive_cache::experiment::{self, Approach, Case, Params, Regime};

fn main() -> proactive_cache::Result<()> {
    for regime in Regime::ALL {
        let p = Params::preset(Case::One, regime);
        let out = experiment::run_case1(&p, 11)?;
        println!("{regime} load: R = {}, S = {} Mbit/SBS, alpha = {}", p.requests, p.cache_mbit, p.zipf_exponent);
        for a in Approach::ALL {
            let r = out.report(a);
            println!("  {a:>9}: satisfied {:.3}, backhaul load {:.3}", r.satisfied_fraction, r.backhaul_load);
        }
    }
    Ok(())
}
