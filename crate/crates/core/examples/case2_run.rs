//! One case II run per regime: influencer D2D caching against random caching.

use proactive_cache::experiment::{self, Approach, Case, Params, Regime};

fn main() -> proactive_cache::Result<()> {
    for regime in Regime::ALL {
        let p = Params::preset(Case::Two, regime);
        let social = experiment::social_setup(&p, 11)?;
        let out = experiment::run_case2(&p, 11)?;
        println!(
            "{regime} load: R = {}, S = {} Mbit total, beta = {}, influencers {:?}",
            p.requests, p.cache_mbit, p.concentration, social.communities.influencer_of
        );
        for a in Approach::ALL {
            let r = out.report(a);
            println!("  {a:>9}: satisfied {:.3}, small cell load {:.3}", r.satisfied_fraction, r.small_cell_load);
        }
    }
    Ok(())
}
