//! Quick invariant suite behind the `selftest` subcommand.

use rand::Rng;

use crate::caching::CachePlacement;
use crate::crp::{self, CrpAssignment};
use crate::error::Result;
use crate::experiment::{self, Approach, Case, Params, Regime, SweepParam};
use crate::popularity::{self, CfParams, Rating, RatingMatrix};
use crate::seed;
use crate::simcore::{self, NetworkConfig, SimOutput};
use crate::socialnet::{self, SocialGraph};
use crate::workload::{self, Catalog, RequestTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run(master_seed: u64) -> Vec<Check> {
    vec![
        check("zipf pmf normalized", zipf_normalized()),
        check("crp partitions sum to one", crp_partition_mass()),
        check("eigenvector centrality on the 3-path", path_centrality()),
        check("cf objective non-increasing", cf_monotone(master_seed)),
        check("conservation and capacity", conservation(master_seed, 200)),
        check("case I cache endpoints", cache_endpoints(master_seed)),
        check("pipeline determinism", determinism(master_seed)),
    ]
}

fn zipf_normalized() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for a in [0.0, 0.5, 1.0, 2.0] {
        let d = workload::zipf_pmf(128, a)?;
        worst = worst.max((d.pmf().iter().sum::<f64>() - 1.0).abs());
    }
    Ok((worst <= 1e-12, format!("max |sum - 1| = {worst:.2e}")))
}

/// Every set partition of `n` labelled customers as a restricted growth
/// string (customer 0 at table 0, each later customer at most one past the
/// largest table so far).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for t in 0..=max + 1 {
            cur[i] = t;
            rec(i + 1, max.max(t), cur, out);
        }
    }
    if n > 0 {
        rec(1, 0, &mut cur, &mut out);
    }
    out
}

fn crp_partition_mass() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 1..=5 {
        for beta in [0.5, 1.0, 3.0] {
            let mut total = 0.0;
            for seating in set_partitions(n) {
                let tables = seating.iter().max().unwrap() + 1;
                let mut counts = vec![0; tables];
                for &t in &seating {
                    counts[t] += 1;
                }
                let a = CrpAssignment {
                    concentration: beta,
                    customer_table: seating,
                    table_counts: counts,
                };
                total += crp::crp_log_probability(&a)?.exp();
            }
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max |sum - 1| = {worst:.2e}")))
}

fn path_centrality() -> Result<(bool, String)> {
    let g = SocialGraph::from_edges(3, &[(0, 1), (1, 2)])?;
    let c = socialnet::eigenvector_centrality(&g, socialnet::EIGEN_TOLERANCE, socialnet::EIGEN_MAX_ITERATIONS)?;
    let want = [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5];
    let err = c.scores.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let lambda = c.leading_eigenvalue.unwrap_or(f64::NAN);
    let ok = err <= 1e-6 && (lambda - 2f64.sqrt()).abs() <= 1e-6;
    Ok((ok, format!("scores {:?}, lambda {lambda:.6}", c.scores)))
}

fn cf_monotone(master_seed: u64) -> Result<(bool, String)> {
    let mut rng = seed::rng(seed::derive(&[master_seed, 1]));
    let observed: Vec<Rating> = (0..120)
        .map(|_| Rating {
            user: rng.gen_range(0..12),
            file: rng.gen_range(0..20),
            value: rng.gen_range(1..4) as f64,
        })
        .collect();
    let mut observed = observed;
    observed.sort_by_key(|r| (r.user, r.file));
    observed.dedup_by_key(|r| (r.user, r.file));
    let train = RatingMatrix::new(12, 20, observed)?;
    let fit = popularity::fit(&train, CfParams::default(), &mut rng)?;
    let h = &fit.objective_history;
    let bad = h.windows(2).filter(|w| w[1] > w[0] + 1e-9 * w[0].abs().max(1.0)).count();
    Ok((bad == 0, format!("{} epochs, objective {:.4} -> {:.4}", h.len() - 1, h[0], h[h.len() - 1])))
}

/// Violations of conservation or capacity in one simulated run.
pub fn audit(cfg: &NetworkConfig, catalog: &Catalog, out: &SimOutput) -> Vec<String> {
    let l = catalog.file_length_mbit;
    let mut issues = Vec::new();
    for (i, o) in out.outcomes.iter().enumerate() {
        let delivered = o.delivered_mbit();
        if o.completion_time_s.is_some() {
            if (delivered - l).abs() > 1e-9 {
                issues.push(format!("request {i}: delivered {delivered} of {l}"));
            }
        } else if (delivered + o.remaining_mbit - l).abs() > 1e-9 {
            issues.push(format!("request {i}: delivered + remaining = {}", delivered + o.remaining_mbit));
        }
    }
    let w = cfg.wireless_capacity_mbit_s / cfg.sbs_count as f64;
    let b = cfg.backhaul_capacity_mbit_s / cfg.sbs_count as f64;
    for (t, s) in out.slots.iter().enumerate() {
        for m in 0..cfg.sbs_count {
            if s.wireless_mbit[m] > w + 1e-9 || s.backhaul_mbit[m] > b + 1e-9 {
                issues.push(format!("slot {t}, SBS {m}: over capacity"));
            }
        }
        if s.d2d_mbit > cfg.d2d_capacity_mbit_s + 1e-9 {
            issues.push(format!("slot {t}: D2D over capacity"));
        }
    }
    issues
}

/// A small randomized network, trace and placements for both cases.
pub struct RandomInstance {
    pub cfg: NetworkConfig,
    pub catalog: Catalog,
    pub trace: RequestTrace,
    pub sbs_caches: Vec<CachePlacement>,
    pub user_caches: Vec<CachePlacement>,
    pub graph: SocialGraph,
}

pub fn random_instance(s: u64) -> Result<RandomInstance> {
    let mut rng = seed::rng(s);
    let m = rng.gen_range(1..=4);
    let n = rng.gen_range(m..=12);
    let horizon = rng.gen_range(1..=30u32);
    let f = rng.gen_range(1..=10);
    let l = rng.gen_range(0.25..3.0);
    let catalog = Catalog::new(f, l, rng.gen_range(0.5..4.0))?;
    let cap = |r: &mut seed::SimRng| if r.gen_bool(0.1) { 0.0 } else { r.gen_range(0.1..40.0) };
    let cfg = NetworkConfig::round_robin(m, n, horizon, cap(&mut rng), cap(&mut rng), cap(&mut rng))?;
    let count = rng.gen_range(0..60);
    let trace = workload::generate_trace_with(count, horizon, n, &mut rng, |_, r| r.gen_range(0..f))?;
    let place = |node: usize, r: &mut seed::SimRng| {
        let k = r.gen_range(0..=f);
        let stored = rand::seq::index::sample(r, f, k).into_iter().collect();
        CachePlacement { node_id: node, capacity_mbit: k as f64 * l, stored }
    };
    let sbs_caches = (0..m).map(|node| place(node, &mut rng)).collect();
    let holder_count = rng.gen_range(0..=n.min(4));
    let holders = rand::seq::index::sample(&mut rng, n, holder_count);
    let user_caches = holders.into_iter().map(|u| place(u, &mut rng)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.3) {
                edges.push((u, v));
            }
        }
    }
    let graph = SocialGraph::from_edges(n, &edges)?;
    Ok(RandomInstance { cfg, catalog, trace, sbs_caches, user_caches, graph })
}

fn conservation(master_seed: u64, cases: u64) -> Result<(bool, String)> {
    let mut issues = Vec::new();
    for k in 0..cases {
        let x = random_instance(seed::derive(&[master_seed, 2, k]))?;
        let a = simcore::simulate_case1_detailed(&x.cfg, &x.trace, &x.sbs_caches, &x.catalog)?;
        let b = simcore::simulate_case2_detailed(&x.cfg, &x.trace, &x.user_caches, &x.graph, &x.catalog)?;
        issues.extend(audit(&x.cfg, &x.catalog, &a));
        issues.extend(audit(&x.cfg, &x.catalog, &b));
    }
    let detail = match issues.first() {
        Some(first) => format!("{} violations, first: {first}", issues.len()),
        None => format!("{cases} instances, both cases"),
    };
    Ok((issues.is_empty(), detail))
}

fn cache_endpoints(master_seed: u64) -> Result<(bool, String)> {
    let mut p = Params::preset(Case::One, Regime::Low);
    p.set_normalized(SweepParam::Requests, 0.25)?;
    let mut loads = Vec::new();
    for s in [0.0, 1.0] {
        p.set_normalized(SweepParam::Cache, s)?;
        let out = experiment::run_case1(&p, master_seed)?;
        loads.extend(Approach::ALL.map(|a| out.report(a).backhaul_load));
    }
    let ok = loads == [1.0, 1.0, 0.0, 0.0];
    Ok((ok, format!("backhaul loads {loads:?}")))
}

fn determinism(master_seed: u64) -> Result<(bool, String)> {
    let p = Params::preset(Case::Two, Regime::Low);
    let a = experiment::run_case2(&p, master_seed)?;
    let b = experiment::run_case2(&p, master_seed)?;
    let ok = a.proactive.report == b.proactive.report && a.reactive.report == b.reactive.report;
    Ok((ok, format!("trace digest {:016x}", a.trace.digest())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203];
        for (n, b) in (1..=6).zip(bell) {
            assert_eq!(set_partitions(n).len(), b);
        }
    }

    #[test]
    fn selftest_passes() {
        for c in run(7) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
