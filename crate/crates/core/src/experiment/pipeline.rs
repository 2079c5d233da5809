//! End-to-end runs of both case studies for one seed.

use std::fmt;

use crate::caching::{self, CachePlacement};
use crate::crp::{self, CommunityPopularity};
use crate::error::{Error, Result};
use crate::experiment::params::{Case, Params};
use crate::popularity::{self, EstimatedPopularity, RatingMatrix};
use crate::seed::{self, Stream};
use crate::simcore::{self, MetricsReport, NetworkConfig, SimOutput};
use crate::socialnet::{self, CommunityAssignment, SocialGraph};
use crate::workload::{self, Catalog, RequestTrace, ZipfDist};

/// Stand-in for a zero concentration, which the CRP does not admit. The
/// limit seats every customer at one table.
pub const MIN_CONCENTRATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    Proactive,
    Reactive,
}

impl Approach {
    pub const ALL: [Approach; 2] = [Approach::Proactive, Approach::Reactive];
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Approach::Proactive => "proactive",
            Approach::Reactive => "reactive",
        })
    }
}

/// Both approaches simulated on one trace.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: RequestTrace,
    pub proactive: SimOutput,
    pub reactive: SimOutput,
    pub proactive_placements: Vec<CachePlacement>,
    pub reactive_placements: Vec<CachePlacement>,
}

impl RunOutput {
    pub fn report(&self, approach: Approach) -> &MetricsReport {
        match approach {
            Approach::Proactive => &self.proactive.report,
            Approach::Reactive => &self.reactive.report,
        }
    }
}

/// The load metric plotted for a case: backhaul load (I) or small cell
/// load (II).
pub fn load_metric(case: Case, r: &MetricsReport) -> f64 {
    match case {
        Case::One => r.backhaul_load,
        Case::Two => r.small_cell_load,
    }
}

fn catalog(p: &Params) -> Result<Catalog> {
    Catalog::new(p.file_count, p.file_length_mbit, p.bitrate_mbit_s)
}

fn network(p: &Params) -> Result<NetworkConfig> {
    NetworkConfig::round_robin(
        p.sbs_count,
        p.user_count,
        p.horizon_s,
        p.wireless_capacity_mbit_s,
        p.backhaul_capacity_mbit_s,
        p.d2d_capacity_mbit_s,
    )
}

fn expect_case(p: &Params, case: Case) -> Result<()> {
    if p.case != case {
        return Err(Error::invalid(format!("parameters are for case {}, not {case}", p.case)));
    }
    p.validate()
}

/// CF estimate from a training matrix. No training data leaves every score at
/// zero, which makes greedy placement fall back to the lowest file ids.
fn estimate(train: &RatingMatrix, p: &Params, training_seed: u64, index: usize) -> Result<EstimatedPopularity> {
    let mut rng = seed::indexed_stream(training_seed, Stream::Training, index);
    match popularity::fit(train, p.cf, &mut rng) {
        Ok(fit) => Ok(popularity::estimate_matrix(&fit.model)),
        Err(Error::EmptyData(_)) => EstimatedPopularity::from_rows(vec![vec![0.0; p.file_count]; p.user_count]),
        Err(e) => Err(e),
    }
}

/// Case I: ZipF trace, CF-estimated popularity per SBS, greedy (proactive)
/// versus random (reactive) SBS caches.
pub fn run_case1(p: &Params, run_seed: u64) -> Result<RunOutput> {
    expect_case(p, Case::One)?;
    let cat = catalog(p)?;
    let cfg = network(p)?;
    let zipf = workload::zipf_pmf(p.file_count, p.zipf_exponent)?;
    let trace = workload::generate_trace(
        p.requests,
        p.horizon_s,
        p.user_count,
        &zipf,
        &mut seed::stream(run_seed, Stream::Trace),
    )?;
    let truth = if p.independent_ground_truth {
        let other = workload::generate_trace(
            p.requests,
            p.horizon_s,
            p.user_count,
            &zipf,
            &mut seed::stream(run_seed, Stream::GroundTruth),
        )?;
        popularity::build_ground_truth(&other, p.user_count, p.file_count)?
    } else {
        popularity::build_ground_truth(&trace, p.user_count, p.file_count)?
    };
    let split = popularity::mask_training(&truth, p.holdout_fraction, &mut seed::stream(run_seed, Stream::Mask))?;

    let pooled = if p.pooled_training {
        Some(estimate(&split.train, p, run_seed, 0)?)
    } else {
        None
    };
    let mut proactive = Vec::with_capacity(p.sbs_count);
    let mut reactive = Vec::with_capacity(p.sbs_count);
    for sbs in 0..p.sbs_count {
        let users = cfg.users_of(sbs);
        let scores = if users.is_empty() {
            vec![0.0; p.file_count]
        } else {
            let local;
            let p_hat = match &pooled {
                Some(m) => m,
                None => {
                    local = estimate(&split.train.restrict_users(&users), p, run_seed, sbs)?;
                    &local
                }
            };
            caching::popularity_scores(p_hat, &users)?
        };
        proactive.push(caching::greedy_place(&scores, p.cache_mbit, p.file_length_mbit, sbs)?);
        reactive.push(caching::random_place(
            p.file_count,
            p.cache_mbit,
            p.file_length_mbit,
            sbs,
            &mut seed::indexed_stream(run_seed, Stream::RandomPlacement, sbs),
        )?);
    }

    Ok(RunOutput {
        proactive: simcore::simulate_case1_detailed(&cfg, &trace, &proactive, &cat)?,
        reactive: simcore::simulate_case1_detailed(&cfg, &trace, &reactive, &cat)?,
        trace,
        proactive_placements: proactive,
        reactive_placements: reactive,
    })
}

/// Social structure shared by both approaches in case II.
#[derive(Debug, Clone)]
pub struct SocialSetup {
    pub graph: SocialGraph,
    pub communities: CommunityAssignment,
    pub popularity: Vec<CommunityPopularity>,
}

pub fn social_setup(p: &Params, run_seed: u64) -> Result<SocialSetup> {
    let graph = socialnet::generate_preferential_attachment(
        p.user_count,
        p.pa_edges_per_node,
        &mut seed::stream(run_seed, Stream::Graph),
    )?;
    let scores = socialnet::centrality(&graph, socialnet::Centrality::Eigenvector)?;
    let communities = socialnet::form_communities(
        &graph,
        &scores,
        p.communities,
        &mut seed::stream(run_seed, Stream::Communities),
    )?;
    let beta = p.concentration.max(MIN_CONCENTRATION);
    let popularity = (0..communities.community_count())
        .map(|c| {
            let members = communities.members(c).len();
            let seating = crp::crp_sample(members, beta, &mut seed::indexed_stream(run_seed, Stream::Crp, c))?;
            crp::community_popularity(
                &seating,
                p.file_count,
                p.table_mapping,
                &mut seed::indexed_stream(run_seed, Stream::TablePermutation, c),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SocialSetup {
        graph,
        communities,
        popularity,
    })
}

/// Case II: preferential-attachment social graph, eigenvector-central
/// influencers per spectral community, CRP popularity per community, greedy
/// (proactive) versus random (reactive) D2D caches on the influencers.
pub fn run_case2(p: &Params, run_seed: u64) -> Result<RunOutput> {
    expect_case(p, Case::Two)?;
    let cat = catalog(p)?;
    let cfg = network(p)?;
    let social = social_setup(p, run_seed)?;
    let influencers = &social.communities.influencer_of;
    let per_node = p.cache_mbit / p.communities as f64;

    let scores: Vec<Vec<f64>> = social.popularity.iter().map(|c| c.scores.clone()).collect();
    let proactive = caching::community_place(&scores, influencers, per_node, p.file_length_mbit)?;
    let reactive = influencers
        .iter()
        .enumerate()
        .map(|(c, &u)| {
            caching::random_place(
                p.file_count,
                per_node,
                p.file_length_mbit,
                u,
                &mut seed::indexed_stream(run_seed, Stream::RandomPlacement, c),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let dists = social
        .popularity
        .iter()
        .map(|c| ZipfDist::from_weights(&c.distribution))
        .collect::<Result<Vec<_>>>()?;
    let community_of = &social.communities.community_of;
    let trace = workload::generate_trace_with(
        p.requests,
        p.horizon_s,
        p.user_count,
        &mut seed::stream(run_seed, Stream::Trace),
        |u, r| dists[community_of[u]].sample(r),
    )?;

    Ok(RunOutput {
        proactive: simcore::simulate_case2_detailed(&cfg, &trace, &proactive, &social.graph, &cat)?,
        reactive: simcore::simulate_case2_detailed(&cfg, &trace, &reactive, &social.graph, &cat)?,
        trace,
        proactive_placements: proactive,
        reactive_placements: reactive,
    })
}

pub fn run(p: &Params, run_seed: u64) -> Result<RunOutput> {
    match p.case {
        Case::One => run_case1(p, run_seed),
        Case::Two => run_case2(p, run_seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::params::{Regime, SweepParam};

    fn case1(cache: f64) -> Params {
        let mut p = Params::preset(Case::One, Regime::Low);
        p.set_normalized(SweepParam::Cache, cache).unwrap();
        p
    }

    #[test]
    fn case1_cache_endpoints() {
        for s in 0..3 {
            let none = run_case1(&case1(0.0), s).unwrap();
            let full = run_case1(&case1(1.0), s).unwrap();
            for a in Approach::ALL {
                assert_eq!(none.report(a).backhaul_load, 1.0);
                assert_eq!(full.report(a).backhaul_load, 0.0);
            }
        }
    }

    #[test]
    fn no_requests_is_vacuous() {
        for case in [Case::One, Case::Two] {
            let mut p = Params::preset(case, Regime::High);
            p.requests = 0;
            let out = run(&p, 9).unwrap();
            for a in Approach::ALL {
                assert_eq!(out.report(a).satisfied_fraction, 1.0);
            }
        }
    }

    #[test]
    fn both_approaches_share_the_trace() {
        for case in [Case::One, Case::Two] {
            let out = run(&Params::preset(case, Regime::Low), 4).unwrap();
            assert_eq!(out.proactive.report.trace_digest, out.reactive.report.trace_digest);
            assert_eq!(out.proactive.report.trace_digest, out.trace.digest());
        }
    }

    #[test]
    fn runs_are_reproducible() {
        for case in [Case::One, Case::Two] {
            let p = Params::preset(case, Regime::Low);
            let a = run(&p, 17).unwrap();
            let b = run(&p, 17).unwrap();
            assert_eq!(a.proactive.report, b.proactive.report);
            assert_eq!(a.reactive.report, b.reactive.report);
        }
    }

    #[test]
    fn case2_without_cache_uses_only_small_cells() {
        let mut p = Params::preset(Case::Two, Regime::Low);
        p.cache_mbit = 0.0;
        let out = run_case2(&p, 3).unwrap();
        for a in Approach::ALL {
            assert_eq!(out.report(a).small_cell_load, 1.0);
        }
    }

    #[test]
    fn case2_places_one_cache_per_community() {
        let p = Params::preset(Case::Two, Regime::Low);
        let out = run_case2(&p, 5).unwrap();
        assert_eq!(out.proactive_placements.len(), 3);
        assert_eq!(out.reactive_placements.len(), 3);
        let social = social_setup(&p, 5).unwrap();
        for c in 0..3 {
            assert!(!social.communities.members(c).is_empty());
        }
    }

    #[test]
    fn pooled_and_independent_variants_run() {
        let mut p = Params::preset(Case::One, Regime::Low);
        p.pooled_training = true;
        p.independent_ground_truth = true;
        let out = run_case1(&p, 2).unwrap();
        assert_eq!(out.proactive_placements.len(), 4);
    }

    #[test]
    fn wrong_case_is_rejected() {
        let p = Params::preset(Case::Two, Regime::Low);
        assert!(matches!(run_case1(&p, 0), Err(Error::InvalidArgument(_))));
    }
}
