//! Oracles shared by the integration tests and the acceptance suite. They are
//! written against the public API only and do not reuse library internals.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use proactive_cache::caching::CachePlacement;
use proactive_cache::crp::{self, CrpAssignment};
use proactive_cache::popularity::{self, CfModel, CfParams, Rating, RatingMatrix};
use proactive_cache::seed;
use proactive_cache::simcore::{NetworkConfig, SimOutput};
use proactive_cache::socialnet::{self, SocialGraph};
use proactive_cache::workload::{Catalog, Request, RequestTrace};
use rand::Rng;

// ---- matrix completion ----

/// `r_ui = a_u * b_i` with both factors in [0.2, 1].
pub fn planted_rank_one(n: usize, f: usize, s: u64) -> RatingMatrix {
    let mut rng = seed::rng(s);
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..=1.0)).collect();
    let b: Vec<f64> = (0..f).map(|_| rng.gen_range(0.2..=1.0)).collect();
    let mut obs = Vec::with_capacity(n * f);
    for u in 0..n {
        for i in 0..f {
            obs.push(Rating { user: u, file: i, value: a[u] * b[i] });
        }
    }
    RatingMatrix::new(n, f, obs).unwrap()
}

/// Held-out RMSE of a rank-4, unregularized fit on a 16x16 planted rank-1
/// matrix with 20% holdout.
pub fn rank_one_recovery_rmse(s: u64) -> f64 {
    let src = planted_rank_one(16, 16, s);
    let split = popularity::mask_training(&src, 0.2, &mut seed::rng(s ^ 1)).unwrap();
    let params = CfParams { rank: 4, reg_weight: 0.0, learning_rate: 0.02, epochs: 3000 };
    let fit = popularity::fit(&split.train, params, &mut seed::rng(s ^ 2)).unwrap();
    popularity::rmse(&fit.model, &split.test).unwrap()
}

fn param_mut(m: &mut CfModel, mut idx: usize) -> &mut f64 {
    for v in [&mut m.user_bias, &mut m.item_bias, &mut m.user_factors, &mut m.item_factors] {
        if idx < v.len() {
            return &mut v[idx];
        }
        idx -= v.len();
    }
    panic!("parameter index out of range")
}

/// Largest relative gap between the analytic objective gradient and central
/// differences (h = 1e-5) over 5 random coordinates.
pub fn max_gradient_relative_error(s: u64) -> f64 {
    let train = planted_rank_one(8, 10, s);
    let params = CfParams { rank: 3, reg_weight: 0.05, learning_rate: 0.01, epochs: 5 };
    let model = popularity::fit(&train, params, &mut seed::rng(s)).unwrap().model;
    let g = model.objective_gradient(&train);
    let flat: Vec<f64> = g
        .user_bias
        .iter()
        .chain(&g.item_bias)
        .chain(&g.user_factors)
        .chain(&g.item_factors)
        .copied()
        .collect();
    let mut rng = seed::rng(s ^ 0xfd);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let idx = rng.gen_range(0..flat.len());
        let mut plus = model.clone();
        *param_mut(&mut plus, idx) += h;
        let mut minus = model.clone();
        *param_mut(&mut minus, idx) -= h;
        let numeric = (plus.objective(&train) - minus.objective(&train)) / (2.0 * h);
        let rel = (numeric - flat[idx]).abs() / numeric.abs().max(flat[idx].abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}

// ---- CRP ----

/// All set partitions of `n` customers as restricted growth strings.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0]];
    for _ in 1..n {
        let mut next = Vec::new();
        for p in &out {
            let top = p.iter().max().unwrap() + 1;
            for t in 0..=top {
                let mut q = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn counts_of(seating: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; seating.iter().max().unwrap() + 1];
    for &t in seating {
        counts[t] += 1;
    }
    counts
}

/// Closed-form seating probability `β^h Γ(β)/Γ(β+n) Π (m−1)!`, computed
/// directly as a rising factorial.
pub fn seating_probability(seating: &[usize], beta: f64) -> f64 {
    let counts = counts_of(seating);
    let n = seating.len();
    let rising: f64 = (0..n).map(|i| beta + i as f64).product();
    let fact = |m: usize| (1..m).map(|x| x as f64).product::<f64>();
    beta.powi(counts.len() as i32) * counts.iter().map(|&m| fact(m)).product::<f64>() / rising
}

pub fn library_probability(seating: &[usize], beta: f64) -> f64 {
    let a = CrpAssignment {
        concentration: beta,
        customer_table: seating.to_vec(),
        table_counts: counts_of(seating),
    };
    crp::crp_log_probability(&a).unwrap().exp()
}

/// Total variation between sampled and exact seating frequencies for `n`
/// customers.
pub fn crp_total_variation(n: usize, beta: f64, samples: u64, master: u64) -> f64 {
    let mut freq: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for s in 0..samples {
        let a = crp::crp_sample(n, beta, &mut seed::rng(seed::derive(&[master, s]))).unwrap();
        *freq.entry(a.customer_table).or_default() += 1.0 / samples as f64;
    }
    0.5 * partitions(n)
        .iter()
        .map(|p| (freq.get(p).copied().unwrap_or(0.0) - seating_probability(p, beta)).abs())
        .sum::<f64>()
}

// ---- centrality ----

pub fn graph(n: usize, edges: &[(usize, usize)]) -> SocialGraph {
    SocialGraph::from_edges(n, edges).unwrap()
}

/// Named connected graphs on at most 10 nodes.
pub fn centrality_corpus() -> Vec<(String, SocialGraph)> {
    let mut out = Vec::new();
    for n in 2..=10 {
        let path: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        out.push((format!("path{n}"), graph(n, &path)));
        let star: Vec<_> = (1..n).map(|i| (0, i)).collect();
        out.push((format!("star{n}"), graph(n, &star)));
        let complete: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        out.push((format!("complete{n}"), graph(n, &complete)));
        if n >= 3 {
            let mut cycle = path.clone();
            cycle.push((n - 1, 0));
            out.push((format!("cycle{n}"), graph(n, &cycle)));
        }
        if n >= 4 {
            let mut wheel: Vec<_> = (1..n).map(|i| (0, i)).collect();
            wheel.extend((1..n - 1).map(|i| (i, i + 1)));
            wheel.push((n - 1, 1));
            out.push((format!("wheel{n}"), graph(n, &wheel)));
        }
    }
    let petersen = [
        (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
        (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
        (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
    ];
    out.push(("petersen".into(), graph(10, &petersen)));
    out.push(("bridged-cliques".into(), two_cliques()));
    // Random connected graphs: a random spanning tree plus extra edges.
    for s in 0..60u64 {
        let mut rng = seed::rng(seed::derive(&[0xC0, s]));
        let n = rng.gen_range(2..=10);
        let mut edges = BTreeSet::new();
        for v in 1..n {
            edges.insert((rng.gen_range(0..v), v));
        }
        let p: f64 = rng.gen_range(0.0..0.6);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.insert((u, v));
                }
            }
        }
        let edges: Vec<_> = edges.into_iter().collect();
        out.push((format!("random{s}"), graph(n, &edges)));
    }
    for s in 0..10u64 {
        let n = 3 + s as usize % 8;
        let g = socialnet::generate_preferential_attachment(n, 2, &mut seed::rng(s)).unwrap();
        out.push((format!("pa{s}"), g));
    }
    out
}

/// Two 4-cliques {0..3} and {4..7} joined by the edge 3-4.
pub fn two_cliques() -> SocialGraph {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((base + u, base + v));
            }
        }
    }
    edges.push((3, 4));
    graph(8, &edges)
}

/// Leading eigenpair by dense symmetric decomposition, vector scaled to unit
/// norm with positive entries.
pub fn eigen_oracle(g: &SocialGraph) -> (f64, Vec<f64>) {
    let n = g.user_count();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let eig = SymmetricEigen::new(a);
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let col = eig.eigenvectors.column(k);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let norm = col.norm();
    (lambda, col.iter().map(|x| sign * x / norm).collect())
}

// ---- simulation ----

/// Small randomized network with a trace and both kinds of placements.
pub struct Instance {
    pub cfg: NetworkConfig,
    pub catalog: Catalog,
    pub trace: RequestTrace,
    pub sbs_caches: Vec<CachePlacement>,
    pub user_caches: Vec<CachePlacement>,
    pub graph: SocialGraph,
}

pub fn instance(s: u64) -> Instance {
    let mut rng = seed::rng(seed::derive(&[0x51, s]));
    let m = rng.gen_range(1..=5);
    let n = rng.gen_range(m..=16);
    let horizon = rng.gen_range(1..=40u32);
    let f = rng.gen_range(1..=12);
    let l = rng.gen_range(0.1..4.0);
    let catalog = Catalog::new(f, l, rng.gen_range(0.25..4.0)).unwrap();
    let mut cap = || if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.05..50.0) };
    let (w, b, d) = (cap(), cap(), cap());
    let cfg = NetworkConfig::round_robin(m, n, horizon, w, b, d).unwrap();
    let count = rng.gen_range(0..80);
    let mut entries: Vec<Request> = (0..count)
        .map(|_| Request {
            arrival_time_s: rng.gen_range(0.0..horizon as f64),
            user: rng.gen_range(0..n),
            file: rng.gen_range(0..f),
        })
        .collect();
    // A few arrivals exactly on slot boundaries.
    for e in entries.iter_mut().step_by(7) {
        e.arrival_time_s = e.arrival_time_s.floor();
    }
    entries.sort_by(|a, b| a.arrival_time_s.total_cmp(&b.arrival_time_s));
    let trace = RequestTrace { horizon_s: horizon, entries };
    let place = |node: usize, rng: &mut seed::SimRng| {
        let stored: BTreeSet<usize> = (0..f).filter(|_| rng.gen_bool(0.4)).collect();
        CachePlacement { node_id: node, capacity_mbit: stored.len() as f64 * l, stored }
    };
    let sbs_caches = (0..m).map(|node| place(node, &mut rng)).collect();
    let user_caches = (0..n).filter(|_| rng.gen_bool(0.3)).collect::<Vec<_>>();
    let user_caches = user_caches.into_iter().map(|u| place(u, &mut rng)).collect();
    let p = rng.gen_range(0.0..0.5);
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    let graph = SocialGraph::from_edges(n, &edges).unwrap();
    Instance { cfg, catalog, trace, sbs_caches, user_caches, graph }
}

/// Largest conservation and capacity violations of one run:
/// (per-request megabit error, per-slot capacity excess).
pub fn conservation_errors(cfg: &NetworkConfig, catalog: &Catalog, out: &SimOutput) -> (f64, f64) {
    let l = catalog.file_length_mbit;
    let mut bits = 0.0f64;
    for o in &out.outcomes {
        let delivered = o.wireless_mbit + o.d2d_mbit;
        let err = if o.completion_time_s.is_some() {
            (delivered - l).abs()
        } else {
            (delivered + o.remaining_mbit - l).abs()
        };
        bits = bits.max(err);
        // Backhaul megabits are always a subset of the SBS megabits.
        bits = bits.max(o.backhaul_mbit - o.wireless_mbit);
    }
    let m = cfg.sbs_count as f64;
    let mut excess = 0.0f64;
    for slot in &out.slots {
        for s in 0..cfg.sbs_count {
            excess = excess.max(slot.wireless_mbit[s] - cfg.wireless_capacity_mbit_s / m);
            excess = excess.max(slot.backhaul_mbit[s] - cfg.backhaul_capacity_mbit_s / m);
        }
        excess = excess.max(slot.d2d_mbit - cfg.d2d_capacity_mbit_s);
    }
    (bits, excess)
}
