//! Slotted delivery simulation.
//!
//! Time advances in 1-second slots over `[0, T)`. A request arriving inside a
//! slot becomes active at the next slot boundary. Every slot, each SBS splits
//! its capacities equally among its active requests (processor sharing); a
//! share left unused by a request that finishes mid-slot is not redistributed.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::caching::CachePlacement;
use crate::error::{Error, Result};
use crate::socialnet::SocialGraph;
use crate::workload::{Catalog, RequestTrace};

/// Remaining megabits at or below this count as delivered.
pub const COMPLETION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub sbs_count: usize,
    pub user_count: usize,
    pub horizon_s: u32,
    /// Total across SBSs; each SBS owns an equal share.
    pub wireless_capacity_mbit_s: f64,
    /// Total across SBSs (case I only).
    pub backhaul_capacity_mbit_s: f64,
    /// Total D2D capacity shared by all concurrent transfers (case II only).
    pub d2d_capacity_mbit_s: f64,
    pub user_of_sbs: Vec<usize>,
}

impl NetworkConfig {
    /// User `u` attaches to SBS `u mod M`.
    pub fn round_robin(
        sbs_count: usize,
        user_count: usize,
        horizon_s: u32,
        wireless_capacity_mbit_s: f64,
        backhaul_capacity_mbit_s: f64,
        d2d_capacity_mbit_s: f64,
    ) -> Result<Self> {
        if sbs_count == 0 {
            return Err(Error::invalid("need at least one SBS"));
        }
        let cfg = NetworkConfig {
            sbs_count,
            user_count,
            horizon_s,
            wireless_capacity_mbit_s,
            backhaul_capacity_mbit_s,
            d2d_capacity_mbit_s,
            user_of_sbs: (0..user_count).map(|u| u % sbs_count).collect(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sbs_count == 0 || self.user_count == 0 {
            return Err(Error::invalid("need at least one SBS and one user"));
        }
        for (name, c) in [
            ("wireless", self.wireless_capacity_mbit_s),
            ("backhaul", self.backhaul_capacity_mbit_s),
            ("d2d", self.d2d_capacity_mbit_s),
        ] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("{name} capacity must be >= 0, got {c}")));
            }
        }
        if self.user_of_sbs.len() != self.user_count {
            return Err(Error::invalid("user_of_sbs must map every user"));
        }
        if let Some(&s) = self.user_of_sbs.iter().find(|&&s| s >= self.sbs_count) {
            return Err(Error::invalid(format!("user mapped to unknown SBS {s}")));
        }
        Ok(())
    }

    pub fn users_of(&self, sbs: usize) -> Vec<usize> {
        (0..self.user_count)
            .filter(|&u| self.user_of_sbs[u] == sbs)
            .collect()
    }

    fn per_sbs(&self, total: f64) -> f64 {
        total / self.sbs_count as f64
    }
}

/// Delivery deadline: the file's playback duration `L / B`.
pub fn satisfaction_threshold(catalog: &Catalog) -> f64 {
    catalog.file_length_mbit / catalog.bitrate_mbit_s
}

/// Per-request result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestOutcome {
    pub user: usize,
    pub file: usize,
    pub arrival_time_s: f64,
    pub completion_time_s: Option<f64>,
    pub satisfied: bool,
    /// Megabits over the SBS radio link.
    pub wireless_mbit: f64,
    /// Megabits fetched over the backhaul (streamed through the radio link).
    pub backhaul_mbit: f64,
    pub d2d_mbit: f64,
    pub remaining_mbit: f64,
}

impl RequestOutcome {
    /// Megabits that reached the user over any last-hop channel.
    pub fn delivered_mbit(&self) -> f64 {
        self.wireless_mbit + self.d2d_mbit
    }
}

/// Megabits scheduled on each resource in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotUsage {
    pub wireless_mbit: Vec<f64>,
    pub backhaul_mbit: Vec<f64>,
    pub d2d_mbit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub satisfied_fraction: f64,
    /// Backhaul megabits over SBS wireless megabits (0 when nothing was sent).
    pub backhaul_load: f64,
    /// SBS megabits over SBS plus D2D megabits (0 when nothing was sent).
    pub small_cell_load: f64,
    pub total_requests: usize,
    pub satisfied_requests: usize,
    pub completed_requests: usize,
    pub wireless_mbit: f64,
    pub backhaul_mbit: f64,
    pub d2d_mbit: f64,
    pub trace_digest: u64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub report: MetricsReport,
    pub outcomes: Vec<RequestOutcome>,
    pub slots: Vec<SlotUsage>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn summarize(outcomes: &[RequestOutcome], trace: &RequestTrace) -> MetricsReport {
    let total = outcomes.len();
    let satisfied = outcomes.iter().filter(|o| o.satisfied).count();
    let completed = outcomes.iter().filter(|o| o.completion_time_s.is_some()).count();
    let wireless: f64 = outcomes.iter().map(|o| o.wireless_mbit).sum();
    let backhaul: f64 = outcomes.iter().map(|o| o.backhaul_mbit).sum();
    let d2d: f64 = outcomes.iter().map(|o| o.d2d_mbit).sum();
    MetricsReport {
        satisfied_fraction: if total == 0 {
            1.0
        } else {
            satisfied as f64 / total as f64
        },
        backhaul_load: ratio(backhaul, wireless),
        small_cell_load: ratio(wireless, wireless + d2d),
        total_requests: total,
        satisfied_requests: satisfied,
        completed_requests: completed,
        wireless_mbit: wireless,
        backhaul_mbit: backhaul,
        d2d_mbit: d2d,
        trace_digest: trace.digest(),
    }
}

fn check_trace(cfg: &NetworkConfig, trace: &RequestTrace, catalog: &Catalog) -> Result<()> {
    if trace.horizon_s != cfg.horizon_s {
        return Err(Error::invalid(format!(
            "trace horizon {} differs from network horizon {}",
            trace.horizon_s, cfg.horizon_s
        )));
    }
    for e in &trace.entries {
        if e.user >= cfg.user_count || e.file >= catalog.file_count {
            return Err(Error::invalid(format!(
                "request (user {}, file {}) outside the network",
                e.user, e.file
            )));
        }
    }
    Ok(())
}

fn new_outcomes(trace: &RequestTrace, file_length: f64) -> Vec<RequestOutcome> {
    trace
        .entries
        .iter()
        .map(|e| RequestOutcome {
            user: e.user,
            file: e.file,
            arrival_time_s: e.arrival_time_s,
            completion_time_s: None,
            satisfied: false,
            wireless_mbit: 0.0,
            backhaul_mbit: 0.0,
            d2d_mbit: 0.0,
            remaining_mbit: file_length,
        })
        .collect()
}

/// Slot at which a request arriving at `t` becomes active.
fn activation_slot(t: f64) -> usize {
    t.ceil() as usize
}

/// Advance one request by one slot at `rate`. Returns the megabits moved and,
/// when the request finished, the offset into the slot at which it did.
fn drain(o: &mut RequestOutcome, rate: f64) -> (f64, Option<f64>) {
    if rate <= 0.0 {
        return (0.0, None);
    }
    if o.remaining_mbit - rate <= COMPLETION_EPS {
        let moved = o.remaining_mbit;
        o.remaining_mbit = 0.0;
        (moved, Some((moved / rate).min(1.0)))
    } else {
        o.remaining_mbit -= rate;
        (rate, None)
    }
}

fn finish(o: &mut RequestOutcome, slot: usize, offset: f64, threshold: f64) {
    let done = slot as f64 + offset;
    o.completion_time_s = Some(done);
    o.satisfied = done - o.arrival_time_s <= threshold;
}

/// Case I: SBS caches with a capacity-limited backhaul.
///
/// A cached file drains at the request's wireless share; a miss drains at
/// the smaller of its wireless and backhaul shares and every megabit counts
/// against both links.
pub fn simulate_case1(
    cfg: &NetworkConfig,
    trace: &RequestTrace,
    placements: &[CachePlacement],
    catalog: &Catalog,
) -> Result<MetricsReport> {
    simulate_case1_detailed(cfg, trace, placements, catalog).map(|o| o.report)
}

pub fn simulate_case1_detailed(
    cfg: &NetworkConfig,
    trace: &RequestTrace,
    placements: &[CachePlacement],
    catalog: &Catalog,
) -> Result<SimOutput> {
    cfg.validate()?;
    check_trace(cfg, trace, catalog)?;
    let mut cache_of: Vec<Option<&CachePlacement>> = vec![None; cfg.sbs_count];
    for p in placements {
        if p.node_id >= cfg.sbs_count {
            return Err(Error::invalid(format!("placement for unknown SBS {}", p.node_id)));
        }
        if cache_of[p.node_id].replace(p).is_some() {
            return Err(Error::invalid(format!("two placements for SBS {}", p.node_id)));
        }
    }
    let caches: Vec<&CachePlacement> = cache_of
        .into_iter()
        .enumerate()
        .map(|(s, p)| p.ok_or_else(|| Error::invalid(format!("no placement for SBS {s}"))))
        .collect::<Result<_>>()?;

    let threshold = satisfaction_threshold(catalog);
    let wireless_cap = cfg.per_sbs(cfg.wireless_capacity_mbit_s);
    let backhaul_cap = cfg.per_sbs(cfg.backhaul_capacity_mbit_s);
    let mut outcomes = new_outcomes(trace, catalog.file_length_mbit);
    let hit: Vec<bool> = trace
        .entries
        .iter()
        .map(|e| caches[cfg.user_of_sbs[e.user]].contains(e.file))
        .collect();

    let horizon = cfg.horizon_s as usize;
    let mut active: Vec<Vec<usize>> = vec![Vec::new(); cfg.sbs_count];
    let mut next = 0;
    let mut slots = Vec::with_capacity(horizon);
    for slot in 0..horizon {
        while next < trace.len() && activation_slot(trace.entries[next].arrival_time_s) <= slot {
            active[cfg.user_of_sbs[trace.entries[next].user]].push(next);
            next += 1;
        }
        let mut usage = SlotUsage {
            wireless_mbit: vec![0.0; cfg.sbs_count],
            backhaul_mbit: vec![0.0; cfg.sbs_count],
            d2d_mbit: 0.0,
        };
        for (sbs, reqs) in active.iter_mut().enumerate() {
            if reqs.is_empty() {
                continue;
            }
            let n = reqs.len() as f64;
            let (w_share, b_share) = (wireless_cap / n, backhaul_cap / n);
            reqs.retain(|&idx| {
                let o = &mut outcomes[idx];
                let rate = if hit[idx] { w_share } else { w_share.min(b_share) };
                let (moved, done) = drain(o, rate);
                o.wireless_mbit += moved;
                usage.wireless_mbit[sbs] += moved;
                if !hit[idx] {
                    o.backhaul_mbit += moved;
                    usage.backhaul_mbit[sbs] += moved;
                }
                match done {
                    Some(offset) => {
                        finish(o, slot, offset, threshold);
                        false
                    }
                    None => true,
                }
            });
        }
        slots.push(usage);
    }

    Ok(SimOutput {
        report: summarize(&outcomes, trace),
        outcomes,
        slots,
    })
}

/// Case II: SBS delivery plus D2D from socially connected caches.
///
/// When a social neighbour of the requester caches the file, the
/// highest-degree such neighbour (lower id on ties) streams it concurrently
/// with the SBS. The total D2D capacity is divided among concurrent D2D
/// transfers in proportion to the serving user's degree. There is no backhaul
/// constraint.
pub fn simulate_case2(
    cfg: &NetworkConfig,
    trace: &RequestTrace,
    placements: &[CachePlacement],
    graph: &SocialGraph,
    catalog: &Catalog,
) -> Result<MetricsReport> {
    simulate_case2_detailed(cfg, trace, placements, graph, catalog).map(|o| o.report)
}

pub fn simulate_case2_detailed(
    cfg: &NetworkConfig,
    trace: &RequestTrace,
    placements: &[CachePlacement],
    graph: &SocialGraph,
    catalog: &Catalog,
) -> Result<SimOutput> {
    cfg.validate()?;
    check_trace(cfg, trace, catalog)?;
    if graph.user_count() != cfg.user_count {
        return Err(Error::invalid(format!(
            "social graph has {} users, network has {}",
            graph.user_count(),
            cfg.user_count
        )));
    }
    let mut cache_of: HashMap<usize, &CachePlacement> = HashMap::new();
    for p in placements {
        if p.node_id >= cfg.user_count {
            return Err(Error::invalid(format!("placement for unknown user {}", p.node_id)));
        }
        if cache_of.insert(p.node_id, p).is_some() {
            return Err(Error::invalid(format!("two placements for user {}", p.node_id)));
        }
    }

    let server: Vec<Option<usize>> = trace
        .entries
        .iter()
        .map(|e| {
            graph
                .neighbors(e.user)
                .iter()
                .copied()
                .filter(|v| cache_of.get(v).is_some_and(|p| p.contains(e.file)))
                .fold(None, |best: Option<usize>, v| match best {
                    Some(b) if graph.degree(b) >= graph.degree(v) => Some(b),
                    _ => Some(v),
                })
        })
        .collect();

    let threshold = satisfaction_threshold(catalog);
    let wireless_cap = cfg.per_sbs(cfg.wireless_capacity_mbit_s);
    let d2d_total = cfg.d2d_capacity_mbit_s;
    let mut outcomes = new_outcomes(trace, catalog.file_length_mbit);

    let horizon = cfg.horizon_s as usize;
    let mut active: Vec<Vec<usize>> = vec![Vec::new(); cfg.sbs_count];
    let mut next = 0;
    let mut slots = Vec::with_capacity(horizon);
    for slot in 0..horizon {
        while next < trace.len() && activation_slot(trace.entries[next].arrival_time_s) <= slot {
            active[cfg.user_of_sbs[trace.entries[next].user]].push(next);
            next += 1;
        }
        let degree_sum: f64 = active
            .iter()
            .flatten()
            .filter_map(|&idx| server[idx])
            .map(|v| graph.degree(v) as f64)
            .sum();
        let mut usage = SlotUsage {
            wireless_mbit: vec![0.0; cfg.sbs_count],
            backhaul_mbit: vec![0.0; cfg.sbs_count],
            d2d_mbit: 0.0,
        };
        for (sbs, reqs) in active.iter_mut().enumerate() {
            if reqs.is_empty() {
                continue;
            }
            let sbs_share = wireless_cap / reqs.len() as f64;
            reqs.retain(|&idx| {
                let o = &mut outcomes[idx];
                let d2d_share = match server[idx] {
                    Some(v) if degree_sum > 0.0 => d2d_total * graph.degree(v) as f64 / degree_sum,
                    _ => 0.0,
                };
                let rate = sbs_share + d2d_share;
                let (moved, done) = drain(o, rate);
                if moved > 0.0 {
                    let via_d2d = moved * (d2d_share / rate);
                    let via_sbs = moved - via_d2d;
                    o.wireless_mbit += via_sbs;
                    o.d2d_mbit += via_d2d;
                    usage.wireless_mbit[sbs] += via_sbs;
                    usage.d2d_mbit += via_d2d;
                }
                match done {
                    Some(offset) => {
                        finish(o, slot, offset, threshold);
                        false
                    }
                    None => true,
                }
            });
        }
        slots.push(usage);
    }

    Ok(SimOutput {
        report: summarize(&outcomes, trace),
        outcomes,
        slots,
    })
}

/// One line per completed request:
/// `completion_s user file satisfied wireless_mbit backhaul_mbit d2d_mbit`.
pub fn write_event_log<W: Write>(outcomes: &[RequestOutcome], out: &mut W) -> io::Result<()> {
    let mut done: Vec<&RequestOutcome> =
        outcomes.iter().filter(|o| o.completion_time_s.is_some()).collect();
    done.sort_by(|a, b| a.completion_time_s.unwrap().total_cmp(&b.completion_time_s.unwrap()));
    for o in done {
        writeln!(
            out,
            "{:.6} {} {} {} {:.6} {:.6} {:.6}",
            o.completion_time_s.unwrap(),
            o.user,
            o.file,
            u8::from(o.satisfied),
            o.wireless_mbit,
            o.backhaul_mbit,
            o.d2d_mbit
        )?;
    }
    Ok(())
}
