//! Cache placement: greedy most-popular-first, uniform random, and
//! per-community placement on influential users.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::popularity::EstimatedPopularity;

/// Files stored at one cache node (an SBS id or a user id).
#[derive(Debug, Clone, PartialEq)]
pub struct CachePlacement {
    pub node_id: usize,
    pub capacity_mbit: f64,
    pub stored: BTreeSet<usize>,
}

impl CachePlacement {
    pub fn empty(node_id: usize, capacity_mbit: f64) -> Self {
        CachePlacement {
            node_id,
            capacity_mbit,
            stored: BTreeSet::new(),
        }
    }

    pub fn contains(&self, file: usize) -> bool {
        self.stored.contains(&file)
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn used_mbit(&self, file_length_mbit: f64) -> f64 {
        self.stored.len() as f64 * file_length_mbit
    }
}

/// Number of whole files that fit; fractional residual capacity is unused.
pub fn slots(capacity_mbit: f64, file_length_mbit: f64) -> Result<usize> {
    if !(capacity_mbit >= 0.0 && capacity_mbit.is_finite()) {
        return Err(Error::invalid(format!(
            "cache capacity must be finite and nonnegative, got {capacity_mbit}"
        )));
    }
    if !(file_length_mbit > 0.0 && file_length_mbit.is_finite()) {
        return Err(Error::invalid(format!(
            "file length must be positive, got {file_length_mbit}"
        )));
    }
    // Admit one more file when rounding left the quotient a hair short
    // (e.g. 0.4 * 128 Mbit of 1 Mbit files).
    let n = (capacity_mbit / file_length_mbit).floor() as usize;
    if (n + 1) as f64 * file_length_mbit <= capacity_mbit + 1e-9 {
        Ok(n + 1)
    } else {
        Ok(n)
    }
}

/// Per-file sum of predicted scores over `users`.
pub fn popularity_scores(p_hat: &EstimatedPopularity, users: &[usize]) -> Result<Vec<f64>> {
    if users.is_empty() {
        return Err(Error::invalid("popularity scores need at least one user"));
    }
    let mut scores = vec![0.0; p_hat.file_count()];
    for &u in users {
        if u >= p_hat.user_count() {
            return Err(Error::invalid(format!(
                "user {u} outside {} users",
                p_hat.user_count()
            )));
        }
        for (s, v) in scores.iter_mut().zip(p_hat.row(u)) {
            *s += v;
        }
    }
    Ok(scores)
}

/// File ids in decreasing score order, ties to the lower id.
pub fn rank_files(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

pub fn greedy_place(
    scores: &[f64],
    capacity_mbit: f64,
    file_length_mbit: f64,
    node_id: usize,
) -> Result<CachePlacement> {
    let n = slots(capacity_mbit, file_length_mbit)?;
    let mut placement = CachePlacement::empty(node_id, capacity_mbit);
    placement.stored.extend(rank_files(scores).into_iter().take(n));
    Ok(placement)
}

pub fn random_place<R: Rng + ?Sized>(
    file_count: usize,
    capacity_mbit: f64,
    file_length_mbit: f64,
    node_id: usize,
    rng: &mut R,
) -> Result<CachePlacement> {
    let n = slots(capacity_mbit, file_length_mbit)?.min(file_count);
    let mut placement = CachePlacement::empty(node_id, capacity_mbit);
    placement
        .stored
        .extend(index::sample(rng, file_count, n));
    Ok(placement)
}

/// Greedy placement of each community's ranking into its influencer's cache.
/// `community_scores[c]` is the per-file score vector of community `c`.
pub fn community_place(
    community_scores: &[Vec<f64>],
    influencers: &[usize],
    per_node_capacity_mbit: f64,
    file_length_mbit: f64,
) -> Result<Vec<CachePlacement>> {
    if community_scores.len() != influencers.len() {
        return Err(Error::invalid(format!(
            "{} community rankings for {} influencers",
            community_scores.len(),
            influencers.len()
        )));
    }
    community_scores
        .iter()
        .zip(influencers)
        .map(|(scores, &user)| greedy_place(scores, per_node_capacity_mbit, file_length_mbit, user))
        .collect()
}
