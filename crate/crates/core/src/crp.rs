//! Chinese Restaurant Process model of per-community content popularity.
//!
//! Users are customers and files are tables. Customer `t + 1` joins an
//! occupied table `f` with probability `m_f / (t + β)` and opens a new table
//! with probability `β / (t + β)`. The probability of a seating with table
//! sizes `m_1..m_h` over `n` customers is
//! `β^h Γ(β) / Γ(β + n) · Π (m_f − 1)!`.

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CrpAssignment {
    pub concentration: f64,
    /// Table of each customer, tables numbered in order of creation.
    pub customer_table: Vec<usize>,
    pub table_counts: Vec<usize>,
}

impl CrpAssignment {
    /// Seat customers table by table: the first `counts[0]` at table 0, and
    /// so on.
    pub fn from_counts(concentration: f64, counts: &[usize]) -> Result<Self> {
        let customer_table = counts
            .iter()
            .enumerate()
            .flat_map(|(t, &m)| std::iter::repeat_n(t, m))
            .collect();
        let a = CrpAssignment {
            concentration,
            customer_table,
            table_counts: counts.to_vec(),
        };
        a.validate()?;
        Ok(a)
    }

    pub fn customers(&self) -> usize {
        self.customer_table.len()
    }

    /// Number of occupied tables (files with a viewing history).
    pub fn history_tables(&self) -> usize {
        self.table_counts.len()
    }

    pub fn validate(&self) -> Result<()> {
        let beta = self.concentration;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("concentration must be positive, got {beta}")));
        }
        if self.customer_table.is_empty() {
            return Err(Error::invalid("assignment has no customers"));
        }
        if self.table_counts.contains(&0) {
            return Err(Error::invalid("every table must be occupied"));
        }
        let mut tally = vec![0usize; self.table_counts.len()];
        for &t in &self.customer_table {
            if t >= tally.len() {
                return Err(Error::invalid(format!("customer seated at unknown table {t}")));
            }
            tally[t] += 1;
        }
        if tally != self.table_counts {
            return Err(Error::invalid("table counts disagree with the seating"));
        }
        Ok(())
    }
}

fn check_concentration(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("concentration must be positive and finite, got {beta}")))
    }
}

/// Sequential seating of `n_customers`. Consumes one uniform draw per customer.
pub fn crp_sample<R: Rng + ?Sized>(
    n_customers: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<CrpAssignment> {
    check_concentration(concentration)?;
    if n_customers == 0 {
        return Err(Error::invalid("need at least one customer"));
    }
    let mut customer_table = Vec::with_capacity(n_customers);
    let mut table_counts: Vec<usize> = Vec::new();
    for t in 0..n_customers {
        let mut target = rng.gen::<f64>() * (t as f64 + concentration);
        let mut chosen = table_counts.len();
        for (f, &m) in table_counts.iter().enumerate() {
            if target < m as f64 {
                chosen = f;
                break;
            }
            target -= m as f64;
        }
        if chosen == table_counts.len() {
            table_counts.push(0);
        }
        table_counts[chosen] += 1;
        customer_table.push(chosen);
    }
    Ok(CrpAssignment {
        concentration,
        customer_table,
        table_counts,
    })
}

/// Natural log of the seating probability.
pub fn crp_log_probability(a: &CrpAssignment) -> Result<f64> {
    a.validate()?;
    let beta = a.concentration;
    let n = a.customers() as f64;
    let tables = a.history_tables() as f64;
    let log_factorials: f64 = a
        .table_counts
        .iter()
        .map(|&m| ln_gamma(m as f64))
        .sum();
    Ok(tables * beta.ln() + ln_gamma(beta) - ln_gamma(beta + n) + log_factorials)
}

/// How tables are bound to catalog file ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableMapping {
    /// Table `j` (in creation order) is file `j`.
    #[default]
    CreationOrder,
    /// Tables are bound to a uniformly random set of distinct file ids.
    Permuted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPopularity {
    /// Occupancy `m_j` at each history file, 0 elsewhere. Drives placement.
    pub scores: Vec<f64>,
    /// Request distribution: history mass `m_j / (n + β)` plus a floor of
    /// total mass `1 / (n + β)` spread evenly over zero-score files,
    /// renormalized to sum to one.
    pub distribution: Vec<f64>,
}

pub fn community_popularity<R: Rng + ?Sized>(
    a: &CrpAssignment,
    catalog_size: usize,
    mapping: TableMapping,
    rng: &mut R,
) -> Result<CommunityPopularity> {
    a.validate()?;
    let tables = a.history_tables();
    if tables > catalog_size {
        return Err(Error::Domain(format!(
            "{tables} occupied tables exceed the {catalog_size}-file catalog"
        )));
    }
    let file_of_table: Vec<usize> = match mapping {
        TableMapping::CreationOrder => (0..tables).collect(),
        TableMapping::Permuted => {
            let mut ids: Vec<usize> = (0..catalog_size).collect();
            ids.shuffle(rng);
            ids.truncate(tables);
            ids
        }
    };
    let mut scores = vec![0.0; catalog_size];
    for (&file, &m) in file_of_table.iter().zip(&a.table_counts) {
        scores[file] = m as f64;
    }

    let denom = a.customers() as f64 + a.concentration;
    let unseen = catalog_size - tables;
    let floor = if unseen > 0 {
        1.0 / denom / unseen as f64
    } else {
        0.0
    };
    let mut distribution: Vec<f64> = scores
        .iter()
        .map(|&m| if m > 0.0 { m / denom } else { floor })
        .collect();
    let total: f64 = distribution.iter().sum();
    distribution.iter_mut().for_each(|p| *p /= total);
    Ok(CommunityPopularity {
        scores,
        distribution,
    })
}
