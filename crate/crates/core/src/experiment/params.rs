//! Run parameters, regime presets, normalization and config-file overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::crp::TableMapping;
use crate::error::{Error, Result};
use crate::popularity::CfParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// SBS caching under a backhaul bottleneck.
    One,
    /// Social-aware D2D caching on influential users.
    Two,
}

impl Case {
    pub fn number(self) -> u64 {
        match self {
            Case::One => 1,
            Case::Two => 2,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Low,
    High,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::Low, Regime::High];

    pub fn index(self) -> u64 {
        match self {
            Regime::Low => 0,
            Regime::High => 1,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Low => "low",
            Regime::High => "high",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Regime::Low),
            "high" => Ok(Regime::High),
            other => Err(Error::invalid(format!("unknown regime `{other}` (low|high)"))),
        }
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// `R`, normalized by `R_star`.
    Requests,
    /// `S`, normalized by `L * F`.
    Cache,
    /// ZipF exponent, normalized by 2 (case I).
    Zipf,
    /// CRP concentration, normalized by 100 (case II).
    Crp,
}

impl SweepParam {
    pub fn for_case(case: Case) -> [SweepParam; 3] {
        match case {
            Case::One => [SweepParam::Requests, SweepParam::Cache, SweepParam::Zipf],
            Case::Two => [SweepParam::Requests, SweepParam::Cache, SweepParam::Crp],
        }
    }

    pub fn applies_to(self, case: Case) -> bool {
        Self::for_case(case).contains(&self)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Requests => "requests",
            SweepParam::Cache => "cache",
            SweepParam::Zipf => "zipf",
            SweepParam::Crp => "crp",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "requests" => Ok(SweepParam::Requests),
            "cache" => Ok(SweepParam::Cache),
            "zipf" => Ok(SweepParam::Zipf),
            "crp" => Ok(SweepParam::Crp),
            other => Err(Error::invalid(format!(
                "unknown parameter `{other}` (requests|cache|zipf|crp)"
            ))),
        }
    }
}

pub const ZIPF_SCALE: f64 = 2.0;
pub const CRP_SCALE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub case: Case,
    /// `T`, seconds.
    pub horizon_s: u32,
    /// `M`.
    pub sbs_count: usize,
    /// `N`.
    pub user_count: usize,
    /// `F`.
    pub file_count: usize,
    /// `L`.
    pub file_length_mbit: f64,
    /// `B`.
    pub bitrate_mbit_s: f64,
    /// `C_b`, total.
    pub backhaul_capacity_mbit_s: f64,
    /// `C_w`, total.
    pub wireless_capacity_mbit_s: f64,
    /// `C_d`, total.
    pub d2d_capacity_mbit_s: f64,
    /// `K`.
    pub communities: usize,
    /// `R_star`.
    pub max_requests: usize,
    /// `R`.
    pub requests: usize,
    /// `S`: per-SBS cache in case I, total D2D cache in case II.
    pub cache_mbit: f64,
    /// ZipF exponent (case I).
    pub zipf_exponent: f64,
    /// CRP concentration (case II).
    pub concentration: f64,
    pub cf: CfParams,
    pub holdout_fraction: f64,
    /// Edges added per node by preferential attachment.
    pub pa_edges_per_node: usize,
    /// Fit one CF model on all users instead of one per SBS.
    pub pooled_training: bool,
    /// Build the popularity matrix from a separate trace draw instead of the
    /// replayed one.
    pub independent_ground_truth: bool,
    pub table_mapping: TableMapping,
}

impl Params {
    /// Fixed case I setup with no workload yet (`R = 0`, `S = 0`, `α = 0`).
    pub fn table1() -> Self {
        Params {
            case: Case::One,
            horizon_s: 1024,
            sbs_count: 4,
            user_count: 32,
            file_count: 128,
            file_length_mbit: 1.0,
            bitrate_mbit_s: 1.0,
            backhaul_capacity_mbit_s: 2.0,
            wireless_capacity_mbit_s: 64.0,
            d2d_capacity_mbit_s: 0.0,
            communities: 1,
            max_requests: 2048,
            requests: 0,
            cache_mbit: 0.0,
            zipf_exponent: 0.0,
            concentration: 0.0,
            cf: CfParams::default(),
            holdout_fraction: 0.2,
            pa_edges_per_node: 2,
            pooled_training: false,
            independent_ground_truth: false,
            table_mapping: TableMapping::CreationOrder,
        }
    }

    /// Fixed case II setup with no workload yet.
    pub fn table2() -> Self {
        Params {
            case: Case::Two,
            wireless_capacity_mbit_s: 32.0,
            backhaul_capacity_mbit_s: 0.0,
            d2d_capacity_mbit_s: 64.0,
            communities: 3,
            max_requests: 9464,
            ..Params::table1()
        }
    }

    pub fn base(case: Case) -> Self {
        match case {
            Case::One => Params::table1(),
            Case::Two => Params::table2(),
        }
    }

    /// Normalized `(R̂, Ŝ, α̂ or β̂)` of a regime.
    pub fn regime_point(case: Case, regime: Regime) -> [(SweepParam, f64); 3] {
        let last = match case {
            Case::One => SweepParam::Zipf,
            Case::Two => SweepParam::Crp,
        };
        match (case, regime) {
            (Case::One, Regime::Low) => [(SweepParam::Requests, 0.5), (SweepParam::Cache, 0.4), (last, 0.3)],
            (Case::One, Regime::High) => [(SweepParam::Requests, 0.98), (SweepParam::Cache, 0.1), (last, 0.1)],
            (Case::Two, Regime::Low) => [(SweepParam::Requests, 0.5), (SweepParam::Cache, 0.4), (last, 0.1)],
            (Case::Two, Regime::High) => [(SweepParam::Requests, 0.98), (SweepParam::Cache, 0.1), (last, 0.9)],
        }
    }

    pub fn preset(case: Case, regime: Regime) -> Self {
        let mut p = Params::base(case);
        p.apply_regime(regime).expect("preset values are in range");
        p
    }

    /// Set the workload to a regime's normalized point using the current
    /// scale factors (`R_star`, `L`, `F`).
    pub fn apply_regime(&mut self, regime: Regime) -> Result<()> {
        for (param, v) in Params::regime_point(self.case, regime) {
            self.set_normalized(param, v)?;
        }
        Ok(())
    }

    /// Raw value corresponding to a normalized value of 1.
    pub fn scale(&self, param: SweepParam) -> f64 {
        match param {
            SweepParam::Requests => self.max_requests as f64,
            SweepParam::Cache => self.file_length_mbit * self.file_count as f64,
            SweepParam::Zipf => ZIPF_SCALE,
            SweepParam::Crp => CRP_SCALE,
        }
    }

    pub fn raw(&self, param: SweepParam) -> f64 {
        match param {
            SweepParam::Requests => self.requests as f64,
            SweepParam::Cache => self.cache_mbit,
            SweepParam::Zipf => self.zipf_exponent,
            SweepParam::Crp => self.concentration,
        }
    }

    pub fn normalized(&self, param: SweepParam) -> f64 {
        let s = self.scale(param);
        if s > 0.0 {
            self.raw(param) / s
        } else {
            0.0
        }
    }

    /// Set `param` from its normalized value in `[0, 1]`. Request counts are
    /// rounded to the nearest integer.
    pub fn set_normalized(&mut self, param: SweepParam, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!(
                "normalized {param} must be in [0, 1], got {value}"
            )));
        }
        let raw = value * self.scale(param);
        match param {
            SweepParam::Requests => self.requests = raw.round() as usize,
            SweepParam::Cache => self.cache_mbit = raw,
            SweepParam::Zipf => self.zipf_exponent = raw,
            SweepParam::Crp => self.concentration = raw,
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T", self.horizon_s as f64),
            ("M", self.sbs_count as f64),
            ("N", self.user_count as f64),
            ("F", self.file_count as f64),
            ("L", self.file_length_mbit),
            ("B", self.bitrate_mbit_s),
            ("cf_lr", self.cf.learning_rate),
            ("cf_epochs", self.cf.epochs as f64),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let nonnegative = [
            ("C_b", self.backhaul_capacity_mbit_s),
            ("C_w", self.wireless_capacity_mbit_s),
            ("C_d", self.d2d_capacity_mbit_s),
            ("cf_lambda", self.cf.reg_weight),
        ];
        for (name, v) in nonnegative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.requests > self.max_requests {
            return Err(Error::invalid(format!(
                "R = {} exceeds R_star = {}",
                self.requests, self.max_requests
            )));
        }
        let full = self.scale(SweepParam::Cache);
        if !(0.0..=full + 1e-9).contains(&self.cache_mbit) {
            return Err(Error::invalid(format!("S = {} outside [0, {full}]", self.cache_mbit)));
        }
        if !(0.0..=ZIPF_SCALE).contains(&self.zipf_exponent) {
            return Err(Error::invalid(format!("alpha = {} outside [0, 2]", self.zipf_exponent)));
        }
        if !(0.0..=CRP_SCALE).contains(&self.concentration) {
            return Err(Error::invalid(format!("beta = {} outside [0, 100]", self.concentration)));
        }
        if !(0.0..=1.0).contains(&self.holdout_fraction) {
            return Err(Error::invalid("holdout fraction outside [0, 1]"));
        }
        if self.case == Case::Two {
            if self.communities == 0 || self.communities > self.user_count {
                return Err(Error::invalid(format!(
                    "K = {} outside 1..={}",
                    self.communities, self.user_count
                )));
            }
            if self.pa_edges_per_node == 0 || self.pa_edges_per_node >= self.user_count {
                return Err(Error::invalid(format!(
                    "pa_m = {} needs 1 <= pa_m < N",
                    self.pa_edges_per_node
                )));
            }
        }
        Ok(())
    }

    /// Apply `key = value` overrides. Blank lines and `#` comments are
    /// skipped; unknown keys and unparsable values are errors.
    pub fn apply_config(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            self.set_key(key, value).map_err(err)?;
        }
        Ok(())
    }

    fn set_key(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value `{value}` for `{key}`"))
        }
        match key {
            "T" => self.horizon_s = parse(key, value)?,
            "M" => self.sbs_count = parse(key, value)?,
            "N" => self.user_count = parse(key, value)?,
            "F" => self.file_count = parse(key, value)?,
            "L" => self.file_length_mbit = parse(key, value)?,
            "B" => self.bitrate_mbit_s = parse(key, value)?,
            "C_b" => self.backhaul_capacity_mbit_s = parse(key, value)?,
            "C_w" => self.wireless_capacity_mbit_s = parse(key, value)?,
            "C_d" => self.d2d_capacity_mbit_s = parse(key, value)?,
            "K" => self.communities = parse(key, value)?,
            "R_star" => self.max_requests = parse(key, value)?,
            "cf_rank" => self.cf.rank = parse(key, value)?,
            "cf_lr" => self.cf.learning_rate = parse(key, value)?,
            "cf_epochs" => self.cf.epochs = parse(key, value)?,
            "cf_lambda" => self.cf.reg_weight = parse(key, value)?,
            "pa_m" => self.pa_edges_per_node = parse(key, value)?,
            "pooled_training" => self.pooled_training = parse(key, value)?,
            "independent_ground_truth" => self.independent_ground_truth = parse(key, value)?,
            "table_mapping" => {
                self.table_mapping = match value {
                    "creation" => TableMapping::CreationOrder,
                    "permuted" => TableMapping::Permuted,
                    _ => return Err(format!("bad value `{value}` for `{key}` (creation|permuted)")),
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}
