//! Grid sweeps over one normalized parameter with multi-seed aggregation.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::params::{Case, Params, Regime, SweepParam};
use crate::experiment::pipeline::{self, load_metric, Approach};
use crate::seed;

pub const CSV_HEADER: &str =
    "case,regime,approach,param,value,satisfied_mean,satisfied_std,load_mean,load_std,seeds";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Fixed parameters; each regime's preset point is applied on top.
    pub base: Params,
    pub param: SweepParam,
    /// Normalized values in `[0, 1]`.
    pub grid: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub seeds: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl SweepSpec {
    pub fn new(base: Params, param: SweepParam, grid: Vec<f64>, seeds: usize, master_seed: u64) -> Self {
        SweepSpec {
            base,
            param,
            grid,
            regimes: Regime::ALL.to_vec(),
            seeds,
            master_seed,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub case: Case,
    pub regime: Regime,
    pub approach: Approach,
    pub param: SweepParam,
    pub value: f64,
    pub satisfied_mean: f64,
    pub satisfied_std: f64,
    pub load_mean: f64,
    pub load_std: f64,
    pub seeds: usize,
    /// Digest of the trace each seed replayed.
    pub trace_digests: Vec<u64>,
    pub satisfied: Vec<f64>,
    pub load: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, regime: Regime, approach: Approach, value: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.regime == regime && r.approach == approach && (r.value - value).abs() < 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.case,
                r.regime,
                r.approach,
                r.param,
                format_g(r.value),
                format_g(r.satisfied_mean),
                format_g(r.satisfied_std),
                format_g(r.load_mean),
                format_g(r.load_std),
                r.seeds
            ));
        }
        out
    }
}

/// Seed of one sweep cell; independent of scheduling order.
pub fn cell_seed(master: u64, case: Case, regime: Regime, grid_index: usize, seed_index: usize) -> u64 {
    seed::derive(&[master, case.number(), regime.index(), grid_index as u64, seed_index as u64])
}

/// `a:b:n` as `n` evenly spaced values from `a` to `b` inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::invalid(format!("grid must be `a:b:n`, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(Error::invalid("grid needs at least one point")),
        1 => Ok(vec![a]),
        _ => Ok((0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect()),
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct Cell {
    regime: Regime,
    grid_index: usize,
    seed_index: usize,
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.grid.is_empty() || spec.seeds == 0 || spec.regimes.is_empty() {
        return Err(Error::invalid("sweep needs a nonempty grid, seeds and regimes"));
    }
    let case = spec.base.case;
    if !spec.param.applies_to(case) {
        return Err(Error::invalid(format!("parameter {} does not apply to case {case}", spec.param)));
    }
    let mut points = Vec::with_capacity(spec.regimes.len() * spec.grid.len());
    for &regime in &spec.regimes {
        for &v in &spec.grid {
            let mut p = spec.base.clone();
            p.apply_regime(regime)?;
            p.set_normalized(spec.param, v)?;
            p.validate()?;
            points.push(p);
        }
    }

    let cells: Vec<Cell> = spec
        .regimes
        .iter()
        .flat_map(|&regime| {
            (0..spec.grid.len()).flat_map(move |grid_index| {
                (0..spec.seeds).map(move |seed_index| Cell { regime, grid_index, seed_index })
            })
        })
        .collect();
    let run_cell = |(k, cell): (usize, &Cell)| {
        let p = &points[k / spec.seeds];
        let s = cell_seed(spec.master_seed, case, cell.regime, cell.grid_index, cell.seed_index);
        pipeline::run(p, s).map(|out| {
            Approach::ALL.map(|a| {
                let r = out.report(a);
                (r.satisfied_fraction, load_metric(case, r), r.trace_digest)
            })
        })
    };
    let run_all = || -> Result<Vec<_>> { cells.par_iter().enumerate().map(run_cell).collect() };
    let results = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };

    let mut rows = Vec::with_capacity(2 * points.len());
    for (ri, &regime) in spec.regimes.iter().enumerate() {
        for (ai, approach) in Approach::ALL.into_iter().enumerate() {
            for (gi, &value) in spec.grid.iter().enumerate() {
                let start = (ri * spec.grid.len() + gi) * spec.seeds;
                let per_seed = &results[start..start + spec.seeds];
                let satisfied: Vec<f64> = per_seed.iter().map(|r| r[ai].0).collect();
                let load: Vec<f64> = per_seed.iter().map(|r| r[ai].1).collect();
                let (satisfied_mean, satisfied_std) = mean_std(&satisfied);
                let (load_mean, load_std) = mean_std(&load);
                rows.push(SweepRow {
                    case,
                    regime,
                    approach,
                    param: spec.param,
                    value,
                    satisfied_mean,
                    satisfied_std,
                    load_mean,
                    load_std,
                    seeds: spec.seeds,
                    trace_digests: per_seed.iter().map(|r| r[ai].2).collect(),
                    satisfied,
                    load,
                });
            }
        }
    }
    Ok(SweepResult { rows })
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, result.to_csv()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `%g`-style formatting with 6 significant digits.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_formatting() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0 / 3.0, "0.333333"),
            (2.0 / 3.0, "0.666667"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-0.25, "-0.25"),
            (0.9999996, "1"),
            (15.0, "15"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x), want, "{x}");
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.2:0.2:1").unwrap(), vec![0.2]);
        let g = parse_grid("0:1:16").unwrap();
        assert_eq!(g.len(), 16);
        assert!((g[1] - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(g[15], 1.0);
        for bad in ["0:1", "a:1:2", "0:1:0", "0:1:2:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn stats() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    fn small(case: Case, param: SweepParam, grid: Vec<f64>, seeds: usize) -> SweepSpec {
        let mut base = Params::base(case);
        base.horizon_s = 64;
        base.max_requests = 128;
        base.cf.epochs = 20;
        SweepSpec::new(base, param, grid, seeds, 7)
    }

    #[test]
    fn single_point_single_seed() {
        let mut spec = small(Case::One, SweepParam::Requests, vec![0.5], 1);
        spec.regimes = vec![Regime::Low];
        let r = sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].approach, Approach::Proactive);
        assert_eq!(r.rows[1].approach, Approach::Reactive);
        assert!(r.rows.iter().all(|row| row.satisfied_std == 0.0 && row.load_std == 0.0));
        assert_eq!(r.to_csv().lines().count(), 3);
    }

    #[test]
    fn rows_are_ordered_and_means_bounded() {
        let spec = small(Case::Two, SweepParam::Crp, vec![0.0, 0.5, 1.0], 3);
        let r = sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 12);
        let keys: Vec<_> = r.rows.iter().map(|x| (x.regime, x.approach)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for row in &r.rows {
            let lo = row.load.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = row.load.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo - 1e-12 <= row.load_mean && row.load_mean <= hi + 1e-12);
            assert!(row.satisfied_std >= 0.0 && row.load_std >= 0.0);
        }
        for pair in r.rows.chunks(3).collect::<Vec<_>>().chunks(2) {
            for (p, q) in pair[0].iter().zip(pair[1]) {
                assert_eq!(p.trace_digests, q.trace_digests);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(sweep(&small(Case::One, SweepParam::Crp, vec![0.5], 1)).is_err());
        assert!(sweep(&small(Case::One, SweepParam::Cache, vec![], 1)).is_err());
        assert!(sweep(&small(Case::One, SweepParam::Cache, vec![0.5], 0)).is_err());
        assert!(sweep(&small(Case::One, SweepParam::Cache, vec![1.5], 1)).is_err());
    }

    #[test]
    fn csv_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_csv(&SweepResult { rows: vec![] }, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
        let e = write_csv(&SweepResult { rows: vec![] }, &dir.path().join("no/such/dir.csv")).unwrap_err();
        assert!(matches!(e, Error::Io { .. }));
        assert!(e.to_string().contains("dir.csv"));
    }
}
