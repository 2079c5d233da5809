//! Presets, per-seed pipelines, multi-seed sweeps and CSV output.

mod params;
mod pipeline;
mod sweep;

pub use params::{Case, Params, Regime, SweepParam, CRP_SCALE, ZIPF_SCALE};
pub use pipeline::{
    load_metric, run, run_case1, run_case2, social_setup, Approach, RunOutput, SocialSetup,
    MIN_CONCENTRATION,
};
pub use sweep::{
    cell_seed, format_g, parse_grid, sweep, write_csv, SweepResult, SweepRow, SweepSpec,
    CSV_HEADER,
};
