//! Multi-seed sweep of one normalized parameter, printed as CSV.
//!
//! cargo run --release --example sweep_csv -- [case] [param] [seeds] [points]

use proactive_cache::experiment::{self, Case, Params, SweepParam, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let case = match args.first().map(String::as_str) {
        Some("2") => Case::Two,
        _ => Case::One,
    };
    let param: SweepParam = args.get(1).map_or("requests", String::as_str).parse()?;
    let seeds = args.get(2).map_or(Ok(5), |s| s.parse())?;
    let points: usize = args.get(3).map_or(Ok(6), |s| s.parse())?;

    let grid = experiment::parse_grid(&format!("0:1:{points}"))?;
    let spec = SweepSpec::new(Params::base(case), param, grid, seeds, 2024);
    let result = experiment::sweep(&spec)?;
    print!("{}", result.to_csv());
    Ok(())
}
