use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use proactive_cache::experiment::{self, Approach, Case, Params, Regime, SweepParam, SweepSpec};
use proactive_cache::seed::{self, Stream};
use proactive_cache::simcore;
use proactive_cache::{selftest, socialnet, Error, Result};

#[derive(Parser)]
#[command(name = "proactive-cache", version, about = "Proactive edge caching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One case I run (SBS caching with a backhaul bottleneck).
    Case1(RunArgs),
    /// One case II run (D2D caching on influential users).
    Case2(RunArgs),
    /// Multi-seed sweep of one normalized parameter, written as CSV.
    Sweep(SweepArgs),
    /// Edge list of the case II social graph for a seed.
    DumpGraph(GraphArgs),
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` overrides of the fixed parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "low")]
    regime: Regime,
    /// Parameter to override (requests|cache|zipf|crp); needs --value.
    #[arg(long, requires = "value")]
    param: Option<SweepParam>,
    /// Normalized value in [0, 1] for --param.
    #[arg(long, requires = "param")]
    value: Option<f64>,
    /// Write a per-completion event log here.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    case: u8,
    #[arg(long)]
    param: SweepParam,
    /// Normalized grid `a:b:n`.
    #[arg(long, default_value = "0:1:16")]
    grid: String,
    /// Only this regime (both when omitted).
    #[arg(long)]
    regime: Option<Regime>,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_params(case: Case, common: &Common) -> Result<Params> {
    let mut p = Params::base(case);
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        p.apply_config(&text, path)?;
    }
    Ok(p)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn single_run(case: Case, args: &RunArgs) -> Result<()> {
    let mut p = load_params(case, &args.common)?;
    p.apply_regime(args.regime)?;
    if let (Some(param), Some(v)) = (args.param, args.value) {
        if !param.applies_to(case) {
            return Err(Error::InvalidArgument(format!("{param} does not apply to case {case}")));
        }
        p.set_normalized(param, v)?;
    }
    let run_seed = seed::derive(&[args.common.master_seed, case.number(), args.regime.index()]);
    let out = experiment::run(&p, run_seed)?;
    println!("case {case} regime {} requests {} trace {:016x}", args.regime, out.trace.len(), out.trace.digest());
    println!("approach,satisfied_fraction,load,wireless_mbit,backhaul_mbit,d2d_mbit");
    for a in Approach::ALL {
        let r = out.report(a);
        println!(
            "{a},{},{},{},{},{}",
            experiment::format_g(r.satisfied_fraction),
            experiment::format_g(experiment::load_metric(case, r)),
            experiment::format_g(r.wireless_mbit),
            experiment::format_g(r.backhaul_mbit),
            experiment::format_g(r.d2d_mbit)
        );
    }
    if let Some(path) = &args.events {
        let io_err = |source| Error::Io { path: path.clone(), source };
        let mut buf = Vec::new();
        for (a, sim) in [(Approach::Proactive, &out.proactive), (Approach::Reactive, &out.reactive)] {
            writeln!(buf, "# {a}").map_err(io_err)?;
            simcore::write_event_log(&sim.outcomes, &mut buf).map_err(io_err)?;
        }
        fs::write(path, buf).map_err(io_err)?;
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let case = if args.case == 1 { Case::One } else { Case::Two };
    let base = load_params(case, &args.common)?;
    let grid = experiment::parse_grid(&args.grid)?;
    let mut spec = SweepSpec::new(base, args.param, grid, args.seeds, args.common.master_seed);
    if let Some(r) = args.regime {
        spec.regimes = vec![r];
    }
    spec.threads = args.threads;
    let result = experiment::sweep(&spec)?;
    match &args.out {
        Some(path) => experiment::write_csv(&result, path),
        None => write_out(None, &result.to_csv()),
    }
}

fn dump_graph(args: &GraphArgs) -> Result<()> {
    let p = load_params(Case::Two, &args.common)?;
    p.validate()?;
    let g = socialnet::generate_preferential_attachment(
        p.user_count,
        p.pa_edges_per_node,
        &mut seed::stream(args.common.master_seed, Stream::Graph),
    )?;
    write_out(args.out.as_deref(), &g.to_edge_list())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Case1(a) => single_run(Case::One, a),
        Command::Case2(a) => single_run(Case::Two, a),
        Command::Sweep(a) => run_sweep(a),
        Command::DumpGraph(a) => dump_graph(a),
        Command::Selftest { master_seed } => {
            let checks = selftest::run(*master_seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                return ExitCode::from(1);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
