use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod failure;

use failure::Failure;

#[derive(Parser)]
#[command(name = "rbtomo", version, about = "Randomized-benchmarking tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Clone, Debug, Default)]
pub struct GlobalArgs {
    /// JSON experiment description.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, overriding the one in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Use exact sequence averages instead of sampling.
    #[arg(long, global = true)]
    pub analytic: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Decay curve `F_k` as CSV.
    SimulateDecay,
    /// Guarded decay-parameter estimate as JSON.
    EstimateP,
    /// Unital-part reconstruction report as JSON.
    Reconstruct,
    /// Both χ₀₀ bound families over a grid, as CSV.
    BoundCurves(commands::BoundCurvesArgs),
    /// Clifford+T circuit to a Clifford combination, as JSON.
    Decompose,
    /// Fidelity interval for a Clifford+T target, as JSON.
    BoundFidelity,
    /// Non-CP fraction of random unital parts, as CSV.
    CpScan(commands::ScanArgs),
    /// PL-span ranks of Clifford sets, as JSON.
    SpanCheck(commands::SpanArgs),
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Failure::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::validation(e.to_string()))?;
    }
    let g = &cli.global;
    let mut out = output(&g.out)?;
    match cli.command {
        Command::SimulateDecay => commands::simulate_decay(g, &mut out)?,
        Command::EstimateP => commands::estimate_p(g, &mut out)?,
        Command::Reconstruct => commands::reconstruct(g, &mut out)?,
        Command::BoundCurves(a) => commands::bound_curves(g, &a, &mut out)?,
        Command::Decompose => commands::decompose(g, &mut out)?,
        Command::BoundFidelity => commands::bound_fidelity(g, &mut out)?,
        Command::CpScan(a) => commands::cp_scan(g, &a, &mut out)?,
        Command::SpanCheck(a) => commands::span_check(g, &a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RBTOMO_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
