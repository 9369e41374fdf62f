use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ewlimit::harness::{self, HResult, HarnessError, SweepRow};
use ewlimit::{report, ExperimentConfig};
use log::error;

#[derive(Parser)]
#[command(
    name = "ewlimit",
    version,
    about = "Rescaled lattice fields and their heat-equation limit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides mc.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the drift assumptions, summation-by-parts identities and Jordan bounds
    Validate(Common),
    /// Dump one exact field path at times s/delta and t/delta
    Simulate(Common),
    /// Single covariance point on the configured torus
    Covariance(Common),
    /// Covariance convergence over delta_list
    SweepDelta(Common),
    /// Mean convergence over delta_list
    SweepMean(Common),
    /// Summation-by-parts battery as CSV
    IbpCheck(Common),
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(c: &Common) -> HResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.mc.seed = seed;
    }
    Ok(cfg)
}

/// Write the successful rows; report and count failures.
fn emit_rows(c: &Common, rows: Vec<HResult<SweepRow>>) -> io::Result<u8> {
    let mut ok = Vec::new();
    let mut code = 0;
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(row) => ok.push(row),
            Err(e) => {
                error!("row {i}: {e}");
                code = code.max(e.exit_code().min(1));
            }
        }
    }
    let mut out = open_out(&c.out)?;
    report::write_sweep(&mut out, &ok)?;
    out.flush()?;
    Ok(code)
}

fn run(cmd: Command) -> Result<u8, Box<dyn std::error::Error>> {
    let c = match &cmd {
        Command::Validate(c)
        | Command::Simulate(c)
        | Command::Covariance(c)
        | Command::SweepDelta(c)
        | Command::SweepMean(c)
        | Command::IbpCheck(c) => c,
    };
    let cfg = load(c)?;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match &cmd {
        Command::Validate(_) => {
            let checks = harness::run_validate(&cfg)?;
            let mut out = open_out(&c.out)?;
            writeln!(out, "check,pass,detail")?;
            for ch in &checks {
                writeln!(
                    out,
                    "{},{},\"{}\"",
                    ch.name,
                    ch.pass,
                    ch.detail.replace('"', "'")
                )?;
            }
            out.flush()?;
            Ok(if checks.iter().all(|ch| ch.pass) {
                0
            } else {
                1
            })
        }
        Command::Simulate(_) => {
            let rows = harness::simulate(&cfg)?;
            let mut out = open_out(&c.out)?;
            report::write_field(&mut out, &rows)?;
            out.flush()?;
            Ok(0)
        }
        Command::Covariance(_) => {
            let (row, outcome) = harness::covariance_point(&cfg)?;
            log::info!("torus-exact covariance {:.16e}", outcome.exact);
            let mut out = open_out(&c.out)?;
            report::write_sweep(&mut out, &[row])?;
            out.flush()?;
            Ok(0)
        }
        Command::SweepDelta(_) => Ok(emit_rows(c, harness::sweep_delta(&cfg)?)?),
        Command::SweepMean(_) => Ok(emit_rows(c, harness::sweep_mean(&cfg)?)?),
        Command::IbpCheck(_) => {
            let setup = harness::Setup::new(&cfg)?;
            let rows = harness::ibp_battery(&setup, &cfg.phi()?, cfg.quadrature.quad_n.max(8))?;
            let mut out = open_out(&c.out)?;
            report::write_ibp(&mut out, &rows)?;
            out.flush()?;
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.downcast_ref::<HarnessError>() {
                Some(h) => h.exit_code(),
                None => 1,
            };
            ExitCode::from(code)
        }
    }
}
