//! `ringlab` — command-line front end for the ring-condensate toolkit.
//!
//! Exit codes: 0 on success, 1 for validation and usage failures, 2 for
//! numerical failures (no convergence, coupling below critical, no lump to
//! track, unreachable inversion target). Errors print one machine-parsable
//! line on stderr: `error kind=<kind> msg="..."`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "ringlab",
    version,
    about = "Attractive condensates on a flux-threaded ring: analytic branches, split-step dynamics, parameter sweeps"
)]
struct Cli {
    /// Flat key=value config file (# comments); command-line flags win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Complete elliptic integrals, Jacobi functions, and product inversion
    Elliptic(commands::EllipticArgs),
    /// Single-particle levels of a ring threaded by flux
    Ring(commands::RingArgs),
    /// Analytic stationary branches at a given coupling
    Stationary(commands::StationaryArgs),
    /// Imaginary-time relaxation to the ground state, plus polish
    Relax(commands::RelaxArgs),
    /// Real-time split-step evolution with snapshot output
    Evolve(commands::EvolveArgs),
    /// Construct a boosted stationary state and verify it
    Boost(commands::BoostArgs),
    /// Sweep the coupling or the flux; writes CSV plus a JSON mirror
    Scan(commands::ScanArgs),
    /// Discretization-convergence table over grid sizes and time steps
    Converge(commands::ConvergeArgs),
}

/// Rust ignores SIGPIPE by default, so piping into `head` would panic on the
/// first write after the reader closes; restore the conventional disposition
/// so the process terminates quietly like other line-oriented tools.
#[cfg(unix)]
fn reset_sigpipe() {
    // SAFETY: SIG_DFL is always a valid disposition for SIGPIPE.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

/// Numerical failures exit 2; validation, parse, and I/O failures exit 1.
fn exit_for(err: &ringlab::Error) -> u8 {
    match err.kind() {
        "no_converge" | "below_critical" | "no_lump" | "infeasible_target" => 2,
        _ => 1,
    }
}

/// Honors `RINGLAB_THREADS` as a cap on sweep parallelism; unset means the
/// machine default.
fn init_threads() -> ringlab::Result<()> {
    let raw = match std::env::var("RINGLAB_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => {
            return Err(ringlab::Error::Parse(format!("RINGLAB_THREADS: {e}")));
        }
        Ok(raw) => raw,
    };
    let threads: usize = raw.trim().parse().map_err(|e| {
        ringlab::Error::Parse(format!(
            "RINGLAB_THREADS must be a positive integer, got {raw:?}: {e}"
        ))
    })?;
    if threads == 0 {
        return Err(ringlab::Error::Parse(
            "RINGLAB_THREADS must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ringlab::Error::Precondition(format!("thread pool setup failed: {e}")))
}

fn run(cli: Cli) -> ringlab::Result<()> {
    let settings = match &cli.config {
        Some(path) => config::Settings::load(path)?,
        None => config::Settings::default(),
    };
    match cli.command {
        Command::Elliptic(args) => commands::run_elliptic(args, &settings),
        Command::Ring(args) => commands::run_ring(args, &settings),
        Command::Stationary(args) => commands::run_stationary(args, &settings),
        Command::Relax(args) => commands::run_relax(args, &settings),
        Command::Evolve(args) => commands::run_evolve(args, &settings),
        Command::Boost(args) => commands::run_boost(args, &settings),
        Command::Scan(args) => commands::run_scan(args, &settings),
        Command::Converge(args) => commands::run_converge(args, &settings),
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = err.print();
                    return ExitCode::SUCCESS;
                }
                _ => {
                    let _ = err.print();
                    eprintln!("error kind=usage msg=\"invalid arguments\"");
                    1
                }
            };
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = err.to_string().replace('\\', "\\\\").replace('"', "\\\"");
            eprintln!("error kind={} msg=\"{msg}\"", err.kind());
            ExitCode::from(exit_for(&err))
        }
    }
}
