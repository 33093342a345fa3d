//! `nlcap`: batch front end for contact-angle solving, parameter sweeps,
//! verification suites and droplet minimization.
//!
//! Exit codes: 0 success, 1 bad configuration or runtime error, 2 no
//! interior solution, 3 non-unique solution, 4 a verification check failed.

mod config;
mod error;
mod minimize;
mod profiles;
mod solve;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{KeySpec, RunConfig};
use error::{CliError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_INTERIOR: i32 = 2;
pub const EXIT_NONUNIQUE: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Parser)]
#[command(
    name = "nlcap",
    version,
    about = "Nonlocal capillarity: contact angles, sweeps, checks and droplet runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the nonlocal Young law for one parameter set.
    SolveAngle(Common),
    /// Sweep sigma or s1 over a range, one CSV row per point.
    Scan(Common),
    /// Run a verification suite: cstar, reduction, duality or dual-angle.
    Verify(Common),
    /// Anneal a discrete droplet and measure its contact angle.
    Minimize(Common),
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for `--set output=DIR`.
    #[arg(short, long)]
    output: Option<String>,
}

impl Common {
    fn resolve(&self, command: &'static str, keys: KeySpec) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?),
            None => None,
        };
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(out) = &self.output {
            overrides.push(format!("output={out}"));
        }
        RunConfig::resolve(command, keys, text.as_deref(), &overrides)
    }
}

/// CSV text with a header row.
pub fn csv_bytes<R, I>(header: &[&str], rows: R) -> Result<Vec<u8>>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator,
    I::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Prints a table to stdout and, with an output directory, also stores it
/// there next to the resolved configuration.
pub fn emit(cfg: &RunConfig, name: &str, bytes: &[u8]) -> Result<()> {
    std::io::stdout().write_all(bytes)?;
    if let Some(dir) = cfg.output() {
        cfg.echo_into(&dir)?;
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::SolveAngle(c) => {
            solve::cmd_solve_angle(&c.resolve("solve-angle", solve::SOLVE_KEYS)?)
        }
        Command::Scan(c) => solve::cmd_scan(&c.resolve("scan", solve::SCAN_KEYS)?),
        Command::Verify(c) => verify::cmd_verify(&c.resolve("verify", verify::VERIFY_KEYS)?),
        Command::Minimize(c) => {
            minimize::cmd_minimize(&c.resolve("minimize", minimize::MINIMIZE_KEYS)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_ERROR as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    });
    ExitCode::from(code as u8)
}
