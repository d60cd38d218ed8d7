//! `msqg`: command-line driver for the modified SQG laboratory.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Which;
use config::{CommonFlags, Config, FieldKind};
use error::{CliResult, EXIT_USAGE};
use msqg::Execution;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "MSQG_THREADS";

#[derive(Parser)]
#[command(name = "msqg", version, about = "Modified SQG simulation and estimate verification")]
struct Cli {
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the initial vorticity and write it as a snapshot.
    MakeData(CommonFlags),
    /// Integrate the equation and write diagnostics and snapshots.
    Simulate(CommonFlags),
    /// Run the velocity-estimate verifiers.
    Verify {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, value_enum, default_value = "all")]
        which: Which,
        #[arg(long, value_enum)]
        field: Option<FieldKind>,
    },
    /// Trace a characteristic through stored snapshots.
    Trace {
        #[command(flatten)]
        common: CommonFlags,
        /// Output directory of a `simulate` run.
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| error::CliError::Usage(format!("{THREADS_ENV} = {v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| error::CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    init_threads()?;
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let with_exec = |flags: &CommonFlags| -> CliResult<Config> {
        let mut c = Config::resolve(flags)?;
        c.run.execution = exec;
        Ok(c)
    };
    match cli.cmd {
        Cmd::MakeData(f) => commands::make_data(&with_exec(&f)?),
        Cmd::Simulate(f) => commands::simulate(&with_exec(&f)?),
        Cmd::Verify { common, which, field } => {
            let mut c = with_exec(&common)?;
            if let Some(k) = field {
                c.verify.field = k;
            }
            commands::verify(&c, which)
        }
        Cmd::Trace { common, run } => {
            let mut c = with_exec(&common)?;
            if run.is_some() {
                c.trace.run = run;
            }
            commands::trace_cmd(&c)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code.clamp(0, EXIT_USAGE) as u8)
}
