use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bml_cli::{
    cmd_bench, cmd_run, cmd_verify, default_threads, threads_for, BenchConfig, CliError, SimConfig,
    VerifyConfig, EXIT_OK, EXIT_USAGE,
};
use bml_core::Backend;
use clap::{Parser, Subcommand};

/// Biham-Middleton-Levine traffic automaton: simulate, benchmark and verify backends.
#[derive(Debug, Parser)]
#[command(name = "bml", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one configuration and write metrics.csv, snapshots and final.txt.
    Run {
        #[arg(short = 'n', long = "size", default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 1024)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// naive, halo, parallel or lanes
        #[arg(long, default_value = "lanes", value_parser = parse_backend)]
        backend: Backend,
        /// Defaults to all logical cores for parallel and lanes, 1 otherwise.
        #[arg(long)]
        threads: Option<usize>,
        /// Write step_<k>.ppm every k steps; 0 disables.
        #[arg(long, default_value_t = 0)]
        snapshot_every: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Time backends and print backend,n,threads,reps,mean_s,stddev_s.
    Bench {
        #[arg(short = 'n', long = "size", value_delimiter = ',', default_values_t = [1024, 2048, 4096])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 1024)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long = "backend", value_delimiter = ',', value_parser = parse_backend,
              default_values = ["naive", "halo", "parallel", "lanes"])]
        backends: Vec<Backend>,
        /// Worker count for parallel and lanes; naive and halo always use 1.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run all backends from the same grid and check they agree bit for bit.
    Verify {
        #[arg(short = 'n', long = "size", default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: bml_core::Error| e.to_string())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run {
            size,
            density,
            steps,
            seed,
            backend,
            threads,
            snapshot_every,
            out_dir,
        } => {
            let config = SimConfig {
                n: size,
                rho: density,
                steps,
                seed,
                backend,
                threads: threads_for(backend, threads),
                snapshot_every,
                out_dir,
            };
            let outcome = cmd_run(&config, out)?;
            if outcome.phase.is_none() {
                eprintln!("no steps run; regime not classified");
            }
        }
        Command::Bench {
            sizes,
            density,
            steps,
            seed,
            reps,
            backends,
            threads,
        } => {
            let config = BenchConfig {
                sizes,
                rho: density,
                steps,
                seed,
                reps,
                backends,
                threads,
            };
            cmd_bench(&config, out)?;
        }
        Command::Verify {
            size,
            density,
            steps,
            seed,
            threads,
        } => {
            let config = VerifyConfig {
                n: size,
                rho: density,
                steps,
                seed,
                threads: threads.unwrap_or_else(default_threads),
            };
            cmd_verify(&config, out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("bml: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
