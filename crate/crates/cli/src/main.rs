use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;
use mosqp_core::bench::{self, RunConfig};
use mosqp_core::catalog;

#[derive(Parser)]
#[command(name = "mosqp", version, about = "Multiobjective SQP benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark grid described by a TOML config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Summarize a benchmark output directory.
    Report { dir: PathBuf },
    /// List catalog problems with their dimensions.
    ListProblems,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> mosqp_core::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            output_dir,
        } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let started = Instant::now();
            let summary = bench::run_benchmark(&cfg)?;
            info!("finished in {:.1} s", started.elapsed().as_secs_f64());
            println!(
                "wrote {} files to {}",
                summary.files.len() + 1,
                summary.output_dir.display()
            );
        }
        Command::Report { dir } => print!("{}", bench::report(&dir)?),
        Command::ListProblems => {
            println!("{:<10} {:>2} {:>3} {:>4} {:>4}  default", "name", "m", "n", "lin", "nonl");
            for e in catalog::catalog() {
                let p = &e.problem;
                println!(
                    "{:<10} {:>2} {:>3} {:>4} {:>4}  {}",
                    p.name(),
                    p.m(),
                    p.n(),
                    p.count_constraints(mosqp_core::problem::ConstraintKind::Linear),
                    p.count_constraints(mosqp_core::problem::ConstraintKind::Nonlinear),
                    if catalog::DEFAULT_PROBLEMS.contains(&p.name()) { "yes" } else { "no" }
                );
            }
        }
    }
    Ok(())
}
