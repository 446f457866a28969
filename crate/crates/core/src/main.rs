use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use faber_tietz::io::{exit_code, list_checks, run, RunOverrides};

/// Faber-Tietz series experiments on capped spheres and tori.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for random sample points (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Treat a regularized Gram solve as a numerical failure.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Print the catalog of verification checks.
    ListChecks,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListChecks => {
            print!("{}", list_checks());
            ExitCode::SUCCESS
        }
        Command::Run { config } => {
            let overrides = RunOverrides { out_dir: cli.out_dir, seed: cli.seed, strict: cli.strict };
            let result = run(&config, &overrides);
            match &result {
                Ok(report) => {
                    for c in &report.checks {
                        println!(
                            "{} {:<20} measured {:.3e} threshold {:.1e}  {}",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.id,
                            c.measured,
                            c.threshold,
                            c.detail
                        );
                    }
                    if let Some(d) = &report.decomposition {
                        for r in &d.residuals {
                            let sup = r.sup_error.map_or_else(|| "n/a".to_string(), |e| format!("{e:.3e}"));
                            println!("M = {:>3}  l2 residual {:.3e}  sup error {sup}", r.order, r.l2_residual);
                        }
                    }
                }
                Err(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&result) as u8)
        }
    }
}
