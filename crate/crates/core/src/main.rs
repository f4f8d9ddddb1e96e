use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paired_spectra::harness::{self, CheckStatus, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "paired-spectra", version, about = "Spectra of XY* and XY+ for paired Gaussian matrices")]
struct Cli {
    /// JSON experiment configuration; the built-in verification config is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides `base_seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Treat advisory checks as fatal.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the eigenvalue cloud of every configured shape and trial as CSV.
    Sample,
    /// Write the predicted support boundary of every configured shape as CSV.
    Boundary,
    /// Run the configured checks and write a JSON report.
    Verify,
    /// Verify every (tau, alpha) cell of the configured sweep grid.
    Sweep,
}

fn load(cli: &Cli) -> paired_spectra::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    config.strict |= cli.strict;
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> paired_spectra::Result<bool> {
    let config = load(cli)?;
    let out = cli.out.as_path();
    harness::with_threads(cli.threads, || -> paired_spectra::Result<bool> {
        match cli.command {
            Command::Sample => {
                for path in harness::cmd_sample(&config, out)? {
                    println!("wrote {}", path.display());
                }
                Ok(true)
            }
            Command::Boundary => {
                for path in harness::cmd_boundary(&config, out)? {
                    println!("wrote {}", path.display());
                }
                Ok(true)
            }
            Command::Verify => {
                let report = harness::cmd_verify(&config, out)?;
                for check in &report.checks {
                    let tag = match check.status {
                        CheckStatus::Pass => "PASS",
                        CheckStatus::Fail => "FAIL",
                        CheckStatus::Advisory => "ADVISORY",
                        CheckStatus::Error => "ERROR",
                        CheckStatus::Skipped => "SKIP",
                    };
                    println!("{tag:>8}  {:<20} {}", format!("{:?}", check.name), check.message);
                }
                println!("wrote {}", out.join(&config.outputs.report_json).display());
                Ok(report.passed)
            }
            Command::Sweep => {
                let cells = harness::cmd_sweep(&config, out)?;
                for cell in &cells {
                    println!(
                        "{}  tau[{}] alpha[{}] ({}x{})  {}",
                        if cell.passed { "PASS" } else { "FAIL" },
                        cell.tau_index,
                        cell.alpha_index,
                        cell.n,
                        cell.p,
                        cell.report.display()
                    );
                }
                Ok(cells.iter().all(|c| c.passed))
            }
        }
    })?
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
