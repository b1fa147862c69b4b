use std::path::PathBuf;
use std::process::ExitCode;

use cca_cli::config::parse_overrides;
use cca_cli::{bench, exact, gradcheck, run, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cca", version, about = "Streaming CCA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a stream and record the PCC curve.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Config overrides, `--key value` or `--key=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
        overrides: Vec<String>,
    },
    /// Closed-form CCA of the configured data.
    Exact {
        #[arg(long)]
        config: PathBuf,
        /// Also compare against the brute-force oracle (small problems only).
        #[arg(long)]
        brute_check: bool,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
        overrides: Vec<String>,
    },
    /// Compare analytic gradients to central differences at random states.
    CheckGradients {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Time one optimizer step across dimensions.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "256,512,1024")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        batches: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(config: &std::path::Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    RunConfig::load(config, &parse_overrides(overrides)?)
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cmd {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let outcome = run::run(&cfg)?;
            println!(
                "final pcc {:.6} after {} steps ({:.2}s); results in {}",
                outcome.final_pcc,
                outcome.steps,
                outcome.total_time_s,
                outcome.output_dir.display()
            );
        }
        Command::Exact {
            config,
            brute_check,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            exact::exact(&cfg, brute_check, &mut stdout)?;
        }
        Command::CheckGradients { seed, trials, corrupt } => {
            gradcheck::check(seed, trials, corrupt, &mut stdout)?;
        }
        Command::Bench { dims, k, batches, seed } => {
            bench::bench(&dims, k, batches, seed, &mut stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
