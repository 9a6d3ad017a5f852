use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use distfit_cli::{run, Command, RunArgs};

#[derive(Parser)]
#[command(name = "distfit", version, about = "Spatial distance-sampling models with location uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a model and write a report
    Fit(Common),
    /// Simulate one data set
    Simulate(Common),
    /// Run the Monte Carlo coverage experiment
    Experiment(Common),
    /// Write the fitted intensity surface as an ESRI ASCII grid
    Predict(Common),
    /// Estimate abundance over a region
    Abundance(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. --set quadrature.region_q=40000
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, a) = match cli.command {
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Experiment(a) => (Command::Experiment, a),
        Cmd::Predict(a) => (Command::Predict, a),
        Cmd::Abundance(a) => (Command::Abundance, a),
    };
    let args = RunArgs {
        config: a.config,
        set: a.set,
        seed: a.seed,
        out: a.out,
    };
    match run(cmd, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("distfit {}: {e}", cmd.name());
            eprintln!("hint: {}", e.hint());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
