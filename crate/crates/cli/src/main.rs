use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsb_cli::{execute, load_scenario, Command, Preset};

#[derive(Parser)]
#[command(
    name = "dsb-sim",
    version,
    about = "Driven spin-boson qubit: bath kernels, master-equation coefficients and purity decay"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (JSON object). Partial when combined with --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Upper bound on concurrently evaluated sweep points.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate ν(t) and η(t).
    Kernels(Common),
    /// Tabulate D, f, G, Ω̃, r₁, r₂ against t.
    Coefficients(Common),
    /// D(t) for each value of the configured sweep.
    SweepD(Common),
    /// Purity tr ρ² and the D-only estimate for each sweep value.
    Purity(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::Kernels(c) => (Command::Kernels, c),
        Cmd::Coefficients(c) => (Command::Coefficients, c),
        Cmd::SweepD(c) => (Command::SweepD, c),
        Cmd::Purity(c) => (Command::Purity, c),
    };
    let result = load_scenario(common.config.as_deref(), common.preset)
        .and_then(|cfg| execute(cmd, &cfg, common.workers as usize));
    match result {
        Ok(path) => {
            println!("{}: wrote {}", cmd.name(), path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
