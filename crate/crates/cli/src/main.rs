use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photonlink::run::EXIT_INPUT;
use photonlink::{load_scenario, render, run, Command, Format, RunOptions, Selection};

#[derive(Parser)]
#[command(
    name = "photonlink",
    version,
    about = "Link budget and design trade-off analysis for WDM radar distribution networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the scenario and every topology it defines.
    Validate(Common),
    /// Analyze every path for the selected variants and check requirements.
    Analyze(Common),
    /// Analyze all defined variants and rank them.
    Tradeoff(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, short)]
    scenario: PathBuf,
    /// Variant to analyze, e.g. dm-vbg-hip, or `all`.
    #[arg(long)]
    variant: Option<Selection>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Noise bandwidth override, Hz.
    #[arg(long)]
    bandwidth: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Validate(a) => (Command::Validate, a),
        Sub::Analyze(a) => (Command::Analyze, a),
        Sub::Tradeoff(a) => (Command::Tradeoff, a),
    };
    ExitCode::from(execute(command, &args) as u8)
}

fn execute(command: Command, args: &Common) -> i32 {
    let scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let opts = RunOptions {
        variant: args.variant,
        bandwidth_hz: args.bandwidth,
    };
    let report = match run(command, &scenario, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let to_terminal = args.out.is_none() && std::io::stdout().is_terminal();
    let color = to_terminal && std::env::var_os("PHOTONLINK_NO_COLOR").is_none();
    let text = render(&report, args.format, color);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return EXIT_INPUT;
            }
        }
    }
    report.exit_code
}
