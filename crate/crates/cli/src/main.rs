use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opb_cli::{execute_from_file, Verb};

#[derive(Parser)]
#[command(name = "opb", version, about = "Online PAC-Bayes experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Base seed; replaces the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; replaces the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `dotted.key=value`, applied to the config before parsing. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// One run per learner: traces and plot data.
    Run(Common),
    /// Mean and standard deviation of the averaged cumulative loss over seeds.
    ErrorBars(Common),
    /// Bound values on one run per learner.
    Bounds(Common),
    /// Monte-Carlo coverage of the bounds on a synthetic stream.
    Coverage(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, args) = match cli.verb {
        Command::Run(a) => (Verb::Run, a),
        Command::ErrorBars(a) => (Verb::ErrorBars, a),
        Command::Bounds(a) => (Verb::Bounds, a),
        Command::Coverage(a) => (Verb::Coverage, a),
    };
    match execute_from_file(verb, &args.config, args.seed, args.out, &args.overrides) {
        Ok((report, written)) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for l in &report.lines {
                println!("{l}");
            }
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
            match report.flag {
                Some(msg) => {
                    eprintln!("flag: {msg}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
