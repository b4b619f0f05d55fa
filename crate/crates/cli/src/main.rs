use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use vpair_cli::{run, Command, RunSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Solve,
    Continue,
    Verify,
    ExpandCheck,
    Emit,
}

/// Steady co-rotating and counter-rotating vortex-patch pairs.
#[derive(Debug, Parser)]
#[command(name = "vpair", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a configuration key, e.g. `--set d=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value = "continue")]
    command: CommandArg,
    /// Existing branch.jsonl to check or plot instead of recomputing.
    #[arg(long)]
    branch: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("VPAIR_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // 0 leaves the choice to rayon
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("warning: could not size the thread pool");
        }
    }
    let spec = RunSpec {
        command: match args.command {
            CommandArg::Solve => Command::Solve,
            CommandArg::Continue => Command::Continue,
            CommandArg::Verify => Command::Verify,
            CommandArg::ExpandCheck => Command::ExpandCheck,
            CommandArg::Emit => Command::Emit,
        },
        config: args.config,
        out: args.out,
        overrides: args.overrides,
        branch: args.branch,
    };
    match run(&spec) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("vpair: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
