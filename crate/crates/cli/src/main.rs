use std::io;
use std::process::ExitCode;

use clap::Parser;
use flowsynth_cli::{run, Command};

/// Synthesize qualifier and effect analyses from example traces.
#[derive(Debug, Parser)]
#[command(name = "flowsynth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(&cli.command, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
