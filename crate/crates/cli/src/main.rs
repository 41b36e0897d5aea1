use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use species_idr_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = species_idr_cli::run(&cli, &mut input, &mut out);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
