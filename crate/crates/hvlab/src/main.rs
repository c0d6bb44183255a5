use std::process::ExitCode;

use clap::Parser;
use hvlab::cli::{run, CommandConfig};

fn main() -> ExitCode {
    let config = CommandConfig::parse();
    let code = run(
        &config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
