use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cascadekit::cli::Cli::parse();
    match cascadekit::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
