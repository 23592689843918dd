use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(persidskii::cli::run_cli(std::env::args()) as u8)
}
