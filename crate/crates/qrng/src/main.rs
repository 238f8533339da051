use std::panic;
use std::process::ExitCode;

use clap::Parser;
use qrng::cli::{self, Cli};

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, matching validation failures
    let args = Cli::parse();
    match panic::catch_unwind(|| cli::run(args)) {
        Ok(Ok(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(1),
    }
}
