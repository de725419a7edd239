use std::process::ExitCode;

use clap::Parser;
use wgqed_cli::app::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // the message already embeds the underlying cause
            eprintln!("wgqed: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
