use std::process::ExitCode;

use cesm_cad::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error [{}]: {e}", category.as_str());
            ExitCode::from(category.exit_code())
        }
    }
}
