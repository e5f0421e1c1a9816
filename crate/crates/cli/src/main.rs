use std::process::ExitCode;

use clap::Parser;
use macroreal_cli::error::{EXIT_CONFIG, EXIT_OK};
use macroreal_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if outcome.contract_failures > 0 {
                eprintln!("numerical contract violated ({} checks); see {}", outcome.contract_failures, outcome.manifest.display());
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("macroreal: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
