use std::process::ExitCode;

use clap::Parser;
use kaon_sn_cli::{execute, Cli, RunSpec};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match RunSpec::from_cli(cli).and_then(|spec| execute(&spec)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kaon-sn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
