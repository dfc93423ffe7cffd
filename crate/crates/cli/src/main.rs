mod args;
mod audit;
mod run;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run::run_solve(a),
        Command::Audit(a) => Ok(audit::run_audit(a)),
        Command::Sweep(a) => sweep::run_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("levelforge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
