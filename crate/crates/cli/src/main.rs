//! `hadq`: command-line front end for the simulator.

mod commands;
mod spec;

use std::process::ExitCode;

fn main() -> ExitCode {
    let spec = match spec::parse_run_spec(std::env::args_os().collect()) {
        Ok(Ok(spec)) => spec,
        Ok(Err(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match commands::execute(spec) {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
