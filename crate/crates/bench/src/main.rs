use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use riemprox_bench::{run_experiment, BenchError, Cli};

fn run() -> Result<i32, BenchError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    let cfg = cli.resolve()?;
    let outcome = run_experiment(&cfg)?;
    for path in outcome.write(&cfg)? {
        println!("{}", path.display());
    }
    for v in &outcome.violations {
        eprintln!("inequality violated: {v}");
    }
    for n in &outcome.nonconverged {
        eprintln!("not converged: {n}");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let code = match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bench: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
