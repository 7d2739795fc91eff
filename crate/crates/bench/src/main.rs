use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rnla_bench::{run_with_threads, threads_from_env, BenchError, Cli, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("rnla-bench {}: {e}", cli.command.name());
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, BenchError> {
    let threads = threads_from_env()?;
    let report = run_with_threads(&cli.command, threads)?;
    let csv = report.csv();
    match &cli.command.args().out {
        Some(path) => std::fs::write(path, &csv)?,
        None => std::io::stdout().lock().write_all(&csv)?,
    }
    if report.not_converged {
        eprintln!("rnla-bench {}: solver did not converge", cli.command.name());
    }
    Ok(report.exit_code())
}
