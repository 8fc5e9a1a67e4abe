use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use bulkq_cli::args::Cli;
use bulkq_cli::{exit_code, execute, render, report_failed, EXIT_INTERNAL, EXIT_OK, EXIT_PARSE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK as u8),
                _ => ExitCode::from(EXIT_PARSE as u8),
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(EXIT_INTERNAL as u8);
    }
    let outcome = execute(&cli).and_then(|env| render(&env, cli.format).map(|text| (env, text)));
    match outcome {
        Ok((envelope, text)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(EXIT_INTERNAL as u8);
            }
            if report_failed(&envelope) {
                ExitCode::from(EXIT_INTERNAL as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
