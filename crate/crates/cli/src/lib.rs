//! Command-line front end for `bulkq-core`: argument parsing, command
//! dispatch and the versioned report envelope.

pub mod args;
pub mod commands;
pub mod report;

use std::time::Instant;

use bulkq_core::{Error, ErrorClass};

use args::{Cli, Format};
use report::{CommandResult, Envelope, Guards, Request, Tolerances, SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Domain => EXIT_DOMAIN,
        ErrorClass::Parse => EXIT_PARSE,
        ErrorClass::Internal => EXIT_INTERNAL,
    }
}

/// Runs one parsed invocation and returns the envelope.
pub fn execute(cli: &Cli) -> Result<Envelope, Error> {
    let start = Instant::now();
    let result = commands::run(&cli.command, cli.timing)?;
    Ok(Envelope {
        schema: SCHEMA.to_string(),
        tool: "bulkq".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        request: Request {
            format: cli.format,
            threads: cli.threads,
            command: cli.command.clone(),
        },
        guards: Guards::current(),
        tolerances: Tolerances::default(),
        result,
        wall_time_s: cli.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Renders the envelope in the requested format.
pub fn render(envelope: &Envelope, format: Format) -> Result<String, Error> {
    match format {
        Format::Json => serde_json::to_string_pretty(envelope)
            .map(|s| s + "\n")
            .map_err(|e| Error::Internal(e.to_string())),
        Format::Csv => report::to_csv(&envelope.result).map_err(|e| Error::Internal(e.to_string())),
    }
}

/// Whether the run should exit non-zero despite producing a report.
pub fn report_failed(envelope: &Envelope) -> bool {
    matches!(&envelope.result, CommandResult::Selftest(r) if !r.pass)
}
