use std::fmt;
use std::time::Instant;

use exotic_vortex::conventions::ledger_hash;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Exit codes: 0 pass, 2 parse, 3 precondition, 4 tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitClass {
    Parse = 2,
    Precondition = 3,
    Tolerance = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError { class: ExitClass::Parse, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError { class: ExitClass::Precondition, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<exotic_vortex::Error> for CliError {
    fn from(e: exotic_vortex::Error) -> Self {
        let class = if e.is_parse() { ExitClass::Parse } else { ExitClass::Precondition };
        CliError { class, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::precondition(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::precondition(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// One JSON object per run.
#[derive(Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub ledger_hash: String,
    pub command: Vec<String>,
    pub inputs: Value,
    pub outputs: Value,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// What a subcommand hands back before the envelope is added.
pub struct Outcome {
    pub inputs: Value,
    pub outputs: Value,
    pub passed: bool,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
}

impl RunReport {
    pub fn new(command: Vec<String>, outcome: &Outcome, start: Option<Instant>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: "exvortex",
            version: env!("CARGO_PKG_VERSION"),
            ledger_hash: ledger_hash(),
            command,
            inputs: outcome.inputs.clone(),
            outputs: outcome.outputs.clone(),
            passed: outcome.passed,
            timings: start.map(|s| Timings { total_ms: s.elapsed().as_secs_f64() * 1e3 }),
        }
    }
}
