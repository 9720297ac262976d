//! `exvortex`: construct, verify and count exotic vortices.
//!
//! Every run prints one JSON report on stdout and a short summary on stderr.
//! Exit codes: 0 all checks pass, 2 parse error, 3 precondition violated,
//! 4 a numerical tolerance failed.

mod parse;
mod report;
mod topo;
mod uniformize;
mod verify;
mod weierstrass;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use report::{CliResult, ExitClass, Outcome, RunReport};

#[derive(Parser, Debug)]
#[command(name = "exvortex", version, about = "Exotic vortices from twisted holomorphic maps")]
struct Cli {
    /// Leave wall-clock timings out of the report so runs are byte-identical
    #[arg(long, global = true)]
    no_timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a vortex from a map, check flux quantisation and the field equation
    Verify(verify::VerifyArgs),
    /// Write the field grid of a map to CSV
    Sample(verify::SampleArgs),
    /// Witten-index vortex count and the Bradlow condition
    Count(topo::CountArgs),
    /// Expected dimensions of the moduli problems
    Index(topo::IndexArgs),
    /// Vortex numbers allowed by a twist class
    Selection(topo::SelectionArgs),
    /// Conformal factor flattening a torus metric
    Uniformize(uniformize::UniformizeArgs),
    /// Lattice invariants, ℘ values and the differential-equation check
    Weierstrass(weierstrass::WeierstrassArgs),
}

fn dispatch(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::Verify(a) => verify::run(a),
        Command::Sample(a) => verify::sample(a),
        Command::Count(a) => topo::count(a),
        Command::Index(a) => topo::index(a),
        Command::Selection(a) => topo::selection(a),
        Command::Uniformize(a) => uniformize::run(a),
        Command::Weierstrass(a) => weierstrass::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = (!cli.no_timings).then(Instant::now);
    let command: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            let report = RunReport::new(command, &outcome, start);
            match serde_json::to_string_pretty(&report) {
                Ok(s) => {
                    // a closed pipe downstream is not an error of the run
                    let _ = writeln!(std::io::stdout().lock(), "{s}");
                }
                Err(e) => {
                    eprintln!("error: cannot serialise report: {e}");
                    return ExitCode::from(ExitClass::Precondition as u8);
                }
            }
            for line in &outcome.summary {
                eprintln!("{line}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("FAILED: a tolerance check did not pass");
                ExitCode::from(ExitClass::Tolerance as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class as u8)
        }
    }
}
