//! Command-line front end for `spencer-core`: argument parsing, input files,
//! JSON reports and the self-test suite.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod report;
pub mod selftest;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use args::{AlgebraCmd, Cli, Command, LatticeCmd};
use error::CliError;
use report::Outcome;

/// Runs one parsed command and returns its outcome.
pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Algebra(AlgebraCmd::Check(a)) => commands::algebra_check(a),
        Command::Cohomology(a) => commands::cohomology(a),
        Command::Spectral(a) => commands::spectral(a),
        Command::Torsion(a) => commands::torsion(a),
        Command::Lattice(LatticeCmd::Solve(a)) => commands::lattice_solve(a),
        Command::Lattice(LatticeCmd::Check(a)) => commands::lattice_check(a),
        Command::Lattice(LatticeCmd::Evolve(a)) => commands::lattice_evolve(a),
        Command::Selftest(a) => match &a.replay {
            Some(path) => replay(path),
            None => selftest::selftest(a),
        },
    }
}

fn parse_config<T: DeserializeOwned>(config: &Value) -> Result<T, CliError> {
    serde_json::from_value(config.clone()).map_err(|e| CliError::input("config", e.to_string()))
}

/// Re-runs the command recorded in a report from its embedded config.
pub fn rerun(command: &str, config: &Value) -> Result<Outcome, CliError> {
    let cmd = match command {
        "algebra check" => Command::Algebra(AlgebraCmd::Check(parse_config(config)?)),
        "cohomology" => Command::Cohomology(parse_config(config)?),
        "spectral" => Command::Spectral(parse_config(config)?),
        "torsion" => Command::Torsion(parse_config(config)?),
        "lattice solve" => Command::Lattice(LatticeCmd::Solve(parse_config(config)?)),
        "lattice check" => Command::Lattice(LatticeCmd::Check(parse_config(config)?)),
        "lattice evolve" => Command::Lattice(LatticeCmd::Evolve(parse_config(config)?)),
        "selftest" | "selftest replay" => Command::Selftest(parse_config(config)?),
        other => return Err(CliError::input("command", format!("unknown command {other:?} in report"))),
    };
    execute(&cmd)
}

/// Reads a report, validates its envelope, re-runs it and compares results.
pub fn replay(path: &Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input("replay", format!("{}: {e}", path.display())))?;
    let report: Value = serde_json::from_str(&text).map_err(|e| CliError::input("replay", format!("{}: {e}", path.display())))?;
    for key in ["artifact", "version", "command", "config", "status", "result"] {
        if report.get(key).is_none() {
            return Err(CliError::input("replay", format!("report is missing `{key}`")));
        }
    }
    if report["artifact"] != json!(report::ARTIFACT) {
        return Err(CliError::input("replay", "report was not produced by this tool"));
    }
    let command = report["command"].as_str().ok_or_else(|| CliError::input("replay", "`command` is not a string"))?;
    let fresh = rerun(command, &report["config"])?;
    let fresh_env = fresh.envelope();
    let mismatched: Vec<String> = match (&report["result"], &fresh_env["result"]) {
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<String> = a.keys().chain(b.keys()).cloned().collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().filter(|k| a.get(k) != b.get(k)).collect()
        }
        (a, b) if a == b => Vec::new(),
        _ => vec!["result".into()],
    };
    let same_status = report["status"] == fresh_env["status"];
    let same_version = report["version"] == json!(report::VERSION);
    let passed = mismatched.is_empty() && same_status && fresh.passed;
    Ok(Outcome {
        command: "selftest replay",
        config: json!({"replayed_command": command, "replayed_config": report["config"]}),
        result: json!({
            "identical_result": mismatched.is_empty(),
            "mismatched_keys": mismatched,
            "status_matches": same_status,
            "version_matches": same_version,
            "rerun_status": fresh_env["status"],
        }),
        passed,
        summary: vec![
            ("replayed".into(), command.to_string()),
            ("identical result".into(), mismatched.is_empty().to_string()),
            ("status matches".into(), same_status.to_string()),
        ],
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Algebra(_) => "algebra-check",
        Command::Cohomology(_) => "cohomology",
        Command::Spectral(_) => "spectral",
        Command::Torsion(_) => "torsion",
        Command::Lattice(LatticeCmd::Solve(_)) => "lattice-solve",
        Command::Lattice(LatticeCmd::Check(_)) => "lattice-check",
        Command::Lattice(LatticeCmd::Evolve(_)) => "lattice-evolve",
        Command::Selftest(a) if a.replay.is_some() => "selftest-replay",
        Command::Selftest(_) => "selftest",
    }
}

/// Full CLI run: execute, write the report, print the table. Returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let path = cli
        .out
        .clone()
        .unwrap_or_else(|| report::default_report_path(command_name(&cli.command)));
    if let Err(e) = report::write_report(&path, &outcome.render()) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    if !cli.quiet {
        print!("{}", outcome.table());
        println!("  report: {}", path.display());
    }
    if outcome.passed {
        0
    } else {
        2
    }
}
