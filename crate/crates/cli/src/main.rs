use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use recmwpm_cli::config::{self, Cli, Command};
use recmwpm_cli::output;
use recmwpm_cli::run::{self, RunOutcome};
use recmwpm_cli::CliError;

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn write_outputs(outcome: &RunOutcome) -> Result<(), CliError> {
    let config = &outcome.report.config;
    match (&outcome.decode, config.command) {
        (Some(summary), Command::Decode) => {
            let mut bytes = serde_json::to_vec_pretty(summary).expect("summary serialises");
            bytes.push(b'\n');
            write_to(config.output.as_deref(), &bytes)?;
        }
        _ => write_to(config.output.as_deref(), &output::emit(&outcome.report.records, config.format))?,
    }
    if let Some(threshold) = &outcome.report.threshold {
        eprintln!("threshold p_th = {:.5}", threshold.p_th);
        for (d1, d2, at) in &threshold.distance_pairs {
            eprintln!("  d={d1} / d={d2} crossing at {at:.5}");
        }
    }
    for (d, r) in &outcome.report.pseudo_thresholds {
        eprintln!("d={d}: p_pth = {:.6} ± {:.6} ({} steps)", r.p_pth, r.std_error, r.steps);
    }
    if let Some(path) = &config.report {
        let mut bytes = serde_json::to_vec_pretty(&outcome.report).expect("report serialises");
        bytes.push(b'\n');
        write_to(Some(path), &bytes)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, options) = cli.command.split();
    let result = config::resolve(command, options).and_then(|config| {
        eprintln!("seed = {}", config.seed);
        let outcome = run::run(&config)?;
        write_outputs(&outcome)?;
        match outcome.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
