use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use locomp::job::{parse_job, run, validate, RunOptions, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Structured,
}

/// Runs a batch job of cover, order and completion queries.
#[derive(Parser, Debug)]
#[command(name = "locomp", version)]
struct Cli {
    /// Job document (JSON).
    #[arg(long)]
    job: PathBuf,
    /// Budget for queries that give none.
    #[arg(long, env = "LOCOMP_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget_default: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Re-check every certificate with the library verifiers.
    #[arg(long)]
    replay_certificates: bool,
    /// Only validate the document.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.job) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", cli.job.display());
            return ExitCode::from(3);
        }
    };
    let doc = match parse_job(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}: {e}", cli.job.display());
            return ExitCode::from(3);
        }
    };
    let diags = validate(&doc);
    for d in &diags {
        eprintln!("{}: {d}", cli.job.display());
    }
    if cli.check {
        return ExitCode::from(if diags.is_empty() { 0 } else { 3 });
    }
    let report = run(&doc, &RunOptions { default_budget: cli.budget_default, replay: cli.replay_certificates });
    let out = match cli.format {
        Format::Text => report.to_text(),
        Format::Structured => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    match &cli.report {
        Some(p) => {
            if let Err(e) = std::fs::write(p, out) {
                eprintln!("{}: {e}", p.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{out}"),
    }
    ExitCode::from(report.exit_code as u8)
}
