use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nilframe::cli::{example_config, run_command, run_examples, Command, Overrides, RunOutcome};
use nilframe::config::parse_config;
use nilframe::verify::write_defect_csv;
use nilframe::Error;

/// Design and verify Parseval frames for bandlimited subspaces of step-two
/// nilpotent Lie groups.
#[derive(Parser, Debug)]
#[command(name = "nilframe", version)]
struct Args {
    /// validate | analyze | design | synthesize | verify | examples
    command: Command,
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; overrides `output.report`. Without either the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance for certified suprema and measures.
    #[arg(long)]
    tol: Option<f64>,
    /// λ-grid nodes per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Truncation radii: one value, or three for m,k,n.
    #[arg(long, value_delimiter = ',')]
    trunc: Option<Vec<i64>>,
    /// Use a bundled example config instead of --config.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: Option<u8>,
}

fn input_error(e: Error) -> ExitCode {
    eprintln!("nilframe: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn write(path: &std::path::Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(outcome: &RunOutcome, out: Option<PathBuf>) -> Result<(), Error> {
    let json = outcome.report.to_json();
    let cfg_out = outcome.report.config.as_ref().map(|c| &c.output);
    match out.or_else(|| cfg_out.and_then(|o| o.report.clone()).map(PathBuf::from)) {
        Some(p) => write(&p, &json)?,
        None => print!("{json}"),
    }
    if let (Some(field), Some(path)) = (&outcome.field, cfg_out.and_then(|o| o.field.as_ref())) {
        let text = serde_json::to_string_pretty(field).map_err(|e| Error::Io(e.to_string()))?;
        write(path.as_ref(), &(text + "\n"))?;
    }
    if let (Some(v), Some(path)) = (&outcome.report.verification, cfg_out.and_then(|o| o.csv.as_ref())) {
        write_defect_csv(v, path.as_ref())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = if args.command == Command::Examples {
        run_examples(&args.example.map_or(vec![1, 2, 3], |k| vec![k]))
    } else {
        let cfg = match (&args.config, args.example) {
            (Some(p), None) => parse_config(p),
            (None, Some(k)) => example_config(k),
            (Some(_), Some(_)) => Err(Error::Malformed("give either --config or --example, not both".into())),
            (None, None) => Err(Error::Malformed("--config is required".into())),
        };
        let mut cfg = match cfg {
            Ok(c) => c,
            Err(e) => return input_error(e),
        };
        let ov = Overrides {
            tol: args.tol,
            grid: args.grid.clone(),
            trunc: args.trunc.clone(),
        };
        if let Err(e) = ov.apply(&mut cfg) {
            return input_error(e);
        }
        run_command(args.command, cfg)
    };
    if let Err(e) = emit(&outcome, args.out) {
        return input_error(e);
    }
    if let Some(e) = &outcome.report.status.error {
        eprintln!("nilframe: {}", e.message);
    }
    for f in &outcome.report.status.failures {
        eprintln!("nilframe: {f}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}
