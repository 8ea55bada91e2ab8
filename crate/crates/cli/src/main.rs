use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use warpspec::config::{Format, RunConfig};
use warpspec::Error;

/// Spectral estimates and inequality checks on warped products.
#[derive(Parser, Debug)]
#[command(name = "warpspec", version)]
struct Args {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,

    /// Exit with status 3 when any inequality is violated
    #[arg(long)]
    strict: bool,

    /// Worker threads for sweeps (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,

    /// Write records here instead of stdout (overrides output.path)
    #[arg(long)]
    output: Option<PathBuf>,

    /// Record format (overrides output.format)
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VIOLATED: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Invariant(_) | Error::Precondition(_) => EXIT_CONFIG,
        Error::Solver { .. } | Error::Discretization(_) => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(violations) if args.strict && violations > 0 => {
            eprintln!("warpspec: {violations} inequality report(s) violated");
            ExitCode::from(EXIT_VIOLATED)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("warpspec: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(args: &Args) -> Result<usize, Error> {
    let (config, dir) = RunConfig::load(&args.config)?;
    let format = match args.format {
        Some(OutFormat::Json) => Format::Json,
        Some(OutFormat::Csv) => Format::Csv,
        None => config.output.format,
    };
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    // output.path in the file is relative to the config, --output to the cwd
    let target = args
        .output
        .clone()
        .or_else(|| config.output.path.as_ref().map(|p| dir.join(p)));
    let mut sink: Box<dyn Write> = match &target {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    let summary = warpspec::run::run(&config, &dir, workers, &mut sink, format)?;
    match sink.flush() {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            return Err(Error::Config(format!("cannot write output: {e}")))
        }
        _ => {}
    }
    Ok(summary.violations)
}
