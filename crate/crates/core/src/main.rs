use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use semidec::cli_io::{
    exit_code, parse_point, run, write_outputs, Payload, ProblemSpec, RunConfig, RunMetadata, Verb,
};
use semidec::error::{Error, Result};
use semidec::poly::format_rational;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Delta,
    Verify,
    Search,
    Equation,
    Audit,
    Heights,
    Stability,
}

impl From<Command> for Verb {
    fn from(c: Command) -> Verb {
        match c {
            Command::Delta => Verb::Delta,
            Command::Verify => Verb::Verify,
            Command::Search => Verb::Search,
            Command::Equation => Verb::Equation,
            Command::Audit => Verb::Audit,
            Command::Heights => Verb::Heights,
            Command::Stability => Verb::Stability,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Distributive constants, heights and bounded-height searches.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    command: Command,
    /// JSON problem specification.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Write `<command>.json`, `<command>.csv` and `run_meta.json` here
    /// instead of printing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Work cap for Buchberger steps and enumerated points.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Point such as "(6,4)" (heights).
    #[arg(long)]
    point: Option<String>,
    /// Form whose height to report (heights).
    #[arg(long)]
    poly: Option<String>,
    /// Comma-separated primes of S.
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
}

fn load_spec(args: &Args) -> Result<ProblemSpec> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
            ProblemSpec::from_json(&text)?
        }
        None => ProblemSpec::default(),
    };
    if let Some(p) = &args.point {
        spec.point = Some(parse_point(p)?.iter().map(format_rational).collect());
    }
    if let Some(f) = &args.poly {
        spec.form = Some(f.clone());
    }
    if let Some(primes) = &args.primes {
        spec.s = Some(primes.clone());
    }
    Ok(spec)
}

fn execute(args: &Args) -> Result<(Payload, usize)> {
    let spec = load_spec(args)?;
    let config = RunConfig {
        budget: args.budget,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(Error::Invalid("--workers must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    let workers = pool.current_num_threads();
    let payload = pool.install(|| run(args.command.into(), &spec, &config))?;
    Ok((payload, workers))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let (payload, workers) = match execute(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let verb: Verb = args.command.into();
    if let Some(dir) = &args.out {
        let meta = RunMetadata {
            version: env!("CARGO_PKG_VERSION"),
            command: verb.name(),
            workers,
            elapsed_ms: start.elapsed().as_millis(),
        };
        if let Err(e) = write_outputs(dir, verb, &payload, &meta) {
            eprintln!("error: cannot write outputs: {e}");
            return ExitCode::from(1);
        }
        return ExitCode::SUCCESS;
    }
    match args.format {
        Format::Json => print!("{}", payload.json),
        Format::Csv => match &payload.csv {
            Some(csv) => print!("{csv}"),
            None => {
                eprintln!("error: no CSV rendering for {}", verb.name());
                return ExitCode::from(1);
            }
        },
    }
    ExitCode::SUCCESS
}
