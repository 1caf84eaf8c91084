//! `qrobust`: robustness, witnesses and discrimination games from JSON files.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qrobust_core::format::{read_document, to_canonical_string};
use qrobust_core::Error;

use report::Selector;

/// Output directory used when `--output` is not given.
const OUT_DIR_ENV: &str = "QROBUST_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "qrobust", version, about = "Generalized robustness of quantum measurements and assemblages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the invariants of an input file.
    Validate(Common),
    /// Compute the robustness with respect to a free set.
    Robustness(Common),
    /// Dump the dual witness blocks.
    Witness(Common),
    /// Build the discrimination game of the witness.
    Game(Common),
    /// Compare the game advantage with one plus the robustness.
    Verify(Common),
    /// Best success probability of free objects in a game file.
    Maxfree(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Input file (object, or game for `maxfree`).
    pub input: PathBuf,
    /// `jm`, `coexistence`, `lhs`, `incoherent` or `generated:<path>`.
    #[arg(long, default_value = "jm")]
    pub free_set: String,
    /// Instrument file for ensemble robustness.
    #[arg(long)]
    pub instrument: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_feas: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_gap: f64,
    #[arg(long, default_value_t = qrobust_core::DEFAULT_TOL_MEMBERSHIP)]
    pub tol_membership: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Seed for the sampled witness check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; defaults to `$QROBUST_OUT_DIR/<command>.json`, else stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write solver iterates as text to this path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Canonical JSON.
    Json,
    /// One `key = value` line per scalar field.
    Text,
}

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INVALID: u8 = 1;
    pub const SOLVER: u8 = 2;
    pub const IO: u8 = 3;
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => exit::IO,
        Error::Solver(_) | Error::SlaterFailure(_) => exit::SOLVER,
        _ => exit::INVALID,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, common) = match &cli.command {
        Command::Validate(c) => ("validate", c),
        Command::Robustness(c) => ("robustness", c),
        Command::Witness(c) => ("witness", c),
        Command::Game(c) => ("game", c),
        Command::Verify(c) => ("verify", c),
        Command::Maxfree(c) => ("maxfree", c),
    };
    match run(name, common) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("qrobust {name}: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: &str, c: &Common) -> Result<(), Error> {
    for (flag, v) in [("--tol-feas", c.tol_feas), ("--tol-gap", c.tol_gap), ("--tol-membership", c.tol_membership)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Format { path: flag.into(), message: format!("tolerance must be positive, got {v}") });
        }
    }
    let doc = read_document(&c.input)?;
    let selector = Selector::parse(&c.free_set)?;
    let (value, trace) = match command {
        "validate" => (report::validate(&doc, c), Vec::new()),
        "maxfree" => report::maxfree(&doc, &selector, c)?,
        _ => report::analyze(command, &doc, &selector, c)?,
    };
    if let Some(path) = &c.trace {
        let text: String = trace.iter().map(|r| format!("{r:?}\n")).collect();
        write(path, &text)?;
    }
    let text = match c.format {
        Format::Json => to_canonical_string(&value),
        Format::Text => report::to_text(&value),
    };
    match output_path(command, c) {
        Some(path) => write(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn output_path(command: &str, c: &Common) -> Option<PathBuf> {
    c.output
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|dir| {
        let ext = match c.format {
            Format::Json => "json",
            Format::Text => "txt",
        };
        Path::new(&dir).join(format!("{command}.{ext}"))
    }))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}
