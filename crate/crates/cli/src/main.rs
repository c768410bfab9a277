use std::path::{Path, PathBuf};
use std::process::ExitCode;

use centerfocus_cli::{parse_spec_str, run, Command, Overrides, RunError, SpecError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "centerfocus", version, about = "Center-focus analysis of planar singular points")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline for any spec kind.
    Analyze(Common),
    /// Symbolic obstructions of a real field.
    Lyapunov(Common),
    /// Numeric return map of a real field.
    Returnmap(Common),
    /// Siegel check and blowup.
    Blowup(Common),
    /// Finite order and pseudo-orbits of a germ.
    Germ(Common),
    /// First integral, factorization and real slice.
    Slice(Common),
}

#[derive(Args)]
struct Common {
    /// Problem spec (JSON).
    spec: PathBuf,
    /// Order of the symbolic computation.
    #[arg(long)]
    truncation: Option<u32>,
    /// Integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-orbit CSV dumps.
    #[arg(long)]
    dump_orbits: Option<PathBuf>,
}

fn split(cmd: Cmd) -> (Command, Common) {
    match cmd {
        Cmd::Analyze(c) => (Command::Analyze, c),
        Cmd::Lyapunov(c) => (Command::Lyapunov, c),
        Cmd::Returnmap(c) => (Command::ReturnMap, c),
        Cmd::Blowup(c) => (Command::Blowup, c),
        Cmd::Germ(c) => (Command::Germ, c),
        Cmd::Slice(c) => (Command::Slice, c),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> RunError {
    SpecError::Io {
        path: path.display().to_string(),
        source,
    }
    .into()
}

/// Returns whether any stage failed numerically.
fn execute(command: Command, args: Common) -> Result<bool, RunError> {
    let bytes = std::fs::read(&args.spec).map_err(|e| io_error(&args.spec, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| SpecError::Parse {
        line: 1,
        column: 1,
        message: e.to_string(),
    })?;
    let spec = parse_spec_str(&text)?;
    let overrides = Overrides {
        truncation: args.truncation,
        tol: args.tol,
        radii: args.radii,
        dump_orbits: args.dump_orbits,
    };
    let report = run(command, &spec, &bytes, &overrides)?;
    let json = report.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, json).map_err(|e| io_error(path, e))?,
        None => print!("{json}"),
    }
    eprintln!("{}: {}", report.status, report.summary);
    Ok(report.status != "ok")
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 means numeric failure here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (command, args) = split(cli.command);
    match execute(command, args) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
