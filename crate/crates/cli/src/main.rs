use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use projed::rewrite::Fuel;
use projed_cli::{cmd_check, cmd_render, cmd_run, cmd_serve, parse_viewport, Failure, RunOptions};

#[derive(Parser)]
#[command(name = "projed", version, about = "Projectional editor engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a language definition.
    Check { language: PathBuf },
    /// Replay an event script, writing snapshots.
    Run {
        language: PathBuf,
        start: String,
        script: PathBuf,
        /// Directory for snapshot files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Rewrite step budget per reduction.
        #[arg(long, env = "PROJED_FUEL", value_parser = parse_fuel)]
        fuel: Option<Fuel>,
        #[arg(long, value_parser = parse_viewport)]
        viewport: Option<projed::scene::Viewport>,
        /// Starting tree (s-expression or saved term) instead of a fresh instance.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Render a saved session to SVG, or text when the output ends in `.txt`.
    Render { session: PathBuf, language: PathBuf, output: PathBuf },
    /// Serve the editor protocol over TCP until interrupted.
    Serve {
        language: PathBuf,
        start: String,
        #[arg(long)]
        port: Option<u16>,
    },
}

fn parse_fuel(s: &str) -> Result<Fuel, String> {
    s.parse::<u64>().ok().and_then(Fuel::new).ok_or_else(|| format!("fuel must be a positive integer, got `{s}`"))
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("projed: {}", f.message);
    ExitCode::from(f.code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { language } => ExitCode::from(cmd_check(&language, &mut std::io::stdout()) as u8),
        Command::Run { language, start, script, out, fuel, viewport, tree } => {
            let opts = RunOptions {
                language,
                start,
                script,
                out,
                fuel: fuel.unwrap_or_default(),
                viewport: viewport.unwrap_or_default(),
                tree,
            };
            match cmd_run(&opts, &mut std::io::stderr()) {
                Ok(report) => {
                    println!(
                        "{} applied, {} dropped, {} failed; wrote {} files",
                        report.applied,
                        report.dropped,
                        report.failed,
                        report.written.len()
                    );
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(f) => fail(f),
            }
        }
        Command::Render { session, language, output } => match cmd_render(&session, &language, &output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => fail(f),
        },
        Command::Serve { language, start, port } => match cmd_serve(&language, &start, port, &mut std::io::stderr()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => fail(f),
        },
    }
}
