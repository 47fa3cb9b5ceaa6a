use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use holobeam_cli::repro::{self, Figure, Sweep};
use holobeam_cli::{BeamKind, CliError, Experiment, Result, ScenarioConfig};

/// Curved-beam synthesis, propagation and trajectory optimization experiments.
///
/// Prints one JSON line on stdout on success and one on stderr on failure.
#[derive(Debug, Parser)]
#[command(name = "holobeam", version)]
struct Cli {
    /// Scenario file (TOML); built-in scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Overrides a scenario key, e.g. `--set scene.user=[-0.2,2.0]`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagates one beam to the configured user.
    Run {
        #[arg(long, value_enum, default_value = "airy-rhs")]
        beam: BeamArg,
        /// Trajectory offset c in meters; optimized when omitted.
        #[arg(long, allow_negative_numbers = true)]
        offset: Option<f64>,
    },
    /// Writes one table row per sweep point.
    Sweep {
        #[arg(value_enum)]
        kind: SweepArg,
    },
    /// Writes the data behind one figure.
    Repro {
        #[arg(value_enum)]
        figure: FigureArg,
    },
    /// Prints the resolved scenario as TOML, without a status line.
    Config,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BeamArg {
    AiryRhs,
    AiryUla,
    Focused,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SweepArg {
    OffsetC,
    UserZ,
    Spacing,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig3,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
}

fn load(cli: &Cli) -> Result<ScenarioConfig> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    ScenarioConfig::from_toml(&text, &cli.overrides)
}

/// Runs the command; `None` when the command's own output is the result.
fn execute(cli: &Cli) -> Result<Option<serde_json::Value>> {
    let config = load(cli)?;
    let digest = config.digest();
    if let Command::Config = cli.command {
        print!("{}", config.to_toml());
        return Ok(None);
    }
    let exp = Experiment::from_config(config)?;
    let files = match cli.command {
        Command::Run { beam, offset } => {
            let kind = match beam {
                BeamArg::AiryRhs => BeamKind::AiryRhs,
                BeamArg::AiryUla => BeamKind::AiryUla,
                BeamArg::Focused => BeamKind::Focused,
            };
            repro::single(&exp, kind, offset, &cli.out)?
        }
        Command::Sweep { kind } => {
            let kind = match kind {
                SweepArg::OffsetC => Sweep::OffsetC,
                SweepArg::UserZ => Sweep::UserZ,
                SweepArg::Spacing => Sweep::Spacing,
            };
            repro::sweep(&exp, kind, &cli.out, cli.workers)?
        }
        Command::Repro { figure } => {
            let figure = match figure {
                FigureArg::Fig3 => Figure::Fig3,
                FigureArg::Fig4 => Figure::Fig4,
                FigureArg::Fig6 => Figure::Fig6,
                FigureArg::Fig7 => Figure::Fig7,
                FigureArg::Fig8 => Figure::Fig8,
            };
            repro::reproduce(&exp, figure, &cli.out, cli.workers)?
        }
        Command::Config => unreachable!("handled above"),
    };
    let files: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    Ok(Some(serde_json::json!({ "status": "ok", "config_sha256": digest, "files": files })))
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "status": "error", "kind": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_line("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if let Some(report) = report {
                println!("{report}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
