use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reflexgrid::{Band, Window};
use reflexgrid_cli::commands::{
    cmd_algebra, cmd_metrics, cmd_run, cmd_validate, parse_window, AlgebraMode, BandSource,
    RunOptions,
};

#[derive(Parser)]
#[command(
    name = "reflexgrid",
    version,
    about = "Simulate IoT-mediated grid regulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, print its metric summary and optionally write a CSV
    /// trace and an SVG chart.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Metrics window `START:END` (default: end of disturbance to horizon).
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
        /// Refuse to run when a rule needs awareness the wiring lacks.
        #[arg(long)]
        strict_awareness: bool,
        /// Add one `shift_<id>` column per agent to the CSV.
        #[arg(long)]
        record_shifts: bool,
    },
    /// Parse a scenario and check its awareness without running it.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        strict_awareness: bool,
    },
    /// Evaluate reflexive-process expressions.
    Algebra {
        #[command(subcommand)]
        mode: AlgebraCommand,
    },
    /// Recompute the metric summary of a CSV trace.
    Metrics {
        trace: PathBuf,
        /// Take the band and default window from this scenario.
        #[arg(long, conflicts_with_all = ["v_low", "v_high"])]
        scenario: Option<PathBuf>,
        #[arg(long, requires = "v_high", allow_hyphen_values = true)]
        v_low: Option<f64>,
        #[arg(long, requires = "v_low", allow_hyphen_values = true)]
        v_high: Option<f64>,
        /// Metrics window `START:END` (default: whole trace, or the
        /// scenario's post-disturbance window).
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
    },
}

#[derive(Subcommand)]
enum AlgebraCommand {
    /// Print the canonical form of an expression.
    Eval { expr: String },
    /// Print whether two expressions denote the same polynomial.
    Equals { a: String, b: String },
    /// Apply the awareness operator: `base * (1 + observers...)`.
    Awareness {
        base: String,
        #[arg(required = true)]
        observers: Vec<String>,
    },
}

fn main() -> ExitCode {
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
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let result = match cli.command {
        Command::Run {
            scenario,
            csv,
            svg,
            seed,
            window,
            strict_awareness,
            record_shifts,
        } => {
            let opts = RunOptions {
                scenario,
                seed,
                csv,
                svg,
                window,
                strict_awareness,
                record_shifts,
            };
            cmd_run(&opts, &mut out, &mut err).map(|_| ())
        }
        Command::Validate {
            scenario,
            strict_awareness,
        } => cmd_validate(&scenario, strict_awareness, &mut out, &mut err),
        Command::Algebra { mode } => {
            let mode = match mode {
                AlgebraCommand::Eval { expr } => AlgebraMode::Eval(expr),
                AlgebraCommand::Equals { a, b } => AlgebraMode::Equals(a, b),
                AlgebraCommand::Awareness { base, observers } => {
                    AlgebraMode::Awareness { base, observers }
                }
            };
            cmd_algebra(&mode, &mut out)
        }
        Command::Metrics {
            trace,
            scenario,
            v_low,
            v_high,
            window,
        } => {
            let band = match (scenario, v_low, v_high) {
                (Some(path), _, _) => BandSource::Scenario(path),
                (None, Some(lo), Some(hi)) => BandSource::Explicit(Band::new(lo, hi)),
                _ => {
                    eprintln!("error: metrics needs --scenario or both --v-low and --v-high");
                    return ExitCode::from(1);
                }
            };
            cmd_metrics(&trace, &band, window, &mut out).map(|_| ())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
