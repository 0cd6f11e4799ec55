//! The subcommands, written against generic writers so tests can drive them
//! without spawning processes.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 runtime error,
//! 3 awareness violation under `--strict-awareness`.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use reflexgrid::engine::series_metrics;
use reflexgrid::{parse_expression, run, Atom, Band, Metrics, Polynomial, Violation, Window};
use thiserror::Error;

use crate::scenario_file::ScenarioSpec;
use crate::svg;
use crate::trace_csv::{read_trace, write_trace};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{count} awareness violation(s); refusing to run under --strict-awareness")]
    Awareness { count: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Awareness { .. } => 3,
        }
    }
}

fn input(msg: impl fmt::Display) -> CliError {
    CliError::Input(msg.to_string())
}

fn runtime(msg: impl fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| runtime(format!("{}: {e}", path.display()))
}

/// Metrics over one window, printed as `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub window: Window,
    pub band: Band,
    pub metrics: Metrics,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.metrics;
        writeln!(f, "window = {}:{}", self.window.start, self.window.end)?;
        writeln!(f, "v_low = {}", self.band.v_low)?;
        writeln!(f, "v_high = {}", self.band.v_high)?;
        writeln!(f, "outside_band_fraction = {}", m.outside_band_fraction)?;
        writeln!(f, "band_crossings = {}", m.band_crossings)?;
        writeln!(f, "max_overshoot = {}", m.max_overshoot)?;
        writeln!(f, "max_undershoot = {}", m.max_undershoot)?;
        writeln!(f, "settled = {}", m.settled)
    }
}

/// Parses `START:END` into a half-open window.
pub fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("window {s:?} must look like START:END"))?;
    let start = a
        .trim()
        .parse()
        .map_err(|_| format!("window start {a:?} is not a step"))?;
    let end = b
        .trim()
        .parse()
        .map_err(|_| format!("window end {b:?} is not a step"))?;
    Ok(Window::new(start, end))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    text.parse()
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

/// The window instability is judged over: from the end of the disturbance to
/// the horizon, or the whole run when the disturbance lasts until the end.
pub fn default_window(spec: &ScenarioSpec) -> Window {
    let s = &spec.scenario;
    let w = Window::new(s.disturbance.t_end, s.horizon);
    if w.is_empty() {
        Window::new(0, s.horizon)
    } else {
        w
    }
}

/// Runs awareness validation, printing one warning line per violation.
pub fn check_awareness<E: Write>(
    spec: &ScenarioSpec,
    strict: bool,
    err: &mut E,
) -> Result<Vec<Violation>, CliError> {
    let violations = spec
        .awareness
        .validate_rules(&spec.rule_kinds())
        .map_err(input)?;
    for v in &violations {
        let _ = writeln!(err, "warning: {v}");
    }
    if strict && !violations.is_empty() {
        return Err(CliError::Awareness {
            count: violations.len(),
        });
    }
    Ok(violations)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub seed: Option<u64>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub window: Option<Window>,
    pub strict_awareness: bool,
    pub record_shifts: bool,
}

pub fn cmd_run<O: Write, E: Write>(
    opts: &RunOptions,
    out: &mut O,
    err: &mut E,
) -> Result<Summary, CliError> {
    let mut spec = load_scenario(&opts.scenario)?;
    check_awareness(&spec, opts.strict_awareness, err)?;
    if let Some(seed) = opts.seed {
        spec.scenario.seed = seed;
    }
    spec.scenario.record_shifts = Some(opts.record_shifts);
    let window = opts.window.unwrap_or_else(|| default_window(&spec));
    if window.is_empty() || window.end > spec.scenario.horizon {
        return Err(input(format!(
            "window {}:{} must be non-empty and end by the horizon {}",
            window.start, window.end, spec.scenario.horizon
        )));
    }

    let trace = run(&spec.scenario).map_err(runtime)?;
    let s = &spec.scenario;

    if let Some(path) = &opts.csv {
        let file = File::create(path).map_err(write_err(path))?;
        write_trace(&trace, BufWriter::new(file))
            .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    }
    let v_load = trace.v_load_series();
    if let Some(path) = &opts.svg {
        let d = &s.disturbance;
        let chart = svg::render(&v_load, &s.band, Some((d.t_start, d.t_end)));
        fs::write(path, chart).map_err(write_err(path))?;
    }
    let metrics = series_metrics(&v_load, &s.band, window).map_err(runtime)?;
    let summary = Summary {
        window,
        band: s.band,
        metrics,
    };
    write!(out, "{summary}").map_err(runtime)?;
    Ok(summary)
}

/// Parses the scenario and checks awareness without running it.
pub fn cmd_validate<O: Write, E: Write>(
    path: &Path,
    strict: bool,
    out: &mut O,
    err: &mut E,
) -> Result<(), CliError> {
    let spec = load_scenario(path)?;
    let violations = check_awareness(&spec, strict, err)?;
    let omega = spec.awareness.derive_structure();
    let _ = writeln!(out, "agents = {}", spec.scenario.agents.len());
    let _ = writeln!(out, "awareness_words = {}", omega.len());
    let _ = writeln!(out, "violations = {}", violations.len());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraMode {
    Eval(String),
    Equals(String, String),
    Awareness {
        base: String,
        observers: Vec<String>,
    },
}

fn parse_poly(text: &str) -> Result<Polynomial, CliError> {
    parse_expression(text).map_err(|e| input(format!("{text:?}: {e}")))
}

pub fn cmd_algebra<O: Write>(mode: &AlgebraMode, out: &mut O) -> Result<(), CliError> {
    let line = match mode {
        AlgebraMode::Eval(e) => parse_poly(e)?.to_canonical_string(),
        AlgebraMode::Equals(a, b) => (parse_poly(a)? == parse_poly(b)?).to_string(),
        AlgebraMode::Awareness { base, observers } => {
            let atoms = observers
                .iter()
                .map(|o| o.parse::<Atom>().map_err(|e| input(format!("{o:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            parse_poly(base)?
                .apply_awareness(&atoms)
                .map_err(input)?
                .to_canonical_string()
        }
    };
    writeln!(out, "{line}").map_err(runtime)
}

/// Where `metrics` takes its band and default window from.
#[derive(Debug, Clone)]
pub enum BandSource {
    Scenario(PathBuf),
    Explicit(Band),
}

pub fn cmd_metrics<O: Write>(
    trace_path: &Path,
    band: &BandSource,
    window: Option<Window>,
    out: &mut O,
) -> Result<Summary, CliError> {
    let file =
        File::open(trace_path).map_err(|e| input(format!("{}: {e}", trace_path.display())))?;
    let rows = read_trace(io::BufReader::new(file))
        .map_err(|e| input(format!("{}: {e}", trace_path.display())))?;
    let (band, default) = match band {
        BandSource::Scenario(p) => {
            let spec = load_scenario(p)?;
            (spec.scenario.band, default_window(&spec))
        }
        BandSource::Explicit(b) => {
            if b.v_low >= b.v_high {
                return Err(input("v_low must be below v_high"));
            }
            (*b, Window::new(0, rows.len() as u64))
        }
    };
    let window = window.unwrap_or(default);
    let v_load: Vec<f64> = rows.iter().map(|r| r.v_load).collect();
    let metrics = series_metrics(&v_load, &band, window).map_err(input)?;
    let summary = Summary {
        window,
        band,
        metrics,
    };
    write!(out, "{summary}").map_err(runtime)?;
    Ok(summary)
}
