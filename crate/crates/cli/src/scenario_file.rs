//! Scenario files: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [circuit]
//! r_source = 0.05
//! r_base = 100
//! r_flex = 50
//!
//! [source]
//! v_source_base = 10
//!
//! [agents]
//! count = 100
//! period = 10
//! on_steps = 5
//! phase_spread = uniform
//! rule = reactive
//!
//! [run]
//! horizon = 5000
//! ```
//!
//! `#` starts a comment. Unknown sections, unknown keys and repeated keys are
//! errors. Per-agent overrides go in `[agent.<id>]` blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use reflexgrid::engine::{calibrate_nominal, DEFAULT_BAND_RATIO};
use reflexgrid::{
    AgentConfig, AwarenessDecl, Band, Branch, CircuitConfig, ControllerConfig, Disturbance,
    ReactionDraw, Rule, RuleKind, Scenario, ShiftMode,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

fn at(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line: Some(line),
        msg: msg.into(),
    }
}

fn whole(msg: impl Into<String>) -> ParseError {
    ParseError {
        line: None,
        msg: msg.into(),
    }
}

/// A parsed scenario together with its declared information wiring.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub awareness: AwarenessDecl,
}

impl ScenarioSpec {
    pub fn rule_kinds(&self) -> Vec<RuleKind> {
        self.scenario.agents.iter().map(|a| a.rule.kind()).collect()
    }
}

impl FromStr for ScenarioSpec {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_scenario(text)
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ParseError> {
        let name = self.name.clone();
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| at(line, format!("[{name}] {key}: cannot parse {v:?}"))),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T, ParseError> {
        let line = self.line;
        let name = self.name.clone();
        self.get(key)?
            .ok_or_else(|| at(line, format!("[{name}] is missing required key `{key}`")))
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>, ParseError> {
        let name = self.name.clone();
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => options
                .iter()
                .find(|(s, _)| *s == v)
                .map(|(_, t)| Some(*t))
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|(s, _)| *s).collect();
                    at(
                        line,
                        format!(
                            "[{name}] {key}: expected one of {}, got {v:?}",
                            names.join(", ")
                        ),
                    )
                }),
        }
    }
}

const AGENT_KEYS: [&str; 10] = [
    "period",
    "on_steps",
    "phase",
    "rule",
    "prob",
    "max_shift",
    "shift_mode",
    "reaction_draw",
    "v_low",
    "v_high",
];

/// Keys accepted in a section, or `None` for an unknown section.
fn section_keys(name: &str) -> Option<Vec<&'static str>> {
    let keys = match name {
        "circuit" => vec!["r_source", "r_base", "r_flex"],
        "source" => vec!["v_source_base"],
        "disturbance" => vec!["t_start", "t_end", "delta_v"],
        "agents" => [&["count", "phase_spread"][..], &AGENT_KEYS].concat(),
        "controller" => vec!["enabled", "interval", "v_nominal"],
        "band" => vec!["ratio", "v_low", "v_high", "v_nominal"],
        "run" => vec!["horizon", "seed", "sensing_delay"],
        "awareness" => vec!["wiring"],
        _ if name.starts_with("agent.") => [&AGENT_KEYS[..], &["r_base", "r_flex"]].concat(),
        _ => return None,
    };
    Some(keys)
}

const SECTION_NAMES: &str =
    "circuit, source, disturbance, agents, agent.<id>, controller, band, run, awareness";

fn lex(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| at(n, "section header must end with `]`"))?
                .trim()
                .to_string();
            if section_keys(&name).is_none() {
                return Err(at(
                    n,
                    format!("unknown section [{name}]; expected one of {SECTION_NAMES}"),
                ));
            }
            if !seen.insert(name.clone()) {
                return Err(at(n, format!("section [{name}] appears twice")));
            }
            sections.push(Section {
                name,
                line: n,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(n, format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(at(n, "key and value must both be non-empty"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| at(n, "key outside of any section"))?;
        if !section_keys(&section.name)
            .unwrap_or_default()
            .contains(&key)
        {
            return Err(at(n, format!("unknown key `{key}` in [{}]", section.name)));
        }
        if section.entries.contains_key(key) {
            return Err(at(n, format!("key `{key}` repeated in [{}]", section.name)));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: n,
            },
        );
    }
    Ok(sections)
}

const RULES: [(&str, RuleKind); 4] = [
    ("passive", RuleKind::PassiveCycle),
    ("reactive", RuleKind::ReactiveThreshold),
    ("probabilistic", RuleKind::ProbabilisticReactive),
    ("commanded", RuleKind::Commanded),
];
const SHIFT_MODES: [(&str, ShiftMode); 2] = [
    ("onset", ShiftMode::Onset),
    ("translate", ShiftMode::Translate),
];
const DRAWS: [(&str, ReactionDraw); 2] = [
    ("per_step", ReactionDraw::PerStep),
    ("per_event", ReactionDraw::PerEvent),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wiring {
    Isolated,
    Direct,
    Mutual,
    Controller,
}

const WIRINGS: [(&str, Wiring); 4] = [
    ("isolated", Wiring::Isolated),
    ("direct", Wiring::Direct),
    ("mutual", Wiring::Mutual),
    ("controller", Wiring::Controller),
];

/// Agent parameters as written, before the band is known.
#[derive(Clone)]
struct AgentDraft {
    period: u32,
    on_steps: u32,
    phase: Option<u32>,
    rule: RuleKind,
    prob: Option<f64>,
    max_shift: Option<u32>,
    shift_mode: ShiftMode,
    reaction_draw: ReactionDraw,
    v_low: Option<f64>,
    v_high: Option<f64>,
    r_base: f64,
    r_flex: f64,
    line: usize,
}

impl AgentDraft {
    fn apply(&mut self, s: &Section) -> Result<(), ParseError> {
        if let Some(v) = s.get("period")? {
            self.period = v;
        }
        if let Some(v) = s.get("on_steps")? {
            self.on_steps = v;
        }
        if let Some(v) = s.get("phase")? {
            self.phase = Some(v);
        }
        if let Some(v) = s.choice("rule", &RULES)? {
            self.rule = v;
        }
        if let Some(v) = s.get("prob")? {
            self.prob = Some(v);
        }
        if let Some(v) = s.get("max_shift")? {
            self.max_shift = Some(v);
        }
        if let Some(v) = s.choice("shift_mode", &SHIFT_MODES)? {
            self.shift_mode = v;
        }
        if let Some(v) = s.choice("reaction_draw", &DRAWS)? {
            self.reaction_draw = v;
        }
        if let Some(v) = s.get("v_low")? {
            self.v_low = Some(v);
        }
        if let Some(v) = s.get("v_high")? {
            self.v_high = Some(v);
        }
        self.line = s.line;
        Ok(())
    }

    fn build(&self, id: usize, phase: u32, band: &Band) -> Result<AgentConfig, ParseError> {
        let rule = match (self.rule, self.prob) {
            (RuleKind::ProbabilisticReactive, Some(prob)) => Rule::ProbabilisticReactive { prob },
            (RuleKind::ProbabilisticReactive, None) => {
                return Err(at(
                    self.line,
                    format!("agent {id}: probabilistic rule needs `prob`"),
                ))
            }
            (_, Some(_)) => {
                return Err(at(
                    self.line,
                    format!("agent {id}: `prob` only applies to probabilistic rules"),
                ))
            }
            (RuleKind::PassiveCycle, None) => Rule::PassiveCycle,
            (RuleKind::ReactiveThreshold, None) => Rule::ReactiveThreshold,
            (RuleKind::Commanded, None) => Rule::Commanded,
        };
        Ok(AgentConfig {
            max_shift: self.max_shift.unwrap_or(self.period),
            shift_mode: self.shift_mode,
            reaction_draw: self.reaction_draw,
            ..AgentConfig::new(
                id,
                self.period,
                self.on_steps,
                phase,
                rule,
                self.v_low.unwrap_or(band.v_low),
                self.v_high.unwrap_or(band.v_high),
            )
        })
    }
}

fn take(sections: &mut Vec<Section>, name: &str) -> Option<Section> {
    let i = sections.iter().position(|s| s.name == name)?;
    Some(sections.remove(i))
}

fn require_section(sections: &mut Vec<Section>, name: &str) -> Result<Section, ParseError> {
    take(sections, name).ok_or_else(|| whole(format!("missing section [{name}]")))
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ParseError> {
    let mut sections = lex(text)?;

    let circuit = require_section(&mut sections, "circuit")?;
    let r_source: f64 = circuit.require("r_source")?;
    let r_base: f64 = circuit.require("r_base")?;
    let r_flex: f64 = circuit.require("r_flex")?;

    let source = require_section(&mut sections, "source")?;
    let v_source_base: f64 = source.require("v_source_base")?;

    let disturbance = match take(&mut sections, "disturbance") {
        Some(s) => Disturbance {
            t_start: s.require("t_start")?,
            t_end: s.require("t_end")?,
            delta_v: s.require("delta_v")?,
        },
        None => Disturbance::none(),
    };

    let agents_sec = require_section(&mut sections, "agents")?;
    let count: usize = agents_sec.require("count")?;
    if count == 0 {
        return Err(at(agents_sec.line, "[agents] count must be positive"));
    }
    let uniform = agents_sec
        .choice("phase_spread", &[("uniform", true), ("fixed", false)])?
        .unwrap_or(true);
    let mut shared = AgentDraft {
        period: agents_sec.require("period")?,
        on_steps: agents_sec.require("on_steps")?,
        phase: None,
        rule: agents_sec
            .choice("rule", &RULES)?
            .ok_or_else(|| at(agents_sec.line, "[agents] is missing required key `rule`"))?,
        prob: None,
        max_shift: None,
        shift_mode: ShiftMode::default(),
        reaction_draw: ReactionDraw::default(),
        v_low: None,
        v_high: None,
        r_base,
        r_flex,
        line: agents_sec.line,
    };
    shared.apply(&agents_sec)?;
    if uniform && shared.phase.is_some() {
        return Err(at(
            agents_sec.line,
            "[agents] `phase` needs `phase_spread = fixed`",
        ));
    }

    let mut drafts = vec![shared; count];
    let overrides: Vec<Section> = {
        let (agent_secs, rest): (Vec<_>, Vec<_>) = sections
            .into_iter()
            .partition(|s| s.name.starts_with("agent."));
        sections = rest;
        agent_secs
    };
    for s in overrides {
        let id: usize = s.name["agent.".len()..].parse().map_err(|_| {
            at(
                s.line,
                format!("[{}]: agent id must be a non-negative integer", s.name),
            )
        })?;
        let draft = drafts.get_mut(id).ok_or_else(|| {
            at(
                s.line,
                format!("[{}]: agent id out of range, count is {count}", s.name),
            )
        })?;
        draft.apply(&s)?;
        if let Some(v) = s.get("r_base")? {
            draft.r_base = v;
        }
        if let Some(v) = s.get("r_flex")? {
            draft.r_flex = v;
        }
    }

    let branches = drafts
        .iter()
        .map(|d| Branch {
            r_base: d.r_base,
            r_flex: d.r_flex,
        })
        .collect();
    let circuit_cfg =
        CircuitConfig::new(r_source, branches).map_err(|e| at(circuit.line, e.to_string()))?;

    let phases: Vec<u32> = drafts
        .iter()
        .enumerate()
        .map(|(id, d)| match (d.phase, uniform) {
            (Some(p), _) => p,
            (None, true) => (id % d.period.max(1) as usize) as u32,
            (None, false) => 0,
        })
        .collect();

    let (band, v_nominal, band_line) = match take(&mut sections, "band") {
        Some(s) => {
            let ratio: Option<f64> = s.get("ratio")?;
            let low: Option<f64> = s.get("v_low")?;
            let high: Option<f64> = s.get("v_high")?;
            let nominal: Option<f64> = s.get("v_nominal")?;
            match (ratio, low, high, nominal) {
                (r, None, None, None) => {
                    let ratio = r.unwrap_or(DEFAULT_BAND_RATIO);
                    let (band, nominal) = calibrated(&circuit_cfg, &drafts, &phases, v_source_base, ratio, Some(s.line))?;
                    (band, nominal, Some(s.line))
                }
                (None, Some(lo), Some(hi), nominal) => {
                    let band = Band::new(lo, hi);
                    (band, nominal.unwrap_or(band.midpoint()), Some(s.line))
                }
                _ => {
                    return Err(at(
                        s.line,
                        "[band] takes either `ratio`, or `v_low` and `v_high` (optionally with `v_nominal`)",
                    ))
                }
            }
        }
        None => {
            let (band, nominal) = calibrated(
                &circuit_cfg,
                &drafts,
                &phases,
                v_source_base,
                DEFAULT_BAND_RATIO,
                None,
            )?;
            (band, nominal, None)
        }
    };
    assemble(
        &mut sections,
        circuit_cfg,
        v_source_base,
        disturbance,
        &drafts,
        &phases,
        band,
        v_nominal,
        band_line,
    )
}

/// Nominal voltage and band from the expected number of connected loads.
fn calibrated(
    circuit: &CircuitConfig,
    drafts: &[AgentDraft],
    phases: &[u32],
    v_source: f64,
    ratio: f64,
    line: Option<usize>,
) -> Result<(Band, f64), ParseError> {
    let err = |msg: String| ParseError {
        line,
        msg: format!("band calibration: {msg}"),
    };
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(err("ratio must lie in (0, 1)".into()));
    }
    // thresholds do not enter the calibration
    let placeholder = Band::new(0.0, 1.0);
    let agents = drafts
        .iter()
        .enumerate()
        .map(|(id, d)| d.build(id, phases[id], &placeholder))
        .collect::<Result<Vec<_>, _>>()?;
    let cal = calibrate_nominal(circuit, &agents, v_source, ratio).map_err(|e| {
        err(format!(
            "{e}; declare `v_low` and `v_high` explicitly instead"
        ))
    })?;
    Ok((cal.band, cal.v_nominal))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    sections: &mut Vec<Section>,
    circuit: CircuitConfig,
    v_source_base: f64,
    disturbance: Disturbance,
    drafts: &[AgentDraft],
    phases: &[u32],
    band: Band,
    v_nominal: f64,
    band_line: Option<usize>,
) -> Result<ScenarioSpec, ParseError> {
    if band.v_low >= band.v_high {
        return Err(ParseError {
            line: band_line,
            msg: "band v_low must be below v_high".into(),
        });
    }
    let agents = drafts
        .iter()
        .enumerate()
        .map(|(id, d)| d.build(id, phases[id], &band))
        .collect::<Result<Vec<_>, _>>()?;

    let controller = match take(sections, "controller") {
        Some(s) => {
            let enabled: bool = s.get("enabled")?.unwrap_or(true);
            let interval: u64 = s.get("interval")?.unwrap_or(1);
            let nominal: f64 = s.get("v_nominal")?.unwrap_or(v_nominal);
            if enabled && !circuit.is_homogeneous() {
                return Err(at(s.line, "the controller needs identical branches"));
            }
            enabled.then_some(ControllerConfig {
                v_nominal: nominal,
                band,
                interval,
            })
        }
        None => None,
    };

    let run = require_section(sections, "run")?;
    let horizon: u64 = run.require("horizon")?;
    let seed: u64 = run.get("seed")?.unwrap_or(0);
    let sensing_delay: u64 = run.get("sensing_delay")?.unwrap_or(1);
    if sensing_delay == 0 {
        return Err(at(run.line, "[run] sensing_delay must be at least 1"));
    }

    let n = agents.len();
    let awareness = match take(sections, "awareness") {
        Some(s) => {
            let w = s
                .choice("wiring", &WIRINGS)?
                .ok_or_else(|| at(s.line, "[awareness] is missing required key `wiring`"))?;
            wiring_decl(w, n)
        }
        None if controller.is_some() => wiring_decl(Wiring::Controller, n),
        None => wiring_decl(Wiring::Direct, n),
    };

    let scenario = Scenario {
        circuit,
        v_source_base,
        disturbance,
        agents,
        controller,
        band,
        horizon,
        seed,
        sensing_delay,
        record_shifts: None,
    };
    scenario.validate().map_err(|e| whole(e.to_string()))?;
    Ok(ScenarioSpec {
        scenario,
        awareness,
    })
}

fn wiring_decl(w: Wiring, n: usize) -> AwarenessDecl {
    match w {
        Wiring::Isolated => AwarenessDecl::isolated(n),
        Wiring::Direct => AwarenessDecl::direct_sensing(n),
        Wiring::Mutual => AwarenessDecl::mutual_images(n),
        Wiring::Controller => AwarenessDecl::central_controller(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
[circuit]
r_source = 0.05
r_base = 100
r_flex = 50

[source]
v_source_base = 10

[agents]
count = 10
period = 10
on_steps = 5
rule = reactive

[run]
horizon = 100
";

    #[test]
    fn minimal_file() {
        let spec: ScenarioSpec = BASE.parse().unwrap();
        let s = &spec.scenario;
        assert_eq!(s.agents.len(), 10);
        assert_eq!(s.agents[7].phase, 7);
        assert_eq!(s.agents[3].max_shift, 10);
        assert_eq!(s.sensing_delay, 1);
        assert_eq!(s.seed, 0);
        assert!(s.controller.is_none());
        assert_eq!(s.disturbance, Disturbance::none());
        // calibrated band around the five-connected voltage, default ratio
        let nominal = 10.0 / (1.0 + 0.05 * (10.0 / 100.0 + 5.0 / 50.0));
        assert!((s.band.midpoint() - nominal).abs() < 1e-12);
        assert!((s.band.v_high - nominal * 1.002).abs() < 1e-12);
        assert_eq!(s.agents[0].v_low, s.band.v_low);
        assert_eq!(spec.awareness, AwarenessDecl::direct_sensing(10));
    }

    #[test]
    fn overrides_and_explicit_band() {
        let text = format!(
            "{BASE}\n[band]\nv_low = 9\nv_high = 10\n\n[agent.3]\nrule = probabilistic\nprob = 0.25\nphase = 1\nr_flex = 25\n"
        );
        let spec: ScenarioSpec = text.parse().unwrap();
        let a = &spec.scenario.agents[3];
        assert_eq!(a.rule, Rule::ProbabilisticReactive { prob: 0.25 });
        assert_eq!(a.phase, 1);
        assert_eq!(spec.scenario.circuit.branches()[3].r_flex, 25.0);
        assert!(!spec.scenario.circuit.is_homogeneous());
        assert_eq!(spec.scenario.band, Band::new(9.0, 10.0));
    }

    #[test]
    fn misspelled_key_reports_its_line() {
        let text = BASE.replace("period = 10", "perod = 10");
        let err = text.parse::<ScenarioSpec>().unwrap_err();
        assert_eq!(err.line, Some(11));
        assert!(err.msg.contains("perod"), "{err}");
        let text = format!("{BASE}\n[controller]\nintervall = 3\n");
        let err = text.parse::<ScenarioSpec>().unwrap_err();
        assert_eq!(err.line, Some(19));
        assert!(err.msg.contains("intervall"), "{err}");
    }

    #[test]
    fn structural_errors() {
        let cases = [
            (format!("{BASE}[run]\nhorizon = 3\n"), Some(17)),
            (format!("{BASE}[bogus]\n"), Some(17)),
            (format!("{BASE}horizon = 3\n"), Some(17)),
            (format!("{BASE}just words\n"), Some(17)),
            ("r_source = 1\n".to_string(), Some(1)),
            (BASE.replace("rule = reactive", "rule = selfish"), Some(13)),
            (BASE.replace("count = 10", "count = ten"), Some(10)),
            (BASE.replace("[run]\nhorizon = 100\n", ""), None),
        ];
        for (text, line) in cases {
            let err = text.parse::<ScenarioSpec>().unwrap_err();
            assert_eq!(err.line, line, "{err}");
        }
    }

    #[test]
    fn semantic_errors() {
        let bad = [
            BASE.replace("on_steps = 5", "on_steps = 10"),
            BASE.replace("rule = reactive", "rule = probabilistic"),
            BASE.replace("rule = reactive", "rule = reactive\nprob = 0.5"),
            BASE.replace("r_flex = 50", "r_flex = 0"),
            format!("{BASE}[disturbance]\nt_start = 50\nt_end = 500\ndelta_v = 0.1\n"),
            format!("{BASE}[band]\nv_low = 10\nv_high = 9\n"),
            format!("{BASE}[band]\nratio = 0.1\nv_low = 9\n"),
            format!("{BASE}[agent.10]\nphase = 1\n"),
            BASE.replace("horizon = 100", "horizon = 100\nsensing_delay = 0"),
        ];
        for text in bad {
            assert!(text.parse::<ScenarioSpec>().is_err(), "{text}");
        }
    }

    #[test]
    fn wiring_defaults_follow_the_controller() {
        let text = format!("{BASE}[controller]\ninterval = 2\n")
            .replace("rule = reactive", "rule = commanded");
        let spec: ScenarioSpec = text.parse().unwrap();
        assert_eq!(spec.awareness, AwarenessDecl::central_controller(10));
        assert_eq!(spec.scenario.controller.unwrap().interval, 2);
        let text = format!("{BASE}[awareness]\nwiring = mutual\n");
        let spec: ScenarioSpec = text.parse().unwrap();
        assert_eq!(spec.awareness, AwarenessDecl::mutual_images(10));
    }
}
