use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, ValueEnum};
use gridres_core::blackstart::{monte_carlo as run_monte_carlo, run_restoration, RestorationScenario, RestorationTimeline};
use gridres_core::coordination::CoordinationScenario;
use gridres_core::frequency::{trace_metrics, FrequencyScenario, FrequencyTrace, SystemParameters};
use gridres_core::metrics::{
    annotate_phases, degradation_area, service_from_frequency, service_from_restoration, state_space_path,
    PhaseAnnotation, PhaseEvents, ServiceTrajectory, StateSpacePath, DEFAULT_FLOOR_DEVIATION,
};
use gridres_core::protection::{ProtectionCase, RadialNetwork, SettingGroupTable};
use gridres_core::{benchmarks, format::sig9, Error, Result, Validate, Violation};
use serde::Serialize;
use serde_json::Value;

use crate::output::{read_json, OutDir};
use crate::{Format, Io};

/// Inputs and settings of one invocation, written next to its outputs.
#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    inputs: Vec<String>,
    out: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<Format>,
}

impl<'a> RunManifest<'a> {
    fn new(subcommand: &'a str, inputs: &[&Path], out: &Path) -> Self {
        Self {
            subcommand,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            out: out.display().to_string(),
            seed: None,
            runs: None,
            format: None,
        }
    }
}

pub fn frequency(io: &Io, format: Format) -> Result<ExitCode> {
    let scenario: FrequencyScenario = read_json(&io.scenario)?;
    let trace = scenario.simulate()?;
    let metrics = trace_metrics(&trace, &scenario.system)?;
    let out = OutDir::create(&io.out)?;
    match format {
        Format::Csv => out.write("trace.csv", &trace.to_csv())?,
        Format::Json => out.write_json("trace.json", &trace)?,
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        #[serde(flatten)]
        metrics: &'a gridres_core::frequency::TraceMetrics,
        fcr_activation: Option<f64>,
        final_frequency: f64,
    }
    out.write_json(
        "metrics.json",
        &Summary {
            metrics: &metrics,
            fcr_activation: trace.fcr_activation,
            final_frequency: trace.samples.last().map_or(scenario.system.f_n, |s| s.f),
        },
    )?;
    let mut m = RunManifest::new("frequency", &[&io.scenario], &io.out);
    m.format = Some(format);
    out.write_json("manifest.json", &m)?;
    Ok(ExitCode::SUCCESS)
}

pub fn coordinate(io: &Io) -> Result<ExitCode> {
    let scenario: CoordinationScenario = read_json(&io.scenario)?;
    let outcome = scenario.run()?;
    let out = OutDir::create(&io.out)?;
    if let Some(a) = &outcome.inertia {
        out.write_json("inertia_assignment.json", a)?;
    }
    if let Some(a) = &outcome.droop {
        out.write_json("droop_assignment.json", a)?;
    }
    if let Some(r) = &outcome.reserve_report {
        out.write_json("rule_report.json", r)?;
    }
    out.write_json("outcome.json", &outcome)?;
    out.write_json("manifest.json", &RunManifest::new("coordinate", &[&io.scenario], &io.out))?;
    Ok(ExitCode::SUCCESS)
}

pub fn protection(io: &Io) -> Result<ExitCode> {
    let case: ProtectionCase = read_json(&io.scenario)?;
    let outcome = case.run()?;
    let out = OutDir::create(&io.out)?;
    out.write_json("report.json", &outcome.report)?;
    out.write_json("currents.json", &outcome.initial)?;
    out.write_json("manifest.json", &RunManifest::new("protection", &[&io.scenario], &io.out))?;
    Ok(ExitCode::SUCCESS)
}

pub fn blackstart(io: &Io, seed: u64, format: Format) -> Result<ExitCode> {
    let scenario: RestorationScenario = read_json(&io.scenario)?;
    let timeline = run_restoration(&scenario, seed)?;
    let out = OutDir::create(&io.out)?;
    match format {
        Format::Csv => out.write("timeline.csv", &timeline.to_csv())?,
        Format::Json => out.write_json("timeline.json", &timeline.events)?,
    }
    out.write_json("run.json", &timeline)?;
    let mut m = RunManifest::new("blackstart", &[&io.scenario], &io.out);
    m.seed = Some(seed);
    m.format = Some(format);
    out.write_json("manifest.json", &m)?;
    Ok(ExitCode::SUCCESS)
}

pub fn monte_carlo(io: &Io, p: f64, radius_km: f64, runs: usize, seed: u64) -> Result<ExitCode> {
    let scenario: RestorationScenario = read_json(&io.scenario)?;
    let result = run_monte_carlo(&scenario, p, radius_km, runs, seed)?;
    let out = OutDir::create(&io.out)?;
    out.write("monte_carlo.csv", &result.to_csv())?;
    #[derive(Serialize)]
    struct Summary {
        p: f64,
        radius_km: f64,
        runs: usize,
        seed: u64,
        mean: f64,
        median: f64,
        min: f64,
        max: f64,
    }
    out.write_json(
        "summary.json",
        &Summary {
            p: result.p,
            radius_km: result.radius_km,
            runs: result.runs,
            seed: result.seed,
            mean: result.mean,
            median: result.median,
            min: result.min,
            max: result.max,
        },
    )?;
    let mut m = RunManifest::new("blackstart", &[&io.scenario], &io.out);
    m.seed = Some(seed);
    m.runs = Some(runs);
    out.write_json("manifest.json", &m)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["trace", "timeline"])))]
pub struct MetricsArgs {
    /// Frequency trace CSV from `frequency`.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Restoration timeline CSV from `blackstart`.
    #[arg(long, requires = "total_load")]
    timeline: Option<PathBuf>,
    /// Total load of the restoration scenario (MW).
    #[arg(long)]
    total_load: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Service level the deficit is measured against.
    #[arg(long, default_value_t = 1.0)]
    baseline: f64,
    /// Frequency deviation at which service reaches zero (Hz).
    #[arg(long, default_value_t = DEFAULT_FLOOR_DEVIATION)]
    floor_deviation: f64,
    /// Nominal frequency of the traced system (Hz).
    #[arg(long, default_value_t = 50.0)]
    f_n: f64,
    /// Allowed deviation around nominal (Hz).
    #[arg(long, default_value_t = 0.5)]
    band: f64,
    /// Phase milestones (JSON); inferred from the trajectory if omitted.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Degradation per state label (JSON object); enables the state-space
    /// path.
    #[arg(long)]
    state_metric: Option<PathBuf>,
    /// Encoding of the service table.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Serialize)]
struct MetricsReport {
    source: &'static str,
    baseline: f64,
    degradation_area: f64,
    min_level: f64,
    final_level: f64,
    phases: PhaseAnnotation,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_space: Option<StateSpacePath>,
}

#[derive(Serialize)]
struct ServiceRow<'a> {
    t: f64,
    level: f64,
    phase: &'a str,
}

pub fn metrics(args: &MetricsArgs) -> Result<ExitCode> {
    let mut inputs: Vec<&Path> = Vec::new();
    let (source, trajectory) = if let Some(path) = &args.trace {
        inputs.push(path);
        let trace = FrequencyTrace::from_csv(&std::fs::read_to_string(path)?)?;
        let mut params = SystemParameters::new(1.0, 1.0);
        params.f_n = args.f_n;
        params.band_half_width = args.band;
        ("trace", service_from_frequency(&trace, &params, args.floor_deviation)?)
    } else {
        let path = args.timeline.as_ref().expect("clap enforces one input");
        inputs.push(path);
        let events = RestorationTimeline::events_from_csv(&std::fs::read_to_string(path)?)?;
        let total = args.total_load.expect("clap enforces --total-load");
        let timeline = RestorationTimeline {
            events,
            merges: Vec::new(),
            microgrids: Vec::new(),
            total_load: total,
            total_critical: 0.0,
            total_generation: 0.0,
            rounds: 0,
        };
        ("timeline", service_from_restoration(&timeline, total)?)
    };
    let events = match &args.events {
        Some(p) => {
            inputs.push(p);
            read_json(p)?
        }
        None => PhaseEvents::infer(&trajectory, args.baseline)?,
    };
    let phases = annotate_phases(&trajectory, &events)?;
    let state_space = match &args.state_metric {
        Some(p) => {
            inputs.push(p);
            let map: BTreeMap<String, f64> = read_json(p)?;
            Some(state_space_path(&trajectory, &map)?)
        }
        None => None,
    };
    let report = MetricsReport {
        source,
        baseline: args.baseline,
        degradation_area: degradation_area(&trajectory, args.baseline)?,
        min_level: trajectory.samples.iter().map(|s| s.level).fold(f64::INFINITY, f64::min),
        final_level: trajectory.samples.last().map_or(0.0, |s| s.level),
        phases,
        state_space,
    };
    let out = OutDir::create(&args.out)?;
    write_service(&out, &trajectory, &report.phases, args.format)?;
    out.write_json("metrics.json", &report)?;
    let mut m = RunManifest::new("metrics", &inputs, &args.out);
    m.format = Some(args.format);
    out.write_json("manifest.json", &m)?;
    Ok(ExitCode::SUCCESS)
}

fn write_service(out: &OutDir, trajectory: &ServiceTrajectory, phases: &PhaseAnnotation, format: Format) -> Result<()> {
    let phase_name = |t: f64| match phases.phase_at(t) {
        Some(p) => match p {
            gridres_core::metrics::Phase::Defend => "Defend",
            gridres_core::metrics::Phase::Detect => "Detect",
            gridres_core::metrics::Phase::Remediate => "Remediate",
            gridres_core::metrics::Phase::Recover => "Recover",
        },
        None => "",
    };
    match format {
        Format::Csv => {
            let mut text = String::from("t,level,phase\n");
            for s in &trajectory.samples {
                text.push_str(&format!("{},{},{}\n", sig9(s.t), sig9(s.level), phase_name(s.t)));
            }
            out.write("service.csv", &text)
        }
        Format::Json => {
            let rows: Vec<ServiceRow> = trajectory
                .samples
                .iter()
                .map(|s| ServiceRow { t: s.t, level: s.level, phase: phase_name(s.t) })
                .collect();
            out.write_json("service.json", &rows)
        }
    }
}

/// Scenario schemas understood by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Frequency,
    Coordination,
    Protection,
    Network,
    Settings,
    Restoration,
    Trajectory,
}

impl Kind {
    fn detect(doc: &Value) -> Option<Self> {
        let has = |k: &str| doc.get(k).is_some();
        Some(if has("system") && has("event") {
            Kind::Frequency
        } else if has("units") {
            Kind::Coordination
        } else if has("network") && has("fault") {
            Kind::Protection
        } else if has("lines") && has("breakers") {
            Kind::Network
        } else if has("groups") {
            Kind::Settings
        } else if has("buses") && has("areas") {
            Kind::Restoration
        } else if has("samples") {
            Kind::Trajectory
        } else {
            return None;
        })
    }
}

#[derive(Serialize)]
struct ValidationReport {
    path: String,
    kind: Kind,
    valid: bool,
    violations: Vec<Violation>,
}

fn violations_of<T: serde::de::DeserializeOwned + Validate>(doc: Value) -> Result<Vec<Violation>> {
    let value: T = serde_json::from_value(doc)?;
    Ok(value.violations().into_vec())
}

pub fn validate(path: &Path, kind: Option<Kind>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let kind = match kind.or_else(|| Kind::detect(&doc)) {
        Some(k) => k,
        None => return Err(Error::invalid("kind", "cannot tell the schema from the top-level keys; pass --kind")),
    };
    let violations = match kind {
        Kind::Frequency => violations_of::<FrequencyScenario>(doc)?,
        Kind::Coordination => violations_of::<CoordinationScenario>(doc)?,
        Kind::Protection => violations_of::<ProtectionCase>(doc)?,
        Kind::Network => violations_of::<RadialNetwork>(doc)?,
        Kind::Settings => violations_of::<SettingGroupTable>(doc)?,
        Kind::Restoration => violations_of::<RestorationScenario>(doc)?,
        Kind::Trajectory => violations_of::<ServiceTrajectory>(doc)?,
    };
    let report = ValidationReport {
        path: path.display().to_string(),
        kind,
        valid: violations.is_empty(),
        violations,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn export_benchmarks(dir: &Path) -> Result<ExitCode> {
    let out = OutDir::create(dir)?;
    for (name, doc) in benchmarks::fixtures() {
        out.write(&format!("{name}.json"), &doc)?;
    }
    Ok(ExitCode::SUCCESS)
}
