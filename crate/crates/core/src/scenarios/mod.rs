//! Scenario registry, configuration, refinement studies, relaxation-time
//! sweeps and deterministic CSV/JSON output.

mod config;
mod output;
mod runs;
mod studies;

pub use config::{parse_config, validate_spec, Held, MaterialSpec, RunConfig, ScenarioId, ScenarioSpec};
pub use output::{fmt_float, num, sha256_hex, write_outputs, Gate, RunManifest, Summary, Table};
pub use runs::{
    energy_gates, evolve_2d, evolve_gauss, evolve_shear, gauss_grid, gauss_probe_cell, rel_l2, riemann_grid,
    shear_mode_error, shear_mode_grid, steps_for, Evolution, Hooks, ShearRun, CELL_DISSIPATION_TOL, CONSERVATION_TOL,
    ENERGY_CONSERVATION_TOL, ENERGY_INCREASE_TOL, INVOLUTION_TOL,
};
pub use studies::{
    closed_form_check, observed_orders, order_window, refine, sweep, Level, SweepRow, ABLATED_DEFECT_MIN,
    CLOSED_FORM_TOL, DEFECT_TOL, SPEED_TOL,
};

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::solver::DiagnosticsSeries;

/// Tables, summaries, gates and notes collected while a scenario runs.
#[derive(Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, Summary>,
    pub gates: Vec<Gate>,
    pub notes: Map<String, Value>,
}

impl Report {
    pub fn summary(&mut self, name: &str, s: Summary) {
        self.summary.insert(name.to_string(), s);
    }

    pub fn note(&mut self, name: &str, x: f64) {
        self.notes.insert(name.to_string(), num(x));
    }

    pub fn note_str(&mut self, name: &str, s: &str) {
        self.notes.insert(name.to_string(), Value::String(s.to_string()));
    }
}

/// Everything a scenario produces.
#[derive(Debug)]
pub struct RunOutcome {
    pub series: DiagnosticsSeries,
    pub tables: Vec<Table>,
    pub manifest: RunManifest,
}

/// Echo of the resolved configuration, defaults included.
pub fn config_echo(config: &RunConfig, spec: &ScenarioSpec) -> Map<String, Value> {
    let m = &config.material;
    let held = match m.held {
        Held::C1Sq(c) => ("material.c1_sq", num(c)),
        Held::MuDot(v) => ("material.mu_dot", num(v)),
    };
    let lambdas: Vec<Value> = spec.lambdas.iter().map(|l| num(*l)).collect();
    let v = json!({
        "run.system": config.system.name(),
        "run.scenario": config.scenario.name(),
        "run.target": spec.target.name(),
        "run.scheme": config.step.scheme.name(),
        "run.splitting": config.step.splitting.name(),
        "run.integrator": config.step.integrator.name(),
        "run.cfl": num(config.cfl),
        "run.t_end": num(config.t_end),
        "run.output_every": config.output_every,
        "run.seed": config.seed,
        held.0: held.1,
        "material.d1_sq": num(m.d1_sq),
        "material.gamma": num(m.gamma),
        "material.rho_hat": num(m.rho_hat),
        "material.lambda": num(m.lambda),
        "grid.n": spec.n,
        "grid.nx": spec.nx,
        "grid.ny": spec.ny,
        "grid.length": spec.length.map(num).unwrap_or(Value::Null),
        "scenario.mode": spec.mode,
        "scenario.amplitude": num(spec.amplitude),
        "scenario.width": num(spec.width),
        "scenario.lambdas": lambdas,
        "scenario.samples": spec.samples,
        "scenario.directions": spec.directions,
        "scenario.levels": spec.levels,
        "scenario.wall_velocity": num(spec.wall_velocity),
        "scenario.jump": num(spec.jump),
        "scenario.max_error": num(spec.max_error),
        "scenario.min_order": spec.min_order.map(num).unwrap_or(Value::Null),
    });
    let Value::Object(mut m) = v else { unreachable!() };
    if spec.id != ScenarioId::Converge {
        m.remove("run.target");
    }
    m
}

/// Runs a scenario and assembles its manifest. Gate failures are recorded in
/// the manifest; errors are returned.
pub fn run_scenario(spec: &ScenarioSpec, config: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut report = Report::default();
    let series = match spec.id {
        ScenarioId::AuditSymmetry => {
            studies::run_audit(spec, config, &mut report)?;
            DiagnosticsSeries::default()
        }
        ScenarioId::Converge => {
            studies::run_converge(spec, config, &mut report)?;
            DiagnosticsSeries::default()
        }
        ScenarioId::LimitSweep => {
            studies::run_sweep(spec, config, &mut report)?;
            DiagnosticsSeries::default()
        }
        _ => runs::run_evolution(spec, config, &mut report)?,
    };
    let files = report.tables.iter().map(|t| (format!("{}.csv", t.name), sha256_hex(t.to_csv().as_bytes()))).collect();
    let manifest = RunManifest {
        scenario: spec.id.name().to_string(),
        config: config_echo(config, spec),
        summary: report.summary,
        gates: report.gates,
        notes: report.notes,
        files,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome { series, tables: report.tables, manifest })
}

/// Manifest written when a run stops with an error.
pub fn error_manifest(config: Option<(&RunConfig, &ScenarioSpec)>, error: &crate::Error) -> String {
    let mut v = json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "error": error.to_string(),
        "all_gates_passed": false,
    });
    if let Some((c, s)) = config {
        v["config"] = Value::Object(config_echo(c, s));
        v["scenario"] = Value::String(s.id.name().to_string());
    }
    let mut out = serde_json::to_string_pretty(&v).expect("json values serialize");
    out.push('\n');
    out
}
