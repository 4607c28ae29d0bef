//! Time-dependent scenarios: the 1D shear mode, the Stokes first problem,
//! the elastic Riemann problem and the Gaussian velocity pulse.

use std::f64::consts::TAU;

use super::config::{RunConfig, ScenarioId, ScenarioSpec};
use super::output::{Gate, Summary, Table};
use super::Report;
use crate::error::{Error, Result};
use crate::material::MaxwellParams;
use crate::relaxation::{ucm_residual, TrajectorySample};
use crate::solver::{
    cfl_dt, conserved_totals, detf_consistency, involution_residual, material_point_sample, max_wave_speed,
    min_cell_dissipation, shear1d_cfl_dt, shear1d_step, shear_energy, shear_mode, step, stokes_erfc_profile,
    total_dissipation_rate, total_energy, total_entropy, Boundary, DiagnosticsRecord, DiagnosticsSeries, Grid1D,
    Grid2D, Scheme, ShearParams, StepAudit,
};
use crate::system::{Elasto7, LagrangianSystem, StateElasto7, StateUcm10, Ucm10, FXA, FXB, FYA, FYB};
use crate::tensor::Vec2;

/// Largest per-step relative energy increase tolerated as round-off.
pub const ENERGY_INCREASE_TOL: f64 = 1e-12;
/// Per-step relative energy change allowed for the non-dissipative setting.
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-10;
pub const CELL_DISSIPATION_TOL: f64 = -1e-12;
/// Involution residual bound, relative to the initial field scale.
pub const INVOLUTION_TOL: f64 = 1e-12;
pub const CONSERVATION_TOL: f64 = 1e-12;

/// `(steps, dt)` with `dt ≤ dt_max` landing exactly on `t_end`.
pub fn steps_for(t_end: f64, dt_max: f64) -> (usize, f64) {
    let n = (t_end / dt_max).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

fn is_output_step(s: usize, nsteps: usize, every: usize) -> bool {
    s == 0 || s == nsteps || (every > 0 && s.is_multiple_of(every))
}

/// Relative discrete L² distance `‖a − b‖/‖b‖`.
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

// ---------------------------------------------------------------- 1D shear

pub struct ShearRun {
    pub grid: Grid1D<2>,
    pub params: ShearParams,
    pub series: DiagnosticsSeries,
    pub snapshots: Vec<Table>,
    pub dt: f64,
    pub steps: usize,
}

fn shear_dissipation_rate(grid: &Grid1D<2>, p: &ShearParams) -> f64 {
    if p.lambda.is_infinite() {
        return 0.0;
    }
    grid.cells.iter().map(|c| c[1] * c[1] / (p.g * p.lambda)).sum::<f64>() * grid.h
}

fn shear_snapshot(grid: &Grid1D<2>, step: usize) -> Table {
    let mut t = Table::new(format!("fields_{step:06}"), &["y", "u", "tau"]);
    for (i, c) in grid.cells.iter().enumerate() {
        t.push(vec![grid.center(i), c[0], c[1]]);
    }
    t
}

pub fn evolve_shear(
    params: &MaxwellParams,
    mut grid: Grid1D<2>,
    config: &RunConfig,
    keep_fields: bool,
) -> Result<ShearRun> {
    let p = ShearParams::from(params);
    let (nsteps, dt) = steps_for(config.t_end, shear1d_cfl_dt(&grid, config.cfl, &p));
    let mut series = DiagnosticsSeries::default();
    let mut snapshots = Vec::new();
    let mut e0 = shear_energy(&grid, &p);
    let mut d0 = shear_dissipation_rate(&grid, &p);
    let mut integral = 0.0;
    for s in 0..=nsteps {
        if s > 0 {
            shear1d_step(&mut grid, dt, &p, config.step)?;
            if let Some(i) = grid.cells.iter().position(|c| !(c[0].is_finite() && c[1].is_finite())) {
                return Err(Error::AdmissibilityLoss { cell: i, reason: "non-finite value".into() });
            }
            let e1 = shear_energy(&grid, &p);
            let d1 = shear_dissipation_rate(&grid, &p);
            let dissipated = 0.5 * dt * (d0 + d1);
            integral += dissipated;
            series.steps.push(StepAudit {
                step: s,
                t: s as f64 * dt,
                dt,
                energy_before: e0,
                energy_after: e1,
                dissipated,
                min_cell_dissipation: if p.lambda.is_infinite() {
                    0.0
                } else {
                    grid.cells.iter().map(|c| c[1] * c[1] / p.g).fold(f64::INFINITY, f64::min)
                },
            });
            e0 = e1;
            d0 = d1;
        }
        if is_output_step(s, nsteps, config.output_every) {
            series.push(DiagnosticsRecord {
                step: s,
                t: s as f64 * dt,
                energy: e0,
                entropy: e0,
                dissipation_integral: integral,
                involution_residual: 0.0,
                detf_consistency: 0.0,
                max_speed: p.speed(),
            })?;
            if keep_fields {
                snapshots.push(shear_snapshot(&grid, s));
            }
        }
    }
    Ok(ShearRun { grid, params: p, series, snapshots, dt, steps: nsteps })
}

pub fn shear_mode_grid(spec: &ScenarioSpec, n: usize) -> Result<(Grid1D<2>, f64)> {
    let length = spec.length.unwrap_or(1.0);
    let k = TAU * spec.mode as f64 / length;
    let amp = spec.amplitude;
    let grid = Grid1D::from_fn(n, length, Boundary::Periodic, |y| [amp * (k * y).sin(), 0.0])?;
    Ok((grid, k))
}

/// `(absolute L², relative L²)` velocity error against the analytic mode.
pub fn shear_mode_error(run: &ShearRun, k: f64, u0: f64, t: f64) -> (f64, f64) {
    let g = &run.grid;
    let exact: Vec<f64> =
        (0..g.n).map(|i| shear_mode(t, g.center(i), k, run.params.lambda, run.params.g, u0).0).collect();
    let u: Vec<f64> = g.cells.iter().map(|c| c[0]).collect();
    let abs = (u.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * g.h).sqrt();
    (abs, rel_l2(&u, &exact))
}

fn series_report(report: &mut Report, series: &DiagnosticsSeries) {
    let col = |f: fn(&DiagnosticsRecord) -> f64| series.records.iter().map(f).collect::<Vec<_>>();
    report.summary("energy", Summary::of(&col(|r| r.energy)));
    report.summary("entropy", Summary::of(&col(|r| r.entropy)));
    report.summary("dissipation_integral", Summary::of(&col(|r| r.dissipation_integral)));
    report.summary("involution_residual", Summary::of(&col(|r| r.involution_residual)));
    report.summary("detf_consistency", Summary::of(&col(|r| r.detf_consistency)));
    report.summary("max_speed", Summary::of(&col(|r| r.max_speed)));
    let mut diag = Table::new(
        "diagnostics",
        &[
            "step",
            "t",
            "energy",
            "entropy",
            "dissipation_integral",
            "involution_residual",
            "detf_consistency",
            "max_speed",
        ],
    );
    for r in &series.records {
        diag.push(vec![
            r.step as f64,
            r.t,
            r.energy,
            r.entropy,
            r.dissipation_integral,
            r.involution_residual,
            r.detf_consistency,
            r.max_speed,
        ]);
    }
    report.tables.push(diag);
    let mut steps = Table::new(
        "steps",
        &[
            "step",
            "t",
            "dt",
            "energy_before",
            "energy_after",
            "dissipated",
            "min_cell_dissipation",
            "relative_change",
            "budget",
        ],
    );
    for a in &series.steps {
        steps.push(vec![
            a.step as f64,
            a.t,
            a.dt,
            a.energy_before,
            a.energy_after,
            a.dissipated,
            a.min_cell_dissipation,
            a.relative_change(),
            a.budget(),
        ]);
    }
    report.tables.push(steps);
    let rel: Vec<f64> = series.steps.iter().map(StepAudit::relative_change).collect();
    if !rel.is_empty() {
        report.summary("energy_relative_change", Summary::of(&rel));
        let budget: Vec<f64> = series.steps.iter().map(StepAudit::budget).collect();
        report.summary("energy_budget", Summary::of(&budget));
    }
}

/// Energy and dissipation gates for periodic runs without forcing.
pub fn energy_gates(report: &mut Report, series: &DiagnosticsSeries, config: &RunConfig, lambda: f64) {
    let rel: Vec<f64> = series.steps.iter().map(StepAudit::relative_change).collect();
    let max_increase = rel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    report.gates.push(Gate::at_most("energy_non_increasing", max_increase, ENERGY_INCREASE_TOL));
    let min_d = series.steps.iter().map(|a| a.min_cell_dissipation).fold(f64::INFINITY, f64::min);
    if min_d.is_finite() {
        report.gates.push(Gate::at_least("cell_dissipation_nonnegative", min_d, CELL_DISSIPATION_TOL));
    }
    if lambda.is_infinite() && config.step.scheme == Scheme::Central {
        let drift = rel.iter().map(|x| x.abs()).fold(0.0, f64::max);
        report.gates.push(Gate::at_most("energy_conserved", drift, ENERGY_CONSERVATION_TOL));
    }
}

pub fn run_shear1d(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<DiagnosticsSeries> {
    let params = config.material.params()?;
    let (grid, k) = shear_mode_grid(spec, spec.n)?;
    let run = evolve_shear(&params, grid, config, true)?;
    let (abs, rel) = shear_mode_error(&run, k, spec.amplitude, config.t_end);
    report.summary("l2_error", Summary::scalar(abs));
    report.summary("relative_l2_error", Summary::scalar(rel));
    report.note("dt", run.dt);
    report.note("steps", run.steps as f64);
    report.gates.push(Gate::at_most("analytic_error", rel, spec.max_error));
    series_report(report, &run.series);
    energy_gates(report, &run.series, config, params.lambda());
    report.tables.extend(run.snapshots);
    Ok(run.series)
}

pub fn stokes_length(spec: &ScenarioSpec, config: &RunConfig, params: &MaxwellParams) -> Result<f64> {
    if params.is_frozen() {
        return Err(Error::validation("lambda", "stokes_first needs a finite lambda"));
    }
    let diffusive = 6.0 * (params.mu_dot() * config.t_end).sqrt();
    match spec.length {
        Some(l) if l < diffusive => {
            Err(Error::validation("length", format!("domain must be at least 6 sqrt(mu_dot t_end) = {diffusive} long")))
        }
        Some(l) => Ok(l),
        None => Ok(diffusive.max(1.25 * params.elastic.c1_sq.sqrt() * config.t_end)),
    }
}

pub fn run_stokes(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<DiagnosticsSeries> {
    let params = config.material.params()?;
    let length = stokes_length(spec, config, &params)?;
    let wall = spec.wall_velocity;
    let grid = Grid1D::from_fn(spec.n, length, Boundary::DirichletVelocity { wall }, |_| [0.0, 0.0])?;
    let run = evolve_shear(&params, grid, config, true)?;
    let g = &run.grid;
    let u: Vec<f64> = g.cells.iter().map(|c| c[0]).collect();
    let reference: Vec<f64> =
        (0..g.n).map(|i| stokes_erfc_profile(g.center(i), config.t_end, params.mu_dot(), wall)).collect();
    report.summary("erfc_distance", Summary::scalar(rel_l2(&u, &reference)));
    report.note("length", length);
    report.note("dt", run.dt);
    let max_u = u.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let max_tau = g.cells.iter().map(|c| c[1].abs()).fold(0.0, f64::max);
    report.summary("max_abs_velocity", Summary::scalar(max_u));
    report.summary("max_abs_stress", Summary::scalar(max_tau));
    report.gates.push(Gate::at_most("velocity_bounded", max_u, wall.abs() * (1.0 + 1e-6)));
    let far = u.last().copied().unwrap_or(0.0).abs();
    report.gates.push(Gate::at_most("far_field_quiescent", far, 1e-3 * wall.abs()));
    series_report(report, &run.series);
    report.tables.extend(run.snapshots);
    Ok(run.series)
}

// ---------------------------------------------------------------- 2D

pub struct Evolution<const N: usize> {
    pub grid: Grid2D<N>,
    pub series: DiagnosticsSeries,
    pub snapshots: Vec<Table>,
    pub dt: f64,
    pub steps: usize,
    pub field_scale: f64,
    pub max_involution: f64,
    pub max_detf_consistency: f64,
    pub max_conservation_drift: f64,
    pub max_cfl: f64,
    pub probe: Vec<TrajectorySample>,
}

pub struct Hooks<'a, const N: usize> {
    pub min_dissipation: Option<&'a dyn Fn(&Grid2D<N>) -> Result<f64>>,
    pub probe: Option<&'a dyn Fn(&Grid2D<N>) -> Result<TrajectorySample>>,
}

fn field_scale<const N: usize>(grid: &Grid2D<N>) -> f64 {
    grid.cells.iter().flat_map(|c| [c[FXA], c[FXB], c[FYA], c[FYB]]).fold(0.0, |m, x| m.max(x.abs()))
}

fn grid_snapshot<const N: usize>(grid: &Grid2D<N>, names: &[&str], step: usize) -> Table {
    let mut header = vec!["a", "b"];
    header.extend_from_slice(names);
    let mut t = Table::new(format!("fields_{step:06}"), &header);
    for (i, c) in grid.cells.iter().enumerate() {
        let (a, b) = grid.center(i);
        let mut row = vec![a, b];
        row.extend_from_slice(c);
        t.push(row);
    }
    t
}

pub fn evolve_2d<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    mut grid: Grid2D<N>,
    config: &RunConfig,
    hooks: &Hooks<'_, N>,
    keep_fields: bool,
) -> Result<Evolution<N>> {
    let (nsteps, dt) = steps_for(config.t_end, cfl_dt(sys, &grid, config.cfl)?);
    let h_min = grid.ha.min(grid.hb);
    let transported = sys.transported();
    let mut out = Evolution {
        series: DiagnosticsSeries::default(),
        snapshots: Vec::new(),
        dt,
        steps: nsteps,
        field_scale: field_scale(&grid),
        max_involution: involution_residual(&grid),
        max_detf_consistency: detf_consistency(&grid),
        max_conservation_drift: 0.0,
        max_cfl: 0.0,
        probe: Vec::new(),
        grid: grid.clone(),
    };
    let mut e0 = total_energy(sys, &grid)?;
    let mut d0 = total_dissipation_rate(sys, &grid)?;
    let mut integral = 0.0;
    let mut totals = conserved_totals(&grid);
    for s in 0..=nsteps {
        if s > 0 {
            step(sys, &mut grid, dt, config.step)?;
            let e1 = total_energy(sys, &grid)?;
            let d1 = total_dissipation_rate(sys, &grid)?;
            let dissipated = 0.5 * dt * (d0 + d1);
            integral += dissipated;
            let min_cell = match hooks.min_dissipation {
                Some(f) => f(&grid)?,
                None => f64::INFINITY,
            };
            out.series.steps.push(StepAudit {
                step: s,
                t: s as f64 * dt,
                dt,
                energy_before: e0,
                energy_after: e1,
                dissipated,
                min_cell_dissipation: min_cell,
            });
            e0 = e1;
            d0 = d1;
            let next = conserved_totals(&grid);
            let scale = (0..N).filter(|k| transported[*k]).map(|k| next[k].abs()).fold(1.0, f64::max);
            for k in (0..N).filter(|k| transported[*k]) {
                out.max_conservation_drift = out.max_conservation_drift.max((next[k] - totals[k]).abs() / scale);
            }
            totals = next;
            out.max_involution = out.max_involution.max(involution_residual(&grid));
            out.max_detf_consistency = out.max_detf_consistency.max(detf_consistency(&grid));
        }
        let speed = max_wave_speed(sys, &grid)?;
        out.max_cfl = out.max_cfl.max(dt * speed / h_min);
        if let Some(f) = hooks.probe {
            out.probe.push(f(&grid)?);
        }
        if is_output_step(s, nsteps, config.output_every) {
            out.series.push(DiagnosticsRecord {
                step: s,
                t: s as f64 * dt,
                energy: e0,
                entropy: total_entropy(sys, &grid)?,
                dissipation_integral: integral,
                involution_residual: involution_residual(&grid),
                detf_consistency: detf_consistency(&grid),
                max_speed: speed,
            })?;
            if keep_fields {
                out.snapshots.push(grid_snapshot(&grid, sys.field_names(), s));
            }
        }
    }
    out.grid = grid;
    Ok(out)
}

fn evolution_report<const N: usize>(report: &mut Report, ev: &Evolution<N>, config: &RunConfig, lambda: f64) {
    series_report(report, &ev.series);
    energy_gates(report, &ev.series, config, lambda);
    report.note("dt", ev.dt);
    report.note("steps", ev.steps as f64);
    report.note("field_scale", ev.field_scale);
    report.summary("max_cfl", Summary::scalar(ev.max_cfl));
    report.summary("max_involution_residual", Summary::scalar(ev.max_involution));
    report.summary("max_detf_consistency", Summary::scalar(ev.max_detf_consistency));
    report.summary("max_conservation_drift", Summary::scalar(ev.max_conservation_drift));
    report.gates.push(Gate::at_most("cfl_respected", ev.max_cfl, 1.0));
    report.gates.push(Gate::at_most("conservation", ev.max_conservation_drift, CONSERVATION_TOL));
    if config.step.scheme == Scheme::Central {
        report.gates.push(Gate::at_most("involution_preserved", ev.max_involution, INVOLUTION_TOL * ev.field_scale));
    }
}

pub fn riemann_grid(spec: &ScenarioSpec, nx: usize) -> Result<Grid2D<7>> {
    let la = spec.length.unwrap_or(2.0);
    let ny = spec.ny;
    let lb = la * ny as f64 / nx as f64;
    let jump = spec.jump;
    Grid2D::from_fn(nx, ny, la, lb, |a, _| {
        let ux = if a < 0.5 * la { -jump } else { jump };
        StateElasto7 { u: Vec2::new(ux, 0.0), ..StateElasto7::rest() }.to_array()
    })
}

pub fn run_riemann(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<DiagnosticsSeries> {
    let params = config.material.params()?;
    let sys = Elasto7::new(params.elastic);
    let grid = riemann_grid(spec, spec.nx)?;
    let hooks = Hooks { min_dissipation: None, probe: None };
    let ev = evolve_2d(&sys, grid, config, &hooks, true)?;
    report.note("front_speed_closed_form", sys.max_speed(&StateElasto7::rest().to_array(), Vec2::new(1.0, 0.0))?);
    evolution_report(report, &ev, config, f64::INFINITY);
    report.tables.extend(ev.snapshots);
    Ok(ev.series)
}

pub fn gauss_grid(spec: &ScenarioSpec, n: usize) -> Result<Grid2D<10>> {
    let l = spec.length.unwrap_or(1.0);
    let (amp, w) = (spec.amplitude, spec.width * l);
    Grid2D::from_fn(n, n, l, l, |a, b| {
        let r2 = (a - 0.5 * l).powi(2) + (b - 0.5 * l).powi(2);
        let g = amp * (-r2 / (2.0 * w * w)).exp();
        StateUcm10 { u: Vec2::new(g, 0.5 * g), ..StateUcm10::rest() }.to_array()
    })
}

/// Probe cell of the Gaussian pulse: off-centre, where the velocity gradient
/// is non-zero.
pub fn gauss_probe_cell(n: usize) -> (usize, usize) {
    (n / 2 + n / 8, n / 2)
}

pub fn evolve_gauss(
    spec: &ScenarioSpec,
    config: &RunConfig,
    n: usize,
    keep_fields: bool,
) -> Result<(Evolution<10>, MaxwellParams)> {
    let params = config.material.params()?;
    let sys = Ucm10::new(params);
    let grid = gauss_grid(spec, n)?;
    let (pi, pj) = gauss_probe_cell(n);
    let cell = grid.index(pi, pj);
    let probe = move |g: &Grid2D<10>| material_point_sample(g, cell, &params);
    let min_d = |g: &Grid2D<10>| min_cell_dissipation(g);
    let hooks = Hooks { min_dissipation: Some(&min_d), probe: Some(&probe) };
    Ok((evolve_2d(&sys, grid, config, &hooks, keep_fields)?, params))
}

pub fn run_gauss(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<DiagnosticsSeries> {
    let (ev, params) = evolve_gauss(spec, config, spec.n, true)?;
    if ev.probe.len() >= 3 {
        report.summary("ucm_residual", Summary::scalar(ucm_residual(&ev.probe, ev.dt, &params)?));
    }
    evolution_report(report, &ev, config, params.lambda());
    report.tables.extend(ev.snapshots);
    Ok(ev.series)
}

pub fn run_evolution(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<DiagnosticsSeries> {
    match spec.id {
        ScenarioId::Shear1dMode => run_shear1d(spec, config, report),
        ScenarioId::StokesFirst => run_stokes(spec, config, report),
        ScenarioId::Riemann1dElasto => run_riemann(spec, config, report),
        ScenarioId::Gauss2dUcm => run_gauss(spec, config, report),
        other => Err(Error::validation("scenario", format!("{} is not a time-dependent scenario", other.name()))),
    }
}
