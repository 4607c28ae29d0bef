//! Symmetry audits, refinement studies and relaxation-time sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{RunConfig, ScenarioId, ScenarioSpec};
use super::output::{Gate, Summary, Table};
use super::runs::{
    evolve_2d, evolve_gauss, evolve_shear, rel_l2, riemann_grid, shear_mode_error, shear_mode_grid, Hooks,
    ENERGY_INCREASE_TOL, INVOLUTION_TOL,
};
use super::Report;
use crate::error::{Error, Result};
use crate::relaxation::ucm_residual;
use crate::solver::{heat_mode, undamped_mode, Grid2D, Scheme, StepAudit};
use crate::symmetrizer::{audit, SampleRanges};
use crate::system::Elasto7;
use crate::tensor::{a_from_y, a_from_y_closed_form, SymTensor2, Tensor2};

pub const DEFECT_TOL: f64 = 1e-7;
pub const ABLATED_DEFECT_MIN: f64 = 1e-3;
pub const SPEED_TOL: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-12;

/// Largest relative gaps of the closed-form `A(Y)` from `√(det Y)·Y^(−1/2)`
/// and from `Y^(−1/2)` over random SPD `Y`.
pub fn closed_form_check(samples: usize, seed: u64, ranges: &SampleRanges) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (ranges.y_eig.0.ln(), ranges.y_eig.1.ln());
    let (mut scaled, mut plain) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let l0 = rng.random_range(lo..=hi).exp();
        let l1 = rng.random_range(lo..=hi).exp();
        let y = SymTensor2::from_spectrum(l0, l1, &Tensor2::rotation(rng.random_range(0.0..std::f64::consts::PI)));
        let closed = a_from_y_closed_form(&y)?;
        let inv_sqrt = a_from_y(&y)?;
        let adj = inv_sqrt * y.det().sqrt();
        scaled = scaled.max((closed - adj).max_abs() / adj.max_abs());
        plain = plain.max((closed - inv_sqrt).max_abs() / inv_sqrt.max_abs());
    }
    Ok((scaled, plain))
}

pub fn run_audit(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<()> {
    let ranges = SampleRanges::default();
    let s = audit(config.system, spec.samples, spec.directions, config.seed, &ranges)?;
    let (scaled, plain) = closed_form_check(spec.samples, config.seed, &ranges)?;
    let mut t = Table::new(
        "audit",
        &[
            "samples",
            "directions",
            "max_defect",
            "min_hessian_eig",
            "max_ablated_defect",
            "max_speed_error",
            "closed_form_error",
            "closed_form_vs_inv_sqrt",
        ],
    );
    t.push(vec![
        s.samples as f64,
        s.directions as f64,
        s.max_defect,
        s.min_hessian_eig,
        s.max_ablated_defect,
        s.max_speed_error,
        scaled,
        plain,
    ]);
    report.tables.push(t);
    for (k, v) in [
        ("max_defect", s.max_defect),
        ("min_hessian_eig", s.min_hessian_eig),
        ("max_ablated_defect", s.max_ablated_defect),
        ("max_speed_error", s.max_speed_error),
        ("closed_form_error", scaled),
        ("closed_form_vs_inv_sqrt", plain),
    ] {
        report.summary(k, Summary::scalar(v));
    }
    report.note_str("closed_form_factor", "sqrt(det Y)");
    report.gates.push(Gate::at_most("symmetry_defect", s.max_defect, DEFECT_TOL));
    report.gates.push(Gate::above("hessian_positive", s.min_hessian_eig, 0.0));
    report.gates.push(Gate::above("ablation_detected", s.max_ablated_defect, ABLATED_DEFECT_MIN));
    report.gates.push(Gate::at_most("speed_closed_form", s.max_speed_error, SPEED_TOL));
    report.gates.push(Gate::at_most("closed_form_a_of_y", scaled, CLOSED_FORM_TOL));
    Ok(())
}

/// One level of a refinement study. Quantities not defined for the target
/// are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    pub involution: f64,
    pub detf: f64,
    pub ucm_residual: f64,
}

/// Observed orders `log₂(eₗ₋₁/eₗ)` between successive levels.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn block_error<const N: usize>(coarse: &Grid2D<N>, fine: &Grid2D<N>) -> Result<f64> {
    if !fine.nx.is_multiple_of(coarse.nx) || !fine.ny.is_multiple_of(coarse.ny) {
        return Err(Error::validation("n", "reference grid must refine every level"));
    }
    let (rx, ry) = (fine.nx / coarse.nx, fine.ny / coarse.ny);
    let w = 1.0 / (rx * ry) as f64;
    let mut sum = 0.0;
    for j in 0..coarse.ny {
        for i in 0..coarse.nx {
            let mut avg = [0.0; N];
            for jj in 0..ry {
                for ii in 0..rx {
                    let c = &fine.cells[fine.index(i * rx + ii, j * ry + jj)];
                    for k in 0..N {
                        avg[k] += w * c[k];
                    }
                }
            }
            let c = &coarse.cells[coarse.index(i, j)];
            sum += (0..N).map(|k| (c[k] - avg[k]).powi(2)).sum::<f64>();
        }
    }
    Ok((sum * coarse.cell_area()).sqrt())
}

/// Runs the refined scenario at `levels` resolutions, doubling from `spec.n`. Without
/// an analytic solution the error is measured against the same scheme at 4×
/// the finest resolution when `reference` is set, and left NaN otherwise.
pub fn refine(spec: &ScenarioSpec, config: &RunConfig, levels: usize, reference: bool) -> Result<Vec<Level>> {
    if levels < 2 {
        return Err(Error::validation("levels", "a convergence study needs at least 2 levels"));
    }
    let ns: Vec<usize> = (0..levels).map(|l| spec.n << l).collect();
    let finest = *ns.last().expect("levels >= 2");
    let nan = f64::NAN;
    match spec.refined() {
        ScenarioId::Shear1dMode => {
            let params = config.material.params()?;
            ns.iter()
                .map(|&n| {
                    let (grid, k) = shear_mode_grid(spec, n)?;
                    let h = grid.h;
                    let run = evolve_shear(&params, grid, config, false)?;
                    let (abs, _) = shear_mode_error(&run, k, spec.amplitude, config.t_end);
                    Ok(Level { n, h, error: abs, involution: nan, detf: nan, ucm_residual: nan })
                })
                .collect()
        }
        ScenarioId::Gauss2dUcm => {
            let reference = if reference { Some(evolve_gauss(spec, config, 4 * finest, false)?.0.grid) } else { None };
            ns.iter()
                .map(|&n| {
                    let (ev, params) = evolve_gauss(spec, config, n, false)?;
                    let error = match &reference {
                        Some(r) => block_error(&ev.grid, r)?,
                        None => nan,
                    };
                    Ok(Level {
                        n,
                        h: ev.grid.ha,
                        error,
                        involution: ev.max_involution,
                        detf: ev.max_detf_consistency,
                        ucm_residual: ucm_residual(&ev.probe, ev.dt, &params)?,
                    })
                })
                .collect()
        }
        ScenarioId::Riemann1dElasto => {
            let sys = Elasto7::new(config.material.params()?.elastic);
            let hooks = Hooks { min_dissipation: None, probe: None };
            let run = |n: usize| evolve_2d(&sys, riemann_grid(spec, n)?, config, &hooks, false);
            let reference = if reference { Some(run(4 * finest)?.grid) } else { None };
            ns.iter()
                .map(|&n| {
                    let ev = run(n)?;
                    let error = match &reference {
                        Some(r) => block_error(&ev.grid, r)?,
                        None => nan,
                    };
                    Ok(Level {
                        n,
                        h: ev.grid.ha,
                        error,
                        involution: nan,
                        detf: ev.max_detf_consistency,
                        ucm_residual: nan,
                    })
                })
                .collect()
        }
        other => Err(Error::validation("target", format!("{} cannot be refined", other.name()))),
    }
}

/// Default order window of a refinement study.
pub fn order_window(target: ScenarioId, scheme: Scheme) -> (f64, f64) {
    match (target, scheme) {
        (ScenarioId::Riemann1dElasto, _) => (0.25, f64::INFINITY),
        (_, Scheme::Central) => (1.8, 2.2),
        (_, Scheme::Rusanov) => (0.8, 1.2),
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

pub fn run_converge(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<()> {
    let levels = refine(spec, config, spec.levels, true)?;
    let target = spec.refined();
    let is_2d = target != ScenarioId::Shear1dMode;
    let is_gauss = target == ScenarioId::Gauss2dUcm;
    let col = |f: fn(&Level) -> f64| levels.iter().map(f).collect::<Vec<_>>();
    let errors = col(|l| l.error);
    let orders = observed_orders(&errors);
    let mut header = vec!["n", "h", "error", "order"];
    let mut extra: Vec<(&str, Vec<f64>)> = Vec::new();
    if is_2d {
        extra.push(("detf_consistency", col(|l| l.detf)));
    }
    if is_gauss {
        extra.push(("involution_residual", col(|l| l.involution)));
        extra.push(("ucm_residual", col(|l| l.ucm_residual)));
    }
    let extra_orders: Vec<Vec<f64>> = extra.iter().map(|(_, v)| observed_orders(v)).collect();
    let names: Vec<String> = extra.iter().flat_map(|(n, _)| [n.to_string(), format!("{n}_order")]).collect();
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new("convergence", &header);
    for (i, l) in levels.iter().enumerate() {
        let ord = |v: &[f64]| if i == 0 { f64::NAN } else { v[i - 1] };
        let mut row = vec![l.n as f64, l.h, l.error, ord(&orders)];
        for ((_, v), o) in extra.iter().zip(&extra_orders) {
            row.push(v[i]);
            row.push(ord(o));
        }
        t.push(row);
    }
    report.tables.push(t);

    let (lo, hi) = match spec.min_order {
        Some(m) => (m, f64::INFINITY),
        None => order_window(target, config.step.scheme),
    };
    let (omin, omax) = min_max(&orders);
    report.summary("order", Summary::of(&orders));
    report.summary("error", Summary::of(&errors));
    report.gates.push(Gate::at_least("min_order", omin, lo));
    if hi.is_finite() {
        report.gates.push(Gate::at_most("max_order", omax, hi));
    }
    for ((name, v), o) in extra.iter().zip(&extra_orders) {
        report.summary(name, Summary::of(v));
        report.summary(&format!("{name}_order"), Summary::of(o));
    }
    if is_gauss {
        let ucm_orders = &extra_orders[2];
        report.gates.push(Gate::at_least("ucm_residual_order", min_max(ucm_orders).0, 1.0));
        match config.step.scheme {
            Scheme::Rusanov => {
                report.gates.push(Gate::at_least("involution_order", min_max(&extra_orders[1]).0, 1.0));
                report.gates.push(Gate::at_least("detf_order", min_max(&extra_orders[0]).0, 1.0));
            }
            Scheme::Central => {
                let worst = min_max(&extra[1].1).1;
                report.gates.push(Gate::at_most("involution_preserved", worst, INVOLUTION_TOL));
                report.gates.push(Gate::at_least("detf_order", min_max(&extra_orders[0]).0, 1.8));
            }
        }
    }
    Ok(())
}

/// One row of a relaxation-time sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub mu_dot: f64,
    pub g: f64,
    pub dt: f64,
    pub steps: usize,
    pub dist_elastic: f64,
    pub dist_newtonian: f64,
    pub max_energy_increase: f64,
}

/// Shear-mode runs over `spec.lambdas` (sorted ascending), with relative L²
/// distances at `t_end` to the undamped-wave and heat-equation references.
pub fn sweep(spec: &ScenarioSpec, config: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut lambdas = spec.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas
        .into_iter()
        .map(|lambda| {
            let params = config.material.params_for_lambda(lambda)?;
            let (grid, k) = shear_mode_grid(spec, spec.n)?;
            let run = evolve_shear(&params, grid, config, false)?;
            let g = &run.grid;
            let t = config.t_end;
            let u: Vec<f64> = g.cells.iter().map(|c| c[0]).collect();
            let y = |i: usize| g.center(i);
            let elastic: Vec<f64> = (0..g.n).map(|i| undamped_mode(t, y(i), k, run.params.g, spec.amplitude)).collect();
            let newtonian: Vec<f64> =
                (0..g.n).map(|i| heat_mode(t, y(i), k, params.mu_dot(), spec.amplitude)).collect();
            Ok(SweepRow {
                lambda,
                mu_dot: params.mu_dot(),
                g: run.params.g,
                dt: run.dt,
                steps: run.steps,
                dist_elastic: rel_l2(&u, &elastic),
                dist_newtonian: rel_l2(&u, &newtonian),
                max_energy_increase: run
                    .series
                    .steps
                    .iter()
                    .map(StepAudit::relative_change)
                    .fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}

pub fn run_sweep(spec: &ScenarioSpec, config: &RunConfig, report: &mut Report) -> Result<()> {
    let rows = sweep(spec, config)?;
    let mut t = Table::new(
        "sweep",
        &["lambda", "mu_dot", "g", "dt", "steps", "dist_elastic", "dist_newtonian", "max_energy_increase"],
    );
    for r in &rows {
        t.push(vec![
            r.lambda,
            r.mu_dot,
            r.g,
            r.dt,
            r.steps as f64,
            r.dist_elastic,
            r.dist_newtonian,
            r.max_energy_increase,
        ]);
    }
    report.tables.push(t);
    let el: Vec<f64> = rows.iter().map(|r| r.dist_elastic).collect();
    let nw: Vec<f64> = rows.iter().map(|r| r.dist_newtonian).collect();
    report.summary("dist_elastic", Summary::of(&el));
    report.summary("dist_newtonian", Summary::of(&nw));
    let elastic_trend = el.windows(2).all(|w| w[1] <= w[0]);
    let newtonian_trend = nw.windows(2).all(|w| w[1] >= w[0]);
    report.gates.push(Gate::flag("elastic_trend_monotone", elastic_trend));
    report.gates.push(Gate::flag("newtonian_trend_monotone", newtonian_trend));
    let (first, last) = (rows.first().expect("non-empty"), rows.last().expect("non-empty"));
    report.gates.push(Gate::below("large_lambda_nearer_elastic", last.dist_elastic, last.dist_newtonian));
    report.gates.push(Gate::below("small_lambda_newtonian", first.dist_newtonian, 0.02));
    let finite = rows.iter().all(|r| r.dist_elastic.is_finite() && r.dist_newtonian.is_finite());
    report.gates.push(Gate::flag("all_runs_finite", finite));
    let worst = rows.iter().map(|r| r.max_energy_increase).fold(f64::NEG_INFINITY, f64::max);
    report.gates.push(Gate::at_most("energy_non_increasing", worst, ENERGY_INCREASE_TOL));
    Ok(())
}
