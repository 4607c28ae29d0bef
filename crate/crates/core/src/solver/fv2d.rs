use rayon::prelude::*;

use super::grid::Grid2D;
use super::{integrate, Scheme, Splitting, StepOptions};
use crate::error::{Error, Result};
use crate::system::{FluxPair, LagrangianSystem};
use crate::tensor::Vec2;

const AXIS_A: Vec2 = Vec2::new(1.0, 0.0);
const AXIS_B: Vec2 = Vec2::new(0.0, 1.0);

fn at_cell(cell: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::AdmissibilityLoss { .. } => e,
        other => Error::AdmissibilityLoss { cell, reason: other.to_string() },
    }
}

/// First failing cell in index order, so the reported cell does not depend
/// on the worker count.
fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Local Lax–Friedrichs flux `½(G_ν(L) + G_ν(R)) − ½ s (R − L)` with `s` the
/// larger closed-form speed of the two states. The dissipation acts on the
/// transported components only.
pub fn rusanov_flux<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    ul: &[f64; N],
    ur: &[f64; N],
    nu: Vec2,
) -> Result<[f64; N]> {
    let gl = sys.flux(ul)?.directional(nu);
    let gr = sys.flux(ur)?.directional(nu);
    let s = sys.max_speed(ul, nu)?.max(sys.max_speed(ur, nu)?);
    Ok(interface(&gl, &gr, ul, ur, s, &sys.transported()))
}

fn interface<const N: usize>(
    gl: &[f64; N],
    gr: &[f64; N],
    ul: &[f64; N],
    ur: &[f64; N],
    s: f64,
    mask: &[bool; N],
) -> [f64; N] {
    std::array::from_fn(|k| {
        let visc = if mask[k] { s * (ur[k] - ul[k]) } else { 0.0 };
        0.5 * (gl[k] + gr[k]) - 0.5 * visc
    })
}

/// Largest closed-form characteristic speed over cells and both axes.
pub fn max_wave_speed<S: LagrangianSystem<N>, const N: usize>(sys: &S, grid: &Grid2D<N>) -> Result<f64> {
    let speeds = first_error(
        grid.cells
            .par_iter()
            .enumerate()
            .map(|(i, u)| {
                let a = sys.max_speed(u, AXIS_A).map_err(at_cell(i))?;
                let b = sys.max_speed(u, AXIS_B).map_err(at_cell(i))?;
                Ok(a.max(b))
            })
            .collect(),
    )?;
    Ok(speeds.into_iter().fold(0.0, f64::max))
}

/// `cfl · min(ha, hb) / max |σ|`.
pub fn cfl_dt<S: LagrangianSystem<N>, const N: usize>(sys: &S, grid: &Grid2D<N>, cfl: f64) -> Result<f64> {
    let s = max_wave_speed(sys, grid)?;
    let h = grid.ha.min(grid.hb);
    if s == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(cfl * h / s)
}

/// Semi-discrete right-hand side `dU/dt` of the hyperbolic part.
pub fn hyperbolic_rhs<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    grid: &Grid2D<N>,
    cells: &[[f64; N]],
    scheme: Scheme,
) -> Result<Vec<[f64; N]>> {
    let fluxes: Vec<FluxPair<N>> = first_error(
        cells
            .par_iter()
            .enumerate()
            .map(|(i, u)| {
                sys.check_admissible(u).map_err(|reason| Error::AdmissibilityLoss { cell: i, reason })?;
                sys.flux(u).map_err(at_cell(i))
            })
            .collect(),
    )?;
    let (ha, hb) = (grid.ha, grid.hb);
    match scheme {
        Scheme::Central => Ok((0..cells.len())
            .into_par_iter()
            .map(|i| {
                let [am, ap, bm, bp] = grid.neighbours(i);
                std::array::from_fn(|k| {
                    -(fluxes[ap].ga[k] - fluxes[am].ga[k]) / (2.0 * ha)
                        - (fluxes[bp].gb[k] - fluxes[bm].gb[k]) / (2.0 * hb)
                })
            })
            .collect()),
        Scheme::Rusanov => {
            let speeds: Vec<(f64, f64)> = first_error(
                cells
                    .par_iter()
                    .enumerate()
                    .map(|(i, u)| {
                        Ok((
                            sys.max_speed(u, AXIS_A).map_err(at_cell(i))?,
                            sys.max_speed(u, AXIS_B).map_err(at_cell(i))?,
                        ))
                    })
                    .collect(),
            )?;
            let mask = sys.transported();
            let fa = |l: usize, r: usize| {
                interface(&fluxes[l].ga, &fluxes[r].ga, &cells[l], &cells[r], speeds[l].0.max(speeds[r].0), &mask)
            };
            let fb = |l: usize, r: usize| {
                interface(&fluxes[l].gb, &fluxes[r].gb, &cells[l], &cells[r], speeds[l].1.max(speeds[r].1), &mask)
            };
            Ok((0..cells.len())
                .into_par_iter()
                .map(|i| {
                    let [am, ap, bm, bp] = grid.neighbours(i);
                    let (ea, wa) = (fa(i, ap), fa(am, i));
                    let (nb, sb) = (fb(i, bp), fb(bm, i));
                    std::array::from_fn(|k| -(ea[k] - wa[k]) / ha - (nb[k] - sb[k]) / hb)
                })
                .collect())
        }
    }
}

/// Exact relaxation of every cell over `dt` with `F` frozen.
pub fn relax_grid<S: LagrangianSystem<N>, const N: usize>(sys: &S, cells: &mut [[f64; N]], dt: f64) -> Result<()> {
    first_error(cells.par_iter_mut().enumerate().map(|(i, u)| sys.relax(u, dt).map_err(at_cell(i))).collect())?;
    Ok(())
}

fn check_grid<S: LagrangianSystem<N>, const N: usize>(sys: &S, cells: &[[f64; N]]) -> Result<()> {
    for (i, u) in cells.iter().enumerate() {
        sys.check_admissible(u).map_err(|reason| Error::AdmissibilityLoss { cell: i, reason })?;
    }
    Ok(())
}

/// One split step: Lie (hyperbolic then relaxation) or Strang (half
/// relaxation, hyperbolic, half relaxation).
pub fn step<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    grid: &mut Grid2D<N>,
    dt: f64,
    opts: StepOptions,
) -> Result<()> {
    let hyperbolic = |grid: &mut Grid2D<N>| -> Result<()> {
        let mut cells = std::mem::take(&mut grid.cells);
        let g: &Grid2D<N> = grid;
        let rhs = |u: &[[f64; N]]| hyperbolic_rhs(sys, g, u, opts.scheme);
        let out = integrate(&mut cells, dt, opts.integrator, &rhs);
        grid.cells = cells;
        out
    };
    match opts.splitting {
        Splitting::Lie => {
            hyperbolic(grid)?;
            relax_grid(sys, &mut grid.cells, dt)?;
        }
        Splitting::Strang => {
            relax_grid(sys, &mut grid.cells, 0.5 * dt)?;
            hyperbolic(grid)?;
            relax_grid(sys, &mut grid.cells, 0.5 * dt)?;
        }
    }
    check_grid(sys, &grid.cells)
}
