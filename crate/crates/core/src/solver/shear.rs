//! The 1D damped shear wave `∂ₜu = ∂_yτ`, `λ∂ₜτ + τ = μ̇ ∂_yu`, written as
//! `∂ₜ(u, τ) + ∂_y(−τ, −G u) = (0, −τ/λ)` with `G = μ̇/λ = c₁²`.

use super::grid::{Boundary, Grid1D};
use super::{integrate, Scheme, Splitting, StepOptions};
use crate::error::Result;
use crate::material::MaxwellParams;

/// Relaxation time and elastic modulus of the shear system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearParams {
    pub lambda: f64,
    /// `G = μ̇/λ`; the wave speed is `√G`.
    pub g: f64,
}

impl From<&MaxwellParams> for ShearParams {
    fn from(p: &MaxwellParams) -> Self {
        Self { lambda: p.lambda(), g: p.elastic.c1_sq }
    }
}

impl ShearParams {
    pub fn speed(&self) -> f64 {
        self.g.sqrt()
    }

    pub fn mu_dot(&self) -> f64 {
        self.lambda * self.g
    }
}

fn flux(u: &[f64; 2], g: f64) -> [f64; 2] {
    [-u[1], -g * u[0]]
}

fn ghosts(grid: &Grid1D<2>, cells: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let n = cells.len();
    match grid.boundary {
        Boundary::Periodic => (cells[n - 1], cells[0]),
        Boundary::DirichletVelocity { wall } => {
            ([2.0 * wall - cells[0][0], cells[0][1]], [-cells[n - 1][0], cells[n - 1][1]])
        }
    }
}

fn rhs(grid: &Grid1D<2>, cells: &[[f64; 2]], g: f64, scheme: Scheme) -> Vec<[f64; 2]> {
    let n = cells.len();
    let (left, right) = ghosts(grid, cells);
    let at = |i: isize| -> [f64; 2] {
        if i < 0 {
            left
        } else if i as usize >= n {
            right
        } else {
            cells[i as usize]
        }
    };
    let h = grid.h;
    let s = g.sqrt();
    (0..n as isize)
        .map(|i| match scheme {
            Scheme::Central => {
                let (fm, fp) = (flux(&at(i - 1), g), flux(&at(i + 1), g));
                [-(fp[0] - fm[0]) / (2.0 * h), -(fp[1] - fm[1]) / (2.0 * h)]
            }
            Scheme::Rusanov => {
                let iface = |l: [f64; 2], r: [f64; 2]| -> [f64; 2] {
                    let (fl, fr) = (flux(&l, g), flux(&r, g));
                    [0.5 * (fl[0] + fr[0]) - 0.5 * s * (r[0] - l[0]), 0.5 * (fl[1] + fr[1]) - 0.5 * s * (r[1] - l[1])]
                };
                let e = iface(at(i), at(i + 1));
                let w = iface(at(i - 1), at(i));
                [-(e[0] - w[0]) / h, -(e[1] - w[1]) / h]
            }
        })
        .collect()
}

fn decay(cells: &mut [[f64; 2]], dt: f64, lambda: f64) {
    if lambda.is_infinite() {
        return;
    }
    let f = (-dt / lambda).exp();
    for c in cells {
        c[1] *= f;
    }
}

/// `cfl · h / √G`.
pub fn shear1d_cfl_dt(grid: &Grid1D<2>, cfl: f64, p: &ShearParams) -> f64 {
    cfl * grid.h / p.speed()
}

/// One split step: acoustic substep (central or exact upwind), then the
/// exact decay `τ ← τ e^(−dt/λ)` (Strang: halves around the acoustic step).
pub fn shear1d_step(grid: &mut Grid1D<2>, dt: f64, p: &ShearParams, opts: StepOptions) -> Result<()> {
    let acoustic = |grid: &mut Grid1D<2>| -> Result<()> {
        let mut cells = std::mem::take(&mut grid.cells);
        let g: &Grid1D<2> = grid;
        let f = |u: &[[f64; 2]]| Ok(rhs(g, u, p.g, opts.scheme));
        let out = integrate(&mut cells, dt, opts.integrator, &f);
        grid.cells = cells;
        out
    };
    match opts.splitting {
        Splitting::Lie => {
            acoustic(grid)?;
            decay(&mut grid.cells, dt, p.lambda);
        }
        Splitting::Strang => {
            decay(&mut grid.cells, 0.5 * dt, p.lambda);
            acoustic(grid)?;
            decay(&mut grid.cells, 0.5 * dt, p.lambda);
        }
    }
    Ok(())
}

/// `∫ (u²/2 + τ²/(2G)) dy`, summed in cell order.
pub fn shear_energy(grid: &Grid1D<2>, p: &ShearParams) -> f64 {
    grid.cells.iter().map(|c| 0.5 * c[0] * c[0] + 0.5 * c[1] * c[1] / p.g).sum::<f64>() * grid.h
}

/// Single-mode solution `(u, τ)` of the damped wave with `u(0) = u₀ sin(ky)`
/// and `τ(0) = 0`, parametrized by `G = μ̇/λ` so that `λ = ∞` is the
/// undamped wave.
pub fn shear_mode(t: f64, y: f64, k: f64, lambda: f64, g: f64, u0: f64) -> (f64, f64) {
    let half = 0.5 / lambda;
    let disc = g * k * k - half * half;
    let (time_u, time_tau) = if disc > 0.0 {
        let w = disc.sqrt();
        let env = (-half * t).exp();
        let (s, c) = (w * t).sin_cos();
        (env * (c + half * s / w), env * s * g * k / w)
    } else if disc < 0.0 {
        // real roots r₁ > r₂, with r₁ computed without cancellation
        let kappa = (-disc).sqrt();
        let r2 = -(half + kappa);
        let r1 = -g * k * k / (half + kappa);
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        let d = r1 - r2;
        ((r1 * e2 - r2 * e1) / d, r1 * r2 / d * (e1 - e2) / k)
    } else {
        let env = (-half * t).exp();
        (env * (1.0 + half * t), env * t * g * k)
    };
    (u0 * time_u * (k * y).sin(), u0 * time_tau * (k * y).cos())
}

/// Velocity of the single shear mode, `u(t, y)`.
pub fn analytic_shear_mode(t: f64, y: f64, k: f64, lambda: f64, mu_dot: f64, u0: f64) -> f64 {
    shear_mode(t, y, k, lambda, mu_dot / lambda, u0).0
}

/// Shear stress of the single shear mode, `τ(t, y)`.
pub fn analytic_shear_tau(t: f64, y: f64, k: f64, lambda: f64, mu_dot: f64, u0: f64) -> f64 {
    shear_mode(t, y, k, lambda, mu_dot / lambda, u0).1
}

/// Heat-equation mode `u₀ e^(−μ̇k²t) sin(ky)`, the `λ → 0` limit.
pub fn heat_mode(t: f64, y: f64, k: f64, mu_dot: f64, u0: f64) -> f64 {
    u0 * (-mu_dot * k * k * t).exp() * (k * y).sin()
}

/// Undamped wave mode `u₀ cos(√G k t) sin(ky)`, the `λ → ∞` limit.
pub fn undamped_mode(t: f64, y: f64, k: f64, g: f64, u0: f64) -> f64 {
    u0 * (g.sqrt() * k * t).cos() * (k * y).sin()
}

/// Newtonian Stokes first problem, `U₀ erfc(y / (2√(μ̇t)))`.
pub fn stokes_erfc_profile(y: f64, t: f64, mu_dot: f64, wall: f64) -> f64 {
    if t <= 0.0 {
        return if y == 0.0 { wall } else { 0.0 };
    }
    wall * libm::erfc(y / (2.0 * (mu_dot * t).sqrt()))
}
