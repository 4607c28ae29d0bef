//! Finite-volume integration on fixed material grids: the 2D Lagrangian
//! systems, the 1D damped shear wave, relaxation splitting and diagnostics.

mod diagnostics;
mod fv2d;
mod grid;
mod shear;

pub use diagnostics::{
    conserved_totals, detf_consistency, involution_residual, material_point_sample, min_cell_dissipation,
    total_dissipation_rate, total_energy, total_entropy, DiagnosticsRecord, DiagnosticsSeries, StepAudit,
};
pub use fv2d::{cfl_dt, hyperbolic_rhs, max_wave_speed, relax_grid, rusanov_flux, step};
pub use grid::{Boundary, Grid1D, Grid2D};
pub use shear::{
    analytic_shear_mode, analytic_shear_tau, heat_mode, shear1d_cfl_dt, shear1d_step, shear_energy, shear_mode,
    stokes_erfc_profile, undamped_mode, ShearParams,
};

use crate::error::{Error, Result};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rusanov,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    Lie,
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Ssprk2,
    Ssprk3,
    Rk4,
}

macro_rules! named_enum {
    ($t:ty, $field:literal, $($name:literal => $v:expr),+) => {
        impl $t {
            pub fn name(self) -> &'static str {
                $(if self == $v { return $name; })+
                unreachable!()
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($v),)+
                    _ => Err(Error::validation(
                        $field,
                        format!("unknown value `{s}`, expected one of: {}", [$($name),+].join(", ")),
                    )),
                }
            }
        }
    };
}

named_enum!(Scheme, "scheme", "rusanov" => Scheme::Rusanov, "central" => Scheme::Central);
named_enum!(Splitting, "splitting", "lie" => Splitting::Lie, "strang" => Splitting::Strang);
named_enum!(Integrator, "integrator",
    "euler" => Integrator::Euler,
    "ssprk2" => Integrator::Ssprk2,
    "ssprk3" => Integrator::Ssprk3,
    "rk4" => Integrator::Rk4);

/// Spatial scheme, splitting and time integrator of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOptions {
    pub scheme: Scheme,
    pub splitting: Splitting,
    pub integrator: Integrator,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { scheme: Scheme::Rusanov, splitting: Splitting::Strang, integrator: Integrator::Ssprk2 }
    }
}

fn axpy<const N: usize>(out: &mut [[f64; N]], a: f64, x: &[[f64; N]]) {
    for (o, xi) in out.iter_mut().zip(x) {
        for k in 0..N {
            o[k] += a * xi[k];
        }
    }
}

fn combine<const N: usize>(wa: f64, a: &[[f64; N]], wb: f64, b: &[[f64; N]]) -> Vec<[f64; N]> {
    a.iter().zip(b).map(|(x, y)| std::array::from_fn(|k| wa * x[k] + wb * y[k])).collect()
}

/// Advances `u` by `dt` under `du/dt = rhs(u)` with the chosen explicit
/// Runge–Kutta method.
pub fn integrate<const N: usize>(
    u: &mut Vec<[f64; N]>,
    dt: f64,
    integrator: Integrator,
    rhs: &dyn Fn(&[[f64; N]]) -> Result<Vec<[f64; N]>>,
) -> Result<()> {
    match integrator {
        Integrator::Euler => {
            let k1 = rhs(u)?;
            axpy(u, dt, &k1);
        }
        Integrator::Ssprk2 => {
            let mut u1 = u.clone();
            axpy(&mut u1, dt, &rhs(u)?);
            let mut u2 = u1.clone();
            axpy(&mut u2, dt, &rhs(&u1)?);
            *u = combine(0.5, u, 0.5, &u2);
        }
        Integrator::Ssprk3 => {
            let mut u1 = u.clone();
            axpy(&mut u1, dt, &rhs(u)?);
            let mut t = u1.clone();
            axpy(&mut t, dt, &rhs(&u1)?);
            let u2 = combine(0.75, u, 0.25, &t);
            let mut t = u2.clone();
            axpy(&mut t, dt, &rhs(&u2)?);
            *u = combine(1.0 / 3.0, u, 2.0 / 3.0, &t);
        }
        Integrator::Rk4 => {
            let k1 = rhs(u)?;
            let mut s = u.clone();
            axpy(&mut s, 0.5 * dt, &k1);
            let k2 = rhs(&s)?;
            let mut s = u.clone();
            axpy(&mut s, 0.5 * dt, &k2);
            let k3 = rhs(&s)?;
            let mut s = u.clone();
            axpy(&mut s, dt, &k3);
            let k4 = rhs(&s)?;
            for i in 0..u.len() {
                for k in 0..N {
                    u[i][k] += dt / 6.0 * (k1[i][k] + 2.0 * k2[i][k] + 2.0 * k3[i][k] + k4[i][k]);
                }
            }
        }
    }
    Ok(())
}
