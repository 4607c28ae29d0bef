//! Exact relaxation of `A`, conformation diagnostics, the upper-convected
//! identity residual and the discrete energy-dissipation balance.

use crate::error::{Error, Result};
use crate::material::{energy_ucm, MaxwellParams};
use crate::tensor::{default_tol, inverse2, spd_eigendecomp, Frobenius, SymTensor2, Tensor2};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::NonpositiveRelaxationTime(lambda))
    }
}

fn min_eig(s: &SymTensor2) -> f64 {
    spd_eigendecomp(s).0[1]
}

fn check_spd(s: &SymTensor2, tol: f64) -> Result<()> {
    let l = min_eig(s);
    if l > tol && s.is_finite() {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite { min_eig: l, tol })
    }
}

/// Conformation tensor `c = F A Fᵀ` with its dissipation and extra stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformationSample {
    pub c: SymTensor2,
    pub dissipation: f64,
    pub tau: SymTensor2,
}

impl ConformationSample {
    pub fn new(f: &Tensor2, a: &SymTensor2, rho: f64, c1_sq: f64) -> Result<Self> {
        let c = f.congruence(a);
        let dissipation = dissipation(&c, default_tol(c.max_abs()))?;
        let tau = crate::material::extra_stress_tau(rho, f, a, c1_sq)?;
        Ok(Self { c, dissipation, tau })
    }
}

/// Exact solution of `λ Ȧ + A = F⁻¹F⁻ᵀ` over `dt` with `F` frozen:
/// `A' = B + (A − B) e^(−dt/λ)`.
pub fn relax_exact(a: &SymTensor2, f: &Tensor2, dt: f64, lambda: f64) -> Result<SymTensor2> {
    check_lambda(lambda)?;
    if !(dt >= 0.0) {
        return Err(Error::validation("dt", format!("must be >= 0, got {dt}")));
    }
    check_spd(a, default_tol(a.max_abs()))?;
    let finv = inverse2(f, default_tol(f.max_abs()))?;
    let b = finv.congruence(&SymTensor2::IDENTITY);
    if lambda.is_infinite() {
        return Ok(*a);
    }
    let decay = (-dt / lambda).exp();
    Ok(b + (*a - b) * decay)
}

/// `(I − c⁻¹) : (c − I) = Σᵢ (λᵢ − 1)²/λᵢ` over the spectrum of `c`.
pub fn dissipation(c: &SymTensor2, tol: f64) -> Result<f64> {
    let ([l0, l1], _) = spd_eigendecomp(c);
    if !(l1 > tol) {
        return Err(Error::NotPositiveDefinite { min_eig: l1, tol });
    }
    Ok((l0 - 1.0).powi(2) / l0 + (l1 - 1.0).powi(2) / l1)
}

/// One sample along a material trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub rho: f64,
    pub f: Tensor2,
    pub a: SymTensor2,
    pub grad_u: Tensor2,
}

/// Max over interior samples of the Frobenius norm of
/// `λ(τ̇ − ∇u τ − τ ∇uᵀ + (div u) τ) + τ − 2ρμ̇ D(u)` with `τ = ρc₁²(F A Fᵀ − I)`
/// and `τ̇` by central differences with spacing `dt`.
///
/// The viscous term carries the density: the Lagrangian relaxation law
/// yields `2ρc₁²λ D`, which is `2μ̇ D` only when `ρ = 1`.
pub fn ucm_residual(trajectory: &[TrajectorySample], dt: f64, params: &MaxwellParams) -> Result<f64> {
    if trajectory.len() < 3 {
        return Err(Error::InsufficientSamples { required: 3, got: trajectory.len() });
    }
    if !(dt > 0.0) {
        return Err(Error::validation("dt", format!("must be > 0, got {dt}")));
    }
    let lambda = params.lambda();
    check_lambda(lambda)?;
    let c1_sq = params.elastic.c1_sq;
    let taus = trajectory
        .iter()
        .map(|s| crate::material::extra_stress_tau(s.rho, &s.f, &s.a, c1_sq))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for k in 1..trajectory.len() - 1 {
        let s = &trajectory[k];
        let tau = taus[k];
        let dtau = (taus[k + 1] - taus[k - 1]) * (1.0 / (2.0 * dt));
        let l = s.grad_u;
        let lt = l.matmul(&tau.to_tensor());
        let convected = (dtau.to_tensor() - lt - lt.transpose()) + tau.to_tensor() * l.trace();
        let viscous = l.sym() * (2.0 * s.rho * c1_sq);
        let r = if lambda.is_infinite() {
            // elastic limit: only the convected rate remains
            convected
        } else {
            convected * lambda + tau.to_tensor() - viscous.to_tensor() * lambda
        };
        worst = worst.max(r.frob(&r).sqrt());
    }
    Ok(worst)
}

/// Lagrangian state of a material point for the energy balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialPoint {
    pub f: Tensor2,
    pub det_f: f64,
    pub a: SymTensor2,
}

impl MaterialPoint {
    fn midpoint(&self, o: &MaterialPoint) -> MaterialPoint {
        MaterialPoint { f: (self.f + o.f) * 0.5, det_f: 0.5 * (self.det_f + o.det_f), a: (self.a + o.a) * 0.5 }
    }
}

/// Residual of the discrete balance
/// `Δe/dt + dissipation(c)/(2λ) − (ΔF/dt : F A − p Δ|F|/dt)` at the step
/// midpoint, in the `c₁² ρ̂ = 1` normalization (`e` is the free energy
/// divided by `c₁²`).
pub fn energy_rate_check(
    before: &MaterialPoint,
    after: &MaterialPoint,
    dt: f64,
    params: &MaxwellParams,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::validation("dt", format!("must be > 0, got {dt}")));
    }
    let c1_sq = params.elastic.c1_sq;
    let e0 = energy_ucm(&before.f, &before.a, before.det_f, params)? / c1_sq;
    let e1 = energy_ucm(&after.f, &after.a, after.det_f, params)? / c1_sq;
    let mid = before.midpoint(after);
    let c = mid.f.congruence(&mid.a);
    let diss =
        if params.is_frozen() { 0.0 } else { dissipation(&c, default_tol(c.max_abs()))? / (2.0 * params.lambda()) };
    let p = params.elastic.ucm_law().eval(mid.det_f)?;
    let df = (after.f - before.f) * (1.0 / dt);
    let dj = (after.det_f - before.det_f) / dt;
    let power = df.frob(&mid.f.matmul(&mid.a.to_tensor())) - p * dj;
    Ok((e1 - e0) / dt + diss - power)
}
