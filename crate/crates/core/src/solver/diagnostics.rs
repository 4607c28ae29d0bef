use super::grid::Grid2D;
use crate::error::{Error, Result};
use crate::material::MaxwellParams;
use crate::relaxation::{dissipation, TrajectorySample};
use crate::system::{LagrangianSystem, DET_F, FXA, FXB, FYA, FYB, UX, UY, YAA, YAB, YBB};
use crate::tensor::{a_from_y, default_tol, det2, inverse2, SymTensor2, Tensor2};

/// Diagnostics at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    /// Kinetic plus free energy.
    pub energy: f64,
    /// Integral of the symmetrizing entropy.
    pub entropy: f64,
    /// Cumulative `∫∫ dissipation/(2λ)` up to `t`.
    pub dissipation_integral: f64,
    pub involution_residual: f64,
    pub detf_consistency: f64,
    pub max_speed: f64,
}

/// Energy balance of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepAudit {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Trapezoidal estimate of the energy removed by relaxation.
    pub dissipated: f64,
    pub min_cell_dissipation: f64,
}

impl StepAudit {
    pub fn relative_change(&self) -> f64 {
        (self.energy_after - self.energy_before) / self.energy_before.abs().max(f64::MIN_POSITIVE)
    }

    /// `ΔE + ∫ dissipation`, zero for an exact scheme and negative when the
    /// scheme itself dissipates.
    pub fn budget(&self) -> f64 {
        self.energy_after - self.energy_before + self.dissipated
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
    pub steps: Vec<StepAudit>,
}

impl DiagnosticsSeries {
    pub fn push(&mut self, r: DiagnosticsRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if !(r.t > last.t) {
                return Err(Error::validation("t", format!("output times must increase: {} after {}", r.t, last.t)));
            }
        }
        self.records.push(r);
        Ok(())
    }
}

fn cell_sum<const N: usize>(grid: &Grid2D<N>, f: impl Fn(&[f64; N]) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for (i, c) in grid.cells.iter().enumerate() {
        total += f(c).map_err(|e| Error::AdmissibilityLoss { cell: i, reason: e.to_string() })?;
    }
    Ok(total * grid.cell_area())
}

pub fn total_energy<S: LagrangianSystem<N>, const N: usize>(sys: &S, grid: &Grid2D<N>) -> Result<f64> {
    cell_sum(grid, |c| sys.total_energy(c))
}

pub fn total_entropy<S: LagrangianSystem<N>, const N: usize>(sys: &S, grid: &Grid2D<N>) -> Result<f64> {
    cell_sum(grid, |c| sys.entropy(c))
}

/// `∫ dissipation(c)/(2λ)` over the grid.
pub fn total_dissipation_rate<S: LagrangianSystem<N>, const N: usize>(sys: &S, grid: &Grid2D<N>) -> Result<f64> {
    cell_sum(grid, |c| sys.dissipation_rate(c))
}

/// Smallest per-cell `dissipation(c)`, `c = F A Fᵀ`.
pub fn min_cell_dissipation(grid: &Grid2D<10>) -> Result<f64> {
    let mut m = f64::INFINITY;
    for c in &grid.cells {
        let f = Tensor2::new(c[FXA], c[FXB], c[FYA], c[FYB]);
        let a = a_from_y(&SymTensor2::new(c[YAA], c[YAB], c[YBB]))?;
        let conf = f.congruence(&a);
        m = m.min(dissipation(&conf, default_tol(conf.max_abs()))?);
    }
    Ok(m)
}

/// Grid sums of every conserved component, in cell order.
pub fn conserved_totals<const N: usize>(grid: &Grid2D<N>) -> [f64; N] {
    let mut out = [0.0; N];
    for c in &grid.cells {
        for k in 0..N {
            out[k] += c[k];
        }
    }
    out
}

/// Max over cells of `|∂ₐFˣb − ∂_bFˣa| + |∂ₐFʸb − ∂_bFʸa|` by periodic
/// central differences.
pub fn involution_residual<const N: usize>(grid: &Grid2D<N>) -> f64 {
    let c = &grid.cells;
    (0..c.len())
        .map(|i| {
            let [am, ap, bm, bp] = grid.neighbours(i);
            let da = |k: usize| (c[ap][k] - c[am][k]) / (2.0 * grid.ha);
            let db = |k: usize| (c[bp][k] - c[bm][k]) / (2.0 * grid.hb);
            (da(FXB) - db(FXA)).abs() + (da(FYB) - db(FYA)).abs()
        })
        .fold(0.0, f64::max)
}

/// Max over cells of `| |F| − det F |`.
pub fn detf_consistency<const N: usize>(grid: &Grid2D<N>) -> f64 {
    grid.cells
        .iter()
        .map(|c| (c[DET_F] - det2(&Tensor2::new(c[FXA], c[FXB], c[FYA], c[FYB]))).abs())
        .fold(0.0, f64::max)
}

/// Material-point sample of a Maxwell cell: `ρ = ρ̂/|F|`, `F`, `A` and the
/// spatial velocity gradient `∇u = (∂ₐu) F⁻¹` from central differences.
pub fn material_point_sample(grid: &Grid2D<10>, cell: usize, params: &MaxwellParams) -> Result<TrajectorySample> {
    let c = &grid.cells;
    let [am, ap, bm, bp] = grid.neighbours(cell);
    let da = |k: usize| (c[ap][k] - c[am][k]) / (2.0 * grid.ha);
    let db = |k: usize| (c[bp][k] - c[bm][k]) / (2.0 * grid.hb);
    let material = Tensor2::new(da(UX), db(UX), da(UY), db(UY));
    let u = &c[cell];
    let f = Tensor2::new(u[FXA], u[FXB], u[FYA], u[FYB]);
    let finv = inverse2(&f, default_tol(f.max_abs()))?;
    Ok(TrajectorySample {
        rho: params.elastic.rho_hat / u[DET_F],
        f,
        a: a_from_y(&SymTensor2::new(u[YAA], u[YAB], u[YBB]))?,
        grad_u: material.matmul(&finv),
    })
}
