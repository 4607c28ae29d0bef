//! Conserved states, fluxes, involutions and entropies of the two 2D
//! Lagrangian systems.
//!
//! Conserved ordering is fixed throughout the crate:
//! `(uˣ, uʸ, |F|, Fˣa, Fˣb, Fʸa, Fʸb[, Yᵃᵃ, Yᵃᵇ, Yᵇᵇ])`. The volume ratio
//! `|F|` is evolved on its own and is not recomputed from `F`.

use crate::error::{Error, Result};
use crate::material::{ElasticParams, MaxwellParams, PressureLaw};
use crate::relaxation;
use crate::tensor::{a_from_y, cofactor2, default_tol, inverse2, spd_eigendecomp, y_from_a, SymTensor2, Tensor2, Vec2};

pub const UX: usize = 0;
pub const UY: usize = 1;
pub const DET_F: usize = 2;
pub const FXA: usize = 3;
pub const FXB: usize = 4;
pub const FYA: usize = 5;
pub const FYB: usize = 6;
pub const YAA: usize = 7;
pub const YAB: usize = 8;
pub const YBB: usize = 9;

pub const ELASTO7_FIELDS: [&str; 7] = ["ux", "uy", "detF", "Fxa", "Fxb", "Fya", "Fyb"];
pub const UCM10_FIELDS: [&str; 10] = ["ux", "uy", "detF", "Fxa", "Fxb", "Fya", "Fyb", "Yaa", "Yab", "Ybb"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemTag {
    Elasto7,
    Ucm10,
}

impl SystemTag {
    pub fn len(self) -> usize {
        match self {
            SystemTag::Elasto7 => 7,
            SystemTag::Ucm10 => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemTag::Elasto7 => "elasto7",
            SystemTag::Ucm10 => "ucm10",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateElasto7 {
    pub u: Vec2,
    pub det_f: f64,
    pub f: Tensor2,
}

impl StateElasto7 {
    pub fn rest() -> Self {
        Self { u: Vec2::default(), det_f: 1.0, f: Tensor2::IDENTITY }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.u.x, self.u.y, self.det_f, self.f.xa, self.f.xb, self.f.ya, self.f.yb]
    }

    pub fn from_array(a: &[f64; 7]) -> Self {
        Self { u: Vec2::new(a[UX], a[UY]), det_f: a[DET_F], f: Tensor2::new(a[FXA], a[FXB], a[FYA], a[FYB]) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateUcm10 {
    pub u: Vec2,
    pub det_f: f64,
    pub f: Tensor2,
    pub y: SymTensor2,
}

impl StateUcm10 {
    pub fn rest() -> Self {
        Self { u: Vec2::default(), det_f: 1.0, f: Tensor2::IDENTITY, y: SymTensor2::IDENTITY }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [self.u.x, self.u.y, self.det_f, self.f.xa, self.f.xb, self.f.ya, self.f.yb, self.y.aa, self.y.ab, self.y.bb]
    }

    pub fn from_array(a: &[f64; 10]) -> Self {
        Self {
            u: Vec2::new(a[UX], a[UY]),
            det_f: a[DET_F],
            f: Tensor2::new(a[FXA], a[FXB], a[FYA], a[FYB]),
            y: SymTensor2::new(a[YAA], a[YAB], a[YBB]),
        }
    }

    pub fn elastic_part(&self) -> StateElasto7 {
        StateElasto7 { u: self.u, det_f: self.det_f, f: self.f }
    }
}

/// Fluxes in the two material directions, `∂ₜU + ∂ₐGₐ + ∂_bG_b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPair<const N: usize> {
    pub ga: [f64; N],
    pub gb: [f64; N],
}

impl<const N: usize> FluxPair<N> {
    pub fn directional(&self, nu: Vec2) -> [f64; N] {
        std::array::from_fn(|k| nu.x * self.ga[k] + nu.y * self.gb[k])
    }
}

/// Constant involution matrices `Mₐ`, `M_b` (2 × n) of `Mₐ∂ₐU + M_b∂_bU = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvolutionSet<const N: usize> {
    pub ma: [[f64; N]; 2],
    pub mb: [[f64; N]; 2],
}

impl<const N: usize> InvolutionSet<N> {
    fn build() -> Self {
        let mut ma = [[0.0; N]; 2];
        let mut mb = [[0.0; N]; 2];
        ma[0][FXB] = 1.0;
        ma[1][FYB] = 1.0;
        mb[0][FXA] = -1.0;
        mb[1][FYA] = -1.0;
        Self { ma, mb }
    }

    pub fn directional(&self, nu: Vec2) -> [[f64; N]; 2] {
        std::array::from_fn(|r| std::array::from_fn(|k| nu.x * self.ma[r][k] + nu.y * self.mb[r][k]))
    }

    pub fn apply(m: &[[f64; N]; 2], v: &[f64; N]) -> [f64; 2] {
        std::array::from_fn(|r| m[r].iter().zip(v).map(|(a, b)| a * b).sum())
    }
}

pub fn involutions_elasto7() -> InvolutionSet<7> {
    InvolutionSet::build()
}

pub fn involutions_ucm10() -> InvolutionSet<10> {
    InvolutionSet::build()
}

fn check_volume(det_f: f64) -> Result<()> {
    if det_f > 0.0 && det_f.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveVolume(det_f))
    }
}

/// The rows shared by both systems: momentum (given the stress), volume and
/// deformation gradient.
fn kinematic_flux<const N: usize>(u: Vec2, f: &Tensor2, s: &Tensor2) -> FluxPair<N> {
    let mut ga = [0.0; N];
    let mut gb = [0.0; N];
    ga[UX] = -s.xa;
    gb[UX] = -s.xb;
    ga[UY] = -s.ya;
    gb[UY] = -s.yb;
    // ∂ₜ|F| = ∂ₐ(−Fˣb uʸ + Fʸb uˣ) + ∂_b(−Fʸa uˣ + Fˣa uʸ)
    ga[DET_F] = f.xb * u.y - f.yb * u.x;
    gb[DET_F] = f.ya * u.x - f.xa * u.y;
    ga[FXA] = -u.x;
    gb[FXB] = -u.x;
    ga[FYA] = -u.y;
    gb[FYB] = -u.y;
    FluxPair { ga, gb }
}

/// Fluxes of the polyconvex elastodynamics system (stress `F − p Cof F`).
pub fn flux_elasto(state: &StateElasto7, law: &PressureLaw) -> Result<FluxPair<7>> {
    check_volume(state.det_f)?;
    let p = law.eval(state.det_f)?;
    let s = state.f - cofactor2(&state.f) * p;
    Ok(kinematic_flux(state.u, &state.f, &s))
}

/// Fluxes of the 10-variable Maxwell system in the frozen-relaxation form
/// (stress `F A − p Cof F`, `A = Y^(−1/2)`, zero flux for `Y`).
pub fn flux_ucm(state: &StateUcm10, law: &PressureLaw) -> Result<FluxPair<10>> {
    check_volume(state.det_f)?;
    let a = a_from_y(&state.y)?;
    flux_ucm_with_a(state, &a, law)
}

fn flux_ucm_with_a(state: &StateUcm10, a: &SymTensor2, law: &PressureLaw) -> Result<FluxPair<10>> {
    let p = law.eval(state.det_f)?;
    let s = state.f.matmul(&a.to_tensor()) - cofactor2(&state.f) * p;
    Ok(kinematic_flux(state.u, &state.f, &s))
}

/// `Ξ(U) = (p uʸ, −p uˣ)`.
pub fn xi(u: Vec2, det_f: f64, law: &PressureLaw) -> Result<Vec2> {
    check_volume(det_f)?;
    let p = law.eval(det_f)?;
    Ok(Vec2::new(p * u.y, -p * u.x))
}

/// Entropy of the elastodynamics system, `|u|²/2 + ẽ(|F|, F)/c₁²`.
pub fn entropy_elasto(state: &StateElasto7, params: &ElasticParams) -> Result<f64> {
    let e = crate::material::energy_comp_neo_hookean(&state.f, state.det_f, params)?;
    Ok(0.5 * state.u.norm_sq() + e / params.c1_sq)
}

/// Symmetrizing entropy of the Maxwell system,
/// `|u|²/2 + ½ tr(F A Fᵀ) − log|F| − (d₁²/c₁²)/(1−γ) |F|^(1−γ)` with `A = Y^(−1/2)`.
///
/// This omits the `−½ log det A` term of the free energy: that term is
/// constant while `Y` is frozen and is concave in `Y`.
pub fn entropy_ucm(state: &StateUcm10, params: &MaxwellParams) -> Result<f64> {
    check_volume(state.det_f)?;
    let a = a_from_y(&state.y)?;
    let h = params.elastic.ucm_law().volumetric_energy(state.det_f)?.expect("Lagrangian law");
    Ok(0.5 * state.u.norm_sq() + 0.5 * state.f.congruence(&a).trace() + h)
}

/// Kinetic plus free energy of a Maxwell cell, in the `c₁² ρ̂ = 1` normalization.
pub fn total_energy_ucm(state: &StateUcm10, params: &MaxwellParams) -> Result<f64> {
    let a = a_from_y(&state.y)?;
    let e = crate::material::energy_ucm(&state.f, &a, state.det_f, params)?;
    Ok(0.5 * state.u.norm_sq() + e / params.elastic.c1_sq)
}

pub fn entropy_gradient_elasto(state: &StateElasto7, params: &ElasticParams) -> Result<[f64; 7]> {
    check_volume(state.det_f)?;
    let p = params.elasto_law().eval(state.det_f)?;
    let f = state.f;
    Ok([state.u.x, state.u.y, -p, f.xa, f.xb, f.ya, f.yb])
}

/// Gradient of `Y ↦ ½ tr(M Y^(−1/2))` as a symmetric tensor, by the
/// Daleckii–Krein formula. The divided difference of `t^(−1/2)` is evaluated
/// in the cancellation-free form `−1/(√s √t (√s + √t))`.
fn half_trace_inv_sqrt_gradient(y: &SymTensor2, m: &SymTensor2) -> Result<SymTensor2> {
    let ([l0, l1], v) = spd_eigendecomp(y);
    let tol = default_tol(y.max_abs());
    if !(l1 > tol) {
        return Err(Error::NotPositiveDefinite { min_eig: l1, tol });
    }
    let (r0, r1) = (l0.sqrt(), l1.sqrt());
    let g00 = -0.5 / (l0 * r0);
    let g11 = -0.5 / (l1 * r1);
    let g01 = -1.0 / (r0 * r1 * (r0 + r1));
    // M in the eigenbasis
    let mt = v.transpose().congruence(m);
    let inner = SymTensor2::new(g00 * mt.aa, g01 * mt.ab, g11 * mt.bb);
    Ok(v.congruence(&inner) * 0.5)
}

pub fn entropy_gradient_ucm(state: &StateUcm10, params: &MaxwellParams) -> Result<[f64; 10]> {
    check_volume(state.det_f)?;
    let a = a_from_y(&state.y)?;
    let p = params.elastic.ucm_law().eval(state.det_f)?;
    let fa = state.f.matmul(&a.to_tensor());
    let ftf = state.f.transpose().congruence(&SymTensor2::IDENTITY);
    let gy = half_trace_inv_sqrt_gradient(&state.y, &ftf)?;
    Ok([state.u.x, state.u.y, -p, fa.xa, fa.xb, fa.ya, fa.yb, gy.aa, 2.0 * gy.ab, gy.bb])
}

/// Relaxation source of the Maxwell system in conserved variables.
///
/// The tensor `A` relaxes as `λ ∂ₜA = F⁻¹F⁻ᵀ − A`; the stored variable is
/// `Y = A⁻²`, so the source is the pull-back
/// `∂ₜY = −A⁻¹(A⁻¹ Ȧ + Ȧ A⁻¹)A⁻¹`. Only the `Y` block is nonzero.
pub fn source_ucm(state: &StateUcm10, lambda: f64) -> Result<[f64; 10]> {
    if !(lambda > 0.0) {
        return Err(Error::NonpositiveRelaxationTime(lambda));
    }
    let mut out = [0.0; 10];
    if lambda.is_infinite() {
        return Ok(out);
    }
    let finv = inverse2(&state.f, default_tol(state.f.max_abs()))?;
    let b = finv.congruence(&SymTensor2::IDENTITY);
    let a = a_from_y(&state.y)?;
    let a_rate = (b - a) * (1.0 / lambda);
    let ainv = a.inverse(default_tol(a.max_abs()))?;
    let inner = ainv.matmul(&a_rate) + a_rate.matmul(&ainv);
    let dy = -(ainv.to_tensor().matmul(&inner).matmul(&ainv.to_tensor()));
    let dy = dy.sym();
    out[YAA] = dy.aa;
    out[YAB] = dy.ab;
    out[YBB] = dy.bb;
    Ok(out)
}

/// Closed-form maximal characteristic speed of the elastodynamics system,
/// `sqrt(1 + |Cof(F) ν|² (∂p)² / ∂²ẽ)` with `∂²ẽ = −∂p`.
pub fn elasto_max_speed(state: &StateElasto7, nu: Vec2, law: &PressureLaw) -> Result<f64> {
    check_volume(state.det_f)?;
    let dp = law.derivative(state.det_f)?;
    let c2 = cofactor2(&state.f).apply(nu).norm_sq();
    let curvature = -dp;
    if dp == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 + c2 * dp * dp / curvature).sqrt())
}

/// Closed-form maximal characteristic speed of the frozen Maxwell system,
/// `sqrt(νᵀAν + |∂p| |Cof(F) ν|²)`: the largest eigenvalue of the acoustic
/// tensor `(νᵀAν) I + |∂p| (Cof F ν)(Cof F ν)ᵀ`.
pub fn ucm_max_speed(state: &StateUcm10, nu: Vec2, law: &PressureLaw) -> Result<f64> {
    check_volume(state.det_f)?;
    let a = a_from_y(&state.y)?;
    let dp = law.derivative(state.det_f)?;
    let c2 = cofactor2(&state.f).apply(nu).norm_sq();
    Ok((a.quad(nu) + dp.abs() * c2).sqrt())
}

/// Analytic Jacobian of `ν·G` for the elastodynamics system (row = flux
/// component, column = conserved variable).
pub fn jacobian_elasto(state: &StateElasto7, nu: Vec2, law: &PressureLaw) -> Result<[[f64; 7]; 7]> {
    check_volume(state.det_f)?;
    let p = law.eval(state.det_f)?;
    let dp = law.derivative(state.det_f)?;
    let f = state.f;
    let u = state.u;
    let (na, nb) = (nu.x, nu.y);
    let c = cofactor2(&f).apply(nu);
    let mut j = [[0.0; 7]; 7];
    j[UX][DET_F] = c.x * dp;
    j[UX][FXA] = -na;
    j[UX][FXB] = -nb;
    j[UX][FYA] = -nb * p;
    j[UX][FYB] = na * p;
    j[UY][DET_F] = c.y * dp;
    j[UY][FXA] = nb * p;
    j[UY][FXB] = -na * p;
    j[UY][FYA] = -na;
    j[UY][FYB] = -nb;
    j[DET_F][UX] = -c.x;
    j[DET_F][UY] = -c.y;
    j[DET_F][FXA] = -nb * u.y;
    j[DET_F][FXB] = na * u.y;
    j[DET_F][FYA] = nb * u.x;
    j[DET_F][FYB] = -na * u.x;
    j[FXA][UX] = -na;
    j[FXB][UX] = -nb;
    j[FYA][UY] = -na;
    j[FYB][UY] = -nb;
    Ok(j)
}

/// Common interface of the Lagrangian systems used by the symmetrizer and
/// the finite-volume solver.
pub trait LagrangianSystem<const N: usize>: Sync + Send {
    fn tag(&self) -> SystemTag;
    fn field_names(&self) -> &'static [&'static str];
    fn flux(&self, u: &[f64; N]) -> Result<FluxPair<N>>;
    fn entropy(&self, u: &[f64; N]) -> Result<f64>;
    fn entropy_gradient(&self, u: &[f64; N]) -> Result<[f64; N]>;
    fn xi(&self, u: &[f64; N]) -> Result<Vec2>;
    fn involutions(&self) -> InvolutionSet<N>;
    /// Closed-form bound on `|σ|` in direction `nu`.
    fn max_speed(&self, u: &[f64; N], nu: Vec2) -> Result<f64>;
    /// `Err` with a reason when the state is outside the admissible set.
    fn check_admissible(&self, u: &[f64; N]) -> std::result::Result<(), String>;
    /// Kinetic plus free energy density.
    fn total_energy(&self, u: &[f64; N]) -> Result<f64>;
    /// Rate of energy dissipation by relaxation, `(1/2λ)(I − c⁻¹):(c − I)`.
    fn dissipation_rate(&self, _u: &[f64; N]) -> Result<f64> {
        Ok(0.0)
    }
    /// Exact relaxation over `dt` with `F` frozen; identity when there is no source.
    fn relax(&self, _u: &mut [f64; N], _dt: f64) -> Result<()> {
        Ok(())
    }
    /// Components that carry flux (the numerical viscosity acts on these only).
    fn transported(&self) -> [bool; N] {
        [true; N]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Elasto7 {
    pub params: ElasticParams,
    law: PressureLaw,
}

impl Elasto7 {
    pub fn new(params: ElasticParams) -> Self {
        Self { params, law: params.elasto_law() }
    }

    /// Same kinematics with another Lagrangian pressure law; the entropy
    /// volumetric part follows the law (`h' = −p`).
    pub fn with_law(params: ElasticParams, law: PressureLaw) -> Result<Self> {
        if law.volumetric_energy(1.0)?.is_none() {
            return Err(Error::validation("law", "an Eulerian law has no Lagrangian entropy"));
        }
        Ok(Self { params, law })
    }

    pub fn law(&self) -> PressureLaw {
        self.law
    }
}

impl LagrangianSystem<7> for Elasto7 {
    fn tag(&self) -> SystemTag {
        SystemTag::Elasto7
    }

    fn field_names(&self) -> &'static [&'static str] {
        &ELASTO7_FIELDS
    }

    fn flux(&self, u: &[f64; 7]) -> Result<FluxPair<7>> {
        flux_elasto(&StateElasto7::from_array(u), &self.law())
    }

    fn entropy(&self, u: &[f64; 7]) -> Result<f64> {
        let s = StateElasto7::from_array(u);
        check_volume(s.det_f)?;
        let h = self.law.volumetric_energy(s.det_f)?.unwrap_or(0.0);
        Ok(0.5 * s.u.norm_sq() + 0.5 * (crate::tensor::frob(&s.f, &s.f) - 2.0) + h)
    }

    fn entropy_gradient(&self, u: &[f64; 7]) -> Result<[f64; 7]> {
        check_volume(u[DET_F])?;
        let p = self.law.eval(u[DET_F])?;
        Ok([u[UX], u[UY], -p, u[FXA], u[FXB], u[FYA], u[FYB]])
    }

    fn xi(&self, u: &[f64; 7]) -> Result<Vec2> {
        xi(Vec2::new(u[UX], u[UY]), u[DET_F], &self.law())
    }

    fn involutions(&self) -> InvolutionSet<7> {
        involutions_elasto7()
    }

    fn max_speed(&self, u: &[f64; 7], nu: Vec2) -> Result<f64> {
        elasto_max_speed(&StateElasto7::from_array(u), nu, &self.law)
    }

    fn check_admissible(&self, u: &[f64; 7]) -> std::result::Result<(), String> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err("non-finite state".into());
        }
        if u[DET_F] <= 0.0 {
            return Err(format!("detF = {} <= 0", u[DET_F]));
        }
        Ok(())
    }

    fn total_energy(&self, u: &[f64; 7]) -> Result<f64> {
        self.entropy(u)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ucm10 {
    pub params: MaxwellParams,
}

impl Ucm10 {
    pub fn new(params: MaxwellParams) -> Self {
        Self { params }
    }

    pub fn law(&self) -> PressureLaw {
        self.params.elastic.ucm_law()
    }
}

impl LagrangianSystem<10> for Ucm10 {
    fn tag(&self) -> SystemTag {
        SystemTag::Ucm10
    }

    fn field_names(&self) -> &'static [&'static str] {
        &UCM10_FIELDS
    }

    fn flux(&self, u: &[f64; 10]) -> Result<FluxPair<10>> {
        flux_ucm(&StateUcm10::from_array(u), &self.law())
    }

    fn entropy(&self, u: &[f64; 10]) -> Result<f64> {
        entropy_ucm(&StateUcm10::from_array(u), &self.params)
    }

    fn entropy_gradient(&self, u: &[f64; 10]) -> Result<[f64; 10]> {
        entropy_gradient_ucm(&StateUcm10::from_array(u), &self.params)
    }

    fn xi(&self, u: &[f64; 10]) -> Result<Vec2> {
        xi(Vec2::new(u[UX], u[UY]), u[DET_F], &self.law())
    }

    fn involutions(&self) -> InvolutionSet<10> {
        involutions_ucm10()
    }

    fn max_speed(&self, u: &[f64; 10], nu: Vec2) -> Result<f64> {
        ucm_max_speed(&StateUcm10::from_array(u), nu, &self.law())
    }

    fn check_admissible(&self, u: &[f64; 10]) -> std::result::Result<(), String> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err("non-finite state".into());
        }
        if u[DET_F] <= 0.0 {
            return Err(format!("detF = {} <= 0", u[DET_F]));
        }
        let y = SymTensor2::new(u[YAA], u[YAB], u[YBB]);
        let ([_, l1], _) = spd_eigendecomp(&y);
        if !(l1 > default_tol(y.max_abs())) {
            return Err(format!("Y lost positive definiteness (min eigenvalue {l1:e})"));
        }
        Ok(())
    }

    fn total_energy(&self, u: &[f64; 10]) -> Result<f64> {
        total_energy_ucm(&StateUcm10::from_array(u), &self.params)
    }

    fn dissipation_rate(&self, u: &[f64; 10]) -> Result<f64> {
        if self.params.is_frozen() {
            return Ok(0.0);
        }
        let s = StateUcm10::from_array(u);
        let a = a_from_y(&s.y)?;
        let c = s.f.congruence(&a);
        Ok(relaxation::dissipation(&c, default_tol(c.max_abs()))? / (2.0 * self.params.lambda()))
    }

    fn relax(&self, u: &mut [f64; 10], dt: f64) -> Result<()> {
        if self.params.is_frozen() || dt == 0.0 {
            return Ok(());
        }
        let s = StateUcm10::from_array(u);
        let a = a_from_y(&s.y)?;
        let relaxed = relaxation::relax_exact(&a, &s.f, dt, self.params.lambda())?;
        let y = y_from_a(&relaxed)?;
        u[YAA] = y.aa;
        u[YAB] = y.ab;
        u[YBB] = y.bb;
        Ok(())
    }

    fn transported(&self) -> [bool; 10] {
        std::array::from_fn(|k| k < YAA)
    }
}
