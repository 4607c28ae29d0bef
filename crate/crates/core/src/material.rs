//! Energies, pressure laws and stress measures.
//!
//! The Lagrangian systems are written in the normalization `c₁² ρ̂ = 1`, so
//! that stresses entering the fluxes are the gradients of `e / c₁²`. The
//! physical scaling is kept in the energies themselves and in the Eulerian
//! diagnostics of [`push_forward`].

use crate::error::{Error, Result};
use crate::tensor::{cofactor2, det2, frob, spd_eigendecomp, SymTensor2, Tensor2};

/// Spatial dimension of every material body handled here.
pub const DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticParams {
    pub c1_sq: f64,
    pub d1_sq: f64,
    pub gamma: f64,
    pub rho_hat: f64,
}

impl ElasticParams {
    pub fn new(c1_sq: f64, d1_sq: f64, gamma: f64, rho_hat: f64) -> Result<Self> {
        if !(c1_sq > 0.0 && c1_sq.is_finite()) {
            return Err(Error::validation("c1_sq", "must be finite and > 0"));
        }
        if !(d1_sq >= 0.0 && d1_sq.is_finite()) {
            return Err(Error::validation("d1_sq", "must be finite and >= 0"));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::validation("gamma", "must be finite and > 1"));
        }
        if !(rho_hat > 0.0 && rho_hat.is_finite()) {
            return Err(Error::validation("rho_hat", "must be finite and > 0"));
        }
        Ok(Self { c1_sq, d1_sq, gamma, rho_hat })
    }

    /// The ratio `d₁²/c₁²` that sets the volumetric pressure.
    pub fn ratio(&self) -> f64 {
        self.d1_sq / self.c1_sq
    }

    pub fn elasto_law(&self) -> PressureLaw {
        PressureLaw::ElastoCompNeoHookean { ratio: self.ratio(), gamma: self.gamma }
    }

    pub fn ucm_law(&self) -> PressureLaw {
        PressureLaw::UcmLagrangian { ratio: self.ratio(), gamma: self.gamma }
    }
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self { c1_sq: 1.0, d1_sq: 1.0, gamma: 2.0, rho_hat: 1.0 }
    }
}

/// Maxwell fluid constants. The viscosity is derived, `μ̇ = λ c₁²`.
///
/// `lambda = +∞` is the frozen (elastic) limit, where relaxation is switched off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellParams {
    pub elastic: ElasticParams,
    lambda: f64,
}

impl MaxwellParams {
    pub fn new(elastic: ElasticParams, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::NonpositiveRelaxationTime(lambda));
        }
        Ok(Self { elastic, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu_dot(&self) -> f64 {
        self.lambda * self.elastic.c1_sq
    }

    pub fn is_frozen(&self) -> bool {
        self.lambda.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PressureLaw {
    /// `p(|F|) = (d₁²/c₁²) |F|^(−γ)`
    ElastoCompNeoHookean { ratio: f64, gamma: f64 },
    /// `p(|F|) = |F|⁻¹ + (d₁²/c₁²) |F|^(−γ)`
    UcmLagrangian { ratio: f64, gamma: f64 },
    /// `p(ρ) = C₀ ρ^γ`
    Polytropic { c0: f64, gamma: f64 },
}

impl PressureLaw {
    fn check(v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::NonpositiveArgument(v))
        }
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        Self::check(v)?;
        Ok(match *self {
            PressureLaw::ElastoCompNeoHookean { ratio, gamma } => ratio * v.powf(-gamma),
            PressureLaw::UcmLagrangian { ratio, gamma } => 1.0 / v + ratio * v.powf(-gamma),
            PressureLaw::Polytropic { c0, gamma } => c0 * v.powf(gamma),
        })
    }

    pub fn derivative(&self, v: f64) -> Result<f64> {
        Self::check(v)?;
        Ok(match *self {
            PressureLaw::ElastoCompNeoHookean { ratio, gamma } => -gamma * ratio * v.powf(-gamma - 1.0),
            PressureLaw::UcmLagrangian { ratio, gamma } => -1.0 / (v * v) - gamma * ratio * v.powf(-gamma - 1.0),
            PressureLaw::Polytropic { c0, gamma } => gamma * c0 * v.powf(gamma - 1.0),
        })
    }

    /// Volumetric energy `h(|F|)` of a Lagrangian law, normalized so that
    /// `h' = −p`. `None` for the Eulerian polytropic law.
    pub fn volumetric_energy(&self, v: f64) -> Result<Option<f64>> {
        Self::check(v)?;
        Ok(match *self {
            PressureLaw::ElastoCompNeoHookean { ratio, gamma } => Some(-ratio / (1.0 - gamma) * v.powf(1.0 - gamma)),
            PressureLaw::UcmLagrangian { ratio, gamma } => Some(-v.ln() - ratio / (1.0 - gamma) * v.powf(1.0 - gamma)),
            PressureLaw::Polytropic { .. } => None,
        })
    }
}

/// Polytropic internal energy `C₀ ρ^(γ−1) / (γ−1)`.
pub fn polytropic_energy(rho: f64, c0: f64, gamma: f64) -> Result<f64> {
    PressureLaw::check(rho)?;
    Ok(c0 / (gamma - 1.0) * rho.powf(gamma - 1.0))
}

fn check_volume(det_f: f64) -> Result<()> {
    if det_f > 0.0 && det_f.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveVolume(det_f))
    }
}

fn check_spd(a: &SymTensor2) -> Result<()> {
    let ([_, l1], _) = spd_eigendecomp(a);
    if l1 > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite { min_eig: l1, tol: 0.0 })
    }
}

pub fn energy_neo_hookean(f: &Tensor2, p: &ElasticParams) -> f64 {
    0.5 * p.c1_sq * (frob(f, f) - DIM as f64)
}

pub fn energy_comp_neo_hookean(f: &Tensor2, det_f: f64, p: &ElasticParams) -> Result<f64> {
    check_volume(det_f)?;
    Ok(energy_neo_hookean(f, p) - p.d1_sq / (1.0 - p.gamma) * det_f.powf(1.0 - p.gamma))
}

/// Maxwell free energy
/// `(c₁²/2)(tr(F A Fᵀ) − log det(F A Fᵀ)) − d₁²/(1−γ) |F|^(1−γ)`,
/// with `log det(F A Fᵀ)` evaluated as `2 log |F| + log det A` using the
/// independently evolved volume ratio.
pub fn energy_ucm(f: &Tensor2, a: &SymTensor2, det_f: f64, p: &MaxwellParams) -> Result<f64> {
    check_volume(det_f)?;
    check_spd(a)?;
    let e = &p.elastic;
    let c = f.congruence(a);
    let log_det_c = 2.0 * det_f.ln() + a.det().ln();
    Ok(0.5 * e.c1_sq * (c.trace() - log_det_c) - e.d1_sq / (1.0 - e.gamma) * det_f.powf(1.0 - e.gamma))
}

/// Constitutive model selector for [`piola_stress`].
#[derive(Debug, Clone, Copy)]
pub enum StressModel<'a> {
    Elasto(&'a ElasticParams),
    Ucm { a: SymTensor2, params: &'a MaxwellParams },
}

/// First Piola–Kirchhoff stress.
///
/// Elastodynamics: `S = c₁² F − d₁² |F|^(−γ) Cof(F)` (per unit reference density).
/// Maxwell: `S = −p(|F|) Cof(F) + F A` in the `c₁² ρ̂ = 1` normalization.
pub fn piola_stress(model: StressModel<'_>, f: &Tensor2, det_f: f64) -> Result<Tensor2> {
    check_volume(det_f)?;
    let cof = cofactor2(f);
    match model {
        StressModel::Elasto(p) => Ok(*f * p.c1_sq - cof * (p.d1_sq * det_f.powf(-p.gamma))),
        StressModel::Ucm { a, params } => {
            let p = params.elastic.ucm_law().eval(det_f)?;
            Ok(f.matmul(&a.to_tensor()) - cof * p)
        }
    }
}

/// Extra stress `τ = ρ c₁² (F A Fᵀ − I)`.
pub fn extra_stress_tau(rho: f64, f: &Tensor2, a: &SymTensor2, c1_sq: f64) -> Result<SymTensor2> {
    if !(rho > 0.0) {
        return Err(Error::NonpositiveArgument(rho));
    }
    check_spd(a)?;
    Ok((f.congruence(a) - SymTensor2::IDENTITY) * (rho * c1_sq))
}

/// Cauchy stress `σ = |F|⁻¹ S Fᵀ`.
pub fn cauchy_from_piola(s: &Tensor2, f: &Tensor2) -> Result<Tensor2> {
    let det = det2(f);
    check_volume(det)?;
    Ok(s.matmul(&f.transpose()) * (1.0 / det))
}

/// Newtonian extra stress `2 μ̇ D(u) + ℓ tr D(u) I`.
pub fn newtonian_tau(grad_u: &Tensor2, mu_dot: f64, ell: f64) -> SymTensor2 {
    let d = grad_u.sym();
    d * (2.0 * mu_dot) + SymTensor2::IDENTITY * (ell * d.trace())
}

/// Eulerian observables of a material point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerianObservables {
    pub rho: f64,
    pub sigma: Tensor2,
    /// Conformation tensor `F A Fᵀ`; identity for the elastic model.
    pub conformation: SymTensor2,
    pub tau: SymTensor2,
}

/// Pushes the Lagrangian state of a material point forward to spatial
/// observables, restoring the physical `ρ̂` scaling of the stresses.
pub fn push_forward(model: StressModel<'_>, f: &Tensor2, det_f: f64) -> Result<EulerianObservables> {
    check_volume(det_f)?;
    let (rho_hat, c1_sq) = match model {
        StressModel::Elasto(p) => (p.rho_hat, p.c1_sq),
        StressModel::Ucm { params, .. } => (params.elastic.rho_hat, params.elastic.c1_sq),
    };
    let rho = rho_hat / det_f;
    match model {
        StressModel::Elasto(_) => {
            let s = piola_stress(model, f, det_f)? * rho_hat;
            Ok(EulerianObservables {
                rho,
                sigma: cauchy_from_piola(&s, f)?,
                conformation: SymTensor2::IDENTITY,
                tau: SymTensor2::ZERO,
            })
        }
        StressModel::Ucm { a, .. } => {
            // normalized stress times ρ̂ c₁² restores physical units
            let s = piola_stress(model, f, det_f)? * (rho_hat * c1_sq);
            Ok(EulerianObservables {
                rho,
                sigma: cauchy_from_piola(&s, f)?,
                conformation: f.congruence(&a),
                tau: extra_stress_tau(rho, f, &a, c1_sq)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ElasticParams {
        ElasticParams::new(1.0, 1.0, 2.0, 1.0).unwrap()
    }

    fn maxwell(lambda: f64) -> MaxwellParams {
        MaxwellParams::new(unit(), lambda).unwrap()
    }

    /// Central-difference gradient of a scalar function of F.
    fn fd_gradient(f: &Tensor2, energy: impl Fn(&Tensor2) -> f64) -> Tensor2 {
        let h = 1e-5 * f.max_abs().max(1.0);
        let mut out = [0.0; 4];
        let base = f.to_array();
        for (k, slot) in out.iter_mut().enumerate() {
            let mut plus = base;
            let mut minus = base;
            plus[k] += h;
            minus[k] -= h;
            *slot = (energy(&Tensor2::from_array(plus)) - energy(&Tensor2::from_array(minus))) / (2.0 * h);
        }
        Tensor2::from_array(out)
    }

    fn rel_err(a: &Tensor2, b: &Tensor2) -> f64 {
        (*a - *b).max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
    }

    #[test]
    fn params_validation() {
        assert!(ElasticParams::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(ElasticParams::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ElasticParams::new(1.0, 1.0, 2.0, 0.0).is_err());
        assert!(matches!(MaxwellParams::new(unit(), 0.0), Err(Error::NonpositiveRelaxationTime(_))));
        let m = MaxwellParams::new(ElasticParams::new(2.5, 1.0, 2.0, 1.0).unwrap(), 4.0).unwrap();
        assert_eq!(m.mu_dot(), 10.0);
    }

    #[test]
    fn neo_hookean_examples() {
        let p = unit();
        assert_eq!(energy_neo_hookean(&Tensor2::IDENTITY, &p), 0.0);
        assert_eq!(energy_neo_hookean(&Tensor2::diag(2.0, 1.0), &p), 1.5);
        let p2 = ElasticParams { c1_sq: 2.0, ..p };
        assert_eq!(energy_neo_hookean(&Tensor2::diag(2.0, 1.0), &p2), 3.0);
    }

    #[test]
    fn comp_neo_hookean_examples() {
        let p = unit();
        assert_eq!(energy_comp_neo_hookean(&Tensor2::IDENTITY, 1.0, &p).unwrap(), 1.0);
        let p0 = ElasticParams { d1_sq: 0.0, ..p };
        let f = Tensor2::new(1.1, 0.2, -0.3, 0.9);
        assert_eq!(energy_comp_neo_hookean(&f, 0.7, &p0).unwrap(), energy_neo_hookean(&f, &p0));
        let mut prev = 0.0;
        for k in 1..8 {
            let j = 10f64.powi(-k);
            let e = energy_comp_neo_hookean(&Tensor2::IDENTITY, j, &p).unwrap();
            assert!(e > prev);
            prev = e;
        }
        assert!(matches!(energy_comp_neo_hookean(&Tensor2::IDENTITY, 0.0, &p), Err(Error::NonpositiveVolume(_))));
    }

    #[test]
    fn comp_neo_hookean_convex_in_volume() {
        for &gamma in &[1.5, 2.0, 3.0] {
            let p = ElasticParams { gamma, ..unit() };
            let h = 1e-3;
            for i in 0..50 {
                let j = 0.2 + 0.05 * i as f64;
                let e = |v: f64| energy_comp_neo_hookean(&Tensor2::IDENTITY, v, &p).unwrap();
                let second = e(j + h) - 2.0 * e(j) + e(j - h);
                assert!(second >= -1e-10, "gamma {gamma} j {j}: {second}");
            }
        }
    }

    #[test]
    fn pressure_examples() {
        let elasto = PressureLaw::ElastoCompNeoHookean { ratio: 1.0, gamma: 2.0 };
        let ucm = PressureLaw::UcmLagrangian { ratio: 1.0, gamma: 2.0 };
        let poly = PressureLaw::Polytropic { c0: 1.0, gamma: 1.4 };
        assert_eq!(elasto.eval(1.0).unwrap(), 1.0);
        assert_eq!(ucm.eval(2.0).unwrap(), 0.75);
        assert_eq!(poly.eval(1.0).unwrap(), 1.0);
        assert!(matches!(elasto.eval(0.0), Err(Error::NonpositiveArgument(_))));
        assert!(matches!(poly.eval(-1.0), Err(Error::NonpositiveArgument(_))));
    }

    #[test]
    fn pressure_derivative_matches_finite_differences() {
        let laws = [
            PressureLaw::ElastoCompNeoHookean { ratio: 0.7, gamma: 2.5 },
            PressureLaw::UcmLagrangian { ratio: 1.3, gamma: 1.5 },
            PressureLaw::Polytropic { c0: 2.0, gamma: 1.4 },
        ];
        for law in laws {
            for i in 0..=30 {
                let v = 0.5 + 1.5 * i as f64 / 30.0;
                let h = 1e-5 * v;
                let fd = (law.eval(v + h).unwrap() - law.eval(v - h).unwrap()) / (2.0 * h);
                let exact = law.derivative(v).unwrap();
                assert!((fd - exact).abs() <= 1e-7 * exact.abs(), "{law:?} at {v}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn volumetric_energy_is_pressure_potential() {
        for law in [
            PressureLaw::ElastoCompNeoHookean { ratio: 0.7, gamma: 2.5 },
            PressureLaw::UcmLagrangian { ratio: 1.3, gamma: 1.5 },
        ] {
            let v = 1.3;
            let h = 1e-5;
            let fd = (law.volumetric_energy(v + h).unwrap().unwrap() - law.volumetric_energy(v - h).unwrap().unwrap())
                / (2.0 * h);
            assert!((fd + law.eval(v).unwrap()).abs() < 1e-9);
        }
        let poly = PressureLaw::Polytropic { c0: 1.0, gamma: 1.4 };
        assert_eq!(poly.volumetric_energy(1.0).unwrap(), None);
        // p = −∂e/∂(1/ρ) for the polytropic energy
        let rho: f64 = 1.7;
        let h = 1e-6;
        let e_of_v = |v: f64| polytropic_energy(1.0 / v, 1.0, 1.4).unwrap();
        let fd = (e_of_v(1.0 / rho + h) - e_of_v(1.0 / rho - h)) / (2.0 * h);
        assert!((-fd - poly.eval(rho).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn ucm_energy_examples() {
        let p = maxwell(1.0);
        let e = energy_ucm(&Tensor2::IDENTITY, &SymTensor2::IDENTITY, 1.0, &p).unwrap();
        assert!((e - 2.0).abs() < 1e-15);
        let p0 = MaxwellParams::new(ElasticParams { d1_sq: 0.0, ..unit() }, 1.0).unwrap();
        let e = energy_ucm(&Tensor2::rotation(0.83), &SymTensor2::IDENTITY, 1.0, &p0).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
        let e = energy_ucm(&Tensor2::IDENTITY, &SymTensor2::diag(4.0, 1.0), 1.0, &p).unwrap();
        assert!((e - (0.5 * (5.0 - 4f64.ln()) + 1.0)).abs() < 1e-14);
        assert!(matches!(
            energy_ucm(&Tensor2::IDENTITY, &SymTensor2::diag(1.0, -1.0), 1.0, &p),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn piola_examples() {
        let p = unit();
        let s = piola_stress(StressModel::Elasto(&p), &Tensor2::IDENTITY, 1.0).unwrap();
        assert_eq!(s, Tensor2::ZERO);
        let m = maxwell(1.0);
        let s =
            piola_stress(StressModel::Ucm { a: SymTensor2::IDENTITY, params: &m }, &Tensor2::IDENTITY, 1.0).unwrap();
        assert_eq!(s, -Tensor2::IDENTITY);
    }

    #[test]
    fn piola_is_energy_gradient() {
        let elastic = ElasticParams::new(1.7, 0.8, 2.5, 1.0).unwrap();
        let m = MaxwellParams::new(elastic, 3.0).unwrap();
        let a = SymTensor2::new(1.4, 0.3, 0.8);
        for f in [
            Tensor2::new(1.1, 0.2, -0.3, 0.9),
            Tensor2::new(0.7, -0.1, 0.4, 1.6),
            Tensor2::rotation(1.2).matmul(&Tensor2::diag(1.5, 0.8)),
        ] {
            let s = piola_stress(StressModel::Elasto(&elastic), &f, det2(&f)).unwrap();
            let fd = fd_gradient(&f, |g| energy_comp_neo_hookean(g, det2(g), &elastic).unwrap());
            assert!(rel_err(&s, &fd) < 1e-6, "elasto {s:?} vs {fd:?}");

            let s = piola_stress(StressModel::Ucm { a, params: &m }, &f, det2(&f)).unwrap();
            let fd = fd_gradient(&f, |g| energy_ucm(g, &a, det2(g), &m).unwrap() / elastic.c1_sq);
            assert!(rel_err(&s, &fd) < 1e-6, "ucm {s:?} vs {fd:?}");
        }
    }

    #[test]
    fn tau_examples() {
        let tau = extra_stress_tau(1.0, &Tensor2::IDENTITY, &SymTensor2::IDENTITY, 1.0).unwrap();
        assert_eq!(tau, SymTensor2::ZERO);
        let tau = extra_stress_tau(1.0, &Tensor2::diag(2.0, 1.0), &SymTensor2::IDENTITY, 1.0).unwrap();
        assert_eq!(tau, SymTensor2::diag(3.0, 0.0));
    }

    #[test]
    fn tau_vanishes_at_relaxed_state() {
        let f = Tensor2::new(1.3, 0.4, -0.2, 0.8);
        let finv = crate::tensor::inverse2(&f, 1e-12).unwrap();
        let a = finv.congruence(&SymTensor2::IDENTITY).to_tensor();
        // F⁻¹ F⁻ᵀ = (F⁻¹)(F⁻¹)ᵀ
        let a = SymTensor2::new(a.xa, a.xb, a.yb);
        let (rho, c1) = (1.3, 2.0);
        let tau = extra_stress_tau(rho, &f, &a, c1).unwrap();
        assert!(tau.max_abs() <= 1e-12 * rho * c1);
    }

    #[test]
    fn cauchy_examples() {
        let f = Tensor2::new(1.1, 0.3, 0.2, 0.9);
        assert_eq!(cauchy_from_piola(&Tensor2::ZERO, &f).unwrap(), Tensor2::ZERO);
        let s = Tensor2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(cauchy_from_piola(&s, &Tensor2::IDENTITY).unwrap(), s);
        let fd = Tensor2::diag(2.0, 1.0);
        let s = piola_stress(StressModel::Elasto(&unit()), &fd, det2(&fd)).unwrap();
        let sigma = cauchy_from_piola(&s, &fd).unwrap();
        assert!((sigma.xb - sigma.ya).abs() <= 1e-12);
        assert!(matches!(cauchy_from_piola(&s, &Tensor2::diag(-1.0, 1.0)), Err(Error::NonpositiveVolume(_))));
    }

    #[test]
    fn newtonian_examples() {
        assert_eq!(newtonian_tau(&Tensor2::ZERO, 1.0, 0.5), SymTensor2::ZERO);
        let shear = Tensor2::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(newtonian_tau(&shear, 1.0, 0.0), SymTensor2::new(0.0, 1.0, 0.0));
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let g = Tensor2::new(next(), next(), next(), next());
            let (mu, ell) = (next().abs() + 0.01, next().abs() + 0.01);
            let tau = newtonian_tau(&g, mu, ell);
            assert!(frob(&tau.to_tensor(), &g) >= 0.0);
        }
    }

    #[test]
    fn push_forward_gives_symmetric_cauchy() {
        let m = maxwell(2.0);
        let f = Tensor2::new(1.2, 0.1, -0.3, 0.95);
        let a = SymTensor2::new(0.9, 0.1, 1.2);
        let obs = push_forward(StressModel::Ucm { a, params: &m }, &f, det2(&f)).unwrap();
        assert!((obs.sigma.xb - obs.sigma.ya).abs() < 1e-14);
        // σ = −p I + τ with p the physical pressure ρ̂ c₁² |F|⁻¹ p(|F|) minus the c₁² ρ term
        let jac = det2(&f);
        let p_phys = m.elastic.ucm_law().eval(jac).unwrap() - 1.0 / jac;
        let sig = obs.sigma.sym() - obs.tau;
        assert!((sig.aa + p_phys).abs() < 1e-13 && (sig.bb + p_phys).abs() < 1e-13 && sig.ab.abs() < 1e-13);
    }
}
