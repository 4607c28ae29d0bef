//! Entropy Hessian, directional flux Jacobians, the involution correction
//! and wave speeds from the generalized symmetric eigenproblem.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::material::{ElasticParams, MaxwellParams};
use crate::system::{Elasto7, InvolutionSet, LagrangianSystem, StateElasto7, StateUcm10, SystemTag, Ucm10};
use crate::tensor::{det2, SymTensor2, Tensor2, Vec2};

/// Relative central-difference step used when none is given.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

const MAX_SHRINKS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizerReport {
    pub direction: Vec2,
    pub hessian: DMatrix<f64>,
    pub jacobian: DMatrix<f64>,
    pub correction: DMatrix<f64>,
    pub assembled: DMatrix<f64>,
    pub symmetry_defect: f64,
    pub hessian_min_eig: f64,
    pub speeds: Vec<f64>,
}

/// Central difference of a vector-valued map along each conserved
/// component. Column `k` holds the derivative with respect to `U_k`. The
/// step `fd_step · max(1, |U_k|)` is divided by 10 (at most three times)
/// when the stencil leaves the admissible set.
fn central_columns<const N: usize, const M: usize>(
    u: &[f64; N],
    fd_step: f64,
    f: impl Fn(&[f64; N]) -> Result<[f64; M]>,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(M, N);
    for k in 0..N {
        let mut h = fd_step * u[k].abs().max(1.0);
        let mut attempts = 0;
        let (fp, fm) = loop {
            let mut p = *u;
            let mut m = *u;
            p[k] += h;
            m[k] -= h;
            match (f(&p), f(&m)) {
                (Ok(a), Ok(b)) => break (a, b),
                _ if attempts < MAX_SHRINKS => {
                    attempts += 1;
                    h *= 0.1;
                }
                _ => return Err(Error::InadmissiblePerturbation { attempts }),
            }
        };
        for r in 0..M {
            out[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(out)
}

fn admissible<S: LagrangianSystem<N>, const N: usize>(sys: &S, u: &[f64; N]) -> Result<()> {
    sys.check_admissible(u).map_err(|reason| Error::AdmissibilityLoss { cell: 0, reason })
}

/// Entropy Hessian by central differences of the analytic entropy gradient,
/// symmetrized as `(H + Hᵀ)/2`.
pub fn hessian_eta<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    u: &[f64; N],
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    admissible(sys, u)?;
    let h = central_columns(u, fd_step, |v| {
        sys.check_admissible(v).map_err(|reason| Error::AdmissibilityLoss { cell: 0, reason })?;
        sys.entropy_gradient(v)
    })?;
    Ok((&h + h.transpose()) * 0.5)
}

/// Central-difference Jacobian of `νₐGₐ + ν_bG_b`.
pub fn jacobian_flux<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    u: &[f64; N],
    nu: Vec2,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    admissible(sys, u)?;
    central_columns(u, fd_step, |v| {
        sys.check_admissible(v).map_err(|reason| Error::AdmissibilityLoss { cell: 0, reason })?;
        Ok(sys.flux(v)?.directional(nu))
    })
}

/// Central-difference Jacobian of `Ξ` (2 × n).
pub fn jacobian_xi<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    u: &[f64; N],
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    admissible(sys, u)?;
    central_columns(u, fd_step, |v| {
        sys.check_admissible(v).map_err(|reason| Error::AdmissibilityLoss { cell: 0, reason })?;
        let x = sys.xi(v)?;
        Ok([x.x, x.y])
    })
}

fn involution_matrix<const N: usize>(m: &InvolutionSet<N>, nu: Vec2) -> DMatrix<f64> {
    let d = m.directional(nu);
    DMatrix::from_fn(2, N, |r, c| d[r][c])
}

/// `max |B − Bᵀ| / max |B|`.
pub fn symmetry_defect(b: &DMatrix<f64>) -> f64 {
    let scale = b.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (b - b.transpose()).amax() / scale
}

fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.min()
}

/// Solves `B R = σ H R` for symmetric `B` and SPD `H` through the Cholesky
/// factor `H = L Lᵀ`: `σ` are the eigenvalues of `L⁻¹ B L⁻ᵀ`. Returns the
/// ascending eigenvalues and the generalized eigenvectors as columns.
pub fn generalized_eigen(b: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    let chol = nalgebra::Cholesky::new(h.clone())
        .ok_or_else(|| Error::NotPositiveDefinite { min_eig: min_eigenvalue(h), tol: 0.0 })?;
    let l = chol.l();
    let sym = (b + b.transpose()) * 0.5;
    let x = l.solve_lower_triangular(&sym).expect("Cholesky factor is invertible");
    let c = l.solve_lower_triangular(&x.transpose()).expect("Cholesky factor is invertible");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let r = lt.solve_upper_triangular(&y).expect("Cholesky factor is invertible");
        vectors.set_column(col, &r);
    }
    Ok((values, vectors))
}

/// Which terms enter the assembled matrix; dropping the `Ξ` correction is
/// the ablation used in the audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembleOptions {
    pub fd_step: f64,
    pub with_correction: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { fd_step: DEFAULT_FD_STEP, with_correction: true }
    }
}

pub fn assemble_symmetric<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    u: &[f64; N],
    nu: Vec2,
) -> Result<SymmetrizerReport> {
    assemble_with(sys, u, nu, AssembleOptions::default())
}

pub fn assemble_with<S: LagrangianSystem<N>, const N: usize>(
    sys: &S,
    u: &[f64; N],
    nu: Vec2,
    opts: AssembleOptions,
) -> Result<SymmetrizerReport> {
    check_unit(nu)?;
    let hessian = hessian_eta(sys, u, opts.fd_step)?;
    let jacobian = jacobian_flux(sys, u, nu, opts.fd_step)?;
    let correction = if opts.with_correction {
        jacobian_xi(sys, u, opts.fd_step)?.transpose() * involution_matrix(&sys.involutions(), nu)
    } else {
        DMatrix::zeros(N, N)
    };
    let assembled = &hessian * &jacobian + &correction;
    let hessian_min_eig = min_eigenvalue(&hessian);
    let speeds = if hessian_min_eig > 0.0 { generalized_eigen(&assembled, &hessian)?.0 } else { Vec::new() };
    Ok(SymmetrizerReport {
        direction: nu,
        symmetry_defect: symmetry_defect(&assembled),
        hessian,
        jacobian,
        correction,
        assembled,
        hessian_min_eig,
        speeds,
    })
}

fn check_unit(nu: Vec2) -> Result<()> {
    if (nu.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::validation("nu", format!("direction must be a unit vector, |nu| = {}", nu.norm())));
    }
    Ok(())
}

/// Sorted characteristic speeds in direction `nu`.
pub fn wave_speeds<S: LagrangianSystem<N>, const N: usize>(sys: &S, u: &[f64; N], nu: Vec2) -> Result<Vec<f64>> {
    let r = assemble_symmetric(sys, u, nu)?;
    if r.hessian_min_eig > 0.0 {
        return Ok(r.speeds);
    }
    // A semidefinite Hessian still certifies the speeds when its null space
    // is mapped to zero by both the flux Jacobian and the Ξ correction: that
    // subspace contributes zero speeds and the rest is the generalized
    // problem compressed onto the range of the Hessian.
    let eig = SymmetricEigen::new(r.hessian.clone());
    let tol = 1e-9 * eig.eigenvalues.amax();
    if eig.eigenvalues.min() >= -tol {
        let (range, null): (Vec<usize>, Vec<usize>) = (0..N).partition(|&k| eig.eigenvalues[k] > tol);
        let invariant = null.iter().all(|&k| {
            let v = eig.eigenvectors.column(k);
            (&r.jacobian * v).amax() <= 1e-9 * r.jacobian.amax().max(1.0)
                && (&r.correction * v).amax() <= 1e-9 * r.correction.amax().max(1.0)
        });
        if invariant && !range.is_empty() {
            let q = DMatrix::from_fn(N, range.len(), |i, c| eig.eigenvectors[(i, range[c])]);
            let b = q.transpose() * &r.assembled * &q;
            let h = q.transpose() * &r.hessian * &q;
            let mut speeds = generalized_eigen(&b, &h)?.0;
            speeds.extend(std::iter::repeat_n(0.0, null.len()));
            speeds.sort_by(f64::total_cmp);
            return Ok(speeds);
        }
    }
    Err(Error::NotPositiveDefinite { min_eig: r.hessian_min_eig, tol: 0.0 })
}

/// `sqrt(1 + c² (∂p)²/κ)` with `c = |Cof(F) ν|` and `κ = −∂p`.
pub fn elasto_speed_closed_form(state: &StateElasto7, nu: Vec2, sys: &Elasto7) -> Result<f64> {
    crate::system::elasto_max_speed(state, nu, &sys.law())
}

/// Eigenvalues expected from the closed forms: three zeros, `±1` and
/// `±σ_max` for elasto7; six zeros, `±sqrt(νᵀAν)` and `±σ_max` for ucm10.
pub fn expected_spectrum_elasto(state: &StateElasto7, nu: Vec2, sys: &Elasto7) -> Result<Vec<f64>> {
    let s = elasto_speed_closed_form(state, nu, sys)?;
    let mut v = vec![-s, -1.0, 0.0, 0.0, 0.0, 1.0, s];
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn expected_spectrum_ucm(state: &StateUcm10, nu: Vec2, sys: &Ucm10) -> Result<Vec<f64>> {
    let s = crate::system::ucm_max_speed(state, nu, &sys.law())?;
    let a = crate::tensor::a_from_y(&state.y)?;
    let slow = a.quad(nu).sqrt();
    let mut v = vec![-s, -slow, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, slow, s];
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Sampling ranges of the random admissible states used by the audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRanges {
    pub det_f: (f64, f64),
    pub y_eig: (f64, f64),
    pub max_speed: f64,
    pub gammas: [f64; 3],
    pub ratio: (f64, f64),
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self { det_f: (0.5, 2.0), y_eig: (0.25, 4.0), max_speed: 1.0, gammas: [1.5, 2.0, 3.0], ratio: (0.0, 2.0) }
    }
}

/// `F` with `det F` drawn from the range: rotation times a sheared stretch.
fn random_f(rng: &mut ChaCha8Rng, r: &SampleRanges) -> (Tensor2, f64) {
    let det = rng.random_range(r.det_f.0..=r.det_f.1);
    let s1 = rng.random_range(0.6..1.6);
    let shear = rng.random_range(-0.5..0.5);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let f = Tensor2::rotation(theta).matmul(&Tensor2::new(s1, shear, 0.0, det / s1));
    (f, det2(&f))
}

fn random_velocity(rng: &mut ChaCha8Rng, max: f64) -> Vec2 {
    let r = max * rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Vec2::new(r * t.cos(), r * t.sin())
}

fn random_elastic(rng: &mut ChaCha8Rng, r: &SampleRanges) -> ElasticParams {
    let gamma = r.gammas[rng.random_range(0..r.gammas.len())];
    let ratio = rng.random_range(r.ratio.0..=r.ratio.1);
    ElasticParams::new(1.0, ratio, gamma, 1.0).expect("sampled parameters are valid")
}

pub fn random_elasto_state(rng: &mut ChaCha8Rng, r: &SampleRanges) -> (Elasto7, StateElasto7) {
    let (f, det_f) = random_f(rng, r);
    let u = random_velocity(rng, r.max_speed);
    (Elasto7::new(random_elastic(rng, r)), StateElasto7 { u, det_f, f })
}

pub fn random_ucm_state(rng: &mut ChaCha8Rng, r: &SampleRanges) -> (Ucm10, StateUcm10) {
    let (f, det_f) = random_f(rng, r);
    let u = random_velocity(rng, r.max_speed);
    // log-uniform eigenvalues
    let (lo, hi) = (r.y_eig.0.ln(), r.y_eig.1.ln());
    let l0 = rng.random_range(lo..=hi).exp();
    let l1 = rng.random_range(lo..=hi).exp();
    let y = SymTensor2::from_spectrum(l0, l1, &Tensor2::rotation(rng.random_range(0.0..std::f64::consts::PI)));
    let params = MaxwellParams::new(random_elastic(rng, r), 1.0).expect("valid");
    (Ucm10::new(params), StateUcm10 { u, det_f, f, y })
}

/// The `k`-th of `count` unit directions evenly spaced on the circle.
pub fn direction(k: usize, count: usize) -> Vec2 {
    let t = std::f64::consts::TAU * k as f64 / count as f64;
    Vec2::new(t.cos(), t.sin())
}

/// Summary of a random-state symmetry audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSummary {
    pub system: SystemTag,
    pub samples: usize,
    pub directions: usize,
    pub max_defect: f64,
    pub min_hessian_eig: f64,
    /// Largest defect with the `Ξ` correction removed (states with `u ≠ 0`).
    pub max_ablated_defect: f64,
    /// Largest relative gap between the numeric and closed-form spectra.
    pub max_speed_error: f64,
}

fn spectrum_error(numeric: &[f64], expected: &[f64]) -> f64 {
    let scale = expected.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    numeric.iter().zip(expected).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
}

/// Samples `samples` random admissible states, checks `directions` unit
/// directions at each. Deterministic in `seed`.
pub fn audit(
    tag: SystemTag,
    samples: usize,
    directions: usize,
    seed: u64,
    ranges: &SampleRanges,
) -> Result<AuditSummary> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = AuditSummary {
        system: tag,
        samples,
        directions,
        max_defect: 0.0,
        min_hessian_eig: f64::INFINITY,
        max_ablated_defect: 0.0,
        max_speed_error: 0.0,
    };
    let ablate = AssembleOptions { with_correction: false, ..AssembleOptions::default() };
    for _ in 0..samples {
        match tag {
            SystemTag::Elasto7 => {
                let (sys, st) = random_elasto_state(&mut rng, ranges);
                let u = st.to_array();
                for k in 0..directions {
                    let nu = direction(k, directions);
                    let r = assemble_symmetric(&sys, &u, nu)?;
                    out.max_defect = out.max_defect.max(r.symmetry_defect);
                    out.min_hessian_eig = out.min_hessian_eig.min(r.hessian_min_eig);
                    let e = expected_spectrum_elasto(&st, nu, &sys)?;
                    out.max_speed_error = out.max_speed_error.max(spectrum_error(&r.speeds, &e));
                    if k == 0 && st.u.norm() > 0.0 {
                        let a = assemble_with(&sys, &u, nu, ablate)?;
                        out.max_ablated_defect = out.max_ablated_defect.max(a.symmetry_defect);
                    }
                }
            }
            SystemTag::Ucm10 => {
                let (sys, st) = random_ucm_state(&mut rng, ranges);
                let u = st.to_array();
                for k in 0..directions {
                    let nu = direction(k, directions);
                    let r = assemble_symmetric(&sys, &u, nu)?;
                    out.max_defect = out.max_defect.max(r.symmetry_defect);
                    out.min_hessian_eig = out.min_hessian_eig.min(r.hessian_min_eig);
                    let e = expected_spectrum_ucm(&st, nu, &sys)?;
                    out.max_speed_error = out.max_speed_error.max(spectrum_error(&r.speeds, &e));
                    if k == 0 && st.u.norm() > 0.0 {
                        let a = assemble_with(&sys, &u, nu, ablate)?;
                        out.max_ablated_defect = out.max_ablated_defect.max(a.symmetry_defect);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{jacobian_elasto, DET_F, FXA, FXB, UX, YAA};

    fn canonical() -> (Elasto7, [f64; 7]) {
        let p = ElasticParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        (Elasto7::new(p), StateElasto7::rest().to_array())
    }

    #[test]
    fn hessian_at_rest() {
        let (sys, u) = canonical();
        let h = hessian_eta(&sys, &u, DEFAULT_FD_STEP).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0]));
        assert!((h - expected).amax() < 1e-9);
    }

    #[test]
    fn canonical_assembled_entries_and_spectrum() {
        let (sys, u) = canonical();
        let r = assemble_symmetric(&sys, &u, Vec2::new(1.0, 0.0)).unwrap();
        assert!((r.assembled[(UX, DET_F)] + 2.0).abs() < 1e-8);
        assert!((r.assembled[(UX, FXA)] + 1.0).abs() < 1e-8);
        assert!(r.assembled[(UX, FXB)].abs() < 1e-8);
        let s3 = 3f64.sqrt();
        let expected = [-s3, -1.0, 0.0, 0.0, 0.0, 1.0, s3];
        for (a, b) in r.speeds.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8, "{:?}", r.speeds);
        }
    }

    #[test]
    fn zero_pressure_speeds() {
        let p = ElasticParams::new(1.0, 0.0, 2.0, 1.0).unwrap();
        let sys = Elasto7::new(p);
        let st = StateElasto7 { u: Vec2::new(0.3, 0.1), det_f: 1.3, f: Tensor2::new(1.2, 0.1, 0.2, 1.1) };
        for s in wave_speeds(&sys, &st.to_array(), Vec2::new(0.6, 0.8)).unwrap() {
            assert!(s.abs() < 1e-8 || (s.abs() - 1.0).abs() < 1e-8, "{s}");
        }
    }

    #[test]
    fn scaled_stretch_speed() {
        let (sys, _) = canonical();
        let st = StateElasto7 { u: Vec2::default(), det_f: 2.0, f: Tensor2::diag(2.0, 1.0) };
        let nu = Vec2::new(1.0, 0.0);
        let s = wave_speeds(&sys, &st.to_array(), nu).unwrap();
        assert!((s[6] - 1.25f64.sqrt()).abs() < 1e-8);
        assert!((elasto_speed_closed_form(&st, nu, &sys).unwrap() - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let (sys, _) = canonical();
        let st = StateElasto7 { u: Vec2::new(0.4, -0.2), det_f: 0.8, f: Tensor2::new(0.9, 0.2, -0.1, 0.95) };
        let nu = Vec2::new(0.28, 0.96);
        let fd = jacobian_flux(&sys, &st.to_array(), nu, DEFAULT_FD_STEP).unwrap();
        let an = jacobian_elasto(&st, nu, &sys.law()).unwrap();
        let scale = fd.amax();
        for r in 0..7 {
            for c in 0..7 {
                assert!((fd[(r, c)] - an[r][c]).abs() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn hessian_scales_with_entropy() {
        // doubling the normalized energy doubles the Hessian: compare against a
        // system whose entropy gradient is twice as large
        struct Doubled(Elasto7);
        impl LagrangianSystem<7> for Doubled {
            fn tag(&self) -> SystemTag {
                self.0.tag()
            }
            fn field_names(&self) -> &'static [&'static str] {
                self.0.field_names()
            }
            fn flux(&self, u: &[f64; 7]) -> Result<crate::system::FluxPair<7>> {
                self.0.flux(u)
            }
            fn entropy(&self, u: &[f64; 7]) -> Result<f64> {
                Ok(2.0 * self.0.entropy(u)?)
            }
            fn entropy_gradient(&self, u: &[f64; 7]) -> Result<[f64; 7]> {
                Ok(self.0.entropy_gradient(u)?.map(|v| 2.0 * v))
            }
            fn xi(&self, u: &[f64; 7]) -> Result<Vec2> {
                self.0.xi(u)
            }
            fn involutions(&self) -> InvolutionSet<7> {
                self.0.involutions()
            }
            fn max_speed(&self, u: &[f64; 7], nu: Vec2) -> Result<f64> {
                self.0.max_speed(u, nu)
            }
            fn check_admissible(&self, u: &[f64; 7]) -> std::result::Result<(), String> {
                self.0.check_admissible(u)
            }
            fn total_energy(&self, u: &[f64; 7]) -> Result<f64> {
                self.0.total_energy(u)
            }
        }
        let (sys, _) = canonical();
        let st = StateElasto7 { u: Vec2::new(0.1, 0.2), det_f: 1.1, f: Tensor2::new(1.0, 0.1, 0.0, 1.05) }.to_array();
        let h1 = hessian_eta(&sys, &st, DEFAULT_FD_STEP).unwrap();
        let h2 = hessian_eta(&Doubled(sys), &st, DEFAULT_FD_STEP).unwrap();
        assert!((h2 - h1 * 2.0).amax() < 1e-12);
    }

    #[test]
    fn ucm_rest_spectrum_and_zero_y_rows() {
        let p = MaxwellParams::new(ElasticParams::default(), 1.0).unwrap();
        let sys = Ucm10::new(p);
        let u = StateUcm10::rest().to_array();
        let r = assemble_symmetric(&sys, &u, Vec2::new(1.0, 0.0)).unwrap();
        for row in YAA..10 {
            assert_eq!(r.jacobian.row(row).amax(), 0.0);
        }
        assert!(r.symmetry_defect < 1e-7);
        let s = &r.speeds;
        assert_eq!(s.len(), 10);
        for k in 0..5 {
            assert!((s[k] + s[9 - k]).abs() < 1e-9);
        }
        assert_eq!(s.iter().filter(|v| v.abs() < 1e-8).count(), 6);
    }

    #[test]
    fn ucm_upper_left_block_coincides_with_elasto() {
        let p = ElasticParams::new(1.0, 0.8, 2.0, 1.0).unwrap();
        let ucm = Ucm10::new(MaxwellParams::new(p, 1.0).unwrap());
        let elasto = Elasto7::with_law(p, ucm.law()).unwrap();
        let st = StateUcm10 {
            u: Vec2::new(0.3, -0.4),
            det_f: 1.2,
            f: Tensor2::new(1.1, 0.1, -0.2, 1.0),
            y: SymTensor2::IDENTITY,
        };
        let nu = Vec2::new(0.6, 0.8);
        let ru = assemble_symmetric(&ucm, &st.to_array(), nu).unwrap();
        let re = assemble_symmetric(&elasto, &st.elastic_part().to_array(), nu).unwrap();
        let block = ru.assembled.view((0, 0), (7, 7)).into_owned();
        assert!((block - re.assembled).amax() < 1e-7);
    }

    #[test]
    fn small_audits_pass() {
        let r = SampleRanges::default();
        for tag in [SystemTag::Elasto7, SystemTag::Ucm10] {
            let a = audit(tag, 25, 8, 7, &r).unwrap();
            assert!(a.max_defect <= 1e-7, "{a:?}");
            assert!(a.min_hessian_eig > 0.0, "{a:?}");
            assert!(a.max_ablated_defect > 1e-3, "{a:?}");
            assert!(a.max_speed_error < 1e-6, "{a:?}");
            assert_eq!(a, audit(tag, 25, 8, 7, &r).unwrap());
        }
    }

    #[test]
    fn rejects_non_unit_direction() {
        let (sys, u) = canonical();
        assert!(matches!(assemble_symmetric(&sys, &u, Vec2::new(1.0, 1.0)), Err(Error::Validation { .. })));
    }

    #[test]
    fn perturbation_failure_is_reported() {
        let (sys, _) = canonical();
        let mut u = StateElasto7::rest().to_array();
        u[DET_F] = 1e-12;
        assert!(matches!(hessian_eta(&sys, &u, DEFAULT_FD_STEP), Err(Error::InadmissiblePerturbation { attempts: 3 })));
    }
}
