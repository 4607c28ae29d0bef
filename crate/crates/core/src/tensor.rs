//! Small dense tensor algebra in two dimensions.
//!
//! `Tensor2` stores a general 2×2 tensor. For two-point tensors such as the
//! deformation gradient the row index is spatial (x, y) and the column index
//! is material (a, b); purely spatial or purely material tensors reuse the same
//! storage with the obvious reading. `SymTensor2` stores only the upper
//! triangle, so symmetry holds by construction.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// General 2×2 tensor, `[[xa, xb], [ya, yb]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor2 {
    pub xa: f64,
    pub xb: f64,
    pub ya: f64,
    pub yb: f64,
}

impl Tensor2 {
    pub const IDENTITY: Tensor2 = Tensor2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Tensor2 = Tensor2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(xa: f64, xb: f64, ya: f64, yb: f64) -> Self {
        Self { xa, xb, ya, yb }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, -s, s, c)
    }

    pub fn from_rows(r0: [f64; 2], r1: [f64; 2]) -> Self {
        Self::new(r0[0], r0[1], r1[0], r1[1])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        match (row, col) {
            (0, 0) => self.xa,
            (0, 1) => self.xb,
            (1, 0) => self.ya,
            (1, 1) => self.yb,
            _ => panic!("Tensor2 index ({row}, {col}) out of range"),
        }
    }

    pub fn transpose(&self) -> Tensor2 {
        Tensor2::new(self.xa, self.ya, self.xb, self.yb)
    }

    pub fn trace(&self) -> f64 {
        self.xa + self.yb
    }

    pub fn matmul(&self, o: &Tensor2) -> Tensor2 {
        Tensor2::new(
            self.xa * o.xa + self.xb * o.ya,
            self.xa * o.xb + self.xb * o.yb,
            self.ya * o.xa + self.yb * o.ya,
            self.ya * o.xb + self.yb * o.yb,
        )
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xa * v.x + self.xb * v.y, self.ya * v.x + self.yb * v.y)
    }

    pub fn row(&self, i: usize) -> Vec2 {
        match i {
            0 => Vec2::new(self.xa, self.xb),
            1 => Vec2::new(self.ya, self.yb),
            _ => panic!("row {i} out of range"),
        }
    }

    /// Symmetric part `(T + Tᵀ)/2`.
    pub fn sym(&self) -> SymTensor2 {
        SymTensor2::new(self.xa, 0.5 * (self.xb + self.ya), self.yb)
    }

    pub fn max_abs(&self) -> f64 {
        self.xa.abs().max(self.xb.abs()).max(self.ya.abs()).max(self.yb.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.xa.is_finite() && self.xb.is_finite() && self.ya.is_finite() && self.yb.is_finite()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.xa, self.xb, self.ya, self.yb]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// `T S Tᵀ` for symmetric `S`; the result is symmetric by construction.
    pub fn congruence(&self, s: &SymTensor2) -> SymTensor2 {
        let ts = self.matmul(&s.to_tensor());
        let r0 = ts.row(0);
        let r1 = ts.row(1);
        let t0 = self.row(0);
        let t1 = self.row(1);
        SymTensor2::new(r0.dot(t0), r0.dot(t1), r1.dot(t1))
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, o: Tensor2) -> Tensor2 {
        Tensor2::new(self.xa + o.xa, self.xb + o.xb, self.ya + o.ya, self.yb + o.yb)
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, o: Tensor2) -> Tensor2 {
        Tensor2::new(self.xa - o.xa, self.xb - o.xb, self.ya - o.ya, self.yb - o.yb)
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Tensor2 {
        Tensor2::new(self.xa * s, self.xb * s, self.ya * s, self.yb * s)
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self * -1.0
    }
}

/// Symmetric 2×2 tensor `[[aa, ab], [ab, bb]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    pub aa: f64,
    pub ab: f64,
    pub bb: f64,
}

impl SymTensor2 {
    pub const IDENTITY: SymTensor2 = SymTensor2::new(1.0, 0.0, 1.0);
    pub const ZERO: SymTensor2 = SymTensor2::new(0.0, 0.0, 0.0);

    pub const fn new(aa: f64, ab: f64, bb: f64) -> Self {
        Self { aa, ab, bb }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    /// `V diag(l0, l1) Vᵀ` where the columns of `v` are the eigenvectors.
    pub fn from_spectrum(l0: f64, l1: f64, v: &Tensor2) -> Self {
        let (c0, c1) = (Vec2::new(v.xa, v.ya), Vec2::new(v.xb, v.yb));
        SymTensor2::new(
            l0 * c0.x * c0.x + l1 * c1.x * c1.x,
            l0 * c0.x * c0.y + l1 * c1.x * c1.y,
            l0 * c0.y * c0.y + l1 * c1.y * c1.y,
        )
    }

    pub fn to_tensor(&self) -> Tensor2 {
        Tensor2::new(self.aa, self.ab, self.ab, self.bb)
    }

    pub fn trace(&self) -> f64 {
        self.aa + self.bb
    }

    pub fn det(&self) -> f64 {
        self.aa * self.bb - self.ab * self.ab
    }

    pub fn max_abs(&self) -> f64 {
        self.aa.abs().max(self.ab.abs()).max(self.bb.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.aa.is_finite() && self.ab.is_finite() && self.bb.is_finite()
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.aa, self.ab, self.bb]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn quad(&self, v: Vec2) -> f64 {
        self.aa * v.x * v.x + 2.0 * self.ab * v.x * v.y + self.bb * v.y * v.y
    }

    /// Product of two symmetric tensors (not symmetric in general).
    pub fn matmul(&self, o: &SymTensor2) -> Tensor2 {
        self.to_tensor().matmul(&o.to_tensor())
    }

    /// Inverse of a symmetric tensor, checked against `tol` on the determinant.
    pub fn inverse(&self, tol: f64) -> Result<SymTensor2> {
        let det = self.det();
        if det.abs() <= tol || !det.is_finite() {
            return Err(Error::SingularTensor { det, tol });
        }
        Ok(SymTensor2::new(self.bb / det, -self.ab / det, self.aa / det))
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.aa + o.aa, self.ab + o.ab, self.bb + o.bb)
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.aa - o.aa, self.ab - o.ab, self.bb - o.bb)
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        SymTensor2::new(self.aa * s, self.ab * s, self.bb * s)
    }
}

/// Scale-invariant singularity guard, `1e-12 · max|entry|`.
pub fn default_tol(max_abs_entry: f64) -> f64 {
    1e-12 * max_abs_entry
}

pub fn det2(t: &Tensor2) -> f64 {
    t.xa * t.yb - t.xb * t.ya
}

/// Cofactor matrix, with `T · Cof(T)ᵀ = det(T) I`.
///
/// Row x of the cofactor contracted with a material direction ν gives
/// `Fʸb νa − Fʸa νb`, the combination appearing in the momentum/volume
/// coupling of the Lagrangian systems.
pub fn cofactor2(t: &Tensor2) -> Tensor2 {
    Tensor2::new(t.yb, -t.ya, -t.xb, t.xa)
}

pub fn inverse2(t: &Tensor2, tol: f64) -> Result<Tensor2> {
    let det = det2(t);
    if det.abs() <= tol || !det.is_finite() {
        return Err(Error::SingularTensor { det, tol });
    }
    Ok(cofactor2(t).transpose() * (1.0 / det))
}

/// Spectral decomposition of a symmetric 2×2 tensor.
///
/// Eigenvalues are sorted descending; the columns of the returned tensor are
/// the matching orthonormal eigenvectors. No positivity check is made.
pub fn spd_eigendecomp(s: &SymTensor2) -> ([f64; 2], Tensor2) {
    let mean = 0.5 * (s.aa + s.bb);
    let half_diff = 0.5 * (s.aa - s.bb);
    let radius = half_diff.hypot(s.ab);
    let l0 = mean + radius;
    let l1 = mean - radius;
    let theta = 0.5 * s.ab.atan2(half_diff);
    let (sn, cs) = theta.sin_cos();
    // columns: (cs, sn) for l0 and (-sn, cs) for l1
    ([l0, l1], Tensor2::new(cs, -sn, sn, cs))
}

/// Applies a scalar function to the spectrum of `s`, after checking that the
/// smallest eigenvalue exceeds `tol`.
pub fn spd_map(s: &SymTensor2, tol: f64, f: impl Fn(f64) -> f64) -> Result<SymTensor2> {
    let ([l0, l1], v) = spd_eigendecomp(s);
    if !(l1 > tol) {
        return Err(Error::NotPositiveDefinite { min_eig: l1, tol });
    }
    Ok(SymTensor2::from_spectrum(f(l0), f(l1), &v))
}

pub fn spd_inv_sqrt(s: &SymTensor2, tol: f64) -> Result<SymTensor2> {
    spd_map(s, tol, |l| 1.0 / l.sqrt())
}

pub fn spd_sqrt(s: &SymTensor2, tol: f64) -> Result<SymTensor2> {
    spd_map(s, tol, f64::sqrt)
}

/// Closed-form relaxation tensor from the symmetrizing variable `Y`,
/// `Δ = det Y`, `δ = sqrt(tr Y + 2 sqrt Δ)`:
///
/// `Aᵃᵃ = (Yᵇᵇ + √Δ)/δ`, `Aᵃᵇ = −Yᵃᵇ/δ`, `Aᵇᵇ = (Yᵃᵃ + √Δ)/δ`.
///
/// This is the adjugate of `√Y`, i.e. `√(det Y) · Y^(−1/2)`; the runtime map
/// `A = Y^(−1/2)` is [`a_from_y`].
pub fn a_from_y_closed_form(y: &SymTensor2) -> Result<SymTensor2> {
    let delta_det = y.det();
    if !(y.aa > 0.0 && delta_det > 0.0) {
        let ([_, l1], _) = spd_eigendecomp(y);
        return Err(Error::NotPositiveDefinite { min_eig: l1, tol: 0.0 });
    }
    let root = delta_det.sqrt();
    let delta = (y.aa + y.bb + 2.0 * root).sqrt();
    Ok(SymTensor2::new((y.bb + root) / delta, -y.ab / delta, (y.aa + root) / delta))
}

/// Runtime map from the stored variable `Y` to the relaxation tensor, `A = Y^(−1/2)`.
pub fn a_from_y(y: &SymTensor2) -> Result<SymTensor2> {
    spd_inv_sqrt(y, default_tol(y.max_abs()))
}

/// Inverse of [`a_from_y`], `Y = A⁻²`.
pub fn y_from_a(a: &SymTensor2) -> Result<SymTensor2> {
    spd_map(a, default_tol(a.max_abs()), |l| 1.0 / (l * l))
}

/// Double contraction `Sa : Sb`.
pub trait Frobenius {
    fn frob(&self, other: &Self) -> f64;
}

impl Frobenius for Tensor2 {
    fn frob(&self, o: &Tensor2) -> f64 {
        self.xa * o.xa + self.xb * o.xb + self.ya * o.ya + self.yb * o.yb
    }
}

impl Frobenius for SymTensor2 {
    fn frob(&self, o: &SymTensor2) -> f64 {
        self.aa * o.aa + 2.0 * self.ab * o.ab + self.bb * o.bb
    }
}

pub fn frob<T: Frobenius>(a: &T, b: &T) -> f64 {
    a.frob(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn sym_close(a: &SymTensor2, b: &SymTensor2, rel: f64) -> bool {
        let scale = a.max_abs().max(b.max_abs()).max(1e-300);
        (*a - *b).max_abs() <= rel * scale
    }

    fn random_spd(l0: f64, l1: f64, theta: f64) -> SymTensor2 {
        SymTensor2::from_spectrum(l0, l1, &Tensor2::rotation(theta))
    }

    #[test]
    fn det2_examples() {
        assert_eq!(det2(&Tensor2::IDENTITY), 1.0);
        assert_eq!(det2(&Tensor2::diag(2.0, 3.0)), 6.0);
        assert_eq!(det2(&Tensor2::from_rows([1.0, 2.0], [3.0, 4.0])), -2.0);
    }

    #[test]
    fn cofactor_examples() {
        assert_eq!(cofactor2(&Tensor2::IDENTITY), Tensor2::IDENTITY);
        let d = Tensor2::diag(2.0, 3.0);
        let c = cofactor2(&d);
        assert_eq!(c, Tensor2::diag(3.0, 2.0));
        assert_eq!(d.matmul(&c.transpose()), Tensor2::diag(6.0, 6.0));
    }

    #[test]
    fn cofactor_row_x_matches_direction_shorthand() {
        // e_x C ν = Fʸb νa − Fʸa νb, e_y C ν = −Fˣb νa + Fˣa νb
        let f = Tensor2::new(1.3, -0.4, 0.7, 2.1);
        let nu = Vec2::new(0.6, 0.8);
        let cnu = cofactor2(&f).apply(nu);
        assert!(close(cnu.x, f.yb * nu.x - f.ya * nu.y, 1e-15));
        assert!(close(cnu.y, -f.xb * nu.x + f.xa * nu.y, 1e-15));
    }

    #[test]
    fn inverse_examples() {
        let tol = 1e-12;
        assert_eq!(inverse2(&Tensor2::IDENTITY, tol).unwrap(), Tensor2::IDENTITY);
        assert_eq!(inverse2(&Tensor2::diag(2.0, 4.0), tol).unwrap(), Tensor2::diag(0.5, 0.25));
        let singular = Tensor2::from_rows([1.0, 2.0], [2.0, 4.0]);
        assert!(matches!(inverse2(&singular, tol), Err(Error::SingularTensor { .. })));
    }

    #[test]
    fn eigendecomp_examples() {
        let (l, _) = spd_eigendecomp(&SymTensor2::IDENTITY);
        assert_eq!(l, [1.0, 1.0]);
        let (l, v) = spd_eigendecomp(&SymTensor2::diag(4.0, 1.0));
        assert_eq!(l, [4.0, 1.0]);
        assert!(close(v.xa.abs(), 1.0, 1e-15) && v.ya.abs() < 1e-15);
        let (l, _) = spd_eigendecomp(&SymTensor2::new(2.0, 1.0, 2.0));
        assert!(close(l[0], 3.0, 1e-15) && close(l[1], 1.0, 1e-15));
        // ascending diagonal still sorts descending
        let (l, v) = spd_eigendecomp(&SymTensor2::diag(1.0, 4.0));
        assert_eq!(l, [4.0, 1.0]);
        assert!(close(v.ya.abs(), 1.0, 1e-15));
    }

    #[test]
    fn inv_sqrt_examples() {
        let tol = 1e-12;
        assert!(sym_close(&spd_inv_sqrt(&SymTensor2::IDENTITY, tol).unwrap(), &SymTensor2::IDENTITY, 1e-15));
        assert!(sym_close(
            &spd_inv_sqrt(&SymTensor2::diag(4.0, 1.0), tol).unwrap(),
            &SymTensor2::diag(0.5, 1.0),
            1e-15
        ));
        assert!(matches!(spd_inv_sqrt(&SymTensor2::diag(1.0, 0.0), tol), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn closed_form_examples() {
        let a = a_from_y_closed_form(&SymTensor2::IDENTITY).unwrap();
        assert!(sym_close(&a, &SymTensor2::IDENTITY, 1e-15));
        let a = a_from_y_closed_form(&SymTensor2::diag(4.0, 1.0)).unwrap();
        assert!(sym_close(&a, &SymTensor2::diag(1.0, 2.0), 1e-15));
        let scaled = spd_inv_sqrt(&SymTensor2::diag(4.0, 1.0), 1e-12).unwrap() * 2.0;
        assert!(sym_close(&a, &scaled, 1e-15));
        assert!(a_from_y_closed_form(&SymTensor2::diag(-1.0, 1.0)).is_err());
    }

    #[test]
    fn frob_examples() {
        assert_eq!(frob(&Tensor2::IDENTITY, &Tensor2::IDENTITY), 2.0);
        assert_eq!(frob(&Tensor2::diag(2.0, 3.0), &Tensor2::diag(1.0, 1.0)), 5.0);
        let s = SymTensor2::new(1.0, 2.0, 3.0);
        assert_eq!(frob(&s, &s), frob(&s.to_tensor(), &s.to_tensor()));
    }

    #[test]
    fn congruence_matches_explicit_product() {
        let f = Tensor2::new(1.2, 0.3, -0.5, 0.9);
        let a = SymTensor2::new(2.0, 0.4, 0.7);
        let explicit = f.matmul(&a.to_tensor()).matmul(&f.transpose());
        let c = f.congruence(&a);
        assert!(close(c.aa, explicit.xa, 1e-15));
        assert!(close(c.ab, explicit.xb, 1e-15));
        assert!(close(c.ab, explicit.ya, 1e-15));
        assert!(close(c.bb, explicit.yb, 1e-15));
    }

    #[test]
    fn y_from_a_inverts_a_from_y() {
        let y = random_spd(3.0, 0.4, 0.7);
        let a = a_from_y(&y).unwrap();
        assert!(sym_close(&y_from_a(&a).unwrap(), &y, 1e-13));
    }

    proptest! {
        #[test]
        fn cofactor_identity(xa in -10.0..10.0f64, xb in -10.0..10.0f64, ya in -10.0..10.0f64, yb in -10.0..10.0f64) {
            let t = Tensor2::new(xa, xb, ya, yb);
            let c = cofactor2(&t);
            let prod = t.matmul(&c.transpose());
            let d = det2(&t);
            let scale = t.max_abs().powi(2).max(1e-300);
            prop_assert!((prod - Tensor2::diag(d, d)).max_abs() <= 1e-14 * scale);
            prop_assert_eq!(det2(&c), d);
            prop_assert!(frob(&t, &t) >= 0.0);
        }

        #[test]
        fn eigendecomp_reconstructs(l0 in -5.0..5.0f64, l1 in -5.0..5.0f64, th in 0.0..6.3f64) {
            let s = random_spd(l0, l1, th);
            let (l, v) = spd_eigendecomp(&s);
            prop_assert!(l[0] >= l[1]);
            let orth = v.transpose().matmul(&v) - Tensor2::IDENTITY;
            prop_assert!(orth.max_abs() < 1e-15);
            let back = SymTensor2::from_spectrum(l[0], l[1], &v);
            prop_assert!((back - s).max_abs() <= 1e-12 * s.max_abs().max(1e-300));
        }

        #[test]
        fn inv_sqrt_squares_to_inverse(e0 in -2.0..2.0f64, e1 in -2.0..2.0f64, th in 0.0..6.3f64) {
            let y = random_spd(10f64.powf(e0), 10f64.powf(e1), th);
            let r = spd_inv_sqrt(&y, default_tol(y.max_abs())).unwrap();
            let prod = r.matmul(&r).matmul(&y.to_tensor());
            prop_assert!((prod - Tensor2::IDENTITY).max_abs() <= 1e-10);
        }

        #[test]
        fn closed_form_is_scaled_inv_sqrt(e0 in -2.0..2.0f64, e1 in -2.0..2.0f64, th in 0.0..6.3f64) {
            let y = random_spd(10f64.powf(e0), 10f64.powf(e1), th);
            let closed = a_from_y_closed_form(&y).unwrap();
            let reference = spd_inv_sqrt(&y, default_tol(y.max_abs())).unwrap() * y.det().sqrt();
            prop_assert!(sym_close(&closed, &reference, 1e-12));
        }
    }
}
