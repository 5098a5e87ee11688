//! Arithmetic of the complexified quaternions ℍ_ℂ and their real forms.
//!
//! Elements are stored as four complex coefficients in the basis
//! `e0, e1, e2, e3` (`e1 e2 = e3`, `e_i^2 = -1`). Under the standard matrix
//! realization ℍ_ℂ is the algebra of complex 2×2 matrices and the quadratic
//! form `N(Z) = Z Z⁺` becomes the determinant.
//!
//! The three real forms are
//! * ℍ, real span of `e0, e1, e2, e3` (signature (4,0)),
//! * ℍ_ℝ, the split quaternions, real span of `e0, ẽ1 = i e1, ẽ2 = -i e2, e3` (signature (2,2)),
//! * 𝕄, Minkowski space, real span of `ẽ0 = -i e0, e1, e2, e3` (signature (3,1)).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A complex 2×2 matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Element of ℍ_ℂ: `z[0] e0 + z[1] e1 + z[2] e2 + z[3] e3`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Biquaternion {
    pub z: [Complex64; 4],
}

/// Which of the three commuting conjugations to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Conjugation {
    /// `Zᶜ`: complex conjugation of the coefficients (fixes ℍ).
    Complex,
    /// `Z⁺`: quaternionic conjugation, an anti-involution.
    Plus,
    /// `Z⁻ = -e3 Z e3`: conjugation by `e3`.
    Minus,
}

impl Biquaternion {
    pub const ZERO: Self = Self { z: [ZERO; 4] };
    pub const E0: Self = Self::basis_const(0, ONE);
    pub const E1: Self = Self::basis_const(1, ONE);
    pub const E2: Self = Self::basis_const(2, ONE);
    pub const E3: Self = Self::basis_const(3, ONE);
    /// `ẽ0 = -i e0`, spans the time axis of 𝕄.
    pub const E0_TILDE: Self = Self::basis_const(0, Complex64::new(0.0, -1.0));
    /// `ẽ1 = i e1`.
    pub const E1_TILDE: Self = Self::basis_const(1, I);
    /// `ẽ2 = -i e2`.
    pub const E2_TILDE: Self = Self::basis_const(2, Complex64::new(0.0, -1.0));
    /// `ẽ3 = i e3 = diag(1, -1)`.
    pub const E3_TILDE: Self = Self::basis_const(3, I);

    const fn basis_const(k: usize, c: Complex64) -> Self {
        let mut z = [ZERO; 4];
        z[k] = c;
        Self { z }
    }

    pub const fn new(z0: Complex64, z1: Complex64, z2: Complex64, z3: Complex64) -> Self {
        Self { z: [z0, z1, z2, z3] }
    }

    pub fn from_real(x: [f64; 4]) -> Self {
        Self {
            z: x.map(|v| Complex64::new(v, 0.0)),
        }
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::basis_const(0, c)
    }

    /// The basis unit `e_k`.
    pub fn basis(k: usize) -> Self {
        Self::basis_const(k, ONE)
    }

    pub fn to_matrix(&self) -> Matrix2 {
        let [z0, z1, z2, z3] = self.z;
        [
            [z0 - I * z3, -I * z1 - z2],
            [-I * z1 + z2, z0 + I * z3],
        ]
    }

    pub fn from_matrix(m: &Matrix2) -> Self {
        let half = 0.5;
        Self {
            z: [
                (m[0][0] + m[1][1]) * half,
                I * (m[0][1] + m[1][0]) * half,
                (m[1][0] - m[0][1]) * half,
                I * (m[0][0] - m[1][1]) * half,
            ],
        }
    }

    pub fn conj_c(&self) -> Self {
        Self {
            z: self.z.map(|c| c.conj()),
        }
    }

    pub fn plus(&self) -> Self {
        let [z0, z1, z2, z3] = self.z;
        Self::new(z0, -z1, -z2, -z3)
    }

    pub fn minus(&self) -> Self {
        let [z0, z1, z2, z3] = self.z;
        Self::new(z0, -z1, -z2, z3)
    }

    pub fn conjugate(&self, kind: Conjugation) -> Self {
        match kind {
            Conjugation::Complex => self.conj_c(),
            Conjugation::Plus => self.plus(),
            Conjugation::Minus => self.minus(),
        }
    }

    /// The quadratic form `N(Z) = (z0)² + (z1)² + (z2)² + (z3)²`, equal to `det M(Z)`.
    pub fn quad_form(&self) -> Complex64 {
        self.z.iter().map(|c| c * c).sum()
    }

    /// `S(Z) = z11 z22 + z12 z21`; equals `‖X‖²` on ℍ_ℝ.
    pub fn form_s(&self) -> Complex64 {
        let [z0, z1, z2, z3] = self.z;
        z0 * z0 - z1 * z1 - z2 * z2 + z3 * z3
    }

    /// Symmetric complex-bilinear pairing `½ tr(Z⁺ W)`.
    pub fn pairing(&self, w: &Self) -> Complex64 {
        self.z.iter().zip(w.z.iter()).map(|(a, b)| a * b).sum()
    }

    /// `(1/√2) (Σ |z_ij|²)^½` over matrix entries, which is the Euclidean
    /// norm of the coefficient vector.
    pub fn euclid_norm(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.z.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn singularity_tolerance(&self) -> f64 {
        1e-12 * self.euclid_norm().powi(2).max(1.0)
    }

    /// `Z⁻¹ = Z⁺ / N(Z)` with the default scale-relative singularity test.
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_with_tol(self.singularity_tolerance())
    }

    pub fn inverse_with_tol(&self, tolerance: f64) -> Result<Self> {
        let n = self.quad_form();
        if n.norm() <= tolerance {
            return Err(Error::SingularElement {
                norm_value: n.norm(),
                tolerance,
            });
        }
        Ok(self.plus() * n.inv())
    }

    pub fn trace(&self) -> Complex64 {
        2.0 * self.z[0]
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(|c| c.is_finite())
    }

    /// Real forms whose defining identity holds within `tol` componentwise.
    pub fn classify_real_form(&self, tol: f64) -> Vec<RealForm> {
        RealForm::ALL
            .into_iter()
            .filter(|form| form.contains(self, tol))
            .collect()
    }
}

impl fmt::Display for Biquaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.z;
        write!(f, "({a})e0 + ({b})e1 + ({c})e2 + ({d})e3")
    }
}

impl Add for Biquaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            z: std::array::from_fn(|k| self.z[k] + rhs.z[k]),
        }
    }
}

impl AddAssign for Biquaternion {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.z.iter_mut().zip(rhs.z) {
            *a += b;
        }
    }
}

impl Sub for Biquaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            z: std::array::from_fn(|k| self.z[k] - rhs.z[k]),
        }
    }
}

impl SubAssign for Biquaternion {
    fn sub_assign(&mut self, rhs: Self) {
        for (a, b) in self.z.iter_mut().zip(rhs.z) {
            *a -= b;
        }
    }
}

impl Neg for Biquaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self { z: self.z.map(|c| -c) }
    }
}

/// The (noncommutative) algebra product.
impl Mul for Biquaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.z;
        let [b0, b1, b2, b3] = rhs.z;
        Self::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl Mul<Complex64> for Biquaternion {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        Self {
            z: self.z.map(|c| c * rhs),
        }
    }
}

impl Mul<Biquaternion> for Complex64 {
    type Output = Biquaternion;
    fn mul(self, rhs: Biquaternion) -> Biquaternion {
        rhs * self
    }
}

impl Mul<f64> for Biquaternion {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self {
            z: self.z.map(|c| c * rhs),
        }
    }
}

impl Mul<Biquaternion> for f64 {
    type Output = Biquaternion;
    fn mul(self, rhs: Biquaternion) -> Biquaternion {
        rhs * self
    }
}

impl Div<f64> for Biquaternion {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self {
            z: self.z.map(|c| c / rhs),
        }
    }
}

impl Div<Complex64> for Biquaternion {
    type Output = Self;
    fn div(self, rhs: Complex64) -> Self {
        self * rhs.inv()
    }
}

impl std::iter::Sum for Biquaternion {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

pub fn mat2_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn mat2_det(m: &Matrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Conjugate transpose.
pub fn mat2_adjoint(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// One of the three real forms of ℍ_ℂ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RealForm {
    /// Classical quaternions: `Zᶜ = Z`.
    H,
    /// Split quaternions: `Zᶜ⁻ = Z`.
    HR,
    /// Minkowski space: `Zᶜ⁺ = -Z`.
    M,
}

impl RealForm {
    pub const ALL: [RealForm; 3] = [RealForm::H, RealForm::HR, RealForm::M];

    /// Scalars `c_k` such that the real basis of this form is `c_k e_k`.
    pub fn basis_scales(self) -> [Complex64; 4] {
        let mi = Complex64::new(0.0, -1.0);
        match self {
            RealForm::H => [ONE; 4],
            RealForm::HR => [ONE, I, mi, ONE],
            RealForm::M => [mi, ONE, ONE, ONE],
        }
    }

    pub fn basis(self) -> [Biquaternion; 4] {
        let scales = self.basis_scales();
        std::array::from_fn(|k| Biquaternion::basis_const(k, scales[k]))
    }

    /// Whether `z` satisfies this form's defining conjugation identity within `tol`.
    pub fn contains(self, z: &Biquaternion, tol: f64) -> bool {
        let image = match self {
            RealForm::H => z.conj_c(),
            RealForm::HR => z.conj_c().minus(),
            RealForm::M => -z.conj_c().plus(),
        };
        (image - *z).max_abs() <= tol
    }
}

/// A point of ℍ, ℍ_ℝ or 𝕄 given by real coordinates in the form's own basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealFormPoint {
    pub form: RealForm,
    pub coords: [f64; 4],
}

impl RealFormPoint {
    pub fn new(form: RealForm, coords: [f64; 4]) -> Self {
        Self { form, coords }
    }

    pub fn hr(coords: [f64; 4]) -> Self {
        Self::new(RealForm::HR, coords)
    }

    pub fn h(coords: [f64; 4]) -> Self {
        Self::new(RealForm::H, coords)
    }

    pub fn embed(&self) -> Biquaternion {
        let scales = self.form.basis_scales();
        Biquaternion {
            z: std::array::from_fn(|k| scales[k] * self.coords[k]),
        }
    }

    /// Inverse of [`embed`](Self::embed); imaginary residue outside the form is discarded.
    pub fn from_biquaternion(form: RealForm, z: &Biquaternion) -> Self {
        let scales = form.basis_scales();
        Self {
            form,
            coords: std::array::from_fn(|k| (z.z[k] / scales[k]).re),
        }
    }
}

impl From<RealFormPoint> for Biquaternion {
    fn from(p: RealFormPoint) -> Self {
        p.embed()
    }
}
