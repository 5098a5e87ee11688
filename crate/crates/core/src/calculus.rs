//! Dirac operators on ℍ, ℍ_ℝ, 𝕄 and their holomorphic counterparts on ℍ_ℂ.
//!
//! Every operator is written as `Σ a_k ∂/∂x^k` where `x^k` are the real
//! coordinates of the chosen form and `a_k` a table of basis units. Applying
//! on the left means `Σ a_k (∂_k f)`, on the right `Σ (∂_k f) a_k`.
//!
//! Derivatives are either central differences (`h > 0`) or, with the
//! sentinel `h = 0`, exact holomorphic partials of the built-in function
//! family. For a holomorphic `f`, `∂/∂x^k = c_k ∂/∂z^k` where `c_k e_k` is
//! the k-th basis vector of the form, which is what makes all the operator
//! variants agree.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{Biquaternion, RealForm};
use crate::error::{Error, Result};

pub type CustomFn = Arc<dyn Fn(&Biquaternion) -> Result<Biquaternion> + Send + Sync>;

/// `coeff · (z0)^p0 (z1)^p1 (z2)^p2 (z3)^p3` in e-basis coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: Biquaternion,
    pub powers: [u32; 4],
}

#[derive(Clone)]
pub enum FunctionKind {
    Constant(Biquaternion),
    /// `a · Z · b`.
    Linear { left: Biquaternion, right: Biquaternion },
    /// Fueter kernel `(Z - c)⁻¹ / N(Z - c) = (Z - c)⁺ / N(Z - c)²`.
    Kernel { center: Biquaternion },
    /// `e0 / N(Z - c)`.
    ReciprocalN { center: Biquaternion },
    Polynomial(Vec<Monomial>),
    /// `(Z - c)⁺ / (N(Z - c) + iε S(Z - c))²`; on ℍ_ℝ, `S` is the squared Euclidean norm.
    RegularizedKernel { center: Biquaternion, eps: f64 },
    Custom(CustomFn),
}

impl fmt::Debug for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Linear { left, right } => f.debug_struct("Linear").field("left", left).field("right", right).finish(),
            Self::Kernel { center } => f.debug_struct("Kernel").field("center", center).finish(),
            Self::ReciprocalN { center } => f.debug_struct("ReciprocalN").field("center", center).finish(),
            Self::Polynomial(terms) => f.debug_tuple("Polynomial").field(terms).finish(),
            Self::RegularizedKernel { center, eps } => f
                .debug_struct("RegularizedKernel")
                .field("center", center)
                .field("eps", eps)
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// An evaluatable function ℍ_ℂ → ℍ_ℂ.
#[derive(Clone, Debug)]
pub struct QFunction {
    kind: FunctionKind,
}

impl QFunction {
    pub fn constant(c: Biquaternion) -> Self {
        Self { kind: FunctionKind::Constant(c) }
    }

    pub fn linear(left: Biquaternion, right: Biquaternion) -> Self {
        Self { kind: FunctionKind::Linear { left, right } }
    }

    pub fn kernel(center: Biquaternion) -> Self {
        Self { kind: FunctionKind::Kernel { center } }
    }

    pub fn reciprocal_n(center: Biquaternion) -> Self {
        Self { kind: FunctionKind::ReciprocalN { center } }
    }

    pub fn polynomial(terms: Vec<Monomial>) -> Self {
        Self { kind: FunctionKind::Polynomial(terms) }
    }

    pub fn regularized_kernel(center: Biquaternion, eps: f64) -> Self {
        Self { kind: FunctionKind::RegularizedKernel { center, eps } }
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&Biquaternion) -> Result<Biquaternion> + Send + Sync + 'static,
    {
        Self { kind: FunctionKind::Custom(Arc::new(f)) }
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn eval(&self, z: &Biquaternion) -> Result<Biquaternion> {
        match &self.kind {
            FunctionKind::Constant(c) => Ok(*c),
            FunctionKind::Linear { left, right } => Ok(*left * *z * *right),
            FunctionKind::Kernel { center } => {
                let w = *z - *center;
                let n = nonsingular_n(&w)?;
                Ok(w.plus() / (n * n))
            }
            FunctionKind::ReciprocalN { center } => {
                let w = *z - *center;
                let n = nonsingular_n(&w)?;
                Ok(Biquaternion::scalar(n.inv()))
            }
            FunctionKind::Polynomial(terms) => Ok(terms
                .iter()
                .map(|m| m.coeff * monomial_value(&z.z, &m.powers))
                .sum()),
            FunctionKind::RegularizedKernel { center, eps } => {
                let w = *z - *center;
                let d = w.quad_form() + Complex64::new(0.0, *eps) * w.form_s();
                if d.norm() <= w.singularity_tolerance() {
                    return Err(Error::SingularElement {
                        norm_value: d.norm(),
                        tolerance: w.singularity_tolerance(),
                    });
                }
                Ok(w.plus() / (d * d))
            }
            FunctionKind::Custom(f) => f(z),
        }
    }

    /// Exact partials `∂f/∂z^k`, `k = 0..4`, for kinds with a closed form.
    pub fn exact_partials(&self, z: &Biquaternion) -> Option<Result<[Biquaternion; 4]>> {
        let partials = match &self.kind {
            FunctionKind::Constant(_) => Ok([Biquaternion::ZERO; 4]),
            FunctionKind::Linear { left, right } => {
                Ok(std::array::from_fn(|k| *left * Biquaternion::basis(k) * *right))
            }
            FunctionKind::Kernel { center } => {
                let w = *z - *center;
                nonsingular_n(&w).map(|n| {
                    let n2 = n * n;
                    let n3 = n2 * n;
                    let wp = w.plus();
                    std::array::from_fn(|k| {
                        Biquaternion::basis(k).plus() / n2 - wp * (4.0 * w.z[k] / n3)
                    })
                })
            }
            FunctionKind::ReciprocalN { center } => {
                let w = *z - *center;
                nonsingular_n(&w).map(|n| {
                    std::array::from_fn(|k| Biquaternion::scalar(-2.0 * w.z[k] / (n * n)))
                })
            }
            FunctionKind::Polynomial(terms) => Ok(std::array::from_fn(|k| {
                terms
                    .iter()
                    .filter(|m| m.powers[k] > 0)
                    .map(|m| {
                        let mut p = m.powers;
                        p[k] -= 1;
                        m.coeff * (f64::from(m.powers[k]) * monomial_value(&z.z, &p))
                    })
                    .sum()
            })),
            FunctionKind::RegularizedKernel { .. } | FunctionKind::Custom(_) => return None,
        };
        Some(partials)
    }

    /// Center of the singular set `N(Z - c) = 0` for the kernel family.
    pub fn singular_center(&self) -> Option<Biquaternion> {
        match &self.kind {
            FunctionKind::Kernel { center }
            | FunctionKind::ReciprocalN { center }
            | FunctionKind::RegularizedKernel { center, .. } => Some(*center),
            _ => None,
        }
    }

    /// Denominator magnitude that the stencil guard watches, if any.
    fn guard_value(&self, z: &Biquaternion) -> Option<f64> {
        match &self.kind {
            FunctionKind::Kernel { center } | FunctionKind::ReciprocalN { center } => {
                Some((*z - *center).quad_form().norm())
            }
            FunctionKind::RegularizedKernel { center, eps } => {
                let w = *z - *center;
                Some((w.quad_form() + Complex64::new(0.0, *eps) * w.form_s()).norm())
            }
            _ => None,
        }
    }
}

fn nonsingular_n(w: &Biquaternion) -> Result<Complex64> {
    let n = w.quad_form();
    let tol = w.singularity_tolerance();
    if n.norm() <= tol {
        Err(Error::SingularElement { norm_value: n.norm(), tolerance: tol })
    } else {
        Ok(n)
    }
}

fn monomial_value(z: &[Complex64; 4], powers: &[u32; 4]) -> Complex64 {
    z.iter()
        .zip(powers)
        .fold(Complex64::new(1.0, 0.0), |acc, (zk, &p)| acc * zk.powu(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiracOperator {
    /// `∇`
    Nabla,
    /// `∇⁺`, whose kernel defines regular functions.
    NablaPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Coordinates the operator differentiates in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiracForm {
    H,
    HR,
    M,
    /// Complex coordinates `z^0..z^3` of ℍ_ℂ.
    Holomorphic,
}

impl DiracForm {
    /// Scalars `c_k` with real basis `c_k e_k`; `None` for the holomorphic form.
    pub fn real_form(self) -> Option<RealForm> {
        match self {
            DiracForm::H => Some(RealForm::H),
            DiracForm::HR => Some(RealForm::HR),
            DiracForm::M => Some(RealForm::M),
            DiracForm::Holomorphic => None,
        }
    }

    pub fn coordinate_scales(self) -> [Complex64; 4] {
        match self.real_form() {
            Some(form) => form.basis_scales(),
            None => [Complex64::new(1.0, 0.0); 4],
        }
    }

    /// Stencil directions: the basis vectors whose coefficients are the coordinates.
    pub fn directions(self) -> [Biquaternion; 4] {
        let scales = self.coordinate_scales();
        std::array::from_fn(|k| Biquaternion::basis(k) * scales[k])
    }

    /// Signs of the second-order operator `∇∇⁺` in this form's coordinates.
    pub fn wave_signs(self) -> [f64; 4] {
        self.coordinate_scales().map(|c| (c * c).inv().re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DiracSpec {
    pub operator: DiracOperator,
    pub side: Side,
    pub form: DiracForm,
}

impl DiracSpec {
    pub fn new(operator: DiracOperator, side: Side, form: DiracForm) -> Self {
        Self { operator, side, form }
    }

    /// The units `a_k` of `Σ a_k ∂/∂x^k`.
    ///
    /// The 𝕄 table follows from requiring agreement with the holomorphic
    /// operator: `a_k = e_k / c_k` (up to the `∇` sign pattern).
    pub fn coefficients(&self) -> [Biquaternion; 4] {
        use Biquaternion as B;
        let plus = self.operator == DiracOperator::NablaPlus;
        match (self.form, plus) {
            (DiracForm::H | DiracForm::Holomorphic, true) => [B::E0, B::E1, B::E2, B::E3],
            (DiracForm::H | DiracForm::Holomorphic, false) => [B::E0, -B::E1, -B::E2, -B::E3],
            (DiracForm::HR, true) => [B::E0, -B::E1_TILDE, -B::E2_TILDE, B::E3],
            (DiracForm::HR, false) => [B::E0, B::E1_TILDE, B::E2_TILDE, -B::E3],
            (DiracForm::M, true) => [-B::E0_TILDE, B::E1, B::E2, B::E3],
            (DiracForm::M, false) => [-B::E0_TILDE, -B::E1, -B::E2, -B::E3],
        }
    }

    fn combine(&self, partials: &[Biquaternion; 4]) -> Biquaternion {
        let coeffs = self.coefficients();
        coeffs
            .iter()
            .zip(partials)
            .map(|(a, d)| match self.side {
                Side::Left => *a * *d,
                Side::Right => *d * *a,
            })
            .sum()
    }
}

/// Default first-derivative step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Default step for nested second derivatives.
pub const DEFAULT_NESTED_STEP: f64 = 1e-2;

/// Coordinate partials `∂f/∂x^k` of `f` at `x` in the given form, by central
/// differences or (h = 0) exactly.
pub fn coordinate_partials(form: DiracForm, f: &QFunction, x: &Biquaternion, h: f64) -> Result<[Biquaternion; 4]> {
    if h == 0.0 {
        let exact = f.exact_partials(x).ok_or_else(|| {
            Error::InvalidArgument("h = 0 requires a function kind with closed-form derivatives".into())
        })??;
        let scales = form.coordinate_scales();
        return Ok(std::array::from_fn(|k| exact[k] * scales[k]));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let dirs = form.directions();
    let mut out = [Biquaternion::ZERO; 4];
    for (k, dir) in dirs.iter().enumerate() {
        let fwd = *x + *dir * h;
        let bwd = *x - *dir * h;
        let fp = eval_on_stencil(f, &fwd, h)?;
        let fm = eval_on_stencil(f, &bwd, h)?;
        out[k] = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}

fn eval_on_stencil(f: &QFunction, z: &Biquaternion, h: f64) -> Result<Biquaternion> {
    if let Some(g) = f.guard_value(z) {
        if g < 10.0 * h {
            return Err(Error::StencilOutsideDomain(format!(
                "stencil point within the singularity guard (|N| = {g:e} < 10h = {:e})",
                10.0 * h
            )));
        }
    }
    f.eval(z).map_err(|e| Error::StencilOutsideDomain(e.to_string()))
}

/// Apply a Dirac operator to `f` at `x`.
pub fn apply_dirac(spec: DiracSpec, f: &QFunction, x: &Biquaternion, h: f64) -> Result<Biquaternion> {
    let partials = coordinate_partials(spec.form, f, x, h)?;
    Ok(spec.combine(&partials))
}

/// `‖∇⁺ f‖` (left) or `‖f ∇⁺‖` (right); vanishes for regular `f`.
pub fn regularity_residual(f: &QFunction, x: &Biquaternion, form: DiracForm, side: Side, h: f64) -> Result<f64> {
    let spec = DiracSpec::new(DiracOperator::NablaPlus, side, form);
    Ok(apply_dirac(spec, f, x, h)?.euclid_norm())
}

/// Second-difference wave operator with the form's sign pattern; on ℍ_ℝ this
/// is the ultrahyperbolic `□₂,₂ = ∂₀² − ∂₁² − ∂₂² + ∂₃²`.
pub fn wave_operator(form: DiracForm, f: &QFunction, x: &Biquaternion, h: f64) -> Result<Biquaternion> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let center = eval_on_stencil(f, x, h)?;
    let signs = form.wave_signs();
    let mut acc = Biquaternion::ZERO;
    for (dir, sign) in form.directions().iter().zip(signs) {
        let fp = eval_on_stencil(f, &(*x + *dir * h), h)?;
        let fm = eval_on_stencil(f, &(*x - *dir * h), h)?;
        acc += (fp + fm - center * 2.0) * (sign / (h * h));
    }
    Ok(acc)
}

/// `‖□₂,₂ f − ∇_ℝ(∇⁺_ℝ f)‖` at `x`, both sides by (nested) central differences.
pub fn wave_residual(f: &QFunction, x: &Biquaternion, h: f64) -> Result<f64> {
    let wave = wave_operator(DiracForm::HR, f, x, h)?;
    let inner_spec = DiracSpec::new(DiracOperator::NablaPlus, Side::Left, DiracForm::HR);
    let outer_spec = DiracSpec::new(DiracOperator::Nabla, Side::Left, DiracForm::HR);
    let inner_f = f.clone();
    let inner = QFunction::custom(move |y| apply_dirac(inner_spec, &inner_f, y, h));
    let nested = apply_dirac(outer_spec, &inner, x, h)?;
    Ok((wave - nested).euclid_norm())
}

/// Residuals of the three chain rules for a scalar-valued `F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRuleReport {
    /// `‖∇(F(Z⁺)) − (∇⁺F)(Z⁺)‖`
    pub nabla_of_plus: f64,
    /// `‖∇⁺(F(Z⁺)) − (∇F)(Z⁺)‖`
    pub nabla_plus_of_plus: f64,
    /// `‖∇(F(Z⁻¹)) + Z⁻¹ (∇F)(Z⁻¹) Z⁻¹‖`
    pub nabla_of_inverse: f64,
}

impl ChainRuleReport {
    pub fn max(&self) -> f64 {
        self.nabla_of_plus.max(self.nabla_plus_of_plus).max(self.nabla_of_inverse)
    }
}

/// Check the conjugation and inversion chain rules for `F` at `z`.
///
/// Derivatives are holomorphic central differences at steps `h` and `h/2`
/// combined by one Richardson step, so the residuals are O(h⁴). The right
/// side of the inversion rule is differentiated at `Z⁻¹`, which for `|Z| > 1`
/// sits at a smaller scale than `Z`; plain second-order differences lose
/// accuracy there. `F` must take values in `ℂ e0` for the inversion rule to hold.
pub fn verify_chain_rules(f: &QFunction, z: &Biquaternion, h: f64) -> Result<ChainRuleReport> {
    let z_inv = z.inverse()?;
    let holo = |op| DiracSpec::new(op, Side::Left, DiracForm::Holomorphic);

    let f_plus = {
        let f = f.clone();
        QFunction::custom(move |y| f.eval(&y.plus()))
    };
    let f_inv = {
        let f = f.clone();
        QFunction::custom(move |y| f.eval(&y.inverse()?))
    };

    let d = |op, g: &QFunction, at: &Biquaternion| -> Result<Biquaternion> {
        let coarse = apply_dirac(holo(op), g, at, h)?;
        let fine = apply_dirac(holo(op), g, at, 0.5 * h)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    };

    let lhs1 = d(DiracOperator::Nabla, &f_plus, z)?;
    let rhs1 = d(DiracOperator::NablaPlus, f, &z.plus())?;
    let lhs2 = d(DiracOperator::NablaPlus, &f_plus, z)?;
    let rhs2 = d(DiracOperator::Nabla, f, &z.plus())?;
    let lhs3 = d(DiracOperator::Nabla, &f_inv, z)?;
    let rhs3 = -(z_inv * d(DiracOperator::Nabla, f, &z_inv)? * z_inv);

    Ok(ChainRuleReport {
        nabla_of_plus: (lhs1 - rhs1).euclid_norm(),
        nabla_plus_of_plus: (lhs2 - rhs2).euclid_norm(),
        nabla_of_inverse: (lhs3 - rhs3).euclid_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::RealFormPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(op: DiracOperator, side: Side, form: DiracForm) -> DiracSpec {
        DiracSpec::new(op, side, form)
    }

    fn random_hr(rng: &mut impl Rng, scale: f64) -> Biquaternion {
        RealFormPoint::hr(std::array::from_fn(|_| rng.gen_range(-scale..scale))).embed()
    }

    #[test]
    fn split_tables_match_scale_derivation() {
        // a_k = σ_k e_k / c_k with σ = (1,1,1,1) for ∇⁺ and (1,-1,-1,-1) for ∇
        for form in [DiracForm::H, DiracForm::HR, DiracForm::M, DiracForm::Holomorphic] {
            let scales = form.coordinate_scales();
            for (op, sigma) in [
                (DiracOperator::NablaPlus, [1.0, 1.0, 1.0, 1.0]),
                (DiracOperator::Nabla, [1.0, -1.0, -1.0, -1.0]),
            ] {
                let table = spec(op, Side::Left, form).coefficients();
                for k in 0..4 {
                    let derived = Biquaternion::basis(k) * (sigma[k] / scales[k]);
                    assert!((table[k] - derived).max_abs() < 1e-15, "{form:?} {op:?} {k}");
                }
            }
        }
    }

    #[test]
    fn constant_has_zero_derivative() {
        let c = QFunction::constant(Biquaternion::E1 + Biquaternion::E3 * 2.0);
        let x = RealFormPoint::hr([0.3, 0.1, -0.4, 1.0]).embed();
        let d = apply_dirac(spec(DiracOperator::NablaPlus, Side::Left, DiracForm::HR), &c, &x, 1e-3).unwrap();
        assert_eq!(d, Biquaternion::ZERO);
        assert_eq!(regularity_residual(&c, &x, DiracForm::HR, Side::Right, 1e-3).unwrap(), 0.0);
        assert_eq!(wave_residual(&c, &x, 1e-2).unwrap(), 0.0);
    }

    #[test]
    fn nabla_of_reciprocal_n_closed_form() {
        let f = QFunction::reciprocal_n(Biquaternion::ZERO);
        let z = Biquaternion::E0 * 2.0;
        let want = Biquaternion::E0 * -0.25;
        for side in [Side::Left, Side::Right] {
            let exact = apply_dirac(spec(DiracOperator::Nabla, side, DiracForm::Holomorphic), &f, &z, 0.0).unwrap();
            assert!((exact - want).max_abs() < 1e-15);
            let fd = apply_dirac(spec(DiracOperator::Nabla, side, DiracForm::Holomorphic), &f, &z, 1e-4).unwrap();
            assert!((fd - want).max_abs() < 1e-8);
        }
        // −2 Z⁺/N(Z)² at a generic complex point
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = Biquaternion {
            z: std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        } + Biquaternion::E0 * 2.0;
        let n = z.quad_form();
        let want = z.plus() * (-2.0 / (n * n));
        let exact = apply_dirac(spec(DiracOperator::Nabla, Side::Left, DiracForm::Holomorphic), &f, &z, 0.0).unwrap();
        assert!((exact - want).max_abs() < 1e-14);
    }

    #[test]
    fn kernel_is_two_sided_regular() {
        let x0 = RealFormPoint::hr([0.2, -0.1, 0.3, 0.5]).embed();
        let k = QFunction::kernel(x0);
        let x = x0 + Biquaternion::E0 * 3.0;
        for side in [Side::Left, Side::Right] {
            let r = regularity_residual(&k, &x, DiracForm::HR, side, 1e-3).unwrap();
            assert!(r <= 1e-5, "{side:?}: {r}");
            let exact = regularity_residual(&k, &x, DiracForm::HR, side, 0.0).unwrap();
            assert!(exact < 1e-15);
        }
    }

    #[test]
    fn kernel_residual_is_second_order() {
        let x0 = Biquaternion::ZERO;
        let k = QFunction::kernel(x0);
        let x = RealFormPoint::hr([2.0, 0.4, -0.3, 1.0]).embed();
        let s = spec(DiracOperator::NablaPlus, Side::Left, DiracForm::HR);
        let r1 = apply_dirac(s, &k, &x, 1e-3).unwrap().euclid_norm();
        let r2 = apply_dirac(s, &k, &x, 5e-4).unwrap().euclid_norm();
        let ratio = r1 / r2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn non_regular_function_has_unit_residual() {
        let f = QFunction::polynomial(vec![Monomial { coeff: Biquaternion::E0, powers: [1, 0, 0, 0] }]);
        let x = RealFormPoint::hr([0.7, 0.2, 0.1, -0.5]).embed();
        let r = regularity_residual(&f, &x, DiracForm::HR, Side::Left, 1e-3).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_operator_cases() {
        let sq = QFunction::polynomial(vec![Monomial { coeff: Biquaternion::E0, powers: [2, 0, 0, 0] }]);
        let x = RealFormPoint::hr([0.3, 0.4, -0.2, 0.1]).embed();
        let w = wave_operator(DiracForm::HR, &sq, &x, 1e-2).unwrap();
        assert!((w - Biquaternion::E0 * 2.0).max_abs() < 1e-6);

        let far = RealFormPoint::hr([6.0, 0.0, 0.0, 0.0]).embed();
        let recip = QFunction::reciprocal_n(far);
        let x = RealFormPoint::hr([0.1, 0.2, 0.3, 0.4]).embed();
        let box_val = wave_operator(DiracForm::HR, &recip, &x, 1e-2).unwrap();
        assert!(box_val.euclid_norm() < 1e-4, "{}", box_val.euclid_norm());
        assert!(wave_residual(&recip, &x, 1e-2).unwrap() < 1e-4);
    }

    #[test]
    fn wave_factorization_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let center = RealFormPoint::hr([5.0, 0.0, 0.0, 0.0]).embed();
        let funcs = [
            QFunction::kernel(center),
            QFunction::reciprocal_n(center),
            QFunction::polynomial(vec![
                Monomial { coeff: Biquaternion::E1, powers: [1, 1, 0, 2] },
                Monomial { coeff: Biquaternion::E0, powers: [0, 3, 0, 0] },
            ]),
            QFunction::linear(Biquaternion::E2, Biquaternion::E3),
        ];
        for f in &funcs {
            for _ in 0..25 {
                let x = random_hr(&mut rng, 1.0);
                let r = wave_residual(f, &x, 1e-2).unwrap();
                assert!(r < 1e-3, "{f:?}: {r}");
            }
        }
    }

    #[test]
    fn forms_agree_on_holomorphic_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let center = Biquaternion::E0 * 5.0;
        let funcs = [
            QFunction::kernel(center),
            QFunction::reciprocal_n(center),
            QFunction::linear(Biquaternion::E1 + Biquaternion::E0, Biquaternion::E2),
        ];
        let forms = [DiracForm::H, DiracForm::HR, DiracForm::M, DiracForm::Holomorphic];
        for f in &funcs {
            let x = random_hr(&mut rng, 0.5) + RealFormPoint::h([0.1, 0.2, 0.0, -0.1]).embed();
            for op in [DiracOperator::Nabla, DiracOperator::NablaPlus] {
                for side in [Side::Left, Side::Right] {
                    let reference = apply_dirac(spec(op, side, DiracForm::Holomorphic), f, &x, 0.0).unwrap();
                    for form in forms {
                        let exact = apply_dirac(spec(op, side, form), f, &x, 0.0).unwrap();
                        assert!((exact - reference).max_abs() < 1e-13);
                        let fd = apply_dirac(spec(op, side, form), f, &x, 1e-4).unwrap();
                        assert!((fd - reference).max_abs() < 1e-7, "{form:?} {op:?} {side:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = Biquaternion::E0 * 4.0;
        let funcs = [
            QFunction::kernel(c),
            QFunction::reciprocal_n(c),
            QFunction::linear(Biquaternion::E3, Biquaternion::E1_TILDE),
            QFunction::polynomial(vec![Monomial { coeff: Biquaternion::E2, powers: [2, 1, 0, 1] }]),
        ];
        for f in &funcs {
            let x = random_hr(&mut rng, 1.0);
            let exact = coordinate_partials(DiracForm::Holomorphic, f, &x, 0.0).unwrap();
            let e1 = coordinate_partials(DiracForm::Holomorphic, f, &x, 1e-3).unwrap();
            let e2 = coordinate_partials(DiracForm::Holomorphic, f, &x, 5e-4).unwrap();
            for k in 0..4 {
                let a = (e1[k] - exact[k]).max_abs();
                let b = (e2[k] - exact[k]).max_abs();
                assert!(a < 1e-5, "{f:?}");
                if a > 1e-11 {
                    assert!((3.0..5.0).contains(&(a / b)), "{f:?} ratio {}", a / b);
                }
            }
        }
    }

    #[test]
    fn stencil_guard_refuses_cone() {
        let k = QFunction::kernel(Biquaternion::ZERO);
        let on_cone = (Biquaternion::E0 + Biquaternion::E1_TILDE) * 0.5;
        let err = apply_dirac(spec(DiracOperator::NablaPlus, Side::Left, DiracForm::HR), &k, &on_cone, 1e-3);
        assert!(matches!(err, Err(Error::StencilOutsideDomain(_))));
        let custom = QFunction::custom(|_| Err(Error::InvalidArgument("nope".into())));
        let err = apply_dirac(spec(DiracOperator::Nabla, Side::Left, DiracForm::H), &custom, &Biquaternion::E0, 1e-3);
        assert!(matches!(err, Err(Error::StencilOutsideDomain(_))));
        assert!(matches!(
            apply_dirac(spec(DiracOperator::Nabla, Side::Left, DiracForm::H), &custom, &Biquaternion::E0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn chain_rules() {
        let constant = QFunction::constant(Biquaternion::E0 * 3.0);
        let z = Biquaternion::E0 * 2.0 + Biquaternion::E3;
        let r = verify_chain_rules(&constant, &z, 1e-3).unwrap();
        assert_eq!(r.max(), 0.0);

        let recip = QFunction::reciprocal_n(Biquaternion::ZERO);
        let r = verify_chain_rules(&recip, &z, 1e-3).unwrap();
        assert!(r.max() <= 1e-5, "{r:?}");

        let linear = QFunction::polynomial(vec![Monomial { coeff: Biquaternion::E0, powers: [1, 0, 0, 0] }]);
        let r = verify_chain_rules(&linear, &z, 1e-4).unwrap();
        assert!(r.max() <= 1e-8, "{r:?}");

        let null = Biquaternion::E0 + Biquaternion::E1_TILDE;
        assert!(matches!(verify_chain_rules(&recip, &null, 1e-3), Err(Error::SingularElement { .. })));
    }
}
