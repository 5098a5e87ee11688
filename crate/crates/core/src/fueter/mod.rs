//! Cauchy-Fueter integral formulas: classical on ℍ, holomorphically deformed
//! and ε-regularized on ℍ_ℝ.

pub mod extrapolate;
pub mod homotopy;
pub mod theta;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{Biquaternion, RealForm, RealFormPoint};
use crate::calculus::{QFunction, Side};
use crate::error::{Error, Result};
use crate::geometry::cycle::{deform, sphere_hr_about, Cycle3};
use crate::geometry::forms::{det4_real, eval_dz, frame_volume};
use crate::geometry::quadrature::{
    integrate_converged_with, integrate_with, visit_nodes, QuadOptions, QuadResult, Resolution,
};
use crate::geometry::surface::{Location, Surface};

pub use extrapolate::{eps_extrapolate, EpsSchedule, Expansion, Extrapolated};
pub use homotopy::{homotopy_check, HomotopyReport};
pub use theta::{theta_boundary_value, theta_regularized, BoundaryValue};

pub const TWO_PI_SQ: f64 = 2.0 * PI * PI;

/// Threshold on the normalized tangential gradient of `N(X - X0)` along the
/// boundary, below which the cone intersection is reported as near-tangent.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-3;

/// Non-fatal diagnostics attached to a [`FueterValue`].
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// The boundary meets the null cone of `X0` almost tangentially;
    /// `ratio = |∇_T N| / (2‖X - X0‖)` at the worst sampled node.
    ConeTangency { ratio: f64 },
}

#[derive(Clone, Debug)]
pub struct FueterQuery {
    pub f: QFunction,
    pub boundary: Surface,
    pub x0: Biquaternion,
    pub side: Side,
    /// Deformation or regularization parameter; unused by the classical formula.
    pub eps: f64,
    pub quad: QuadOptions,
}

impl FueterQuery {
    pub fn new(f: QFunction, boundary: Surface, x0: Biquaternion) -> Self {
        Self {
            f,
            boundary,
            x0,
            side: Side::Left,
            eps: 0.1,
            quad: QuadOptions::default(),
        }
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_quad(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }
}

#[derive(Clone, Debug)]
pub struct FueterValue {
    pub value: Biquaternion,
    pub quad: QuadResult,
    pub warnings: Vec<Warning>,
}

fn locate(q: &FueterQuery) -> Result<Location> {
    match q.boundary.locate(&q.x0)? {
        Location::OnBoundary => Err(Error::IntegrandSingular(format!("X0 = {} lies on the boundary", q.x0))),
        loc => Ok(loc),
    }
}

fn require_split(q: &FueterQuery) -> Result<[f64; 4]> {
    if q.boundary.real_form() != RealForm::HR {
        return Err(Error::InvalidArgument("boundary must lie in the split quaternions".into()));
    }
    if !(q.eps != 0.0 && q.eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be finite and nonzero, got {}", q.eps)));
    }
    q.boundary.coords_of(&q.x0)
}

/// Chart for the split formulas: radial about `X0` with the cone clustered
/// to width `|ε|/2` when `X0` is inside, the plain chart otherwise.
fn split_chart(q: &FueterQuery, x0: &[f64; 4], loc: Location) -> Result<Cycle3> {
    match loc {
        Location::Inside => q.boundary.cycle_about(x0, Some(0.5 * q.eps.abs())),
        _ => q.boundary.cycle(),
    }
}

fn kernel_integral(
    cycle: &Cycle3,
    kernel: &QFunction,
    f: &QFunction,
    side: Side,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_converged_with(cycle, opts, |z, t| {
        let dz = eval_dz(&t[0], &t[1], &t[2]);
        let k = kernel.eval(z)?;
        let fz = f.eval(z)?;
        Ok(match side {
            Side::Left => k * dz * fz,
            Side::Right => fz * dz * k,
        })
    })
}

/// `(1/2π²) ∫_{∂U} k(X - X0) Dx f` (left) or `f Dx k` (right) over a sphere in ℍ.
pub fn cf_classical(q: &FueterQuery) -> Result<FueterValue> {
    if q.boundary.real_form() != RealForm::H {
        return Err(Error::InvalidArgument("classical formula needs a boundary in ℍ".into()));
    }
    locate(q)?;
    let cycle = q.boundary.cycle()?;
    let quad = kernel_integral(&cycle, &QFunction::kernel(q.x0), &q.f, q.side, &q.quad)?;
    Ok(FueterValue {
        value: quad.value / TWO_PI_SQ,
        quad,
        warnings: Vec::new(),
    })
}

/// Cell widths the deformation must span at the cone crossing. Below about
/// 1.5 the box boundary loses four or more digits; above 2 it keeps eight.
pub const GUARD_CELLS: f64 = 1.5;

/// Transverse extent of one quadrature cell at the node closest to the cone,
/// maximized over the patches the cone crosses (`N` changes sign at the
/// nodes): `Σ_k |Δu_k ∂_k N| / |∇N|`.
pub fn cone_cell_width(cycle: &Cycle3, x0: &[f64; 4], res: Resolution) -> f64 {
    // (closest |N|/S, width there, N > 0 seen, N < 0 seen)
    let mut per_patch = vec![(f64::INFINITY, 0.0, false, false); cycle.patches.len()];
    visit_nodes(cycle, res, |idx, patch, u, du| {
        let x = RealFormPoint::from_biquaternion(RealForm::HR, &patch.point(u)).coords;
        let w: [f64; 4] = std::array::from_fn(|k| x[k] - x0[k]);
        let s = w.iter().map(|c| c * c).sum::<f64>();
        let n = w[0] * w[0] - w[1] * w[1] - w[2] * w[2] + w[3] * w[3];
        let entry = &mut per_patch[idx];
        entry.2 |= n > 0.0;
        entry.3 |= n < 0.0;
        let rel = n.abs() / s;
        if rel >= entry.0 {
            return;
        }
        let grad = [2.0 * w[0], -2.0 * w[1], -2.0 * w[2], 2.0 * w[3]];
        let gnorm = 2.0 * s.sqrt();
        let t = patch.tangents(u).map(|t| RealFormPoint::from_biquaternion(RealForm::HR, &t).coords);
        let width = (0..3)
            .map(|k| (du[k] * (0..4).map(|j| grad[j] * t[k][j]).sum::<f64>()).abs())
            .sum::<f64>()
            / gnorm;
        entry.0 = rel;
        entry.1 = width;
    });
    per_patch.iter().filter(|p| p.2 && p.3).map(|p| p.1).fold(0.0, f64::max)
}

/// `-(1/2π²) ∫_{h_ε(∂U)} k(Z - X0) Dz f` with `h_ε(Z) = Z + iε(Z - X0)⁻`.
///
/// Refuses when `|ε| · max‖X - X0‖` is below [`GUARD_CELLS`] cell widths at
/// the cone crossing at the starting resolution.
pub fn cf_deformed(q: &FueterQuery) -> Result<FueterValue> {
    let x0 = require_split(q)?;
    let loc = locate(q)?;
    let base = split_chart(q, &x0, loc)?;
    let width = cone_cell_width(&base, &x0, q.quad.initial);
    let reach = q.eps.abs() * q.boundary.max_distance(&q.x0)?;
    if reach < GUARD_CELLS * width {
        return Err(Error::IntegrandSingular(format!(
            "eps too small for the resolution: |eps| max|X - X0| = {reach:e} < {GUARD_CELLS} x cell width {width:e}"
        )));
    }
    let cycle = deform(&base, q.eps, q.x0);
    let quad = kernel_integral(&cycle, &QFunction::kernel(q.x0), &q.f, q.side, &q.quad)?;
    Ok(FueterValue {
        value: quad.value / -TWO_PI_SQ,
        quad,
        warnings: Vec::new(),
    })
}

/// Unit normal to three vectors in R⁴ (generalized cross product).
fn cross4(t: &[[f64; 4]; 3]) -> [f64; 4] {
    let n: [f64; 4] = std::array::from_fn(|i| {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        det4_real(&[e, t[0], t[1], t[2]])
    });
    let len = n.iter().map(|c| c * c).sum::<f64>().sqrt();
    n.map(|c| c / len)
}

/// Smallest `|∇_T N| / (2‖X - X0‖)` over nodes with `|N| ≤ 0.05 ‖X - X0‖²`,
/// `None` if no node is that close to the cone.
pub fn cone_transversality(cycle: &Cycle3, x0: &[f64; 4], res: Resolution) -> Option<f64> {
    let mut worst: Option<f64> = None;
    visit_nodes(cycle, res, |_, patch, u, _| {
        let x = RealFormPoint::from_biquaternion(RealForm::HR, &patch.point(u)).coords;
        let w: [f64; 4] = std::array::from_fn(|k| x[k] - x0[k]);
        let s = w.iter().map(|c| c * c).sum::<f64>();
        let n = w[0] * w[0] - w[1] * w[1] - w[2] * w[2] + w[3] * w[3];
        if n.abs() > 0.05 * s {
            return;
        }
        let grad = [2.0 * w[0], -2.0 * w[1], -2.0 * w[2], 2.0 * w[3]];
        let t = patch.tangents(u).map(|t| RealFormPoint::from_biquaternion(RealForm::HR, &t).coords);
        if frame_volume(&t) <= 0.0 {
            return;
        }
        let normal = cross4(&t);
        let gn: f64 = (0..4).map(|k| grad[k] * normal[k]).sum();
        let g2: f64 = grad.iter().map(|c| c * c).sum();
        let ratio = (g2 - gn * gn).max(0.0).sqrt() / (2.0 * s.sqrt());
        worst = Some(worst.map_or(ratio, |w: f64| w.min(ratio)));
    });
    worst
}

/// Single-ε value of `-(1/2π²) ∫_{∂U} (X - X0)⁺ / (N(X - X0) + iε‖X - X0‖²)² Dx f`.
///
/// The limit `ε → 0` is taken by [`eps_extrapolate`].
pub fn cf_regularized(q: &FueterQuery) -> Result<FueterValue> {
    let x0 = require_split(q)?;
    let loc = locate(q)?;
    let cycle = split_chart(q, &x0, loc)?;
    let mut warnings = Vec::new();
    if let Some(ratio) = cone_transversality(&cycle, &x0, q.quad.initial) {
        if ratio < TRANSVERSALITY_THRESHOLD {
            warnings.push(Warning::ConeTangency { ratio });
        }
    }
    let kernel = QFunction::regularized_kernel(q.x0, q.eps);
    let quad = kernel_integral(&cycle, &kernel, &q.f, q.side, &q.quad)?;
    Ok(FueterValue {
        value: quad.value / -TWO_PI_SQ,
        quad,
        warnings,
    })
}

/// `r ∫_{S_r} dS / (N(X) + iεr²)²` over the split sphere of radius `r` about 0,
/// with `QuadResult::value` carrying the scalar in its `e0` slot.
pub fn sphere_kernel_integral_quad(r: f64, eps: f64, res: Resolution) -> Result<QuadResult> {
    if !(eps != 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be finite and nonzero, got {eps}")));
    }
    let cycle = sphere_hr_about([0.0; 4], r, [0.0; 4], Some(0.5 * eps.abs()))?;
    let ieps = Complex64::new(0.0, eps * r * r);
    let integrand = |z: &Biquaternion, t: &[Biquaternion; 3]| -> Result<Biquaternion> {
        let ds = frame_volume(&t.map(|t| RealFormPoint::from_biquaternion(RealForm::HR, &t).coords));
        let d = z.quad_form() + ieps;
        Ok(Biquaternion::scalar(r * ds / (d * d)))
    };
    let value = integrate_with(&cycle, res, integrand)?;
    let coarse = integrate_with(&cycle, res.map(|n| n.div_ceil(2)), integrand)?;
    Ok(QuadResult {
        value,
        err_estimate: (value - coarse).euclid_norm(),
        resolution: res,
    })
}

/// `r ∫_{S_r} dS / (N(X) + iεr²)²`; the closed form is `-2π²/(1+ε²)`.
pub fn sphere_kernel_integral(r: f64, eps: f64, res: Resolution) -> Result<Complex64> {
    sphere_kernel_integral_quad(r, eps, res).map(|q| q.value.z[0])
}
