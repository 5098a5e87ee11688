//! Homotopy invariance of the deformed kernel integral: inside, the pushed
//! boundary `h_ε(∂U)` is homologous to `-S̃_r`, the small Euclidean sphere
//! about `X0` in `ℍ + X0`; outside, it bounds.

use crate::algebra::Biquaternion;
use crate::calculus::QFunction;
use crate::error::{Error, Result};
use crate::geometry::cycle::{deform, sphere_h};
use crate::geometry::quadrature::{integrate_form_converged, QuadOptions};
use crate::geometry::surface::{Location, Surface};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomotopyReport {
    /// `∫_{h_ε(∂U)} k(Z - X0) Dz f`.
    pub deformed: Biquaternion,
    /// `∫_{-S̃_r} k(Z - X0) Dz f`, zero when `X0` is outside.
    pub reference: Biquaternion,
    /// `‖deformed - reference‖`.
    pub deviation: f64,
}

/// Compare the deformed boundary integral with its homologous reference cycle.
pub fn homotopy_check(
    boundary: &Surface,
    x0: &Biquaternion,
    f: &QFunction,
    eps: f64,
    r: f64,
    quad: &QuadOptions,
) -> Result<HomotopyReport> {
    let x = boundary.coords_of(x0)?;
    if !(eps != 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be finite and nonzero, got {eps}")));
    }
    let kernel = QFunction::kernel(*x0);
    let (base, reference) = match boundary.locate(x0)? {
        Location::OnBoundary => {
            return Err(Error::IntegrandSingular(format!("X0 = {x0} lies on the boundary")));
        }
        Location::Inside => {
            if !(r > 0.0 && r < boundary.distance(x0)?) {
                return Err(Error::InvalidArgument(format!("sphere radius {r} must be positive and fit inside")));
            }
            let small = sphere_h(*x0, r)?.reversed();
            let reference = integrate_form_converged(&small, &kernel, f, quad)?.value;
            (boundary.cycle_about(&x, Some(0.5 * eps.abs()))?, reference)
        }
        Location::Outside => (boundary.cycle()?, Biquaternion::ZERO),
    };
    let deformed = integrate_form_converged(&deform(&base, eps, *x0), &kernel, f, quad)?.value;
    Ok(HomotopyReport {
        deformed,
        reference,
        deviation: (deformed - reference).euclid_norm(),
    })
}
