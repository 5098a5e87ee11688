//! Built-in closed hypersurfaces, described by shape so that evaluators can
//! re-chart them around a view point.

use crate::algebra::{Biquaternion, RealForm, RealFormPoint};
use crate::error::{Error, Result};
use crate::geometry::cycle::{box_boundary_hr, box_boundary_hr_about, sphere_h, sphere_hr, sphere_hr_about, Cycle3};

/// Relative distance to the boundary below which a point counts as on it.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    /// `‖X - center‖ = r` in `ℍ + center`.
    SphereH { center: Biquaternion, r: f64 },
    /// `‖X - center‖ = r` in ℍ_ℝ, split coordinates.
    SphereHR { center: [f64; 4], r: f64 },
    /// Boundary of `|x^k - c^k| ≤ w^k` in ℍ_ℝ.
    BoxHR { center: [f64; 4], half_widths: [f64; 4] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    OnBoundary,
}

impl Surface {
    pub fn sphere_h(center: Biquaternion, r: f64) -> Self {
        Self::SphereH { center, r }
    }

    pub fn sphere_hr(center: [f64; 4], r: f64) -> Self {
        Self::SphereHR { center, r }
    }

    pub fn box_hr(center: [f64; 4], half_widths: [f64; 4]) -> Self {
        Self::BoxHR { center, half_widths }
    }

    pub fn real_form(&self) -> RealForm {
        match self {
            Self::SphereH { .. } => RealForm::H,
            _ => RealForm::HR,
        }
    }

    /// Plain chart of the surface.
    pub fn cycle(&self) -> Result<Cycle3> {
        match *self {
            Self::SphereH { center, r } => sphere_h(center, r),
            Self::SphereHR { center, r } => sphere_hr(center, r),
            Self::BoxHR { center, half_widths } => box_boundary_hr(center, half_widths),
        }
    }

    /// The same oriented cycle charted radially from the interior point `x0`
    /// (split coordinates), with the null cone of `x0` as a coordinate surface
    /// and clustering of relative width `width` around it. Spheres in ℍ have no
    /// cone and ignore the view point.
    pub fn cycle_about(&self, x0: &[f64; 4], width: Option<f64>) -> Result<Cycle3> {
        match *self {
            Self::SphereH { center, r } => sphere_h(center, r),
            Self::SphereHR { center, r } => sphere_hr_about(center, r, *x0, width),
            Self::BoxHR { center, half_widths } => box_boundary_hr_about(center, half_widths, *x0, width),
        }
    }

    /// Coordinates of `z` in the surface's real form, or an error if `z` is not in it.
    pub fn coords_of(&self, z: &Biquaternion) -> Result<[f64; 4]> {
        let form = self.real_form();
        let tol = 1e-12 * (1.0 + z.max_abs());
        if !form.contains(z, tol) {
            return Err(Error::InvalidArgument(format!("{z} is not a point of {form:?}")));
        }
        Ok(RealFormPoint::from_biquaternion(form, z).coords)
    }

    fn center_coords(&self) -> [f64; 4] {
        match *self {
            Self::SphereH { center, .. } => RealFormPoint::from_biquaternion(RealForm::H, &center).coords,
            Self::SphereHR { center, .. } | Self::BoxHR { center, .. } => center,
        }
    }

    /// Signed distance-like margin: positive inside, negative outside.
    fn margin(&self, x: &[f64; 4]) -> (f64, f64) {
        let c = self.center_coords();
        let d: [f64; 4] = std::array::from_fn(|k| x[k] - c[k]);
        match *self {
            Self::SphereH { r, .. } | Self::SphereHR { r, .. } => {
                (r - d.iter().map(|v| v * v).sum::<f64>().sqrt(), r)
            }
            Self::BoxHR { half_widths, .. } => {
                let m = (0..4).map(|k| half_widths[k] - d[k].abs()).fold(f64::INFINITY, f64::min);
                (m, half_widths.iter().cloned().fold(0.0, f64::max))
            }
        }
    }

    pub fn locate(&self, z: &Biquaternion) -> Result<Location> {
        let x = self.coords_of(z)?;
        let (m, scale) = self.margin(&x);
        Ok(if m.abs() <= BOUNDARY_TOL * scale {
            Location::OnBoundary
        } else if m > 0.0 {
            Location::Inside
        } else {
            Location::Outside
        })
    }

    /// Euclidean distance from `z` to the surface.
    pub fn distance(&self, z: &Biquaternion) -> Result<f64> {
        let x = self.coords_of(z)?;
        let (m, _) = self.margin(&x);
        if m >= 0.0 {
            return Ok(m);
        }
        Ok(match *self {
            Self::SphereH { .. } | Self::SphereHR { .. } => -m,
            Self::BoxHR { center, half_widths } => (0..4)
                .map(|k| ((x[k] - center[k]).abs() - half_widths[k]).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
        })
    }

    /// `max ‖X - z‖` over the surface.
    pub fn max_distance(&self, z: &Biquaternion) -> Result<f64> {
        let x = self.coords_of(z)?;
        let c = self.center_coords();
        let d: [f64; 4] = std::array::from_fn(|k| x[k] - c[k]);
        Ok(match *self {
            Self::SphereH { r, .. } | Self::SphereHR { r, .. } => d.iter().map(|v| v * v).sum::<f64>().sqrt() + r,
            Self::BoxHR { half_widths, .. } => {
                (0..4).map(|k| (d[k].abs() + half_widths[k]).powi(2)).sum::<f64>().sqrt()
            }
        })
    }
}

/// Euclidean distance from the origin of ℍ_ℝ to the null cone `{N(X - x0) = 0}`
/// of `x0`. The cone misses every ball about the origin of smaller radius.
pub fn cone_distance_from_origin(x0: &[f64; 4]) -> f64 {
    let a = x0[0].hypot(x0[3]);
    let b = x0[1].hypot(x0[2]);
    (a - b).abs() / std::f64::consts::SQRT_2
}
