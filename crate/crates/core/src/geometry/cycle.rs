//! Parameterized, oriented 3-cycles in ℍ_ℂ.
//!
//! A cycle is a formal sum of patches. Each patch is a chart from a parameter
//! box into ℍ_ℂ with a ±1 orientation; the pullback of a 3-form is evaluated on
//! the ordered tangent triple `(∂₁Z, ∂₂Z, ∂₃Z)` and multiplied by that sign.
//!
//! Besides the plain charts, spheres and boxes in ℍ_ℝ can be re-charted as
//! seen from an interior point `X0` so that the null cone `N(X - X0) = 0`
//! becomes a coordinate surface, and the nodes can be clustered around it.
//! Reparameterizing does not change the cycle, only how well a tensor rule
//! resolves integrands that are sharply peaked along the cone.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{Biquaternion, RealForm, RealFormPoint};
use crate::error::{Error, Result};
use crate::geometry::forms::det4_real;

pub type ChartFn = Arc<dyn Fn(&[f64; 3]) -> Biquaternion + Send + Sync>;
pub type TangentFn = Arc<dyn Fn(&[f64; 3]) -> [Biquaternion; 3] + Send + Sync>;

/// Step for central-difference tangents of charts without analytic partials.
pub const TANGENT_STEP: f64 = 1e-6;

#[derive(Clone)]
pub struct Patch {
    chart: ChartFn,
    tangent: Option<TangentFn>,
    pub bounds: [[f64; 2]; 3],
    pub periodic: [bool; 3],
    pub orientation: f64,
}

impl fmt::Debug for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Patch")
            .field("bounds", &self.bounds)
            .field("periodic", &self.periodic)
            .field("orientation", &self.orientation)
            .field("analytic_tangents", &self.tangent.is_some())
            .finish()
    }
}

impl Patch {
    pub fn new<F>(chart: F, bounds: [[f64; 2]; 3], periodic: [bool; 3]) -> Self
    where
        F: Fn(&[f64; 3]) -> Biquaternion + Send + Sync + 'static,
    {
        Self {
            chart: Arc::new(chart),
            tangent: None,
            bounds,
            periodic,
            orientation: 1.0,
        }
    }

    pub fn with_tangents<F>(mut self, tangent: F) -> Self
    where
        F: Fn(&[f64; 3]) -> [Biquaternion; 3] + Send + Sync + 'static,
    {
        self.tangent = Some(Arc::new(tangent));
        self
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation.signum();
        self
    }

    pub fn has_analytic_tangents(&self) -> bool {
        self.tangent.is_some()
    }

    pub fn point(&self, u: &[f64; 3]) -> Biquaternion {
        (self.chart)(u)
    }

    pub fn tangents(&self, u: &[f64; 3]) -> [Biquaternion; 3] {
        match &self.tangent {
            Some(t) => t(u),
            None => self.fd_tangents(u),
        }
    }

    /// Central-difference tangents with step [`TANGENT_STEP`].
    pub fn fd_tangents(&self, u: &[f64; 3]) -> [Biquaternion; 3] {
        std::array::from_fn(|k| {
            let mut up = *u;
            let mut dn = *u;
            up[k] += TANGENT_STEP;
            dn[k] -= TANGENT_STEP;
            (self.point(&up) - self.point(&dn)) / (2.0 * TANGENT_STEP)
        })
    }

    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.orientation = -p.orientation;
        p
    }

    pub fn midpoint(&self) -> [f64; 3] {
        self.bounds.map(|[a, b]| 0.5 * (a + b))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Cycle3 {
    pub patches: Vec<Patch>,
}

impl Cycle3 {
    pub fn from_patches(patches: Vec<Patch>) -> Self {
        Self { patches }
    }

    pub fn single(patch: Patch) -> Self {
        Self { patches: vec![patch] }
    }

    /// The same cycle with opposite orientation.
    pub fn reversed(&self) -> Self {
        Self {
            patches: self.patches.iter().map(Patch::reversed).collect(),
        }
    }

    /// Formal sum of two cycles.
    pub fn join(mut self, other: Cycle3) -> Self {
        self.patches.extend(other.patches);
        self
    }
}

fn hr(x: [f64; 4]) -> Biquaternion {
    RealFormPoint::hr(x).embed()
}

fn hr_coords(z: &Biquaternion) -> [f64; 4] {
    RealFormPoint::from_biquaternion(RealForm::HR, z).coords
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64; 4]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|k| a[k] - b[k])
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius must be positive, got {r}")))
    }
}

/// Euclidean 3-sphere `‖X - center‖ = r` inside the affine space `ℍ + center`.
///
/// Chart over `(θ, φ, ψ) ∈ [0, π] × [0, π] × [0, 2π]`:
/// `center + r (cos θ, sin θ cos φ, sin θ sin φ cos ψ, sin θ sin φ sin ψ)`,
/// oriented as the boundary of the ball.
pub fn sphere_h(center: Biquaternion, r: f64) -> Result<Cycle3> {
    check_radius(r)?;
    let unit = |u: &[f64; 3]| {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        let (ss, cs) = u[2].sin_cos();
        [ct, st * cp, st * sp * cs, st * sp * ss]
    };
    let chart = move |u: &[f64; 3]| center + Biquaternion::from_real(unit(u)) * r;
    let tangents = move |u: &[f64; 3]| {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        let (ss, cs) = u[2].sin_cos();
        [
            Biquaternion::from_real([-st, ct * cp, ct * sp * cs, ct * sp * ss]) * r,
            Biquaternion::from_real([0.0, -st * sp, st * cp * cs, st * cp * ss]) * r,
            Biquaternion::from_real([0.0, 0.0, -st * sp * ss, st * sp * cs]) * r,
        ]
    };
    Ok(Cycle3::single(
        Patch::new(chart, [[0.0, PI], [0.0, PI], [0.0, TAU]], [false, false, true]).with_tangents(tangents),
    ))
}

/// Unit vector of ℍ_ℝ in split spherical coordinates,
/// `(cos θ cos φ, sin θ sin ψ, sin θ cos ψ, cos θ sin φ)`, for which
/// `N = cos 2θ`; and its three partials.
fn split_direction(theta: f64, phi: f64, psi: f64) -> ([f64; 4], [[f64; 4]; 3]) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (ss, cs) = psi.sin_cos();
    let w = [ct * cp, st * ss, st * cs, ct * sp];
    let d = [
        [-st * cp, ct * ss, ct * cs, -st * sp],
        [-ct * sp, 0.0, 0.0, ct * cp],
        [0.0, st * cs, -st * ss, 0.0],
    ];
    (w, d)
}

/// Polar-angle map of the split sphere charts: identity on `[0, π/2]`, or
/// `θ = π/4 + δ sinh(u)` which packs nodes around the cone `θ = π/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum ThetaMap {
    Linear,
    Sinh(f64),
}

impl ThetaMap {
    fn new(width: Option<f64>) -> Result<Self> {
        match width {
            None => Ok(Self::Linear),
            Some(d) if d > 0.0 && d.is_finite() => Ok(Self::Sinh(d)),
            Some(d) => Err(Error::InvalidArgument(format!("cluster width must be positive, got {d}"))),
        }
    }

    fn bounds(self) -> [f64; 2] {
        match self {
            Self::Linear => [0.0, FRAC_PI_2],
            Self::Sinh(d) => [(-FRAC_PI_4 / d).asinh(), (FRAC_PI_4 / d).asinh()],
        }
    }

    /// `(θ, dθ/du)`.
    fn eval(self, u: f64) -> (f64, f64) {
        match self {
            Self::Linear => (u, 1.0),
            Self::Sinh(d) => (FRAC_PI_4 + d * u.sinh(), d * u.cosh()),
        }
    }
}

/// Split sphere `‖X - center‖ = r` in ℍ_ℝ with the chart
/// `x⁰ = r cos θ cos φ, x¹ = r sin θ sin ψ, x² = r sin θ cos ψ, x³ = r cos θ sin φ`
/// over `[0, π/2] × [0, 2π] × [0, 2π]`, oriented as the boundary of the ball;
/// `(∂θ, ∂φ, ∂ψ)` is a positive frame and `N(X - center) = r² cos 2θ`.
pub fn sphere_hr(center: [f64; 4], r: f64) -> Result<Cycle3> {
    sphere_hr_about(center, r, center, None)
}

/// The split sphere re-charted from an interior point `x0`:
/// `X = x0 + ρ(ω) ω` with `ω` the split spherical direction. The cone of `x0`
/// sits at `θ = π/4`; with `width = Some(δ)` the polar angle is
/// `π/4 + δ sinh(u)`. Same oriented cycle as [`sphere_hr`].
pub fn sphere_hr_about(center: [f64; 4], r: f64, x0: [f64; 4], width: Option<f64>) -> Result<Cycle3> {
    check_radius(r)?;
    let v = sub(&x0, &center);
    if norm(&v) >= r {
        return Err(Error::InvalidArgument("view point must lie strictly inside the sphere".into()));
    }
    let map = ThetaMap::new(width)?;
    let q = dot(&v, &v) - r * r;

    // X - x0 = ρ ω with ρ the positive root of ‖v + ρ ω‖² = r²
    let eval = move |u: &[f64; 3]| -> ([f64; 4], [[f64; 4]; 3]) {
        let (theta, dtheta) = map.eval(u[0]);
        let (w, mut dw) = split_direction(theta, u[1], u[2]);
        dw[0] = dw[0].map(|c| c * dtheta);
        let b = dot(&v, &w);
        let rho = -b + (b * b - q).sqrt();
        let p: [f64; 4] = std::array::from_fn(|k| v[k] + rho * w[k]);
        let pw = dot(&p, &w);
        let x = std::array::from_fn(|k| x0[k] + rho * w[k]);
        let t = dw.map(|d| {
            let drho = -rho * dot(&p, &d) / pw;
            std::array::from_fn(|k| drho * w[k] + rho * d[k])
        });
        (x, t)
    };
    let chart = move |u: &[f64; 3]| hr(eval(u).0);
    let tangents = move |u: &[f64; 3]| eval(u).1.map(hr);
    Ok(Cycle3::single(
        Patch::new(chart, [map.bounds(), [0.0, TAU], [0.0, TAU]], [false, true, true]).with_tangents(tangents),
    ))
}

fn check_box(half_widths: &[f64; 4]) -> Result<()> {
    if half_widths.iter().all(|w| *w > 0.0 && w.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("half-widths must be positive, got {half_widths:?}")))
    }
}

fn others(k: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut j = 0;
    for i in 0..4 {
        if i != k {
            out[j] = i;
            j += 1;
        }
    }
    out
}

/// Boundary of the box `|x^k - c^k| ≤ w^k` in ℍ_ℝ as eight flat faces.
///
/// Face `x^k = c^k ± w^k` is charted by the remaining coordinates in
/// increasing order; its orientation is `±(-1)^k`, which makes the frame
/// positive after the outward normal.
pub fn box_boundary_hr(center: [f64; 4], half_widths: [f64; 4]) -> Result<Cycle3> {
    check_box(&half_widths)?;
    let mut patches = Vec::with_capacity(8);
    for k in 0..4 {
        let idx = others(k);
        for side in [-1.0, 1.0] {
            let fixed = center[k] + side * half_widths[k];
            let chart = move |u: &[f64; 3]| {
                let mut x = [0.0; 4];
                x[k] = fixed;
                for (j, &i) in idx.iter().enumerate() {
                    x[i] = u[j];
                }
                hr(x)
            };
            let basis = RealForm::HR.basis();
            let frame = idx.map(|i| basis[i]);
            let bounds = idx.map(|i| [center[i] - half_widths[i], center[i] + half_widths[i]]);
            let sign = if k % 2 == 0 { side } else { -side };
            patches.push(
                Patch::new(chart, bounds, [false; 3])
                    .with_tangents(move |_| frame)
                    .with_orientation(sign),
            );
        }
    }
    Ok(Cycle3::from_patches(patches))
}

/// `R = c + δ sinh(α + t (β - α))` with `δ = κ c`, mapping `[0, 1]` onto
/// `[0, L]` with nodes packed around `c`; linear when `kappa` is `None`.
/// Returns `(R, ∂R/∂c, ∂R/∂L, ∂R/∂t)`.
fn cluster_radius(t: f64, len: f64, c: f64, kappa: Option<f64>) -> [f64; 4] {
    match kappa {
        None => [t * len, 0.0, t, len],
        Some(w) => {
            let d = w * c;
            let (ua, ub) = (-c / d, (len - c) / d);
            let (ha, hb) = ((1.0 + ua * ua).sqrt(), (1.0 + ub * ub).sqrt());
            let (a, b) = (ua.asinh(), ub.asinh());
            let s = a + t * (b - a);
            let (sh, ch) = (s.sinh(), s.cosh());
            // partials of α, β in c and δ at fixed δ, c
            let (da_c, da_d) = (-1.0 / (d * ha), -ua / (d * ha));
            let (db_c, db_d) = (-1.0 / (d * hb), -ub / (d * hb));
            let r_c = 1.0 + d * ch * ((1.0 - t) * da_c + t * db_c);
            let r_d = sh + d * ch * ((1.0 - t) * da_d + t * db_d);
            [c + d * sh, r_c + w * r_d, t * ch / hb, d * ch * (b - a)]
        }
    }
}

/// The box boundary charted from an interior point `x0`.
///
/// On a face with fixed coordinate `k`, `N(X - x0)` only depends on the offset
/// `y_p` along the partner coordinate of equal sign (`0 ↔ 3`, `1 ↔ 2`) and on
/// the radius `R` in the remaining pair, and vanishes at `R² = d² + y_p²`
/// (`d` the face offset). Each face is split into four angular sectors at the
/// corners of its polar square and charted by `(y_p, angle, t)` with `t ∈ [0, 1]`
/// radial; `width = Some(κ)` clusters the radial nodes around the cone with
/// scale `κ · sqrt(d² + y_p²)`.
pub fn box_boundary_hr_about(
    center: [f64; 4],
    half_widths: [f64; 4],
    x0: [f64; 4],
    width: Option<f64>,
) -> Result<Cycle3> {
    check_box(&half_widths)?;
    if (0..4).any(|k| (x0[k] - center[k]).abs() >= half_widths[k]) {
        return Err(Error::InvalidArgument("view point must lie strictly inside the box".into()));
    }
    if let Some(d) = width {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("cluster width must be positive, got {d}")));
        }
    }
    const PARTNER: [usize; 4] = [3, 2, 1, 0];
    let mut patches = Vec::with_capacity(32);
    for k in 0..4 {
        let p = PARTNER[k];
        let q: Vec<usize> = (0..4).filter(|&i| i != k && i != p).collect();
        let (q1, q2) = (q[0], q[1]);
        let lo = |i: usize| center[i] - half_widths[i] - x0[i];
        let hi = |i: usize| center[i] + half_widths[i] - x0[i];
        let (lo1, hi1, lo2, hi2) = (lo(q1), hi(q1), lo(q2), hi(q2));
        // corner angles counter-clockwise from the first quadrant
        let a0 = hi2.atan2(hi1);
        let a1 = hi2.atan2(lo1);
        let a2 = lo2.atan2(lo1) + TAU;
        let a3 = lo2.atan2(hi1) + TAU;
        let a4 = a0 + TAU;
        // edge hit by rays in each sector: (angles, distance function)
        let sectors: [([f64; 2], u8); 4] = [([a0, a1], 0), ([a1, a2], 1), ([a2, a3], 2), ([a3, a4], 3)];
        for side in [-1.0, 1.0] {
            let d = center[k] + side * half_widths[k] - x0[k];
            for (range, edge) in sectors {
                // (L, dL/dψ)
                let rmax = move |psi: f64| {
                    let (s, c) = psi.sin_cos();
                    match edge {
                        0 => (hi2 / s, -hi2 * c / (s * s)),
                        1 => (lo1 / c, lo1 * s / (c * c)),
                        2 => (lo2 / s, -lo2 * c / (s * s)),
                        _ => (hi1 / c, hi1 * s / (c * c)),
                    }
                };
                let eval = move |u: &[f64; 3]| -> ([f64; 4], [[f64; 4]; 3]) {
                    let (yp, psi, t) = (u[0], u[1], u[2]);
                    let rc = (d * d + yp * yp).sqrt();
                    let (len, dlen) = rmax(psi);
                    let [radius, r_c, r_l, r_t] = cluster_radius(t, len, rc, width);
                    let (s, c) = psi.sin_cos();
                    let mut x = x0;
                    x[k] += d;
                    x[p] += yp;
                    x[q1] += radius * c;
                    x[q2] += radius * s;
                    let mut ty = [0.0; 4];
                    let r_y = r_c * yp / rc;
                    ty[p] = 1.0;
                    ty[q1] = r_y * c;
                    ty[q2] = r_y * s;
                    let mut tpsi = [0.0; 4];
                    let r_psi = r_l * dlen;
                    tpsi[q1] = r_psi * c - radius * s;
                    tpsi[q2] = r_psi * s + radius * c;
                    let mut tt = [0.0; 4];
                    tt[q1] = r_t * c;
                    tt[q2] = r_t * s;
                    (x, [ty, tpsi, tt])
                };
                let chart = move |u: &[f64; 3]| hr(eval(u).0);
                let tangents = move |u: &[f64; 3]| eval(u).1.map(hr);
                let mut patch =
                    Patch::new(chart, [[lo(p), hi(p)], range, [0.0, 1.0]], [false; 3]).with_tangents(tangents);
                let mut normal = [0.0; 4];
                normal[k] = side;
                let mid = patch.midpoint();
                let frame = patch.tangents(&mid).map(|t| hr_coords(&t));
                let det = det4_real(&[normal, frame[0], frame[1], frame[2]]);
                patch = patch.with_orientation(det.signum());
                patches.push(patch);
            }
        }
    }
    Ok(Cycle3::from_patches(patches))
}

/// `h_{ε,Z0}(Z) = Z + iε (Z - Z0)⁻`.
pub fn deformation(z: &Biquaternion, eps: f64, z0: &Biquaternion) -> Biquaternion {
    *z + (*z - *z0).minus() * Complex64::new(0.0, eps)
}

/// Push a cycle forward by `h_{ε,Z0}`; tangents go through its (linear) differential.
pub fn deform(cycle: &Cycle3, eps: f64, z0: Biquaternion) -> Cycle3 {
    let ie = Complex64::new(0.0, eps);
    let patches = cycle
        .patches
        .iter()
        .map(|base| {
            let for_chart = base.clone();
            let for_tangent = base.clone();
            Patch::new(
                move |u| deformation(&for_chart.point(u), eps, &z0),
                base.bounds,
                base.periodic,
            )
            .with_tangents(move |u| for_tangent.tangents(u).map(|t| t + t.minus() * ie))
            .with_orientation(base.orientation)
        })
        .collect();
    Cycle3::from_patches(patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::forms::{eval_dz, frame_volume};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_param(rng: &mut impl Rng, patch: &Patch) -> [f64; 3] {
        std::array::from_fn(|k| {
            let [a, b] = patch.bounds[k];
            a + (b - a) * rng.gen_range(0.05..0.95)
        })
    }

    fn outward_det(patch: &Patch, u: &[f64; 3], normal: [f64; 4]) -> f64 {
        let t = patch.tangents(u).map(|t| hr_coords(&t));
        det4_real(&[normal, t[0], t[1], t[2]]) * patch.orientation
    }

    #[test]
    fn sphere_h_points_and_tangents() {
        let center = Biquaternion::from_real([0.5, -0.2, 0.1, 0.3]);
        let cyc = sphere_h(center, 1.5).unwrap();
        let patch = &cyc.patches[0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let u = random_param(&mut rng, patch);
            let z = patch.point(&u);
            assert!(RealForm::H.contains(&z, 1e-15));
            assert!(((z - center).euclid_norm() - 1.5).abs() < 1e-12);
            let analytic = patch.tangents(&u);
            let fd = patch.fd_tangents(&u);
            for k in 0..3 {
                assert!((analytic[k] - fd[k]).max_abs() < 1e-8);
            }
            // outward normal first gives a positive frame
            let x = (z - center).z.map(|c| c.re);
            let t = analytic.map(|t| t.z.map(|c| c.re));
            assert!(det4_real(&[x, t[0], t[1], t[2]]) > 0.0);
        }
    }

    #[test]
    fn sphere_hr_chart_identities() {
        let r = 1.3;
        let cyc = sphere_hr([0.0; 4], r).unwrap();
        let patch = &cyc.patches[0];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = random_param(&mut rng, patch);
            let z = patch.point(&u);
            assert!(RealForm::HR.contains(&z, 1e-15));
            assert!((z.euclid_norm() - r).abs() < 1e-12);
            let n = z.quad_form();
            assert!((n - Complex64::new(r * r * (2.0 * u[0]).cos(), 0.0)).norm() < 1e-12);
            let t = patch.tangents(&u);
            let fd = patch.fd_tangents(&u);
            for k in 0..3 {
                assert!((t[k] - fd[k]).max_abs() < 1e-8);
            }
            let vol = frame_volume(&t.map(|t| hr_coords(&t)));
            let want = r.powi(3) * u[0].sin() * u[0].cos();
            assert!((vol - want).abs() < 1e-12);
            assert!(outward_det(patch, &u, hr_coords(&z)) > 0.0);
        }
    }

    #[test]
    fn star_chart_covers_same_sphere_with_same_orientation() {
        let center = [0.1, 0.0, -0.2, 0.3];
        let x0 = [0.4, 0.2, -0.1, 0.1];
        let r = 1.0;
        for width in [None, Some(0.05)] {
            let cyc = sphere_hr_about(center, r, x0, width).unwrap();
            let patch = &cyc.patches[0];
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..200 {
                let u = random_param(&mut rng, patch);
                let z = patch.point(&u);
                let x = hr_coords(&z);
                let rel = sub(&x, &center);
                assert!((norm(&rel) - r).abs() < 1e-12);
                let t = patch.tangents(&u);
                let fd = patch.fd_tangents(&u);
                for k in 0..3 {
                    assert!((t[k] - fd[k]).max_abs() < 1e-7 * (1.0 + t[k].max_abs()));
                }
                assert!(outward_det(patch, &u, rel) > 0.0);
                // cone of x0 sits at θ = π/4
                let w = z - hr(x0);
                let theta = ThetaMap::new(width).unwrap().eval(u[0]).0;
                let rho = w.euclid_norm();
                assert!((w.quad_form().re - rho * rho * (2.0 * theta).cos()).abs() < 1e-12);
            }
        }
        assert!(sphere_hr_about(center, r, [2.0, 0.0, 0.0, 0.0], None).is_err());
        assert!(sphere_hr_about(center, -1.0, center, None).is_err());
    }

    #[test]
    fn box_faces_are_outward_oriented() {
        let c = [0.1, -0.2, 0.0, 0.3];
        let w = [1.0, 0.5, 0.8, 1.2];
        let cyc = box_boundary_hr(c, w).unwrap();
        assert_eq!(cyc.patches.len(), 8);
        for (idx, patch) in cyc.patches.iter().enumerate() {
            let k = idx / 2;
            let side = if idx % 2 == 0 { -1.0 } else { 1.0 };
            let mut normal = [0.0; 4];
            normal[k] = side;
            let u = patch.midpoint();
            assert!(outward_det(patch, &u, normal) > 0.0, "face {idx}");
            let x = hr_coords(&patch.point(&u));
            assert!((x[k] - c[k] - side * w[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn box_about_covers_faces_and_tracks_cone() {
        let c = [0.0; 4];
        let w = [1.0, 1.0, 1.0, 1.0];
        let x0 = [0.2, -0.1, 0.3, 0.05];
        let cyc = box_boundary_hr_about(c, w, x0, Some(0.05)).unwrap();
        assert_eq!(cyc.patches.len(), 32);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut total_area = 0.0;
        for patch in &cyc.patches {
            for _ in 0..20 {
                let u = random_param(&mut rng, patch);
                let x = hr_coords(&patch.point(&u));
                let on_face = (0..4).filter(|&k| ((x[k] - c[k]).abs() - w[k]).abs() < 1e-12).count();
                assert_eq!(on_face, 1, "{x:?}");
                assert!((0..4).all(|k| (x[k] - c[k]).abs() <= w[k] + 1e-12));
                let k = (0..4).find(|&k| ((x[k] - c[k]).abs() - w[k]).abs() < 1e-12).unwrap();
                let mut normal = [0.0; 4];
                normal[k] = (x[k] - c[k]).signum();
                assert!(outward_det(patch, &u, normal) > 0.0);
                assert!(patch.has_analytic_tangents());
                let (t, fd) = (patch.tangents(&u), patch.fd_tangents(&u));
                for m in 0..3 {
                    assert!((t[m] - fd[m]).max_abs() < 1e-6 * (1.0 + t[m].max_abs()), "{m} {:?} {:?}", t[m], fd[m]);
                }
            }
            // crude midpoint-rule area of the patch, checked against the face volume below
            let n = 12;
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let u: [f64; 3] = std::array::from_fn(|m| {
                            let [a, b] = patch.bounds[m];
                            let s = [i, j, l][m] as f64;
                            a + (b - a) * (s + 0.5) / n as f64
                        });
                        let span: f64 = patch.bounds.iter().map(|[a, b]| (b - a) / n as f64).product();
                        let t = patch.tangents(&u).map(|t| hr_coords(&t));
                        total_area += frame_volume(&t) * span;
                    }
                }
            }
        }
        // eight unit-half-width faces of volume 8 each
        assert!((total_area - 64.0).abs() < 0.5, "{total_area}");
        assert!(box_boundary_hr_about(c, w, [1.5, 0.0, 0.0, 0.0], None).is_err());
    }

    #[test]
    fn deformation_identity_and_norm_shift() {
        let cyc = sphere_hr([0.0; 4], 1.0).unwrap();
        let same = deform(&cyc, 0.0, Biquaternion::ZERO);
        let u = [0.3, 1.0, 2.0];
        assert_eq!(same.patches[0].point(&u), cyc.patches[0].point(&u));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let z = Biquaternion {
                z: std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
            };
            let z0 = Biquaternion {
                z: std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
            };
            let eps: f64 = rng.gen_range(-0.5..0.5);
            let w = z - z0;
            let lhs = (deformation(&z, eps, &z0) - z0).quad_form();
            let rhs = w.quad_form() * (1.0 - eps * eps) + w.form_s() * Complex64::new(0.0, 2.0 * eps);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn deformation_pushes_cone_points_off_the_singularity() {
        let x0 = hr([0.1, 0.2, -0.3, 0.0]);
        for eps in [0.05, -0.1, 0.2] {
            for s in [0.5, 1.0, 2.0] {
                // null vector e0 + ẽ1 has N = 0 and ‖·‖² = 2
                let x = x0 + hr([s, s, 0.0, 0.0]);
                let n = (deformation(&x, eps, &x0) - x0).quad_form().norm();
                assert!(n >= 2.0 * eps.abs() * 2.0 * s * s - 1e-12);
            }
        }
    }

    #[test]
    fn deformed_tangents_match_finite_differences() {
        let cyc = sphere_hr_about([0.0; 4], 1.0, [0.2, 0.1, 0.0, -0.1], Some(0.1)).unwrap();
        let d = deform(&cyc, 0.1, hr([0.2, 0.1, 0.0, -0.1]));
        let patch = &d.patches[0];
        let u = [0.4, 1.1, 2.5];
        let a = patch.tangents(&u);
        let f = patch.fd_tangents(&u);
        for k in 0..3 {
            assert!((a[k] - f[k]).max_abs() < 1e-7);
        }
        let dz = eval_dz(&a[0], &a[1], &a[2]);
        assert!(dz.is_finite());
    }
}
