//! SU(1,1) inside ℍ_ℝ, the Ol'shanskii semigroup `Γ⁰` and its inverse `Γ̄⁰`,
//! and a sampled estimate of how far a point stays from the null cones of the
//! group elements.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{mat2_adjoint, mat2_mul, Biquaternion};

/// Eigenvalue threshold for (negative) definiteness.
pub const DEFINITENESS_TOL: f64 = 1e-10;

/// Margins below this are reported as "likely not in Ω".
pub const LIKELY_OUTSIDE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SU11Params {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// `(cosh t e^{iα}, sinh t e^{iβ}; sinh t e^{-iβ}, cosh t e^{-iα})`.
pub fn su11_sample(p: SU11Params) -> Biquaternion {
    let (c, s) = (p.t.cosh(), p.t.sinh());
    let m = [
        [Complex64::from_polar(c, p.alpha), Complex64::from_polar(s, p.beta)],
        [Complex64::from_polar(s, -p.beta), Complex64::from_polar(c, -p.alpha)],
    ];
    Biquaternion::from_matrix(&m)
}

/// Eigenvalues (ascending) of the Hermitian matrix `M* J M - J`, `J = diag(1, -1)`.
pub fn gamma_eigenvalues(z: &Biquaternion) -> [f64; 2] {
    let m = z.to_matrix();
    let one = Complex64::new(1.0, 0.0);
    let j = [[one, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), -one]];
    let h = mat2_mul(&mat2_adjoint(&m), &mat2_mul(&j, &m));
    let (p, s, q) = (h[0][0].re - 1.0, h[1][1].re + 1.0, h[0][1]);
    let mid = 0.5 * (p + s);
    let rad = (0.25 * (p - s) * (p - s) + q.norm_sqr()).sqrt();
    [mid - rad, mid + rad]
}

/// `Z ∈ Γ⁰`: `Z* ẽ₃ Z - ẽ₃` positive definite.
pub fn in_gamma0(z: &Biquaternion) -> bool {
    gamma_eigenvalues(z)[0] > DEFINITENESS_TOL
}

/// `Z ∈ Γ̄⁰`: the same form negative definite.
pub fn in_gamma0_bar(z: &Biquaternion) -> bool {
    gamma_eigenvalues(z)[1] < -DEFINITENESS_TOL
}

/// Truncation of the group for [`omega_margin`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaSearch {
    pub t_max: f64,
    /// Nodes in `t` (endpoints included, so `grid[0] + 1` values), `α`, `β`.
    pub grid: [usize; 3],
    /// Polish the grid minimum by pattern search.
    pub refine: bool,
}

impl Default for OmegaSearch {
    fn default() -> Self {
        Self { t_max: 6.0, grid: [64, 64, 64], refine: true }
    }
}

/// `N(X - X0) = 1 - 2⟨X, X0⟩ + N(X0)` for `X ∈ SU(1,1)`.
fn shifted_norm(x0: &Biquaternion, n0: Complex64, p: SU11Params) -> f64 {
    let x = su11_sample(p);
    (Complex64::new(1.0, 0.0) - x.pairing(x0) * 2.0 + n0).norm()
}

/// Estimated `inf |N(X - X0)|` over `X ∈ SU(1,1)` with `t ≤ t_max`.
pub fn omega_margin(x0: &Biquaternion, search: &OmegaSearch) -> f64 {
    let n0 = x0.quad_form();
    let [nt, na, nb] = search.grid;
    let f = |p: SU11Params| shifted_norm(x0, n0, p);
    let at = |i: usize, j: usize, k: usize| SU11Params {
        t: search.t_max * i as f64 / nt.max(1) as f64,
        alpha: TAU * j as f64 / na.max(1) as f64,
        beta: TAU * k as f64 / nb.max(1) as f64,
    };
    let (mut best, mut arg) = (0..=nt)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, at(i, 0, 0));
            for j in 0..na.max(1) {
                for k in 0..nb.max(1) {
                    let p = at(i, j, k);
                    let v = f(p);
                    if v < best.0 {
                        best = (v, p);
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, at(0, 0, 0)), |a, b| if b.0 < a.0 { b } else { a });
    if !search.refine {
        return best;
    }
    let mut step = [
        search.t_max / nt.max(1) as f64,
        TAU / na.max(1) as f64,
        TAU / nb.max(1) as f64,
    ];
    while step.iter().any(|s| *s > 1e-13) && best > 0.0 {
        let mut moved = false;
        for d in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut p = arg;
                match d {
                    0 => p.t = (p.t + sign * step[0]).clamp(0.0, search.t_max),
                    1 => p.alpha += sign * step[1],
                    _ => p.beta += sign * step[2],
                }
                let v = f(p);
                if v < best {
                    best = v;
                    arg = p;
                    moved = true;
                }
            }
        }
        if !moved {
            step = step.map(|s| 0.5 * s);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionVerdict {
    pub in_gamma0: bool,
    pub in_gamma0_bar: bool,
    pub omega_margin: f64,
    pub truncation_t_max: f64,
}

impl RegionVerdict {
    /// The sampled margin is an estimate; this only says it did not collapse.
    pub fn likely_in_omega(&self) -> bool {
        self.omega_margin >= LIKELY_OUTSIDE
    }
}

pub fn classify(x0: &Biquaternion, search: &OmegaSearch) -> RegionVerdict {
    RegionVerdict {
        in_gamma0: in_gamma0(x0),
        in_gamma0_bar: in_gamma0_bar(x0),
        omega_margin: omega_margin(x0, search),
        truncation_t_max: search.t_max,
    }
}
