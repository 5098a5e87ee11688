//! Tensor-product quadrature of ℍ_ℂ-valued 3-forms over [`Cycle3`]s.
//!
//! Non-periodic parameters use Gauss-Legendre nodes, periodic ones the
//! trapezoidal rule. Rows of the first parameter are evaluated in parallel and
//! summed in index order, so results are bit-reproducible at fixed resolution.

use rayon::prelude::*;

use crate::algebra::Biquaternion;
use crate::calculus::QFunction;
use crate::error::{Error, Result};
use crate::geometry::cycle::{Cycle3, Patch};
use crate::geometry::forms::eval_dz;

pub type Resolution = [usize; 3];

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights for one parameter of a patch.
pub fn rule(bounds: [f64; 2], periodic: bool, n: usize) -> (Vec<f64>, Vec<f64>) {
    let [a, b] = bounds;
    if periodic {
        let h = (b - a) / n as f64;
        ((0..n).map(|j| a + j as f64 * h).collect(), vec![h; n])
    } else {
        let (x, w) = gauss_legendre(n);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|w| w * half).collect())
    }
}

/// Integral value with an error estimate from a coarser grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Biquaternion,
    /// `‖finest - next finest‖`.
    pub err_estimate: f64,
    pub resolution: Resolution,
}

/// Global resolution doubling: start at `initial`, double every parameter
/// until the change is below `rel_tol · |value| + abs_tol` or `max` is reached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub initial: Resolution,
    pub max: Resolution,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            initial: [48; 3],
            max: [384; 3],
            rel_tol: 1e-8,
            abs_tol: 1e-13,
        }
    }
}

impl QuadOptions {
    pub fn fixed(res: Resolution) -> Self {
        Self { initial: res, max: res, ..Self::default() }
    }
}

fn integrate_patch<F>(patch: &Patch, res: Resolution, integrand: &F) -> Result<Biquaternion>
where
    F: Fn(&Biquaternion, &[Biquaternion; 3]) -> Result<Biquaternion> + Sync,
{
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..3).map(|k| rule(patch.bounds[k], patch.periodic[k], res[k])).collect();
    let (u0, w0) = &rules[0];
    let (u1, w1) = &rules[1];
    let (u2, w2) = &rules[2];
    let rows: Vec<Result<Biquaternion>> = (0..u0.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Biquaternion::ZERO;
            for j in 0..u1.len() {
                let mut col = Biquaternion::ZERO;
                for k in 0..u2.len() {
                    let u = [u0[i], u1[j], u2[k]];
                    let z = patch.point(&u);
                    let t = patch.tangents(&u);
                    let v = integrand(&z, &t).map_err(|e| {
                        Error::IntegrandSingular(format!("at parameter {u:?}, point {z}: {e}"))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::IntegrandSingular(format!("non-finite value at parameter {u:?}")));
                    }
                    col += v * w2[k];
                }
                row += col * w1[j];
            }
            Ok(row * w0[i])
        })
        .collect();
    let mut total = Biquaternion::ZERO;
    for r in rows {
        total += r?;
    }
    Ok(total * patch.orientation)
}

/// `Σ_patches orientation · Σ_nodes w · integrand(Z(u), ∂Z(u))` at one resolution.
pub fn integrate_with<F>(cycle: &Cycle3, res: Resolution, integrand: F) -> Result<Biquaternion>
where
    F: Fn(&Biquaternion, &[Biquaternion; 3]) -> Result<Biquaternion> + Sync,
{
    if res.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("resolution must be positive, got {res:?}")));
    }
    let mut total = Biquaternion::ZERO;
    for patch in &cycle.patches {
        total += integrate_patch(patch, res, &integrand)?;
    }
    Ok(total)
}

/// `left(Z) · Dz(∂₁Z, ∂₂Z, ∂₃Z) · right(Z)` in that order.
pub fn form_integrand<'a>(
    left: &'a QFunction,
    right: &'a QFunction,
) -> impl Fn(&Biquaternion, &[Biquaternion; 3]) -> Result<Biquaternion> + Sync + 'a {
    move |z, t| {
        let dz = eval_dz(&t[0], &t[1], &t[2]);
        Ok(left.eval(z)? * dz * right.eval(z)?)
    }
}

fn half(res: Resolution) -> Resolution {
    res.map(|n| n.div_ceil(2).max(1))
}

/// `∫_c left · Dz · right` at resolution `res`, with the error estimated
/// against the half-resolution grid.
pub fn integrate_form(cycle: &Cycle3, left: &QFunction, right: &QFunction, res: Resolution) -> Result<QuadResult> {
    let f = form_integrand(left, right);
    let value = integrate_with(cycle, res, &f)?;
    let coarse = integrate_with(cycle, half(res), &f)?;
    Ok(QuadResult {
        value,
        err_estimate: (value - coarse).euclid_norm(),
        resolution: res,
    })
}

/// Doubling driver around [`integrate_with`].
pub fn integrate_converged_with<F>(cycle: &Cycle3, opts: &QuadOptions, integrand: F) -> Result<QuadResult>
where
    F: Fn(&Biquaternion, &[Biquaternion; 3]) -> Result<Biquaternion> + Sync,
{
    let mut res = opts.initial;
    let mut prev = integrate_with(cycle, res, &integrand)?;
    if opts.max == opts.initial {
        let coarse = integrate_with(cycle, half(res), &integrand)?;
        return Ok(QuadResult {
            value: prev,
            err_estimate: (prev - coarse).euclid_norm(),
            resolution: res,
        });
    }
    loop {
        let next: Resolution = std::array::from_fn(|k| (2 * res[k]).min(opts.max[k].max(res[k])));
        if next == res {
            return Ok(QuadResult { value: prev, err_estimate: f64::INFINITY, resolution: res });
        }
        let cur = integrate_with(cycle, next, &integrand)?;
        let err = (cur - prev).euclid_norm();
        res = next;
        let done = err <= opts.rel_tol * cur.euclid_norm() + opts.abs_tol;
        let capped = (0..3).all(|k| res[k] >= opts.max[k]);
        if done || capped {
            return Ok(QuadResult { value: cur, err_estimate: err, resolution: res });
        }
        prev = cur;
    }
}

/// [`integrate_form`] with resolution doubling per `opts`.
pub fn integrate_form_converged(
    cycle: &Cycle3,
    left: &QFunction,
    right: &QFunction,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_converged_with(cycle, opts, form_integrand(left, right))
}

/// Call `visit(patch_index, patch, u, spacing)` on every node; `spacing` is
/// the mean node distance per parameter.
pub fn visit_nodes<F>(cycle: &Cycle3, res: Resolution, mut visit: F)
where
    F: FnMut(usize, &Patch, &[f64; 3], &[f64; 3]),
{
    for (idx, patch) in cycle.patches.iter().enumerate() {
        let rules: Vec<Vec<f64>> = (0..3).map(|k| rule(patch.bounds[k], patch.periodic[k], res[k]).0).collect();
        let spacing: [f64; 3] = std::array::from_fn(|k| (patch.bounds[k][1] - patch.bounds[k][0]) / res[k] as f64);
        for &a in &rules[0] {
            for &b in &rules[1] {
                for &c in &rules[2] {
                    visit(idx, patch, &[a, b, c], &spacing);
                }
            }
        }
    }
}
