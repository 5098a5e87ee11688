//! Restriction of `Dx` to level sets in ℍ_ℝ: on an oriented hypersurface with
//! unit outward normal `n̂`, `Dx = n̂⁻ dS`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Biquaternion, RealFormPoint};
use crate::error::{Error, Result};
use crate::geometry::forms::{det4_real, eval_dz, frame_volume};

/// Which level set of ℍ_ℝ is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelKind {
    /// `{‖X‖ = r}`, where `Dx = X⁻/r dS`.
    NormLevel,
    /// `{N(X) = r²}`, oriented as the boundary of `{N < r²}`, where `Dx = X/‖X‖ dS`.
    NLevel,
}

fn norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `X⁻` in split coordinates.
fn minus(x: &[f64; 4]) -> [f64; 4] {
    [x[0], -x[1], -x[2], x[3]]
}

/// Outward unit normal at `x` (Euclidean in split coordinates).
pub fn level_normal(kind: LevelKind, x: &[f64; 4]) -> [f64; 4] {
    let g = match kind {
        LevelKind::NormLevel => *x,
        LevelKind::NLevel => minus(x),
    };
    let n = norm(&g);
    g.map(|c| c / n)
}

/// `‖Dx(frame) − expected(X) dS(frame)‖_∞` for one frame, taken as given.
///
/// A frame with the wrong orientation is not corrected, so it shows up as a
/// deviation of `2 ‖expected‖ dS`.
pub fn restriction_deviation(kind: LevelKind, r: f64, x: &[f64; 4], frame: &[[f64; 4]; 3]) -> Result<f64> {
    let ds = frame_volume(frame);
    let scale = frame.iter().map(norm).product::<f64>();
    if ds <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateFrame { volume: ds });
    }
    let t = frame.map(|c| RealFormPoint::hr(c).embed());
    let dx = eval_dz(&t[0], &t[1], &t[2]);
    let expected: Biquaternion = match kind {
        LevelKind::NormLevel => RealFormPoint::hr(minus(x).map(|c| c / r)).embed(),
        LevelKind::NLevel => RealFormPoint::hr(x.map(|c| c / norm(x))).embed(),
    };
    Ok((dx - expected * ds).max_abs())
}

/// A random tangent frame at `x`, oriented so that `(n̂, t₁, t₂, t₃)` is positive.
pub fn oriented_frame<R: Rng>(kind: LevelKind, x: &[f64; 4], rng: &mut R) -> [[f64; 4]; 3] {
    let n = level_normal(kind, x);
    let mut frame = [[0.0; 4]; 3];
    for t in frame.iter_mut() {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let p = dot(&v, &n);
        *t = std::array::from_fn(|k| v[k] - p * n[k]);
    }
    if det4_real(&[n, frame[0], frame[1], frame[2]]) < 0.0 {
        frame[0] = frame[0].map(|c| -c);
    }
    frame
}

/// A point on the level set. `NLevel` draws from the compact patch
/// `X = r(cosh a cos φ, sinh a sin ψ, sinh a cos ψ, cosh a sin φ)`, `a ∈ [0, 1.5]`.
pub fn sample_level_point<R: Rng>(kind: LevelKind, r: f64, rng: &mut R) -> [f64; 4] {
    match kind {
        LevelKind::NormLevel => loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = norm(&v);
            if n > 0.1 && n <= 1.0 {
                break v.map(|c| r * c / n);
            }
        },
        LevelKind::NLevel => {
            let a: f64 = rng.gen_range(0.0..1.5);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let psi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            [
                r * a.cosh() * phi.cos(),
                r * a.sinh() * psi.sin(),
                r * a.sinh() * psi.cos(),
                r * a.cosh() * phi.sin(),
            ]
        }
    }
}

/// Max deviation of the restriction formula over `samples` random oriented frames.
pub fn restriction_check(kind: LevelKind, r: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("level radius must be positive, got {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_level_point(kind, r, &mut rng);
        let frame = oriented_frame(kind, &x, &mut rng);
        worst = worst.max(restriction_deviation(kind, r, &x, &frame)?);
    }
    Ok(worst)
}
