//! The distributions `1/(cos 2θ ± i0)ⁿ` and their ε-regularizations, evaluated
//! through integration by parts so that nothing blows up as `ε → 0`.
//!
//! With `c = cos 2θ` and `G = g / (2 sin 2θ)`:
//! ```text
//! I_n[g] = 1/(n-1) [(c+iε)^{-(n-1)} G] - 1/(n-1) I_{n-1}[G']     (n ≥ 2)
//! I_1[g] = -[log(c+iε) G] + ∫ log(c+iε) G' dθ
//! ```
//! `G` is represented by a Chebyshev interpolant, so `G'` is exact for it.
//! Only the band of the window near the cone at π/4 goes through the
//! recursion; the rest is integrated directly.

use std::f64::consts::FRAC_PI_4;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::quadrature::gauss_legendre;

/// Which side of the real axis the singularity at `cos 2θ = 0` is approached from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryValue {
    PlusI0,
    MinusI0,
}

const PANEL_NODES: usize = 12;
const GRADING_LEVELS: usize = 48;
const UNIFORM_PANELS: usize = 16;
/// Half-width of the band around π/4 handled by integration by parts.
const CONE_BAND: f64 = 0.25;

#[derive(Clone, Copy, Debug)]
enum Reg {
    Eps(f64),
    Limit(f64),
}

impl Reg {
    fn shift(self, c: f64) -> Complex64 {
        match self {
            Reg::Eps(e) => Complex64::new(c, e),
            Reg::Limit(_) => Complex64::new(c, 0.0),
        }
    }

    fn log(self, c: f64) -> Complex64 {
        match self {
            Reg::Eps(e) => Complex64::new(c, e).ln(),
            Reg::Limit(s) => {
                let im = if c < 0.0 { s * std::f64::consts::PI } else { 0.0 };
                Complex64::new(c.abs().ln(), im)
            }
        }
    }

    fn inv_pow(self, c: f64, m: i32) -> Complex64 {
        self.shift(c).powi(-m)
    }
}

/// Chebyshev interpolant on `[a, b]`.
#[derive(Clone, Debug)]
struct Cheb {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Cheb {
    fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let pi = std::f64::consts::PI;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let x = (pi * (j as f64 + 0.5) / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * x)
            })
            .collect();
        let coeffs = (0..n)
            .map(|k| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (pi * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                    .sum();
                if k == 0 { s / n as f64 } else { 2.0 * s / n as f64 }
            })
            .collect();
        Self { a, b, coeffs }
    }

    /// Smallest power-of-two size in 16..=256 whose trailing coefficients
    /// fall below `1e-13` of the largest, with that tail dropped. Keeping the
    /// degree low keeps repeated differentiation from amplifying roundoff.
    fn adaptive(a: f64, b: f64, f: impl Fn(f64) -> f64) -> Self {
        let mut n = 16;
        loop {
            let mut c = Self::from_fn(a, b, n, &f);
            let big = c.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let cut = 1e-13 * big;
            let resolved = c.coeffs[n - 4..].iter().all(|v| v.abs() <= cut);
            if resolved || n >= 256 {
                let keep = c.coeffs.iter().rposition(|v| v.abs() > cut).map_or(1, |k| k + 1);
                c.coeffs.truncate(keep);
                return c;
            }
            n *= 2;
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }

    fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        let mut d = vec![0.0; n];
        if n >= 2 {
            d[n - 2] = 2.0 * (n - 1) as f64 * self.coeffs[n - 1];
            for k in (1..n - 1).rev() {
                d[k - 1] = d.get(k + 1).copied().unwrap_or(0.0) + 2.0 * k as f64 * self.coeffs[k];
            }
            d[0] *= 0.5;
        }
        let scale = 2.0 / (self.b - self.a);
        Self { a: self.a, b: self.b, coeffs: d.into_iter().map(|c| c * scale).collect() }
    }
}

/// Composite Gauss-Legendre on `[a, b]`, geometrically graded toward π/4 when
/// it lies in the window.
fn graded_integral(a: f64, b: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let (x, w) = gauss_legendre(PANEL_NODES);
    let panel = |lo: f64, hi: f64| -> Complex64 {
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        x.iter().zip(&w).map(|(x, w)| f(m + h * x) * (w * h)).sum()
    };
    let graded = |from: f64, to: f64| -> Complex64 {
        // panels shrink by half toward `to`
        let mut total = Complex64::new(0.0, 0.0);
        let mut lo = from;
        let len = to - from;
        for k in 1..=GRADING_LEVELS {
            let hi = to - len * 0.5f64.powi(k as i32);
            total += panel(lo, hi);
            lo = hi;
        }
        total + panel(lo, to)
    };
    let p = FRAC_PI_4;
    if a <= p && p <= b {
        let left = if a < p { graded(a, p) } else { Complex64::new(0.0, 0.0) };
        let right = if p < b { graded(b, p) } else { Complex64::new(0.0, 0.0) };
        left - right
    } else {
        uniform_integral(a, b, f)
    }
}

fn uniform_integral(a: f64, b: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let (x, w) = gauss_legendre(PANEL_NODES);
    let len = (b - a) / UNIFORM_PANELS as f64;
    (0..UNIFORM_PANELS)
        .map(|k| {
            let (m, h) = (a + (k as f64 + 0.5) * len, 0.5 * len);
            x.iter().zip(&w).map(|(x, w)| f(m + h * x) * (w * h)).sum::<Complex64>()
        })
        .sum()
}

fn ibp(g: &dyn Fn(f64) -> f64, n: u32, reg: Reg, window: [f64; 2]) -> Complex64 {
    let [a, b] = window;
    let big_g = Cheb::adaptive(a, b, |t| g(t) / (2.0 * (2.0 * t).sin()));
    let c = |t: f64| (2.0 * t).cos();
    let dg = big_g.derivative();
    if n == 1 {
        let boundary = reg.log(c(b)) * big_g.eval(b) - reg.log(c(a)) * big_g.eval(a);
        let body = graded_integral(a, b, |t| reg.log(c(t)) * dg.eval(t));
        body - boundary
    } else {
        let m = (n - 1) as f64;
        let boundary = reg.inv_pow(c(b), (n - 1) as i32) * big_g.eval(b) - reg.inv_pow(c(a), (n - 1) as i32) * big_g.eval(a);
        let inner = ibp(&|t| dg.eval(t), n - 1, reg, window);
        (boundary - inner) / m
    }
}

/// Integration by parts on the part of the window within `CONE_BAND` of
/// π/4, plain Gauss-Legendre on the rest, where `|cos 2θ| ≥ sin(2 CONE_BAND)`.
/// Near the cone `G` is smooth enough for a low-degree interpolant, so the
/// repeated differentiation stays well conditioned.
fn evaluate(g: &dyn Fn(f64) -> f64, n: u32, reg: Reg, window: [f64; 2]) -> Complex64 {
    let [a, b] = window;
    let (lo, hi) = (a.max(FRAC_PI_4 - CONE_BAND), b.min(FRAC_PI_4 + CONE_BAND));
    let direct = |x: f64, y: f64| uniform_integral(x, y, |t| g(t) * reg.inv_pow((2.0 * t).cos(), n as i32));
    if lo >= hi {
        return direct(a, b);
    }
    let mut total = ibp(g, n, reg, [lo, hi]);
    if a < lo {
        total += direct(a, lo);
    }
    if hi < b {
        total += direct(hi, b);
    }
    total
}

fn validate(n: u32, window: [f64; 2]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("power n must be at least 1".into()));
    }
    let [a, b] = window;
    if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= FRAC_PI_2) {
        return Err(Error::WindowTooWide { lo: a, hi: b });
    }
    Ok(())
}

/// `∫_window g(θ) / (cos 2θ + iε)ⁿ dθ` for `ε ≠ 0`.
///
/// The window must lie in `[0, π/2]`.
pub fn theta_regularized(g: impl Fn(f64) -> f64, n: u32, eps: f64, window: [f64; 2]) -> Result<Complex64> {
    validate(n, window)?;
    if !(eps != 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be finite and nonzero, got {eps}")));
    }
    Ok(evaluate(&g, n, Reg::Eps(eps), window))
}

/// The boundary value `⟨1/(cos 2θ ± i0)ⁿ, g⟩` on the window; the logarithm is
/// the principal branch, so `log(c ± i0) = log|c| ± iπ` for `c < 0`.
pub fn theta_boundary_value(g: impl Fn(f64) -> f64, n: u32, side: BoundaryValue, window: [f64; 2]) -> Result<Complex64> {
    validate(n, window)?;
    if window.iter().any(|t| (t - FRAC_PI_4).abs() < 1e-12) {
        return Err(Error::InvalidArgument("window endpoints must avoid the cone at pi/4".into()));
    }
    let s = match side {
        BoundaryValue::PlusI0 => 1.0,
        BoundaryValue::MinusI0 => -1.0,
    };
    Ok(evaluate(&g, n, Reg::Limit(s), window))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force composite Gauss-Legendre on the raw integrand, uniform panels.
    fn direct(g: impl Fn(f64) -> f64, n: i32, eps: f64, window: [f64; 2]) -> Complex64 {
        let (x, w) = gauss_legendre(16);
        let panels = 4000;
        let h = (window[1] - window[0]) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let m = window[0] + (p as f64 + 0.5) * h;
            for (x, w) in x.iter().zip(&w) {
                let t = m + 0.5 * h * x;
                total += Complex64::new((2.0 * t).cos(), eps).powi(-n) * (g(t) * w * 0.5 * h);
            }
        }
        total
    }

    #[test]
    fn chebyshev_derivative() {
        let c = Cheb::from_fn(0.2, 1.3, 40, |t| (3.0 * t).sin() * t.exp());
        let d = c.derivative();
        for t in [0.2f64, 0.5, 1.0, 1.3] {
            let want = 3.0 * (3.0 * t).cos() * t.exp() + (3.0 * t).sin() * t.exp();
            assert!((d.eval(t) - want).abs() < 1e-11, "{t}");
            assert!((c.eval(t) - (3.0 * t).sin() * t.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn full_window_antiderivative() {
        for eps in [1.0, 0.1, 1e-3, -0.2] {
            let v = theta_regularized(|t| (2.0 * t).sin(), 2, eps, [0.0, FRAC_PI_2]).unwrap();
            let want = -1.0 / (1.0 + eps * eps);
            assert!((v - want).norm() < 1e-10, "{eps}: {v}");
        }
    }

    #[test]
    fn zero_function() {
        assert_eq!(theta_regularized(|_| 0.0, 3, 0.1, [0.5, 1.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn matches_direct_quadrature_at_moderate_eps() {
        let gs: [fn(f64) -> f64; 2] = [|t| 1.0 + t * t - 0.3 * (5.0 * t).cos(), f64::exp];
        let windows = [[FRAC_PI_4 - 0.5, FRAC_PI_4 + 0.6], [0.1, 1.4], [0.0, FRAC_PI_2], [0.9, 1.2]];
        for g in gs {
            for window in windows {
                for n in 1..=4 {
                    for eps in [0.3, -0.15] {
                        let v = theta_regularized(g, n, eps, window).unwrap();
                        let d = direct(g, n as i32, eps, window);
                        assert!((v - d).norm() < 1e-10 * d.norm().max(1.0), "n={n} eps={eps} {window:?}: {v} vs {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_values_jump_by_i_pi() {
        let w = [FRAC_PI_4 - 0.4, FRAC_PI_4 + 0.4];
        let plus = theta_boundary_value(|_| 1.0, 1, BoundaryValue::PlusI0, w).unwrap();
        let minus = theta_boundary_value(|_| 1.0, 1, BoundaryValue::MinusI0, w).unwrap();
        let jump = plus - minus;
        assert!(jump.re.abs() < 1e-12 && (jump.im + std::f64::consts::PI).abs() < 1e-10, "{jump}");
        // ε → 0± approaches the two boundary values
        let near_p = theta_regularized(|_| 1.0, 1, 1e-3, w).unwrap();
        let near_m = theta_regularized(|_| 1.0, 1, -1e-3, w).unwrap();
        assert!((near_p - plus).norm() < 1e-2 && (near_m - minus).norm() < 1e-2);
        let nearer = theta_regularized(|_| 1.0, 1, 1e-5, w).unwrap();
        assert!((nearer - plus).norm() < 0.1 * (near_p - plus).norm());
    }

    #[test]
    fn window_rules() {
        assert!(matches!(theta_regularized(|_| 1.0, 1, 0.1, [-0.1, 1.0]), Err(Error::WindowTooWide { .. })));
        assert!(matches!(theta_regularized(|_| 1.0, 1, 0.1, [0.2, 1.7]), Err(Error::WindowTooWide { .. })));
        assert!(theta_regularized(|_| 1.0, 1, 0.1, [0.0, FRAC_PI_2]).is_ok());
        assert!(theta_boundary_value(|_| 1.0, 2, BoundaryValue::PlusI0, [0.2, FRAC_PI_4]).is_err());
        assert!(theta_regularized(|_| 1.0, 0, 0.1, [0.2, 1.0]).is_err());
        assert!(theta_regularized(|_| 1.0, 1, 0.0, [0.2, 1.0]).is_err());
    }
}
