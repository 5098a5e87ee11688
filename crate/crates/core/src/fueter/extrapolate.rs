//! Richardson extrapolation of single-ε values to `ε → 0`.

use crate::algebra::Biquaternion;
use crate::error::{Error, Result};

/// Assumed form of the error expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expansion {
    /// `v(ε) = v₀ + a ε² + b ε⁴ + ...`
    EvenPowers,
    /// `v(ε) = v₀ + a |ε| + b ε² + ...`
    AllPowers,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsSchedule {
    /// Strictly decreasing positive values.
    pub values: Vec<f64>,
    /// Polynomial degree of the extrapolant in the expansion variable.
    pub extrapolation_order: usize,
    pub expansion: Expansion,
    /// Relative bound on `|T_deg - T_{deg-1}|`.
    pub tolerance: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self {
            values: vec![0.2, 0.1, 0.05, 0.025],
            extrapolation_order: 2,
            expansion: Expansion::EvenPowers,
            tolerance: 1e-2,
        }
    }
}

impl EpsSchedule {
    pub fn new(values: Vec<f64>, extrapolation_order: usize) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!("eps values must be positive, got {values:?}")));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(format!("eps values must strictly decrease, got {values:?}")));
        }
        if extrapolation_order == 0 {
            return Err(Error::InvalidArgument("extrapolation order must be at least 1".into()));
        }
        Ok(Self { values, extrapolation_order, ..Self::default() })
    }

    pub fn with_expansion(mut self, expansion: Expansion) -> Self {
        self.expansion = expansion;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn variable(&self, eps: f64) -> f64 {
        match self.expansion {
            Expansion::EvenPowers => eps * eps,
            Expansion::AllPowers => eps.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolated {
    pub value: Biquaternion,
    /// `‖T_deg - T_{deg-1}‖`, the change from dropping the largest ε.
    pub stability: f64,
    pub degree: usize,
}

/// Value at 0 of the interpolating polynomial through `(t_i, v_i)` (Neville).
fn neville_at_zero(pts: &[(f64, Biquaternion)]) -> Biquaternion {
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut p: Vec<Biquaternion> = pts.iter().map(|p| p.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let j = i + m;
            p[i] = (p[i] * t[j] - p[i + 1] * t[i]) / (t[j] - t[i]);
        }
    }
    p[0]
}

/// Extrapolate `(ε, v(ε))` samples to `ε = 0`.
///
/// Uses the `degree + 1` samples with smallest `|ε|`, `degree = min(order, n - 1)`.
pub fn eps_extrapolate(values: &[(f64, Biquaternion)], schedule: &EpsSchedule) -> Result<Extrapolated> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {}", values.len())));
    }
    let mut pts: Vec<(f64, Biquaternion)> = values
        .iter()
        .map(|(e, v)| {
            if *e == 0.0 || !e.is_finite() {
                Err(Error::InvalidArgument(format!("sample eps must be finite and nonzero, got {e}")))
            } else {
                Ok((schedule.variable(*e), *v))
            }
        })
        .collect::<Result<_>>()?;
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument("duplicate |eps| among samples".into()));
    }
    let degree = schedule.extrapolation_order.min(pts.len() - 1).max(1);
    let hi = neville_at_zero(&pts[..=degree]);
    let lo = neville_at_zero(&pts[..degree]);
    let stability = (hi - lo).euclid_norm();
    let bound = schedule.tolerance * hi.euclid_norm().max(1.0);
    if !(stability <= bound) {
        return Err(Error::NonConvergent { spread: stability, tolerance: bound });
    }
    Ok(Extrapolated { value: hi, stability, degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn samples(f: impl Fn(f64) -> f64, eps: &[f64]) -> Vec<(f64, Biquaternion)> {
        eps.iter().map(|&e| (e, Biquaternion::E0 * f(e))).collect()
    }

    #[test]
    fn model_value_recovers_limit() {
        let s = EpsSchedule::default();
        let r = eps_extrapolate(&samples(|e| 1.0 / (1.0 + e * e), &[0.2, 0.1, 0.05]), &s).unwrap();
        assert!((r.value.z[0].re - 1.0).abs() < 1e-6);
        assert_eq!(r.degree, 2);
        let r = eps_extrapolate(&samples(|e| 1.0 / (1.0 + e * e), &[0.2, 0.1, 0.05, 0.025]), &s).unwrap();
        assert!((r.value.z[0].re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn constant_sequence() {
        let s = EpsSchedule::default();
        let r = eps_extrapolate(&samples(|_| 3.5, &[0.2, 0.1, 0.05]), &s).unwrap();
        assert!((r.value.z[0].re - 3.5).abs() < 1e-14);
        assert!(r.stability < 1e-14);
    }

    #[test]
    fn garbage_is_rejected() {
        let s = EpsSchedule::default();
        let v = samples(|e| if e > 0.15 || (e < 0.07 && e > 0.03) { 1.0 } else { -1.0 }, &[0.2, 0.1, 0.05, 0.025]);
        assert!(matches!(eps_extrapolate(&v, &s), Err(Error::NonConvergent { .. })));
        assert!(eps_extrapolate(&v[..1], &s).is_err());
    }

    #[test]
    fn odd_terms_need_all_powers() {
        let f = |e: f64| 2.0 + 0.3 * e.abs() + e * e;
        let eps = [0.2, 0.1, 0.05];
        let even = eps_extrapolate(&samples(f, &eps), &EpsSchedule::default()).unwrap();
        let all = eps_extrapolate(&samples(f, &eps), &EpsSchedule::default().with_expansion(Expansion::AllPowers))
            .unwrap();
        assert!((all.value.z[0].re - 2.0).abs() < 1e-13);
        assert!((even.value.z[0].re - 2.0).abs() > 1e-3);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsSchedule::new(vec![0.1, 0.2], 2).is_err());
        assert!(EpsSchedule::new(vec![0.2, -0.1], 2).is_err());
        assert!(EpsSchedule::new(vec![0.2, 0.1], 0).is_err());
        assert!(EpsSchedule::new(vec![0.2, 0.1], 1).is_ok());
    }

    proptest! {
        #[test]
        fn polynomials_in_eps_squared_are_exact(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            let f = |e: f64| a + b * e * e + c * e.powi(4);
            let r = eps_extrapolate(&samples(f, &[0.4, 0.2, 0.1]), &EpsSchedule::default().with_tolerance(1e3)).unwrap();
            prop_assert!((r.value.z[0].re - a).abs() < 1e-11);
        }
    }
}
