use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `|N(Z)|` fell below the singularity tolerance; `Z` is (numerically) a null vector.
    #[error("singular element: |N(Z)| = {norm_value:e} is below tolerance {tolerance:e}")]
    SingularElement { norm_value: f64, tolerance: f64 },

    #[error("finite-difference stencil left the function's domain: {0}")]
    StencilOutsideDomain(String),

    #[error("integrand is singular at a quadrature node: {0}")]
    IntegrandSingular(String),

    #[error("tangent frame is degenerate (volume {volume:e})")]
    DegenerateFrame { volume: f64 },

    #[error("extrapolation did not converge: successive extrapolants differ by {spread:e} (tolerance {tolerance:e})")]
    NonConvergent { spread: f64, tolerance: f64 },

    #[error("integration window [{lo}, {hi}] leaves [0, pi/2]")]
    WindowTooWide { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
