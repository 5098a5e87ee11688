//! Numerical split quaternionic analysis: biquaternion algebra, Dirac
//! operators on the real forms ℍ, ℍ_ℝ and 𝕄, integration of 3-forms over
//! parametrized cycles, and Fueter-type integral formulas on ℍ_ℝ.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod fueter;
pub mod geometry;
pub mod regions;

pub use algebra::{Biquaternion, Conjugation, RealForm, RealFormPoint};
pub use calculus::{DiracForm, DiracOperator, DiracSpec, QFunction, Side};
pub use error::{Error, Result};
