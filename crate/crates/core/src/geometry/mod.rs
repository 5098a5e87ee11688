//! Differential forms, parametrized cycles and their quadrature.

pub mod cycle;
pub mod forms;
pub mod quadrature;
pub mod restriction;
pub mod surface;

pub use cycle::{deform, Cycle3, Patch};
pub use forms::{eval_dv, eval_dz};
pub use quadrature::{integrate_form, integrate_form_converged, QuadOptions, QuadResult, Resolution};
pub use restriction::{restriction_check, LevelKind};
pub use surface::{Location, Surface};
