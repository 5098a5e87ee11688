//! Experiment runner over the `coquat` library: configuration, the named
//! experiments, and CSV / JSON emission.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, Format, RawConfig};
pub use report::{RunReport, Row};
