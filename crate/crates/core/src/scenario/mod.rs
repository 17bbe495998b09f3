//! Configuration-driven runs that emit the figure tables, charts and report.

pub mod config;
pub mod run;
pub mod svg;
pub mod sweep;
pub mod table;

pub use config::{Axis, Output, ScenarioConfig, Tolerances};
pub use run::{run_scenario, verify, ArtifactBundle, RunOptions, Verification};
pub use sweep::sweep;
