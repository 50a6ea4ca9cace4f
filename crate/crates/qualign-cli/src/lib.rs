//! Experiment runner around the `qualign` solver: declarative scenario
//! configs, the standard study protocols (entanglement sweep, CVaR
//! comparison, QAOA-vs-HEA, noise comparison), and deterministic result
//! emission.
//!
//! Everything here is plumbing; the physics and optimization live in
//! `qualign`. The contract that shapes this crate is reproducibility:
//! a `(config, seed)` pair maps to byte-identical result files regardless
//! of how many worker threads execute the runs. Wall-clock measurements
//! are therefore quarantined in dedicated timing sidecar files, which are
//! the only outputs exempt from that guarantee.

pub mod config;
pub mod output;
pub mod scenario;
pub mod study;

pub use config::{CliOverrides, ConfigError, Formats, Resolved, ScenarioConfig};
pub use scenario::{run_scenario, ScenarioResult, SeedOutcome, StateClass};
pub use study::{run_study, timing_report, StudyKind, StudyResult, TimingRow};
