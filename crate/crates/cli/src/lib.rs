//! Scenario parsing, task runners and figure presets behind the
//! `casimir-enz` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use presets::run_preset;
pub use run::run_scenario;
pub use scenario::{parse_scenario, Scenario, ScenarioBuilder, Task};
