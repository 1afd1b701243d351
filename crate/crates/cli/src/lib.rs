//! Scenario loading, command execution and report rendering behind the
//! `photonlink` binary.

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{render, Format};
pub use run::{run, Command, Report, RunError, RunOptions};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError, Selection};
