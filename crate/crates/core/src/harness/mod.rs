//! Scenario files, seeded generators, suite execution and report output.

pub mod generate;
pub mod report;
pub mod run;
pub mod scenario;

pub use generate::{generate, generate_many, mixed_suite, GenParams, Variant};
pub use report::{Report, SuiteReport, Summary};
pub use run::{run_scenario, run_suite, RunOptions};
pub use scenario::{
    load_scenario, load_suite, parse_suite, ConjIdentity, Expectation, Fault, Kind, Payload, Scenario, Tolerances,
};

/// Environment variable naming the default directory for report files.
pub const REPORT_DIR_ENV: &str = "RELAXED_MINIMAX_REPORT_DIR";
