//! Configuration, scenario orchestration and report files for `logsob-core`.

pub mod config;
pub mod parse;
pub mod report;
pub mod scenario;

pub use config::ScenarioConfig;
pub use scenario::{execute, run_scenario, Output};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("violated hypothesis: {0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("output: {0}")]
    Output(String),
}

impl Error {
    /// 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Hypothesis(_) => 2,
            _ => 1,
        }
    }
}
