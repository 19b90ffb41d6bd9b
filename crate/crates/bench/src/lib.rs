//! Experiment harness for `riemprox`: configuration, drivers for the
//! benchmark problems and the theory checks, and CSV output.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;

pub use config::{Cli, Experiment, ExperimentConfig, StepsizeMode};
pub use csv::CsvTable;
pub use error::BenchError;
pub use experiments::{run_experiment, Outcome};
