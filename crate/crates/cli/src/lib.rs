//! Experiment driver for the nonsmooth multiobjective descent solver.
//!
//! A run batch is described by an [`ExperimentConfig`], read from a TOML
//! file and/or command-line flags, and executed by [`run_experiment`].

pub mod args;
pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, FileConfig, ProblemSpec, Starts};
pub use experiment::{run_experiment, Experiment, FieldData, RunResult, RunSummary};
