//! Benchmark harness for `rtdec-core`: problem files, run configuration,
//! Monte Carlo trials, cutoff curves and CSV/JSON output.

pub mod config;
pub mod curve;
pub mod harness;
pub mod io;
pub mod output;
pub mod resources;

pub use config::RunConfig;
pub use harness::{Harness, TrialRecord};
