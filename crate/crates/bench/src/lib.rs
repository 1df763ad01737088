//! Benchmark harness for the `mfmg` solvers: configurations, presets,
//! the Gaussian test problem, convergence studies, partition metric sweeps
//! and CSV/JSON output.

pub mod config;
pub mod convergence;
pub mod error;
pub mod metrics;
pub mod output;
pub mod presets;
pub mod problem;
pub mod run;

pub use config::{BenchmarkConfig, Case, Precision};
pub use error::{BenchError, Result};
pub use run::{run_benchmark, ResultRow, RunOutcome};
