//! Simulation and batch-screening driver for the sliding-window periodicity
//! test.
//!
//! [`run_plan`] reproduces the detection tables (Tds against GLS under
//! additive and multiplicative noise) from a seeded [`ExperimentPlan`];
//! [`run_real_data`] screens recorded signals with random delays.

pub mod error;
pub mod plan;
pub mod real;
pub mod run;

pub use error::{HarnessError, Result};
pub use plan::{ExperimentPlan, Method, NoiseCell};
pub use real::{run_real_data, FileVerdict, RealDataConfig};
pub use run::{run_plan, run_plan_with, DetectionReport, RunOptions};
