//! Data-generating processes, the Monte Carlo engine and metric aggregation.

pub mod config;
pub mod dgp;
pub mod engine;
pub mod metrics;

pub use config::{Dgp, SimConfig};
pub use dgp::{generate_observed, generate_truth, TruthPanel};
pub use engine::{oracle_efficiency_bench, run_monte_carlo, run_oracle_replicates, run_replicates, ReplicateOutcome};
pub use metrics::{SimReport, SimRow};
