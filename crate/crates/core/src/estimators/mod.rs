//! Point estimators, covariance estimation and reporting.

pub mod comparators;
pub mod linalg;
pub mod magic;
pub mod report;

pub use crate::panel::HarmonizedPanel;
pub use comparators::{dmvmr_estimate, mvmr_estimate, oracle_dmvmr, oracle_magic, two_step_estimate, DirectPair, TwoStepEstimate};
pub use magic::{covariance_estimate, delta_method_variance, magic_estimate, plug_in_estimate, DirectEffects, MediationEstimate};
pub use report::{bh_adjust, EstimatorReport, Method, Parameter, ReportRow};
