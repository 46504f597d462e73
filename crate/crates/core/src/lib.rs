//! Mediation analysis with GWAS summary statistics: rerandomized instrument
//! selection, selection-bias correction, the MAGIC estimator and its
//! comparators, a simulation harness and GWAS file handling.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod io;
pub mod normal;
pub mod panel;
pub mod rng;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
