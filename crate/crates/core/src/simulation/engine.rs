//! Monte Carlo driver. Replicates run in parallel and are collected in index
//! order, so reports do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::comparators::{dmvmr_estimate, mvmr_estimate, oracle_dmvmr, oracle_magic, two_step_estimate, DirectPair, TwoStepEstimate};
use crate::estimators::magic::{magic_estimate, plug_in_estimate, MediationEstimate};
use crate::estimators::report::{EstimatorReport, Method, Parameter};
use crate::rng::{mix64, replicate_seed};
use crate::selection::{build_bc_panel, hard_select, select_instruments, HardSelection, SelectionConfig};
use crate::simulation::config::{Dgp, SimConfig};
use crate::simulation::dgp::{generate_observed, generate_observed_subset, generate_truth};
use crate::simulation::metrics::{summarize, Draw, SimReport};

pub const ORACLE_MAGIC: &str = "oracle-magic";
pub const ORACLE_DMVMR: &str = "oracle-dmvmr";

/// Pseudo-noise seed of replicate `rep`, decoupled from the data streams.
pub fn selection_seed(master: u64, rep: u64) -> u64 {
    mix64(replicate_seed(master, rep) ^ 0x5E1E_C710_0000_0001)
}

/// Estimates from one replicate; `None` where the estimator failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub rep: u64,
    pub magic: Option<MediationEstimate>,
    pub plug_in: Option<MediationEstimate>,
    pub mvmr: Option<DirectPair>,
    pub dmvmr: Option<DirectPair>,
    pub two_step: Option<TwoStepEstimate>,
    /// (method, error code) for every failure.
    pub failures: Vec<(Method, &'static str)>,
}

impl ReplicateOutcome {
    pub fn reports(&self) -> Vec<EstimatorReport> {
        let mut out = Vec::new();
        if let Some(e) = &self.magic {
            out.push(EstimatorReport::from_magic(Method::Magic, e));
        }
        if let Some(e) = &self.plug_in {
            out.push(EstimatorReport::from_magic(Method::PlugIn, e));
        }
        if let Some(e) = &self.mvmr {
            out.push(EstimatorReport::from_pair(Method::Mvmr, e, 0, 0));
        }
        if let Some(e) = &self.dmvmr {
            out.push(EstimatorReport::from_pair(Method::Dmvmr, e, 0, 0));
        }
        if let Some(e) = &self.two_step {
            out.push(EstimatorReport::from_two_step(e));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub rep: u64,
    pub magic: Option<DirectPair>,
    pub dmvmr: Option<DirectPair>,
}

fn keep<T>(r: Result<T>, method: Method, failures: &mut Vec<(Method, &'static str)>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            failures.push((method, e.code()));
            None
        }
    }
}

/// Runs every estimator on replicate `rep`.
pub fn run_replicate(cfg: &SimConfig, rep: u64) -> Result<ReplicateOutcome> {
    if cfg.dgp == Dgp::OracleSplit {
        return Err(Error::Config("ORACLE_SPLIT designs run through the oracle bench".into()));
    }
    let truth = generate_truth(cfg, rep)?;
    let panel = generate_observed(&truth, cfg, rep);
    let mut failures = Vec::new();

    let sel_cfg = SelectionConfig::new(cfg.lambda_magic, cfg.eta, selection_seed(cfg.seed, rep))?;
    let sel = select_instruments(&panel, &sel_cfg)?;
    // SNPs outside S_x ∪ S_m add nothing to any MAGIC or plug-in sum
    let union = sel.union_indices();
    let sub_panel = panel.subset(&union);
    let sub_sel = sel.subset(&union);
    let bc = build_bc_panel(&sub_panel, &sub_sel)?;
    let magic = keep(magic_estimate(&sub_panel, &bc, &sub_sel), Method::Magic, &mut failures);
    let plug_in = keep(plug_in_estimate(&sub_panel, &bc, &sub_sel), Method::PlugIn, &mut failures);

    let hard = hard_select(&panel, cfg.lambda_hard)?;
    let mvmr = keep(mvmr_estimate(&panel, &hard), Method::Mvmr, &mut failures);
    let dmvmr = keep(dmvmr_estimate(&panel, &hard), Method::Dmvmr, &mut failures);
    let two_step = keep(two_step_estimate(&panel, &hard), Method::TwoStep, &mut failures);

    Ok(ReplicateOutcome {
        rep,
        magic,
        plug_in,
        mvmr,
        dmvmr,
        two_step,
        failures,
    })
}

pub fn run_replicates(cfg: &SimConfig) -> Result<Vec<ReplicateOutcome>> {
    cfg.validate()?;
    (0..cfg.reps as u64).into_par_iter().map(|rep| run_replicate(cfg, rep)).collect()
}

fn truth_of(cfg: &SimConfig, parameter: Parameter) -> f64 {
    match parameter {
        Parameter::Theta => cfg.theta,
        Parameter::TauY => cfg.tau_y,
        Parameter::TauX => cfg.tau_x,
        Parameter::Tau => cfg.tau_x * cfg.tau_y,
    }
}

fn report_header(cfg: &SimConfig) -> SimReport {
    SimReport {
        dgp: cfg.dgp.name().to_string(),
        reps: cfg.reps,
        seed: cfg.seed,
        theta: cfg.theta,
        tau_y: cfg.tau_y,
        tau_x: cfg.tau_x,
        rows: Vec::new(),
    }
}

/// Aggregates per-replicate outcomes into power, coverage, bias and MCSD.
pub fn summarize_outcomes(cfg: &SimConfig, outcomes: &[ReplicateOutcome]) -> SimReport {
    let params = [Parameter::Theta, Parameter::TauY, Parameter::TauX, Parameter::Tau];
    let mut report = report_header(cfg);
    let per_rep: Vec<Vec<EstimatorReport>> = outcomes.iter().map(|o| o.reports()).collect();
    for method in Method::ALL {
        for parameter in params {
            let draws: Vec<Draw> = per_rep
                .iter()
                .flat_map(|reports| reports.iter().filter(|r| r.method == method))
                .filter_map(|r| r.row(parameter))
                .map(|row| Draw {
                    estimate: row.estimate,
                    std_error: row.std_error,
                })
                .collect();
            let defined = per_rep
                .iter()
                .flatten()
                .any(|r| r.method == method && r.row(parameter).is_some());
            if defined || draws.is_empty() && method_defines(method, parameter) {
                report.rows.push(summarize(method.tag(), parameter, truth_of(cfg, parameter), &draws));
            }
        }
    }
    report
}

/// Whether a method reports a parameter at all.
fn method_defines(method: Method, parameter: Parameter) -> bool {
    match method {
        Method::Magic | Method::PlugIn => true,
        Method::Mvmr => parameter != Parameter::TauX,
        Method::Dmvmr => matches!(parameter, Parameter::Theta | Parameter::TauY),
        Method::TwoStep => parameter != Parameter::Theta,
    }
}

pub fn run_monte_carlo(cfg: &SimConfig) -> Result<SimReport> {
    let outcomes = run_replicates(cfg)?;
    Ok(summarize_outcomes(cfg, &outcomes))
}

/// Oracle MAGIC and oracle DMVMR on the true sets of replicate `rep`. Only
/// SNPs in S*_x ∪ S*_m are observed, since no other SNP enters either system.
pub fn run_oracle_replicate(cfg: &SimConfig, rep: u64) -> Result<OracleOutcome> {
    let truth = generate_truth(cfg, rep)?;
    let union: Vec<usize> = (0..truth.len()).filter(|&j| truth.in_sx_star[j] || truth.in_sm_star[j]).collect();
    let panel = generate_observed_subset(&truth, cfg, rep, Some(&union));
    let sets = HardSelection::from_flags(
        union.iter().map(|&j| truth.in_sx_star[j]).collect(),
        union.iter().map(|&j| truth.in_sm_star[j]).collect(),
    );
    Ok(OracleOutcome {
        rep,
        magic: oracle_magic(&panel, &sets).ok(),
        dmvmr: oracle_dmvmr(&panel, &sets).ok(),
    })
}

pub fn run_oracle_replicates(cfg: &SimConfig) -> Result<Vec<OracleOutcome>> {
    cfg.validate()?;
    if cfg.dgp != Dgp::OracleSplit {
        return Err(Error::Config(format!("oracle bench requires dgp = ORACLE_SPLIT, got {}", cfg.dgp.name())));
    }
    (0..cfg.reps as u64).into_par_iter().map(|rep| run_oracle_replicate(cfg, rep)).collect()
}

/// MCSD table of θ̂ and τ̂_Y for oracle MAGIC and oracle DMVMR.
pub fn oracle_efficiency_bench(cfg: &SimConfig) -> Result<SimReport> {
    let outcomes = run_oracle_replicates(cfg)?;
    let mut report = report_header(cfg);
    for (tag, pick) in [
        (ORACLE_MAGIC, (|o: &OracleOutcome| o.magic.clone()) as fn(&OracleOutcome) -> Option<DirectPair>),
        (ORACLE_DMVMR, |o: &OracleOutcome| o.dmvmr.clone()),
    ] {
        let ests: Vec<DirectPair> = outcomes.iter().filter_map(pick).collect();
        for parameter in [Parameter::Theta, Parameter::TauY] {
            let draws: Vec<Draw> = ests
                .iter()
                .map(|e| Draw {
                    estimate: if parameter == Parameter::Theta { e.theta_hat } else { e.tau_y_hat },
                    std_error: None,
                })
                .collect();
            report.rows.push(summarize(tag, parameter, truth_of(cfg, parameter), &draws));
        }
    }
    Ok(report)
}
