//! One-shot analysis of a harmonized panel: select, bias-correct, estimate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::comparators::{dmvmr_estimate, mvmr_estimate, two_step_estimate};
use crate::estimators::magic::{magic_estimate, plug_in_estimate};
use crate::estimators::report::{bh_adjust, EstimatorReport, Method};
use crate::normal::two_sided_cutoff;
use crate::panel::HarmonizedPanel;
use crate::selection::{build_bc_panel, hard_select, select_instruments, SelectionConfig, DEFAULT_ETA, DEFAULT_HARD_LAMBDA, DEFAULT_LAMBDA};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Lambda(f64),
    PValue(f64),
}

impl Threshold {
    pub fn lambda(self) -> Result<f64> {
        match self {
            Threshold::Lambda(l) => Ok(l),
            Threshold::PValue(p) => two_sided_cutoff(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Cutoff for the rerandomized selection used by MAGIC and plug-in.
    pub threshold: Threshold,
    pub eta: f64,
    pub seed: u64,
    /// Hard-threshold cutoff for MVMR, DMVMR and two-step.
    pub hard_lambda: f64,
    pub methods: Vec<Method>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold: Threshold::Lambda(DEFAULT_LAMBDA),
            eta: DEFAULT_ETA,
            seed: 0,
            hard_lambda: DEFAULT_HARD_LAMBDA,
            methods: Method::ALL.to_vec(),
        }
    }
}

/// Flat report row; optional fields are omitted when the method has no
/// standard error for the parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub method: Method,
    pub parameter: &'static str,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_bh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisOutput {
    pub n_snps: usize,
    pub lambda: f64,
    pub eta: f64,
    pub seed: u64,
    pub hard_lambda: f64,
    pub n_sx: usize,
    pub n_sm: usize,
    pub n_sx_hard: usize,
    pub n_sm_hard: usize,
    /// Count of SNPs whose corrected variance estimate came out negative.
    pub negative_varsigma: (usize, usize),
    pub rows: Vec<OutputRow>,
    #[serde(skip)]
    pub reports: Vec<EstimatorReport>,
}

fn flatten(reports: &[EstimatorReport]) -> Result<Vec<OutputRow>> {
    let mut rows: Vec<OutputRow> = reports
        .iter()
        .flat_map(|r| {
            r.rows.iter().map(move |row| OutputRow {
                method: r.method,
                parameter: row.parameter.tag(),
                estimate: row.estimate,
                std_error: row.std_error,
                z: row.z_stat,
                p: row.p_value,
                p_bh: None,
                ci_low: row.ci_low,
                ci_high: row.ci_high,
            })
        })
        .collect();
    // BH runs over every reported p-value of the request.
    let tested: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].p.is_some()).collect();
    let p: Vec<f64> = tested.iter().map(|&i| rows[i].p.expect("filtered")).collect();
    for (i, q) in tested.into_iter().zip(bh_adjust(&p)?) {
        rows[i].p_bh = Some(q);
    }
    Ok(rows)
}

/// Runs every requested method; the first estimator failure aborts.
pub fn run_analysis(panel: &HarmonizedPanel, cfg: &AnalysisConfig) -> Result<AnalysisOutput> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidInput("method set is empty".into()));
    }
    panel.validate()?;
    let lambda = cfg.threshold.lambda()?;
    let sel_cfg = SelectionConfig::new(lambda, cfg.eta, cfg.seed)?;
    let sel = select_instruments(panel, &sel_cfg)?;
    let bc = build_bc_panel(panel, &sel)?;
    let hard = hard_select(panel, cfg.hard_lambda)?;
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count();

    let mut reports = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let (hx, hm) = (count(&hard.in_sx), count(&hard.in_sm));
        let report = match method {
            Method::Magic => EstimatorReport::from_magic(method, &magic_estimate(panel, &bc, &sel)?),
            Method::PlugIn => EstimatorReport::from_magic(method, &plug_in_estimate(panel, &bc, &sel)?),
            Method::Mvmr => EstimatorReport::from_pair(method, &mvmr_estimate(panel, &hard)?, hx, hm),
            Method::Dmvmr => EstimatorReport::from_pair(method, &dmvmr_estimate(panel, &hard)?, hx, hm),
            Method::TwoStep => EstimatorReport::from_two_step(&two_step_estimate(panel, &hard)?),
        };
        reports.push(report);
    }
    Ok(AnalysisOutput {
        n_snps: panel.len(),
        lambda,
        eta: cfg.eta,
        seed: cfg.seed,
        hard_lambda: cfg.hard_lambda,
        n_sx: sel.n_sx(),
        n_sm: sel.n_sm(),
        n_sx_hard: count(&hard.in_sx),
        n_sm_hard: count(&hard.in_sm),
        negative_varsigma: bc.negative_varsigma_counts(),
        rows: flatten(&reports)?,
        reports,
    })
}
