use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::comparators::{DirectPair, TwoStepEstimate};
use crate::estimators::magic::MediationEstimate;
use crate::normal::std_normal_sf;

/// Two-sided 97.5% normal quantile used for confidence intervals.
pub const Z_975: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Magic,
    PlugIn,
    Mvmr,
    Dmvmr,
    TwoStep,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Magic, Method::PlugIn, Method::Mvmr, Method::Dmvmr, Method::TwoStep];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Magic => "magic",
            Method::PlugIn => "plugin",
            Method::Mvmr => "mvmr",
            Method::Dmvmr => "dmvmr",
            Method::TwoStep => "twostep",
        }
    }

    /// Case-insensitive; `plug-in`, `two_step` and similar spellings are accepted.
    pub fn parse(s: &str) -> Result<Method> {
        let key: String = s.trim().chars().filter(|c| !matches!(c, '-' | '_')).collect();
        Method::ALL
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(&key))
            .ok_or_else(|| {
                let valid: Vec<_> = Method::ALL.iter().map(|m| m.tag()).collect();
                Error::InvalidInput(format!("unknown method '{s}'; expected one of {}", valid.join(", ")))
            })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Theta,
    TauY,
    TauX,
    Tau,
}

impl Parameter {
    pub fn tag(self) -> &'static str {
        match self {
            Parameter::Theta => "theta",
            Parameter::TauY => "tau_y",
            Parameter::TauX => "tau_x",
            Parameter::Tau => "tau",
        }
    }
}

/// One parameter's estimate with normal-theory inference when a standard
/// error exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub parameter: Parameter,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub z_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl ReportRow {
    pub fn new(parameter: Parameter, estimate: f64, std_error: Option<f64>) -> Self {
        let se = std_error.filter(|s| s.is_finite() && *s > 0.0);
        let z = se.map(|s| estimate / s);
        ReportRow {
            parameter,
            estimate,
            std_error: se,
            z_stat: z,
            p_value: z.map(two_sided_p),
            ci_low: se.map(|s| estimate - Z_975 * s),
            ci_high: se.map(|s| estimate + Z_975 * s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub method: Method,
    pub rows: Vec<ReportRow>,
    pub n_sx: usize,
    pub n_sm: usize,
}

impl EstimatorReport {
    pub fn row(&self, parameter: Parameter) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.parameter == parameter)
    }

    pub fn from_magic(method: Method, est: &MediationEstimate) -> Self {
        let se = est.std_errors();
        let pick = |i: usize| se.map(|s| s[i]);
        EstimatorReport {
            method,
            rows: vec![
                ReportRow::new(Parameter::Theta, est.theta_hat, pick(0)),
                ReportRow::new(Parameter::TauY, est.tau_y_hat, pick(1)),
                ReportRow::new(Parameter::TauX, est.tau_x_hat, pick(2)),
                ReportRow::new(Parameter::Tau, est.tau_hat, pick(3)),
            ],
            n_sx: est.n_sx,
            n_sm: est.n_sm,
        }
    }

    pub fn from_pair(method: Method, est: &DirectPair, n_sx: usize, n_sm: usize) -> Self {
        let mut rows = vec![
            ReportRow::new(Parameter::Theta, est.theta_hat, est.se_theta()),
            ReportRow::new(Parameter::TauY, est.tau_y_hat, est.se_tau_y()),
        ];
        if let Some(tau) = est.tau_hat {
            rows.push(ReportRow::new(Parameter::Tau, tau, None));
        }
        EstimatorReport { method, rows, n_sx, n_sm }
    }

    pub fn from_two_step(est: &TwoStepEstimate) -> Self {
        EstimatorReport {
            method: Method::TwoStep,
            rows: vec![
                ReportRow::new(Parameter::TauY, est.tau_y_hat, Some(est.se_tau_y)),
                ReportRow::new(Parameter::TauX, est.tau_x_hat, Some(est.se_tau_x)),
                ReportRow::new(Parameter::Tau, est.tau_hat, Some(est.var_tau.max(0.0).sqrt())),
            ],
            n_sx: est.n_first,
            n_sm: est.n_second,
        }
    }
}

/// 2(1 − Φ(|z|)).
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * std_normal_sf(z.abs())).min(1.0)
}

/// Benjamini-Hochberg step-up adjusted p-values, returned in input order.
pub fn bh_adjust(pvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!("p-values must lie in [0, 1], got {bad}")));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        // m/k ≥ 1 exactly in floating point, so the product never rounds below p
        running = running.min(pvalues[i] * (m as f64 / (rank + 1) as f64));
        out[i] = running;
    }
    Ok(out)
}
