use serde::Serialize;

use crate::estimators::report::{Parameter, Z_975};

/// One successful estimate and its standard error, if the method has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub estimate: f64,
    pub std_error: Option<f64>,
}

/// Operating characteristics of one estimator for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub method: String,
    pub parameter: Parameter,
    pub truth: f64,
    /// Replicates where the estimator returned a value.
    pub n_effective: usize,
    pub mean: f64,
    pub bias: f64,
    /// Sample SD of the estimates; undefined for fewer than two replicates.
    pub mcsd: Option<f64>,
    /// Rejection rate of the 5% two-sided test of a zero effect.
    pub power: Option<f64>,
    /// Share of 95% intervals containing the truth.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub dgp: String,
    pub reps: usize,
    pub seed: u64,
    pub theta: f64,
    pub tau_y: f64,
    pub tau_x: f64,
    pub rows: Vec<SimRow>,
}

impl SimReport {
    pub fn row(&self, method: &str, parameter: Parameter) -> Option<&SimRow> {
        self.rows.iter().find(|r| r.method == method && r.parameter == parameter)
    }
}

pub fn rejects(d: &Draw) -> Option<bool> {
    d.std_error.map(|s| d.estimate.abs() / s > Z_975)
}

pub fn covers(d: &Draw, truth: f64) -> Option<bool> {
    d.std_error.map(|s| (d.estimate - truth).abs() <= Z_975 * s)
}

fn rate(flags: impl Iterator<Item = Option<bool>>) -> Option<f64> {
    let mut n = 0usize;
    let mut hits = 0usize;
    for f in flags {
        let f = f?;
        n += 1;
        hits += f as usize;
    }
    (n > 0).then(|| hits as f64 / n as f64)
}

/// Sample mean and (n − 1)-denominator SD, accumulated in input order.
pub fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, Some((ss / (n - 1) as f64).sqrt()))
}

/// Approximate Monte Carlo SE of a sample SD under normality.
pub fn sd_standard_error(sd: f64, n: usize) -> f64 {
    sd / (2.0 * (n as f64 - 1.0)).sqrt()
}

pub fn summarize(method: &str, parameter: Parameter, truth: f64, draws: &[Draw]) -> SimRow {
    let estimates: Vec<f64> = draws.iter().map(|d| d.estimate).collect();
    let (mean, mcsd) = mean_sd(&estimates);
    SimRow {
        method: method.to_string(),
        parameter,
        truth,
        n_effective: draws.len(),
        mean,
        bias: mean - truth,
        mcsd,
        power: rate(draws.iter().map(rejects)),
        coverage: rate(draws.iter().map(|d| covers(d, truth))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_match_scalar_reference() {
        let draws = [
            Draw { estimate: 0.25, std_error: Some(0.1) },
            Draw { estimate: 0.05, std_error: Some(0.1) },
            Draw { estimate: 0.5, std_error: Some(0.1) },
            Draw { estimate: -0.01, std_error: Some(0.2) },
        ];
        let row = summarize("magic", Parameter::Theta, 0.2, &draws);
        // rejections: 0.25/0.1 and 0.5/0.1 exceed 1.96
        assert_eq!(row.power, Some(0.5));
        // covered: 0.25, 0.05 (|−0.15| ≤ 0.196), −0.01 (|−0.21| ≤ 0.392)
        assert_eq!(row.coverage, Some(0.75));
        assert!((row.mean - 0.1975).abs() < 1e-15);
        assert!((row.bias + 0.0025).abs() < 1e-15);
        let m = 0.1975;
        let ss: f64 = [0.25f64, 0.05, 0.5, -0.01].iter().map(|v| (v - m) * (v - m)).sum();
        assert!((row.mcsd.unwrap() - (ss / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_replicate_has_no_mcsd() {
        let row = summarize("mvmr", Parameter::Tau, 0.12, &[Draw { estimate: 0.1, std_error: None }]);
        assert_eq!(row.mcsd, None);
        assert_eq!(row.power, None);
        assert_eq!(row.coverage, None);
        assert_eq!(row.n_effective, 1);
    }

    #[test]
    fn empty_draws() {
        let row = summarize("dmvmr", Parameter::Theta, 0.2, &[]);
        assert_eq!(row.n_effective, 0);
        assert!(row.mean.is_nan());
    }
}
